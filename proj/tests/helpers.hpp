// Shared builders for test fixtures. Everything here is deterministic given
// the seed so failures reproduce exactly.
#pragma once

#include <random>
#include <vector>

#include "icgtm/icgtm.hpp"

namespace test {

inline icgtm::Descriptor make_desc(std::initializer_list<double> v) {
  icgtm::Descriptor d;
  d.values.assign(v.begin(), v.end());
  return d;
}

// A correspondence with identity frames and constant descriptors; positions
// are all the structure most tests need.
inline icgtm::Correspondence make_corr(int index, double xl, double yl,
                                       double xr, double yr) {
  icgtm::Correspondence c;
  c.index = index;
  c.left.position = {xl, yl};
  c.right.position = {xr, yr};
  c.left_desc = make_desc({0.0, 0.0});
  c.right_desc = make_desc({0.0, 0.0});
  return c;
}

inline icgtm::CorrespondenceSet make_set(int n, double span = 100.0) {
  icgtm::CorrespondenceSet set;
  set.left_size = {static_cast<int>(span), static_cast<int>(span)};
  set.right_size = set.left_size;
  for (int i = 0; i < n; ++i) {
    const double t = span * (i + 0.5) / n;
    set.items.push_back(make_corr(i, t, t * 0.5, t * 0.5, t));
  }
  return set;
}

// Correspondences following one planted affine map x -> A x + b exactly,
// with affine frames set to A on the left so geometric payoffs are high
// within the group. Positions stay inside [0, span).
inline icgtm::CorrespondenceSet make_consistent_set(
    int n, const Eigen::Matrix2d& a, const Eigen::Vector2d& b,
    double span = 200.0, unsigned seed = 1) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pos(span * 0.25, span * 0.45);
  icgtm::CorrespondenceSet set;
  set.left_size = {static_cast<int>(span), static_cast<int>(span)};
  set.right_size = set.left_size;
  for (int i = 0; i < n; ++i) {
    icgtm::Correspondence c;
    c.index = i;
    c.left.position = {pos(rng), pos(rng)};
    c.left.affine = a;
    c.right.position = a * c.left.position + b;
    c.right.affine = a.inverse();
    c.left_desc = make_desc({double(i), 1.0});
    c.right_desc = make_desc({double(i), 1.0});
    set.items.push_back(c);
  }
  return set;
}

inline icgtm::PayoffMatrix make_matrix(int n,
                                       const std::vector<double>& upper) {
  icgtm::PayoffMatrix m;
  m.n = n;
  m.values.assign(static_cast<std::size_t>(n) * n, 0.0);
  std::size_t at = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      m.at(i, j) = upper[at];
      m.at(j, i) = upper[at];
      ++at;
    }
  for (int i = 0; i < n; ++i) m.indices.push_back(i);
  return m;
}

inline icgtm::PayoffMatrix random_symmetric_matrix(std::mt19937_64& rng,
                                                   int n) {
  std::uniform_real_distribution<double> val(0.0, 2.0);
  icgtm::PayoffMatrix m;
  m.n = n;
  m.values.assign(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double v = val(rng);
      m.at(i, j) = v;
      m.at(j, i) = v;
    }
  for (int i = 0; i < n; ++i) m.indices.push_back(i);
  return m;
}

// Random projective matrix kept safely away from degeneracy: an invertible
// affine block plus a mild projective row.
inline Eigen::Matrix3d random_homography(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (;;) {
    Eigen::Matrix3d h;
    h << 1.0 + 0.4 * u(rng), 0.4 * u(rng), 40.0 * u(rng),
        0.4 * u(rng), 1.0 + 0.4 * u(rng), 40.0 * u(rng),
        1e-4 * u(rng), 1e-4 * u(rng), 1.0;
    if (std::abs(h.block<2, 2>(0, 0).determinant()) > 0.3) return h;
  }
}

}  // namespace test
