#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "icgtm/parallel.hpp"
#include "icgtm/types.hpp"

// Pairwise compatibility payoffs. Two correspondences score high when each
// one's local affine frame projects the other's keypoint close to that
// other's match (geometric term) and both pass the ratio test convincingly
// (descriptive term). A descriptor-distance variant replaces the ratio term
// for detectors whose second-nearest statistics are unreliable.

namespace icgtm {

enum class PayoffMode {
  kGeometric,            // geometric term only
  kRatioTest,            // ratio-test term only
  kDescriptorDistance,   // matched-descriptor-distance term only
  kRatioPlusGeometric,   // geometric + ratio-test (the default fusion)
};

// How a correspondence's frame extrapolates nearby points. The offset model
// anchors the frame at the keypoint pair, so a correspondence always projects
// its own keypoint onto its own match; the raw model applies the homogeneous
// matrix [[A, k],[0,1]] to [p; 1] directly and is kept for comparison.
enum class AffineModel { kOffset, kRaw };

struct PayoffParams {
  double sigma = 10.0;  // px, geometric falloff
  double alpha = 0.5;   // ratio-test falloff
  double beta = 0.0;    // descriptor-distance falloff; <= 0: derive from data
  PayoffMode mode = PayoffMode::kRatioPlusGeometric;
  AffineModel affine_model = AffineModel::kOffset;
};

struct PayoffMatrix {
  int n = 0;
  std::vector<double> values;  // row-major n*n, symmetric, zero diagonal
  std::vector<int> indices;    // positions of the covered correspondences

  double at(int i, int j) const {
    return values[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) +
                  static_cast<std::size_t>(j)];
  }
  double& at(int i, int j) {
    return values[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) +
                  static_cast<std::size_t>(j)];
  }
};

inline Eigen::Vector2d rho(const Eigen::Vector3d& v) {
  return {v.x() / v.z(), v.y() / v.z()};
}

inline Eigen::Vector2d affine_project(const Correspondence& source,
                                      const Eigen::Vector2d& point,
                                      AffineModel model = AffineModel::kOffset) {
  if (model == AffineModel::kOffset)
    return source.left.affine * (point - source.left.position) +
           source.right.position;
  return source.left.affine * point + source.left.position;
}

inline double geometric_payoff(const Correspondence& ci, const Correspondence& cj,
                               const PayoffParams& params) {
  if (!(params.sigma > 0.0))
    throw validation_error("geometric payoff needs sigma > 0");
  const Eigen::Vector2d ti_ki = affine_project(ci, ci.left.position, params.affine_model);
  const Eigen::Vector2d tj_ki = affine_project(cj, ci.left.position, params.affine_model);
  const Eigen::Vector2d ti_kj = affine_project(ci, cj.left.position, params.affine_model);
  const Eigen::Vector2d tj_kj = affine_project(cj, cj.left.position, params.affine_model);
  const double d = (ti_ki - tj_ki).norm() + (ti_kj - tj_kj).norm();
  if (!std::isfinite(d)) return 0.0;
  return std::exp(-d / params.sigma);
}

// Nearest-to-second-nearest distance ratio of item i's left descriptor
// against every right descriptor in the set. A zero second-nearest distance
// means duplicate perfect matches and scores the worst ratio, 1.
inline double ratio_score(const CorrespondenceSet& set, std::size_t i) {
  if (set.items.size() < 2)
    throw validation_error("ratio test needs at least two right descriptors");
  const Descriptor& f = set.items[i].left_desc;
  double d1 = std::numeric_limits<double>::infinity();
  double d2 = std::numeric_limits<double>::infinity();
  for (const Correspondence& c : set.items) {
    const double d = f.distance(c.right_desc);
    if (d < d1) {
      d2 = d1;
      d1 = d;
    } else if (d < d2) {
      d2 = d;
    }
  }
  if (d2 == 0.0) return 1.0;
  return d1 / d2;
}

// Fills in missing ratio fields; already-populated ratios are kept.
inline CorrespondenceSet populate_ratios(CorrespondenceSet set) {
  std::vector<int> missing;
  for (std::size_t i = 0; i < set.items.size(); ++i)
    if (!set.items[i].has_ratio()) missing.push_back(static_cast<int>(i));
  if (missing.empty()) return set;
  if (set.items.size() < 2)
    throw validation_error("ratio test needs at least two right descriptors");
  parallel_for(static_cast<int>(missing.size()), [&](int m) {
    const std::size_t i = static_cast<std::size_t>(missing[static_cast<std::size_t>(m)]);
    set.items[i].ratio = ratio_score(set, i);
  });
  return set;
}

inline double descriptive_payoff(double ri, double rj, const PayoffParams& params) {
  if (!(params.alpha > 0.0))
    throw validation_error("descriptive payoff needs alpha > 0");
  return std::exp(-std::max(ri, rj) / params.alpha);
}

inline double des_payoff(const Correspondence& ci, const Correspondence& cj,
                         const PayoffParams& params) {
  if (!(params.beta > 0.0))
    throw validation_error("descriptor-distance payoff needs beta > 0");
  const double di = ci.left_desc.distance(ci.right_desc);
  const double dj = cj.left_desc.distance(cj.right_desc);
  return std::exp(-std::max(di, dj) / params.beta);
}

inline double pair_payoff(const Correspondence& ci, const Correspondence& cj,
                          const PayoffParams& params) {
  switch (params.mode) {
    case PayoffMode::kGeometric:
      return geometric_payoff(ci, cj, params);
    case PayoffMode::kDescriptorDistance:
      return des_payoff(ci, cj, params);
    case PayoffMode::kRatioTest:
    case PayoffMode::kRatioPlusGeometric: {
      if (!ci.has_ratio() || !cj.has_ratio())
        throw validation_error("payoff mode needs populated ratio scores");
      const double desc = descriptive_payoff(ci.ratio, cj.ratio, params);
      if (params.mode == PayoffMode::kRatioTest) return desc;
      return geometric_payoff(ci, cj, params) + desc;
    }
  }
  throw validation_error("unknown payoff mode");
}

// Default descriptor-distance scale: half the median matched-descriptor
// distance, so a typical matched pair scores around exp(-2).
inline double default_beta(const CorrespondenceSet& set) {
  if (set.items.empty()) return 1.0;
  std::vector<double> dists;
  dists.reserve(set.items.size());
  for (const Correspondence& c : set.items)
    dists.push_back(c.left_desc.distance(c.right_desc));
  const std::size_t mid = dists.size() / 2;
  std::nth_element(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(mid),
                   dists.end());
  const double beta = 0.5 * dists[mid];
  return beta > 0.0 ? beta : 1.0;
}

inline PayoffMatrix build_payoff_matrix(const CorrespondenceSet& set,
                                        const std::vector<int>& members,
                                        const PayoffParams& params) {
  if (members.empty())
    throw validation_error("payoff matrix needs at least one member");
  PayoffMatrix m;
  m.n = static_cast<int>(members.size());
  m.values.assign(static_cast<std::size_t>(m.n) * static_cast<std::size_t>(m.n), 0.0);
  m.indices = members;
  parallel_for(m.n, [&](int i) {
    const Correspondence& ci = set.items[static_cast<std::size_t>(members[static_cast<std::size_t>(i)])];
    for (int j = i + 1; j < m.n; ++j) {
      const Correspondence& cj = set.items[static_cast<std::size_t>(members[static_cast<std::size_t>(j)])];
      const double v = pair_payoff(ci, cj, params);
      m.at(i, j) = v;
    }
  });
  // Mirror the upper triangle once the parallel fill is done.
  for (int i = 0; i < m.n; ++i)
    for (int j = i + 1; j < m.n; ++j) m.at(j, i) = m.at(i, j);
  return m;
}

}  // namespace icgtm
