#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "icgtm/parallel.hpp"
#include "icgtm/payoff.hpp"
#include "icgtm/types.hpp"

// Homography fitting: Hartley-normalized DLT plus a fixed-iteration RANSAC
// wrapper whose hypothesis stream is drawn up front from one seeded engine,
// so results are identical for any worker count.

namespace icgtm {

inline Eigen::Vector2d apply_homography(const Eigen::Matrix3d& h,
                                        const Eigen::Vector2d& p) {
  return rho(h * p.homogeneous());
}

// One-directional reprojection error in pixels; +inf when the projection
// degenerates.
inline double reprojection_error(const Eigen::Matrix3d& h,
                                 const Eigen::Vector2d& k,
                                 const Eigen::Vector2d& k_match) {
  const Eigen::Vector3d v = h * k.homogeneous();
  if (v.z() == 0.0) return std::numeric_limits<double>::infinity();
  const double e = (Eigen::Vector2d(v.x() / v.z(), v.y() / v.z()) - k_match).norm();
  return std::isfinite(e) ? e : std::numeric_limits<double>::infinity();
}

inline double reprojection_error(const Homography& h, const Correspondence& c) {
  return reprojection_error(h.h, c.left.position, c.right.position);
}

// d(projected) / d(p) of the map p -> rho(h [p; 1]).
inline Eigen::Matrix2d homography_jacobian(const Eigen::Matrix3d& h,
                                           const Eigen::Vector2d& p) {
  const double u = h(0, 0) * p.x() + h(0, 1) * p.y() + h(0, 2);
  const double v = h(1, 0) * p.x() + h(1, 1) * p.y() + h(1, 2);
  const double w = h(2, 0) * p.x() + h(2, 1) * p.y() + h(2, 2);
  const double w2 = w * w;
  Eigen::Matrix2d j;
  j(0, 0) = (h(0, 0) * w - u * h(2, 0)) / w2;
  j(0, 1) = (h(0, 1) * w - u * h(2, 1)) / w2;
  j(1, 0) = (h(1, 0) * w - v * h(2, 0)) / w2;
  j(1, 1) = (h(1, 1) * w - v * h(2, 1)) / w2;
  return j;
}

namespace detail {

// Similarity moving the centroid to the origin and the mean distance to
// sqrt(2); fails when all points coincide.
inline std::optional<Eigen::Matrix3d> hartley_normalization(
    const std::vector<Eigen::Vector2d>& pts) {
  Eigen::Vector2d mu = Eigen::Vector2d::Zero();
  for (const auto& p : pts) mu += p;
  mu /= static_cast<double>(pts.size());
  double mean_dist = 0.0;
  for (const auto& p : pts) mean_dist += (p - mu).norm();
  mean_dist /= static_cast<double>(pts.size());
  if (!(mean_dist > 0.0) || !std::isfinite(mean_dist)) return std::nullopt;
  const double s = std::sqrt(2.0) / mean_dist;
  Eigen::Matrix3d t;
  t << s, 0.0, -s * mu.x(), 0.0, s, -s * mu.y(), 0.0, 0.0, 1.0;
  return t;
}

inline bool three_collinear(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                            const Eigen::Vector2d& c) {
  const Eigen::Vector2d u = b - a;
  const Eigen::Vector2d v = c - a;
  const double cross = u.x() * v.y() - u.y() * v.x();
  return std::abs(cross) <= 1e-8 * u.norm() * v.norm();
}

inline bool quad_degenerate(const Eigen::Vector2d* p) {
  for (int skip = 0; skip < 4; ++skip) {
    const Eigen::Vector2d* t[3];
    int w = 0;
    for (int i = 0; i < 4; ++i)
      if (i != skip) t[w++] = &p[i];
    if (three_collinear(*t[0], *t[1], *t[2])) return true;
  }
  return false;
}

}  // namespace detail

// Least-squares homography from >= 4 point pairs via the normalized direct
// linear transform. Returns nullopt when the inputs collapse or the solution
// is not a finite, canonicalizable matrix.
inline std::optional<Homography> fit_homography_dlt(
    const std::vector<Eigen::Vector2d>& left,
    const std::vector<Eigen::Vector2d>& right) {
  const std::size_t n = left.size();
  if (n < 4 || right.size() != n) return std::nullopt;
  const auto tl = detail::hartley_normalization(left);
  const auto tr = detail::hartley_normalization(right);
  if (!tl || !tr) return std::nullopt;

  Eigen::MatrixXd a(2 * n, 9);
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector2d p = apply_homography(*tl, left[i]);
    const Eigen::Vector2d q = apply_homography(*tr, right[i]);
    const double x = p.x(), y = p.y(), u = q.x(), v = q.y();
    a.row(static_cast<Eigen::Index>(2 * i)) << -x, -y, -1.0, 0.0, 0.0, 0.0,
        u * x, u * y, u;
    a.row(static_cast<Eigen::Index>(2 * i + 1)) << 0.0, 0.0, 0.0, -x, -y, -1.0,
        v * x, v * y, v;
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const Eigen::VectorXd h = svd.matrixV().col(8);
  Eigen::Matrix3d hn;
  hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
  Eigen::Matrix3d out = tr->inverse() * hn * (*tl);
  if (!canonicalize(out)) return std::nullopt;
  return Homography{out};
}

// Fixed-iteration RANSAC: 4-point samples, symmetric transfer consensus
// (max of forward and backward reprojection error <= tol, inclusive), winner
// refit on its consensus set. Ties go to the earliest hypothesis. Returns
// nullopt when every sample is degenerate or no model gathers 4 supporters.
inline std::optional<Homography> ransac_homography(
    const std::vector<Eigen::Vector2d>& left,
    const std::vector<Eigen::Vector2d>& right, int iters, double tol,
    std::uint64_t seed) {
  const int n = static_cast<int>(left.size());
  if (n < 4 || right.size() != left.size() || iters < 1 || !(tol > 0.0))
    return std::nullopt;

  // Samples come from one sequential stream; evaluation parallelizes.
  std::mt19937_64 rng(seed);
  std::vector<std::array<int, 4>> samples(static_cast<std::size_t>(iters));
  for (auto& s : samples) {
    int got = 0;
    while (got < 4) {
      const int pick = static_cast<int>(rng() % static_cast<std::uint64_t>(n));
      bool dup = false;
      for (int k = 0; k < got; ++k) dup = dup || s[static_cast<std::size_t>(k)] == pick;
      if (!dup) s[static_cast<std::size_t>(got++)] = pick;
    }
  }

  std::vector<int> counts(static_cast<std::size_t>(iters), -1);
  std::vector<Eigen::Matrix3d> models(static_cast<std::size_t>(iters));
  parallel_for(iters, [&](int it) {
    const auto& s = samples[static_cast<std::size_t>(it)];
    Eigen::Vector2d lp[4], rp[4];
    for (int k = 0; k < 4; ++k) {
      lp[k] = left[static_cast<std::size_t>(s[static_cast<std::size_t>(k)])];
      rp[k] = right[static_cast<std::size_t>(s[static_cast<std::size_t>(k)])];
    }
    if (detail::quad_degenerate(lp) || detail::quad_degenerate(rp)) return;
    std::vector<Eigen::Vector2d> ls(lp, lp + 4), rs(rp, rp + 4);
    const auto fit = fit_homography_dlt(ls, rs);
    if (!fit) return;
    const Eigen::Matrix3d h = fit->h;
    const Eigen::Matrix3d hinv = h.inverse();
    int count = 0;
    for (int i = 0; i < n; ++i) {
      const double fwd = reprojection_error(h, left[static_cast<std::size_t>(i)],
                                            right[static_cast<std::size_t>(i)]);
      const double bwd = reprojection_error(hinv, right[static_cast<std::size_t>(i)],
                                            left[static_cast<std::size_t>(i)]);
      if (std::max(fwd, bwd) <= tol) ++count;
    }
    counts[static_cast<std::size_t>(it)] = count;
    models[static_cast<std::size_t>(it)] = h;
  });

  int best = -1;
  for (int it = 0; it < iters; ++it)
    if (counts[static_cast<std::size_t>(it)] >
        (best < 0 ? -1 : counts[static_cast<std::size_t>(best)]))
      best = it;
  if (best < 0 || counts[static_cast<std::size_t>(best)] < 4) return std::nullopt;

  const Eigen::Matrix3d h = models[static_cast<std::size_t>(best)];
  const Eigen::Matrix3d hinv = h.inverse();
  std::vector<Eigen::Vector2d> cl, cr;
  for (int i = 0; i < n; ++i) {
    const double fwd = reprojection_error(h, left[static_cast<std::size_t>(i)],
                                          right[static_cast<std::size_t>(i)]);
    const double bwd = reprojection_error(hinv, right[static_cast<std::size_t>(i)],
                                          left[static_cast<std::size_t>(i)]);
    if (std::max(fwd, bwd) <= tol) {
      cl.push_back(left[static_cast<std::size_t>(i)]);
      cr.push_back(right[static_cast<std::size_t>(i)]);
    }
  }
  if (const auto refit = fit_homography_dlt(cl, cr)) return refit;
  Eigen::Matrix3d out = h;
  if (!canonicalize(out)) return std::nullopt;
  return Homography{out};
}

}  // namespace icgtm
