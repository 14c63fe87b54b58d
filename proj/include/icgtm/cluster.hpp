#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <vector>

#include "icgtm/homography.hpp"
#include "icgtm/parallel.hpp"
#include "icgtm/payoff.hpp"
#include "icgtm/types.hpp"

// Iterative clustering over the global candidate payoff matrix: the most
// compatible remaining pair anchors a cluster, compatible candidates join it,
// the cluster's rows and columns are retired, and a homography is fit per
// cluster. A final recovery pass relabels every initial correspondence by its
// closest transformation.

namespace icgtm {

struct ClusterConfig {
  int min_cluster_size = 4;      // a homography needs 4 supports
  double reproj_threshold = 5.0; // px, recovery inlier gate (strict <)
  int ransac_iters = 1000;
  double ransac_tol = 3.0;       // px, symmetric transfer consensus gate
  int max_outer_rounds = 20;
  bool single_endpoint = false;  // join via either anchor endpoint, not both
};

struct ConsistencyCluster {
  std::vector<int> members;  // positions into CorrespondenceSet::items
  Homography homography;
  int inlier_count = 0;
};

inline PayoffMatrix recompute_payoff_matrix(const CorrespondenceSet& set,
                                            const std::vector<int>& candidates,
                                            const PayoffParams& params) {
  return build_payoff_matrix(set, candidates, params);
}

// Midpoint of the extreme active payoffs; empty when the active set has no
// off-diagonal entries left, which terminates clustering.
inline std::optional<double> cluster_threshold(const PayoffMatrix& m,
                                               const std::vector<char>& removed) {
  double lo = 0.0, hi = 0.0;
  bool any = false;
  for (int i = 0; i < m.n; ++i) {
    if (removed[static_cast<std::size_t>(i)]) continue;
    for (int j = i + 1; j < m.n; ++j) {
      if (removed[static_cast<std::size_t>(j)]) continue;
      const double v = m.at(i, j);
      if (!any) {
        lo = hi = v;
        any = true;
      } else {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
  }
  if (!any) return std::nullopt;
  return (hi + lo) / 2.0;
}

struct ExtractedCluster {
  int anchor_a = 0;          // matrix-local positions, anchor_a < anchor_b
  int anchor_b = 0;
  std::vector<int> members;  // matrix-local positions, ascending, incl. anchors
};

// One extraction round. Picks the maximal active pair as the anchor (ties:
// lexicographically smallest), gathers candidates whose payoff to the anchor
// clears tau, and retires the members. Returns nullopt - terminating the
// outer loop - when no active pair remains, the best pair has payoff 0, or
// the gathered cluster is smaller than min_cluster_size.
inline std::optional<ExtractedCluster> extract_cluster(
    const PayoffMatrix& m, std::vector<char>& removed, const ClusterConfig& cfg) {
  int best_i = -1, best_j = -1;
  double best = 0.0;
  for (int i = 0; i < m.n; ++i) {
    if (removed[static_cast<std::size_t>(i)]) continue;
    for (int j = i + 1; j < m.n; ++j) {
      if (removed[static_cast<std::size_t>(j)]) continue;
      if (m.at(i, j) > best) {
        best = m.at(i, j);
        best_i = i;
        best_j = j;
      }
    }
  }
  if (best_i < 0) return std::nullopt;  // nothing active or all-zero payoffs

  const auto tau = cluster_threshold(m, removed);
  if (!tau) return std::nullopt;

  ExtractedCluster out;
  out.anchor_a = best_i;
  out.anchor_b = best_j;
  out.members.push_back(best_i);
  out.members.push_back(best_j);
  for (int k = 0; k < m.n; ++k) {
    if (k == best_i || k == best_j || removed[static_cast<std::size_t>(k)])
      continue;
    const bool near_a = m.at(best_i, k) > *tau;
    const bool near_b = m.at(best_j, k) > *tau;
    if (cfg.single_endpoint ? (near_a || near_b) : (near_a && near_b))
      out.members.push_back(k);
  }
  if (static_cast<int>(out.members.size()) < cfg.min_cluster_size)
    return std::nullopt;

  std::sort(out.members.begin(), out.members.end());
  for (int k : out.members) removed[static_cast<std::size_t>(k)] = 1;
  return out;
}

inline std::optional<Homography> estimate_homography(
    const CorrespondenceSet& set, const std::vector<int>& members,
    const ClusterConfig& cfg, std::uint64_t seed = 0) {
  std::vector<Eigen::Vector2d> left, right;
  left.reserve(members.size());
  right.reserve(members.size());
  for (int i : members) {
    left.push_back(set.items[static_cast<std::size_t>(i)].left.position);
    right.push_back(set.items[static_cast<std::size_t>(i)].right.position);
  }
  return ransac_homography(left, right, cfg.ransac_iters, cfg.ransac_tol, seed);
}

// Labels every initial correspondence with the cluster of smallest
// reprojection error when that error is strictly below the threshold, else
// outlier. Clusters whose recovered support drops below min_cluster_size are
// retired and the assignment repeats until stable, so the returned labeling
// is a fixed point of itself.
inline MatchResult recover_inliers(const CorrespondenceSet& set,
                                   const std::vector<ConsistencyCluster>& clusters,
                                   const ClusterConfig& cfg) {
  const int n = set.size();
  MatchResult res;
  res.indices.reserve(static_cast<std::size_t>(n));
  for (const Correspondence& c : set.items) res.indices.push_back(c.index);
  res.labels.assign(static_cast<std::size_t>(n), kOutlier);
  if (clusters.empty()) return res;

  const int k = static_cast<int>(clusters.size());
  std::vector<char> alive(static_cast<std::size_t>(k), 1);
  std::vector<int> counts(static_cast<std::size_t>(k), 0);
  while (true) {
    std::fill(counts.begin(), counts.end(), 0);
    parallel_for(n, [&](int j) {
      const Correspondence& c = set.items[static_cast<std::size_t>(j)];
      int best = kOutlier;
      double best_err = std::numeric_limits<double>::infinity();
      for (int i = 0; i < k; ++i) {
        if (!alive[static_cast<std::size_t>(i)]) continue;
        const double e = reprojection_error(clusters[static_cast<std::size_t>(i)].homography, c);
        if (e < best_err) {
          best_err = e;
          best = i;
        }
      }
      res.labels[static_cast<std::size_t>(j)] =
          best_err < cfg.reproj_threshold ? best : kOutlier;
    });
    for (int label : res.labels)
      if (label >= 0) ++counts[static_cast<std::size_t>(label)];
    bool dropped = false;
    for (int i = 0; i < k; ++i) {
      if (alive[static_cast<std::size_t>(i)] &&
          counts[static_cast<std::size_t>(i)] < cfg.min_cluster_size) {
        alive[static_cast<std::size_t>(i)] = 0;
        dropped = true;
      }
    }
    if (!dropped) break;
    if (std::none_of(alive.begin(), alive.end(), [](char a) { return a != 0; })) {
      std::fill(res.labels.begin(), res.labels.end(), kOutlier);
      return res;
    }
  }

  // Compact surviving clusters, keeping extraction order.
  std::vector<int> remap(static_cast<std::size_t>(k), kOutlier);
  for (int i = 0; i < k; ++i) {
    if (!alive[static_cast<std::size_t>(i)]) continue;
    remap[static_cast<std::size_t>(i)] = static_cast<int>(res.homographies.size());
    res.homographies.push_back(clusters[static_cast<std::size_t>(i)].homography);
  }
  for (int& label : res.labels)
    if (label >= 0) label = remap[static_cast<std::size_t>(label)];
  return res;
}

}  // namespace icgtm
