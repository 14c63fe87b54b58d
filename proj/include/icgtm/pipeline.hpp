#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <vector>

#include "icgtm/blocks.hpp"
#include "icgtm/cluster.hpp"
#include "icgtm/games.hpp"
#include "icgtm/payoff.hpp"
#include "icgtm/types.hpp"

// Full matching pipeline: block matching -> one local game per block pair ->
// iterative clustering over the surviving candidates -> reprojection
// recovery over the entire input.

namespace icgtm {

struct PipelineConfig {
  GridConfig grid;
  PayoffParams payoff;
  GameConfig game;
  ClusterConfig cluster;
  bool skip_clustering = false;  // stop after the games; labels survivors only
  std::uint64_t seed = 0;        // drives RANSAC sampling
};

namespace detail {

class StageClock {
 public:
  double lap_ms() {
    const auto now = std::chrono::steady_clock::now();
    const double ms =
        std::chrono::duration<double, std::milli>(now - last_).count();
    last_ = now;
    return ms;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

// A freshly fit cluster whose members already sit on an accepted homography
// (median reprojection error below the recovery gate) is the same
// transformation seen again; fold it into that cluster instead of emitting a
// duplicate.
inline int find_duplicate(const std::vector<ConsistencyCluster>& clusters,
                          const CorrespondenceSet& set,
                          const std::vector<int>& members, double threshold) {
  std::vector<double> errs(members.size());
  for (std::size_t e = 0; e < clusters.size(); ++e) {
    for (std::size_t i = 0; i < members.size(); ++i)
      errs[i] = reprojection_error(clusters[e].homography,
                                   set.items[static_cast<std::size_t>(members[i])]);
    const std::size_t mid = errs.size() / 2;
    std::nth_element(errs.begin(), errs.begin() + static_cast<std::ptrdiff_t>(mid),
                     errs.end());
    if (errs[mid] < threshold) return static_cast<int>(e);
  }
  return -1;
}

}  // namespace detail

inline MatchResult run_pipeline(const CorrespondenceSet& input,
                                const PipelineConfig& cfg) {
  const int n = input.size();
  MatchResult res;
  res.indices.reserve(static_cast<std::size_t>(n));
  for (const Correspondence& c : input.items) res.indices.push_back(c.index);
  res.labels.assign(static_cast<std::size_t>(n), kOutlier);
  if (n == 0) return res;

  // Resolve data-dependent parameters once, up front.
  PayoffParams params = cfg.payoff;
  const bool needs_ratios = params.mode == PayoffMode::kRatioTest ||
                            params.mode == PayoffMode::kRatioPlusGeometric;
  std::optional<CorrespondenceSet> owned;
  const CorrespondenceSet* set = &input;
  if (needs_ratios &&
      std::any_of(input.items.begin(), input.items.end(),
                  [](const Correspondence& c) { return !c.has_ratio(); })) {
    owned = populate_ratios(input);
    set = &*owned;
  }
  if (params.mode == PayoffMode::kDescriptorDistance && !(params.beta > 0.0))
    params.beta = default_beta(*set);

  detail::StageClock clock;
  const std::vector<BlockAssignment> assignments = assign_blocks(*set, cfg.grid);
  const std::vector<BlockPair> pairs = match_blocks(assignments, cfg.grid);
  res.diagnostics.timings.blocks_ms = clock.lap_ms();
  res.diagnostics.blocks_kept = static_cast<int>(pairs.size());

  const std::vector<int> survivors = play_all_games(pairs, *set, params, cfg.game);
  res.diagnostics.timings.games_ms = clock.lap_ms();
  res.diagnostics.game_survivors = static_cast<int>(survivors.size());

  if (cfg.skip_clustering) {
    for (int i : survivors) res.labels[static_cast<std::size_t>(i)] = kUnlabeled;
    res.diagnostics.recovered_inliers = static_cast<int>(survivors.size());
    return res;
  }
  if (survivors.empty()) return res;

  const PayoffMatrix mstar = recompute_payoff_matrix(*set, survivors, params);
  std::vector<char> removed(survivors.size(), 0);
  std::vector<ConsistencyCluster> clusters;
  for (int round = 0; round < cfg.cluster.max_outer_rounds; ++round) {
    const auto extracted = extract_cluster(mstar, removed, cfg.cluster);
    if (!extracted) break;
    std::vector<int> members;
    members.reserve(extracted->members.size());
    for (int local : extracted->members)
      members.push_back(survivors[static_cast<std::size_t>(local)]);
    const std::uint64_t round_seed =
        cfg.seed + static_cast<std::uint64_t>(round) * 0x9e3779b97f4a7c15ull;
    const auto fit = estimate_homography(*set, members, cfg.cluster, round_seed);
    if (!fit) continue;  // degenerate cluster, drop it
    const int dup = detail::find_duplicate(clusters, *set, members,
                                           cfg.cluster.reproj_threshold);
    if (dup >= 0) {
      // Refit on the union: keeping the first (often narrower) fit would
      // misjudge later batches of the same surface as new transformations.
      ConsistencyCluster& target = clusters[static_cast<std::size_t>(dup)];
      target.members.insert(target.members.end(), members.begin(), members.end());
      if (const auto refit =
              estimate_homography(*set, target.members, cfg.cluster, round_seed))
        target.homography = *refit;
    } else {
      clusters.push_back(
          {std::move(members), *fit, static_cast<int>(extracted->members.size())});
    }
  }
  res.diagnostics.timings.clustering_ms = clock.lap_ms();

  MatchResult recovered = recover_inliers(*set, clusters, cfg.cluster);
  res.diagnostics.timings.recovery_ms = clock.lap_ms();
  res.labels = std::move(recovered.labels);
  res.homographies = std::move(recovered.homographies);
  res.diagnostics.clusters_found = static_cast<int>(res.homographies.size());
  res.diagnostics.recovered_inliers = static_cast<int>(
      std::count_if(res.labels.begin(), res.labels.end(),
                    [](int label) { return label >= 0; }));
  return res;
}

}  // namespace icgtm
