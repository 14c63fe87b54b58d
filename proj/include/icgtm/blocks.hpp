#pragma once

#include <map>
#include <utility>
#include <vector>

#include "icgtm/types.hpp"

// Grid-based block matching: both images are cut into a rows x cols grid of
// equal integer-sized cells (the last row/column absorbs remainder pixels),
// each left cell is paired with the right cell receiving most of its
// correspondences, and sparse pairs are discarded. Only correspondences whose
// endpoints land in a kept pair take part in the local games.

namespace icgtm {

struct GridConfig {
  int rows = 5;
  int cols = 5;
  int min_count = 4;   // pairs with fewer members are dropped
  bool mutual_best = false;  // also require the left cell to be the right cell's best
};

struct BlockAssignment {
  int left_block = 0;
  int right_block = 0;
};

struct BlockPair {
  int left_block = 0;
  int right_block = 0;
  std::vector<int> members;  // positions into CorrespondenceSet::items, ascending
  int score = 0;             // = members.size()
};

namespace detail {

inline void check_grid(const GridConfig& cfg) {
  if (cfg.rows < 1 || cfg.cols < 1)
    throw validation_error("grid must have at least one row and column");
  if (cfg.min_count < 1)
    throw validation_error("grid min_count must be at least 1");
}

}  // namespace detail

inline int block_id_of(const Eigen::Vector2d& p, const ImageSize& size,
                       const GridConfig& cfg) {
  const int cell_w = std::max(1, size.width / cfg.cols);
  const int cell_h = std::max(1, size.height / cfg.rows);
  const int col = std::min(static_cast<int>(p.x() / cell_w), cfg.cols - 1);
  const int row = std::min(static_cast<int>(p.y() / cell_h), cfg.rows - 1);
  return row * cfg.cols + col;
}

inline std::vector<BlockAssignment> assign_blocks(const CorrespondenceSet& set,
                                                  const GridConfig& cfg) {
  detail::check_grid(cfg);
  std::vector<BlockAssignment> out;
  out.reserve(set.items.size());
  for (const Correspondence& c : set.items)
    out.push_back({block_id_of(c.left.position, set.left_size, cfg),
                   block_id_of(c.right.position, set.right_size, cfg)});
  return out;
}

inline std::vector<BlockPair> match_blocks(
    const std::vector<BlockAssignment>& assignments, const GridConfig& cfg) {
  detail::check_grid(cfg);
  std::map<std::pair<int, int>, std::vector<int>> cells;
  for (std::size_t i = 0; i < assignments.size(); ++i)
    cells[{assignments[i].left_block, assignments[i].right_block}].push_back(
        static_cast<int>(i));

  // Best right cell per left cell; map order is ascending right id, so a
  // strict > keeps the lowest id on score ties.
  std::map<int, std::pair<int, int>> best_right;  // left -> (score, right)
  for (const auto& [key, members] : cells) {
    const auto [l, r] = key;
    const int score = static_cast<int>(members.size());
    auto it = best_right.find(l);
    if (it == best_right.end() || score > it->second.first)
      best_right[l] = {score, r};
  }

  std::map<int, std::pair<int, int>> best_left;  // right -> (score, left)
  if (cfg.mutual_best) {
    for (const auto& [key, members] : cells) {
      const auto [l, r] = key;
      const int score = static_cast<int>(members.size());
      auto it = best_left.find(r);
      if (it == best_left.end() || score > it->second.first)
        best_left[r] = {score, l};
    }
  }

  std::vector<BlockPair> out;
  for (const auto& [l, sr] : best_right) {
    const auto [score, r] = sr;
    if (score < cfg.min_count) continue;
    if (cfg.mutual_best && best_left.at(r).second != l) continue;
    BlockPair pair;
    pair.left_block = l;
    pair.right_block = r;
    pair.members = cells.at({l, r});
    pair.score = score;
    out.push_back(std::move(pair));
  }
  return out;
}

}  // namespace icgtm
