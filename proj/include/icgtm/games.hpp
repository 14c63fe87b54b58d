#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "icgtm/blocks.hpp"
#include "icgtm/parallel.hpp"
#include "icgtm/payoff.hpp"
#include "icgtm/types.hpp"

// One non-cooperative game per block pair: replicator dynamics concentrate
// popularity mass on the mutually compatible members, then an adaptive Otsu
// split separates popular from unpopular players.

namespace icgtm {

struct GameConfig {
  int max_iters = 200;
  double tol = 1e-6;   // infinity-norm step below which evolution stops
  int otsu_bins = 256;
};

struct PopularityVector {
  std::vector<double> q;
  int iterations = 0;
};

// One replicator update q_i <- q_i (Mq)_i / (q'Mq). The denominator is
// accumulated as the sum of the numerators, so the update lands on the
// simplex without renormalization. A zero mean payoff leaves q unchanged.
inline std::vector<double> ess_step(const PayoffMatrix& m,
                                    const std::vector<double>& q) {
  const int n = m.n;
  std::vector<double> numer(static_cast<std::size_t>(n));
  double mean = 0.0;
  for (int i = 0; i < n; ++i) {
    double mq = 0.0;
    for (int j = 0; j < n; ++j) mq += m.at(i, j) * q[static_cast<std::size_t>(j)];
    numer[static_cast<std::size_t>(i)] = q[static_cast<std::size_t>(i)] * mq;
    mean += numer[static_cast<std::size_t>(i)];
  }
  if (mean <= 0.0) return q;
  for (double& v : numer) v /= mean;
  return numer;
}

inline PopularityVector ess_evolve(const PayoffMatrix& m, const GameConfig& cfg) {
  if (cfg.max_iters < 1 || !(cfg.tol > 0.0))
    throw validation_error("game config needs max_iters >= 1 and tol > 0");
  PopularityVector pv;
  const int n = m.n;
  if (n == 0) return pv;
  pv.q.assign(static_cast<std::size_t>(n), 1.0 / n);
  for (int k = 0; k < cfg.max_iters; ++k) {
    std::vector<double> next = ess_step(m, pv.q);
    double step = 0.0;
    for (std::size_t i = 0; i < next.size(); ++i)
      step = std::max(step, std::abs(next[i] - pv.q[i]));
    pv.q = std::move(next);
    ++pv.iterations;
    if (step < cfg.tol) break;
  }
  return pv;
}

// Histogram threshold maximizing between-class variance. Bin counts and sums
// are integer-exact; ties pick the lowest boundary; the returned value is the
// winning bin's upper boundary. All-equal input returns that value.
inline double otsu_threshold(const std::vector<double>& values, int bins) {
  if (values.empty())
    throw validation_error("otsu threshold needs a nonempty input");
  if (bins < 2) throw validation_error("otsu threshold needs at least 2 bins");
  double lo = values[0], hi = values[0];
  for (double v : values) {
    if (!std::isfinite(v))
      throw validation_error("otsu threshold needs finite values");
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (lo == hi) return lo;

  const double width = (hi - lo) / bins;
  std::vector<std::int64_t> hist(static_cast<std::size_t>(bins), 0);
  for (double v : values) {
    int b = static_cast<int>((v - lo) / width);
    b = std::clamp(b, 0, bins - 1);
    ++hist[static_cast<std::size_t>(b)];
  }

  const std::int64_t total_n = static_cast<std::int64_t>(values.size());
  std::int64_t total_s = 0;
  for (int b = 0; b < bins; ++b)
    total_s += hist[static_cast<std::size_t>(b)] * b;

  std::int64_t n0 = 0, s0 = 0;
  double best = -1.0;
  int best_k = 0;
  for (int k = 0; k + 1 < bins; ++k) {
    n0 += hist[static_cast<std::size_t>(k)];
    s0 += hist[static_cast<std::size_t>(k)] * k;
    const std::int64_t n1 = total_n - n0;
    if (n0 == 0 || n1 == 0) continue;
    const double mu0 = static_cast<double>(s0) / static_cast<double>(n0);
    const double mu1 =
        static_cast<double>(total_s - s0) / static_cast<double>(n1);
    const double d = mu0 - mu1;
    const double score = static_cast<double>(n0) * static_cast<double>(n1) * d * d;
    if (score > best) {
      best = score;
      best_k = k;
    }
  }
  return lo + width * (best_k + 1);
}

// Members whose converged popularity clears the adaptive threshold survive.
// Degenerate games (single member, or a popularity vector with no spread,
// e.g. from an all-zero payoff matrix) keep everyone; downstream clustering
// re-checks them.
inline std::vector<int> play_local_game(const BlockPair& pair,
                                        const CorrespondenceSet& set,
                                        const PayoffParams& params,
                                        const GameConfig& cfg) {
  if (pair.members.size() <= 1) return pair.members;
  const PayoffMatrix m = build_payoff_matrix(set, pair.members, params);
  const PopularityVector pv = ess_evolve(m, cfg);
  const auto [lo, hi] = std::minmax_element(pv.q.begin(), pv.q.end());
  if (*lo == *hi) return pair.members;
  const double tau = otsu_threshold(pv.q, cfg.otsu_bins);
  std::vector<int> survivors;
  for (std::size_t i = 0; i < pv.q.size(); ++i)
    if (pv.q[i] > tau) survivors.push_back(pair.members[i]);
  return survivors;
}

inline std::vector<int> play_all_games(const std::vector<BlockPair>& pairs,
                                       const CorrespondenceSet& set,
                                       const PayoffParams& params,
                                       const GameConfig& cfg) {
  std::vector<std::vector<int>> per_pair(pairs.size());
  parallel_for(static_cast<int>(pairs.size()), [&](int p) {
    per_pair[static_cast<std::size_t>(p)] =
        play_local_game(pairs[static_cast<std::size_t>(p)], set, params, cfg);
  });
  std::vector<int> out;
  for (const auto& survivors : per_pair)
    out.insert(out.end(), survivors.begin(), survivors.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace icgtm
