#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "icgtm/types.hpp"

// Consistency-weighted evaluation. Each ground-truth consistency receives a
// weight inversely related to its size; outliers carry the maximum weight.
// Small consistencies therefore punch above their correspondence count,
// making W-P/W-R/W-F sensitive to a method dropping a minor motion entirely.

namespace icgtm {

struct ConsistencyWeight {
  int id = 0;
  int inlier_count = 0;
  double weight = 0.0;
};

struct WeightSet {
  std::vector<ConsistencyWeight> per_consistency;  // ascending id, weights sum to 1
  double outlier_weight = 0.0;                     // = max consistency weight
  int total_inliers = 0;
};

inline WeightSet consistency_weights(const std::vector<int>& ground_truth) {
  int top = -1;
  for (int g : ground_truth) top = std::max(top, g);
  if (top < 0)
    throw validation_error("weights are undefined without ground-truth inliers");
  WeightSet ws;
  std::vector<int> counts(static_cast<std::size_t>(top) + 1, 0);
  for (int g : ground_truth)
    if (g >= 0) {
      ++counts[static_cast<std::size_t>(g)];
      ++ws.total_inliers;
    }
  double norm = 0.0;
  std::vector<double> raw(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    raw[i] = std::exp(-static_cast<double>(counts[i]) /
                      static_cast<double>(ws.total_inliers));
    norm += raw[i];
  }
  ws.per_consistency.reserve(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double w = raw[i] / norm;
    ws.per_consistency.push_back({static_cast<int>(i), counts[i], w});
    ws.outlier_weight = std::max(ws.outlier_weight, w);
  }
  return ws;
}

struct MetricsOptions {
  // The harmonic-mean F can be halved (PR/(P+R)) to match conventions that
  // drop the factor 2; the standard form is the default.
  bool halved_f = false;
};

struct EvalReport {
  double precision = 0.0, recall = 0.0, f_measure = 0.0;
  double w_precision = 0.0, w_recall = 0.0, w_f_measure = 0.0;
  std::vector<ConsistencyWeight> per_consistency;
  long tp = 0, fp = 0, fn = 0;
  double w_tp = 0.0, w_fp = 0.0, w_fn = 0.0;
  bool degenerate = false;  // some denominator was zero; that metric is 0
  int k_pred = 0;
  int k_true = 0;
  double cluster_identity_accuracy = -1.0;  // -1 when no labeled clusters exist
};

namespace detail {

inline double safe_div(double num, double den, bool& degenerate) {
  if (den == 0.0) {
    degenerate = true;
    return 0.0;
  }
  return num / den;
}

inline bool predicted_inlier(int label) { return label != kOutlier; }

}  // namespace detail

// Core evaluation over positionally aligned label vectors. A predicted
// inlier is anything not labeled outlier (cluster ids and the ablation's
// unclustered selections alike); TP/FP ignore cluster identity.
inline EvalReport weighted_prf(const std::vector<int>& predicted,
                               const std::vector<int>& ground_truth, int k_pred,
                               const MetricsOptions& opts = {}) {
  if (predicted.size() != ground_truth.size())
    throw validation_error("predicted and ground-truth label counts differ");
  EvalReport rep;
  const WeightSet ws = consistency_weights(ground_truth);
  rep.per_consistency = ws.per_consistency;
  rep.k_true = static_cast<int>(ws.per_consistency.size());
  rep.k_pred = k_pred;

  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const int g = ground_truth[i];
    if (g == kUnlabeled)
      throw validation_error("ground truth is incomplete at index " +
                             std::to_string(i));
    const bool pred_in = detail::predicted_inlier(predicted[i]);
    const bool true_in = g >= 0;
    if (pred_in && true_in) {
      ++rep.tp;
      rep.w_tp += ws.per_consistency[static_cast<std::size_t>(g)].weight;
    } else if (pred_in && !true_in) {
      ++rep.fp;
      rep.w_fp += ws.outlier_weight;
    } else if (!pred_in && true_in) {
      ++rep.fn;
      rep.w_fn += ws.per_consistency[static_cast<std::size_t>(g)].weight;
    }
  }

  rep.precision = detail::safe_div(static_cast<double>(rep.tp),
                                   static_cast<double>(rep.tp + rep.fp),
                                   rep.degenerate);
  rep.recall = detail::safe_div(static_cast<double>(rep.tp),
                                static_cast<double>(rep.tp + rep.fn),
                                rep.degenerate);
  rep.w_precision = detail::safe_div(rep.w_tp, rep.w_tp + rep.w_fp, rep.degenerate);
  rep.w_recall = detail::safe_div(rep.w_tp, rep.w_tp + rep.w_fn, rep.degenerate);
  const double scale = opts.halved_f ? 1.0 : 2.0;
  rep.f_measure = detail::safe_div(scale * rep.precision * rep.recall,
                                   rep.precision + rep.recall, rep.degenerate);
  rep.w_f_measure = detail::safe_div(scale * rep.w_precision * rep.w_recall,
                                     rep.w_precision + rep.w_recall,
                                     rep.degenerate);
  return rep;
}

// Evaluates a result against a truth-bearing set, pairing records by their
// stable correspondence ids; also scores how well cluster identities line up
// with consistencies via a per-cluster majority vote.
inline EvalReport weighted_prf(const MatchResult& result,
                               const CorrespondenceSet& truth,
                               const MetricsOptions& opts = {}) {
  if (!truth.has_full_ground_truth())
    throw validation_error("evaluation needs fully annotated ground truth");
  if (result.indices.size() != truth.items.size())
    throw validation_error("result covers " + std::to_string(result.indices.size()) +
                           " correspondences, truth has " +
                           std::to_string(truth.items.size()));
  std::map<int, int> position;  // stable id -> truth position
  for (std::size_t i = 0; i < truth.items.size(); ++i)
    position[truth.items[i].index] = static_cast<int>(i);
  std::vector<int> predicted(truth.items.size(), kOutlier);
  for (std::size_t i = 0; i < result.indices.size(); ++i) {
    const auto it = position.find(result.indices[i]);
    if (it == position.end())
      throw validation_error("result names correspondence id " +
                             std::to_string(result.indices[i]) +
                             " absent from the truth set");
    predicted[static_cast<std::size_t>(it->second)] = result.labels[i];
  }

  EvalReport rep = weighted_prf(predicted, truth.ground_truth,
                                static_cast<int>(result.homographies.size()), opts);

  // Majority-vote identity check over predicted clusters.
  std::map<int, std::map<int, int>> votes;  // cluster -> gt id -> count
  int considered = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i)
    if (predicted[i] >= 0 && truth.ground_truth[i] >= 0) {
      ++votes[predicted[i]][truth.ground_truth[i]];
      ++considered;
    }
  if (considered > 0) {
    int agree = 0;
    for (const auto& [cluster, counts] : votes) {
      int best = 0;
      for (const auto& [gt, count] : counts) best = std::max(best, count);
      agree += best;
    }
    rep.cluster_identity_accuracy =
        static_cast<double>(agree) / static_cast<double>(considered);
  }
  return rep;
}

}  // namespace icgtm
