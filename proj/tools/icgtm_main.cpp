// Command-line front end: synthesize scenes, run the matching pipeline,
// evaluate results against ground truth, and render SVG overlays.
//
// Exit codes: 0 success, 1 usage error, 2 data error (unreadable or invalid
// files, missing ground truth), 3 pipeline failure.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <exception>
#include <map>
#include <string>

#include "icgtm/icgtm.hpp"

namespace {

struct MatchArgs {
  std::string input;
  std::string output;
  icgtm::PipelineConfig cfg;
};

struct EvalArgs {
  std::string result;
  std::string truth;
  icgtm::MetricsOptions opts;
};

struct SynthArgs {
  std::string output;
  std::string truth_output;  // empty: derive from output
  icgtm::SynthConfig cfg;
};

struct RenderArgs {
  std::string correspondences;
  std::string result;
  std::string output;
};

std::string format_metric(double v) {
  std::string out;
  icgtm::detail::append_number(out, v);
  return out;
}

void run_match(const MatchArgs& args) {
  const icgtm::CorrespondenceSet set = icgtm::load_correspondences(args.input);
  std::printf("loaded %d correspondences (%dx%d | %dx%d)\n", set.size(),
              set.left_size.width, set.left_size.height, set.right_size.width,
              set.right_size.height);
  const icgtm::MatchResult res = icgtm::run_pipeline(set, args.cfg);
  icgtm::save_result(res, args.output);
  const icgtm::Diagnostics& d = res.diagnostics;
  std::printf("blocks kept:       %d\n", d.blocks_kept);
  std::printf("game survivors:    %d\n", d.game_survivors);
  std::printf("clusters found:    %d\n", d.clusters_found);
  std::printf("recovered inliers: %d\n", d.recovered_inliers);
  std::printf("stage ms: blocks=%.2f games=%.2f clustering=%.2f recovery=%.2f total=%.2f\n",
              d.timings.blocks_ms, d.timings.games_ms, d.timings.clustering_ms,
              d.timings.recovery_ms, d.timings.total_ms());
  std::printf("wrote %s\n", args.output.c_str());
}

void run_eval(const EvalArgs& args) {
  const icgtm::MatchResult res = icgtm::load_result(args.result);
  const icgtm::CorrespondenceSet truth = icgtm::load_correspondences(args.truth);
  const icgtm::EvalReport rep = icgtm::weighted_prf(res, truth, args.opts);

  std::printf("%-14s %8s %8s\n", "consistency", "inliers", "weight");
  for (const auto& w : rep.per_consistency)
    std::printf("%-14d %8d %8.4f\n", w.id, w.inlier_count, w.weight);
  if (!rep.per_consistency.empty()) {
    const double outlier_weight =
        std::max_element(rep.per_consistency.begin(), rep.per_consistency.end(),
                         [](const icgtm::ConsistencyWeight& a,
                            const icgtm::ConsistencyWeight& b) {
                           return a.weight < b.weight;
                         })
            ->weight;
    std::printf("%-14s %8s %8.4f\n", "outlier", "", outlier_weight);
  }
  std::printf("counts: TP=%lld FP=%lld FN=%lld\n",
              static_cast<long long>(rep.tp), static_cast<long long>(rep.fp),
              static_cast<long long>(rep.fn));
  if (rep.cluster_identity_accuracy >= 0.0)
    std::printf("cluster identity accuracy: %.4f\n", rep.cluster_identity_accuracy);
  if (rep.degenerate)
    std::printf("note: a zero denominator forced at least one metric to 0\n");

  std::printf("---\n");
  std::printf("P=%s\n", format_metric(rep.precision).c_str());
  std::printf("R=%s\n", format_metric(rep.recall).c_str());
  std::printf("F=%s\n", format_metric(rep.f_measure).c_str());
  std::printf("W-P=%s\n", format_metric(rep.w_precision).c_str());
  std::printf("W-R=%s\n", format_metric(rep.w_recall).c_str());
  std::printf("W-F=%s\n", format_metric(rep.w_f_measure).c_str());
  std::printf("K_pred=%d\n", rep.k_pred);
  std::printf("K_true=%d\n", rep.k_true);
}

void run_synth(const SynthArgs& args) {
  const icgtm::SynthScene scene = icgtm::generate_scene(args.cfg);
  icgtm::save_correspondences(scene.set, args.output);
  icgtm::MatchResult truth;
  truth.homographies = scene.planted;
  truth.labels = scene.set.ground_truth;
  for (const icgtm::Correspondence& c : scene.set.items)
    truth.indices.push_back(c.index);
  const std::string truth_path =
      args.truth_output.empty() ? args.output + ".truth" : args.truth_output;
  icgtm::save_result(truth, truth_path);
  std::printf("wrote %s (%d correspondences, %d consistencies) and %s\n",
              args.output.c_str(), scene.set.size(),
              static_cast<int>(scene.planted.size()), truth_path.c_str());
}

void run_render(const RenderArgs& args) {
  const icgtm::CorrespondenceSet set =
      icgtm::load_correspondences(args.correspondences);
  const icgtm::MatchResult res = icgtm::load_result(args.result);
  icgtm::detail::write_file(args.output, icgtm::render_svg(set, res));
  std::printf("wrote %s\n", args.output.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"grid-game-cluster correspondence selection"};
  app.require_subcommand(1);
  app.set_config("--config", "",
                 "Config file with key = value lines; command-line flags win");
  int threads = 0;
  app.add_option("--threads", threads,
                 "Worker thread cap (0 = hardware concurrency)")
      ->envname("ICGTM_THREADS");

  const std::map<std::string, icgtm::PayoffMode> mode_names{
      {"geo", icgtm::PayoffMode::kGeometric},
      {"rt", icgtm::PayoffMode::kRatioTest},
      {"des", icgtm::PayoffMode::kDescriptorDistance},
      {"rt+geo", icgtm::PayoffMode::kRatioPlusGeometric}};

  MatchArgs match;
  CLI::App* m = app.add_subcommand("match", "Run the matching pipeline");
  m->fallthrough();
  m->add_option("input", match.input, "Correspondence file")->required();
  m->add_option("output", match.output, "Result file to write")->required();
  m->add_option("--rows", match.cfg.grid.rows, "Grid rows")->capture_default_str();
  m->add_option("--cols", match.cfg.grid.cols, "Grid columns")->capture_default_str();
  m->add_option("--min-count", match.cfg.grid.min_count,
                "Minimum correspondences per kept block pair")
      ->capture_default_str();
  m->add_flag("--mutual-best", match.cfg.grid.mutual_best,
              "Keep only mutually best block pairs");
  m->add_option("--sigma", match.cfg.payoff.sigma, "Geometric payoff scale, px")
      ->capture_default_str();
  m->add_option("--alpha", match.cfg.payoff.alpha, "Ratio payoff scale")
      ->capture_default_str();
  m->add_option("--beta", match.cfg.payoff.beta,
                "Descriptor-distance payoff scale (<= 0: derive from data)")
      ->capture_default_str();
  m->add_option("--mode", match.cfg.payoff.mode, "Payoff mode")
      ->transform(CLI::CheckedTransformer(mode_names, CLI::ignore_case))
      ->default_str("rt+geo");
  m->add_flag_callback(
      "--raw-affine",
      [&match] { match.cfg.payoff.affine_model = icgtm::AffineModel::kRaw; },
      "Project with the raw keypoint frame instead of the offset form");
  m->add_option("--max-iters", match.cfg.game.max_iters,
                "Replicator iteration cap")
      ->capture_default_str();
  m->add_option("--tol", match.cfg.game.tol, "Replicator stopping step")
      ->capture_default_str();
  m->add_option("--otsu-bins", match.cfg.game.otsu_bins,
                "Histogram bins for the adaptive threshold")
      ->capture_default_str();
  m->add_option("--min-cluster-size", match.cfg.cluster.min_cluster_size,
                "Smallest admissible cluster")
      ->capture_default_str();
  m->add_option("--reproj-threshold", match.cfg.cluster.reproj_threshold,
                "Recovery reprojection gate, px")
      ->capture_default_str();
  m->add_option("--ransac-iters", match.cfg.cluster.ransac_iters,
                "RANSAC hypotheses per cluster")
      ->capture_default_str();
  m->add_option("--ransac-tol", match.cfg.cluster.ransac_tol,
                "RANSAC consensus gate, px")
      ->capture_default_str();
  m->add_option("--max-rounds", match.cfg.cluster.max_outer_rounds,
                "Cluster extraction round cap")
      ->capture_default_str();
  m->add_flag("--either-anchor", match.cfg.cluster.single_endpoint,
              "Admit cluster members via either anchor endpoint");
  m->add_flag("--skip-clustering", match.cfg.skip_clustering,
              "Stop after the local games (no clusters, no recovery)");
  m->add_option("--seed", match.cfg.seed, "RANSAC sampling seed")
      ->capture_default_str();

  EvalArgs eval;
  CLI::App* e = app.add_subcommand("eval", "Score a result against ground truth");
  e->fallthrough();
  e->add_option("result", eval.result, "Result file")->required();
  e->add_option("truth", eval.truth, "Truth-bearing correspondence file")->required();
  e->add_flag("--halved-f", eval.opts.halved_f,
              "Report F as PR/(P+R) instead of 2PR/(P+R)");

  SynthArgs synth;
  CLI::App* s = app.add_subcommand("synth", "Generate a synthetic scene");
  s->fallthrough();
  s->add_option("output", synth.output, "Correspondence file to write")->required();
  s->add_option("--consistencies,--k", synth.cfg.consistencies,
                "Number of planted transformations")
      ->capture_default_str();
  s->add_option("--inliers", synth.cfg.inliers_per, "Inliers per consistency")
      ->capture_default_str();
  s->add_option("--outlier-ratio", synth.cfg.outlier_ratio,
                "Outlier share of the final set, [0,1)")
      ->capture_default_str();
  s->add_option("--noise", synth.cfg.noise_sigma, "Right keypoint jitter, px")
      ->capture_default_str();
  s->add_option("--image-size", synth.cfg.image_size, "Square image side, px")
      ->capture_default_str();
  s->add_option("--desc-dim", synth.cfg.descriptor_dim, "Descriptor dimension")
      ->capture_default_str();
  s->add_option("--seed", synth.cfg.seed, "Generator seed")->capture_default_str();
  s->add_option("--truth", synth.truth_output,
                "Sidecar path for planted labels (default: <output>.truth)");

  RenderArgs render;
  CLI::App* r = app.add_subcommand("render", "Render an SVG overlay");
  r->fallthrough();
  r->add_option("correspondences", render.correspondences, "Correspondence file")
      ->required();
  r->add_option("result", render.result, "Result file")->required();
  r->add_option("output", render.output, "SVG file to write")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& err) {
    return app.exit(err);
  } catch (const CLI::CallForAllHelp& err) {
    return app.exit(err);
  } catch (const CLI::ParseError& err) {
    app.exit(err);
    return 1;
  }

  icgtm::set_thread_count(threads);
  try {
    if (m->parsed()) run_match(match);
    if (e->parsed()) run_eval(eval);
    if (s->parsed()) run_synth(synth);
    if (r->parsed()) run_render(render);
  } catch (const icgtm::io_error& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return 2;
  } catch (const icgtm::validation_error& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return 2;
  } catch (const icgtm::pipeline_error& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return 3;
  } catch (const std::exception& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return 3;
  }
  return 0;
}
