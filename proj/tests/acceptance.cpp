// Acceptance gate. Each numbered check prints one PASS/FAIL line with its
// measured values and wall time; the process exits with the failure count.
// An optional argument selects a single check by number.
//
//   1  replicator iterates stay on the simplex, mean payoff never drops
//   2  adaptive threshold equals an exhaustive boundary scan, exactly
//   3  DLT and RANSAC recover planted homographies to tight tolerances
//   4  payoff matrices: symmetric, hollow, bounded, equal to an oracle
//   5  multi-consistency scenes: K recovered, weighted F high
//   6  single-consistency scenes: precision and recall both high
//   7  clustering beats the games-only ablation in weighted recall
//   8  weighted metrics reduce at K=1 and punish a missed small group
//   9  the match command is byte-identical across runs and thread counts

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "icgtm/icgtm.hpp"

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    pass = false;
    if (!detail.empty()) detail += "; ";
    detail += why;
  }
  void note(const std::string& what) {
    if (!detail.empty()) detail += "; ";
    detail += what;
  }
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

// ---------------------------------------------------------------- check 1

Outcome check_ess_invariants() {
  Outcome out;
  std::mt19937_64 rng(1001);
  std::uniform_real_distribution<double> val(0.0, 3.0);
  int iterates = 0;
  for (int t = 0; t < 200; ++t) {
    const int n = 2 + static_cast<int>(rng() % 49);  // up to 50
    icgtm::PayoffMatrix m;
    m.n = n;
    m.values.assign(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        const double v = val(rng);
        m.at(i, j) = v;
        m.at(j, i) = v;
      }
    std::vector<double> q(static_cast<std::size_t>(n), 1.0 / n);
    double prev_mean = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        prev_mean += q[static_cast<std::size_t>(i)] * m.at(i, j) *
                     q[static_cast<std::size_t>(j)];
    for (int step = 0; step < 60; ++step) {
      q = icgtm::ess_step(m, q);
      ++iterates;
      double sum = 0.0;
      double mean = 0.0;
      for (int i = 0; i < n; ++i) {
        const double qi = q[static_cast<std::size_t>(i)];
        if (qi < 0.0) out.fail("negative entry at trial " + std::to_string(t));
        sum += qi;
        for (int j = 0; j < n; ++j)
          mean += qi * m.at(i, j) * q[static_cast<std::size_t>(j)];
      }
      if (std::abs(sum - 1.0) > 1e-9)
        out.fail("simplex sum off by " + fmt(std::abs(sum - 1.0)) +
                 " at trial " + std::to_string(t));
      if (mean < prev_mean - 1e-12)
        out.fail("mean payoff dropped by " + fmt(prev_mean - mean) +
                 " at trial " + std::to_string(t));
      prev_mean = mean;
      if (!out.pass) return out;
    }
  }
  out.note("200 matrices, " + std::to_string(iterates) + " iterates clean");
  return out;
}

// ---------------------------------------------------------------- check 2

double exhaustive_otsu(const std::vector<double>& values, int bins) {
  double lo = values[0], hi = values[0];
  for (double v : values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (lo == hi) return lo;
  const double width = (hi - lo) / bins;
  double best_score = -1.0;
  int best_k = 0;
  for (int k = 0; k + 1 < bins; ++k) {
    std::int64_t n0 = 0, n1 = 0, s0 = 0, s1 = 0;
    for (double v : values) {
      const int b = std::clamp(static_cast<int>((v - lo) / width), 0, bins - 1);
      if (b <= k) {
        ++n0;
        s0 += b;
      } else {
        ++n1;
        s1 += b;
      }
    }
    if (n0 == 0 || n1 == 0) continue;
    const double d = static_cast<double>(s0) / static_cast<double>(n0) -
                     static_cast<double>(s1) / static_cast<double>(n1);
    const double score =
        static_cast<double>(n0) * static_cast<double>(n1) * d * d;
    if (score > best_score) {
      best_score = score;
      best_k = k;
    }
  }
  return lo + width * (best_k + 1);
}

Outcome check_otsu_oracle() {
  Outcome out;
  std::mt19937_64 rng(2002);
  std::uniform_real_distribution<double> wide(-10.0, 10.0);
  std::normal_distribution<double> low(0.2, 0.04);
  std::normal_distribution<double> high(0.8, 0.04);
  int exact = 0;
  for (int t = 0; t < 100; ++t) {
    std::vector<double> values;
    const int n = 2 + static_cast<int>(rng() % 1500);
    for (int i = 0; i < n; ++i) {
      switch (t % 3) {
        case 0: values.push_back(wide(rng)); break;
        case 1: values.push_back(i % 2 ? low(rng) : high(rng)); break;
        default: values.push_back(i % 5 ? low(rng) : wide(rng)); break;
      }
    }
    const int bins = 2 + static_cast<int>(rng() % 500);
    const double got = icgtm::otsu_threshold(values, bins);
    const double want = exhaustive_otsu(values, bins);
    if (got == want) {
      ++exact;
    } else {
      out.fail("trial " + std::to_string(t) + ": got " + fmt(got) +
               ", oracle " + fmt(want));
      return out;
    }
  }
  out.note(std::to_string(exact) + "/100 exact");
  return out;
}

// ---------------------------------------------------------------- check 3

Eigen::Matrix3d planted_homography(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (;;) {
    Eigen::Matrix3d h;
    h << 1.0 + 0.4 * u(rng), 0.4 * u(rng), 40.0 * u(rng),
        0.4 * u(rng), 1.0 + 0.4 * u(rng), 40.0 * u(rng),
        1e-4 * u(rng), 1e-4 * u(rng), 1.0;
    if (std::abs(h.block<2, 2>(0, 0).determinant()) > 0.3) return h;
  }
}

Outcome check_homography_exactness() {
  Outcome out;
  std::mt19937_64 rng(3003);
  std::uniform_real_distribution<double> coord(-60.0, 60.0);
  std::uniform_real_distribution<double> wild(-400.0, 400.0);
  double worst_dlt = 0.0, worst_ransac = 0.0;
  for (int t = 0; t < 100; ++t) {
    const Eigen::Matrix3d planted =
        icgtm::canonical_homography(planted_homography(rng)).h;

    std::vector<Eigen::Vector2d> left, right;
    for (int i = 0; i < 8; ++i) {
      left.emplace_back(coord(rng), coord(rng));
      right.push_back(icgtm::apply_homography(planted, left.back()));
    }
    const auto dlt = icgtm::fit_homography_dlt(left, right);
    if (!dlt) {
      out.fail("dlt failed at trial " + std::to_string(t));
      return out;
    }
    const double dlt_gap = (dlt->h - planted).cwiseAbs().maxCoeff();
    worst_dlt = std::max(worst_dlt, dlt_gap);
    if (dlt_gap > 1e-6) {
      out.fail("dlt off by " + fmt(dlt_gap) + " at trial " + std::to_string(t));
      return out;
    }

    // 30 clean points plus 10 wild ones: a 25% contamination rate.
    std::vector<Eigen::Vector2d> rl, rr;
    for (int i = 0; i < 30; ++i) {
      rl.emplace_back(coord(rng), coord(rng));
      rr.push_back(icgtm::apply_homography(planted, rl.back()));
    }
    for (int i = 0; i < 10; ++i) {
      rl.emplace_back(wild(rng), wild(rng));
      rr.emplace_back(wild(rng), wild(rng));
    }
    const auto fit = icgtm::ransac_homography(rl, rr, 500, 1e-3,
                                              static_cast<std::uint64_t>(t));
    if (!fit) {
      out.fail("ransac failed at trial " + std::to_string(t));
      return out;
    }
    const double gap = (fit->h - planted).cwiseAbs().maxCoeff();
    worst_ransac = std::max(worst_ransac, gap);
    if (gap > 1e-4) {
      out.fail("ransac off by " + fmt(gap) + " at trial " + std::to_string(t));
      return out;
    }
  }
  out.note("worst dlt gap " + fmt(worst_dlt) + ", worst ransac gap " +
           fmt(worst_ransac));
  return out;
}

// ---------------------------------------------------------------- check 4

Outcome check_payoff_matrix_properties() {
  Outcome out;
  std::mt19937_64 rng(4004);
  std::uniform_real_distribution<double> pos(5.0, 195.0);
  std::uniform_real_distribution<double> entry(-1.0, 1.0);
  std::uniform_real_distribution<double> desc(0.0, 4.0);
  icgtm::PayoffParams params;  // ratio + geometric: full [0,2] range

  for (int t = 0; t < 100; ++t) {
    const int n = 2 + static_cast<int>(rng() % 28);
    icgtm::CorrespondenceSet set;
    set.left_size = {200, 200};
    set.right_size = {200, 200};
    for (int i = 0; i < n; ++i) {
      icgtm::Correspondence c;
      c.index = i;
      c.left.position = {pos(rng), pos(rng)};
      c.right.position = {pos(rng), pos(rng)};
      do {
        c.left.affine << 1.0 + 0.5 * entry(rng), 0.5 * entry(rng),
            0.5 * entry(rng), 1.0 + 0.5 * entry(rng);
      } while (std::abs(c.left.affine.determinant()) < 0.1);
      c.right.affine = c.left.affine.inverse();
      c.left_desc.values = {desc(rng), desc(rng), desc(rng)};
      c.right_desc.values = {desc(rng), desc(rng), desc(rng)};
      set.items.push_back(c);
    }
    set = icgtm::populate_ratios(std::move(set));
    std::vector<int> members(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) members[static_cast<std::size_t>(i)] = i;
    const icgtm::PayoffMatrix m =
        icgtm::build_payoff_matrix(set, members, params);

    for (int i = 0; i < n; ++i) {
      if (m.at(i, i) != 0.0) out.fail("diagonal leak");
      for (int j = i + 1; j < n; ++j) {
        const double v = m.at(i, j);
        if (m.at(j, i) != v) out.fail("asymmetry");
        if (v < 0.0 || v > 2.0) out.fail("out of range: " + fmt(v));

        // Oracle entry, recomputed with plain arithmetic.
        const icgtm::Correspondence& a = set.items[static_cast<std::size_t>(i)];
        const icgtm::Correspondence& b = set.items[static_cast<std::size_t>(j)];
        const auto project = [](const icgtm::Correspondence& c, double x,
                                double y) {
          const double dx = x - c.left.position.x();
          const double dy = y - c.left.position.y();
          return std::pair{c.left.affine(0, 0) * dx + c.left.affine(0, 1) * dy +
                               c.right.position.x(),
                           c.left.affine(1, 0) * dx + c.left.affine(1, 1) * dy +
                               c.right.position.y()};
        };
        double dist = 0.0;
        for (const icgtm::Correspondence* at : {&a, &b}) {
          const auto pa = project(a, at->left.position.x(), at->left.position.y());
          const auto pb = project(b, at->left.position.x(), at->left.position.y());
          dist += std::hypot(pa.first - pb.first, pa.second - pb.second);
        }
        const double oracle = std::exp(-std::max(a.ratio, b.ratio) / params.alpha) +
                              std::exp(-dist / params.sigma);
        if (std::abs(v - oracle) > 1e-12)
          out.fail("oracle gap " + fmt(std::abs(v - oracle)) + " at trial " +
                   std::to_string(t));
        if (!out.pass) return out;
      }
    }
  }
  out.note("100 matrices clean");
  return out;
}

// ------------------------------------------------------------- checks 5-7

icgtm::SynthScene make_scene(int k, std::uint64_t seed, double outlier_ratio) {
  icgtm::SynthConfig cfg;
  cfg.consistencies = k;
  cfg.inliers_per = 100;
  cfg.outlier_ratio = outlier_ratio;
  cfg.noise_sigma = 1.0;
  cfg.seed = seed;
  return icgtm::generate_scene(cfg);
}

icgtm::EvalReport run_and_score(const icgtm::SynthScene& scene,
                                std::uint64_t seed, bool skip = false) {
  icgtm::PipelineConfig cfg;
  cfg.seed = seed;
  cfg.skip_clustering = skip;
  const icgtm::MatchResult res = icgtm::run_pipeline(scene.set, cfg);
  return icgtm::weighted_prf(res, scene.set);
}

Outcome check_multi_consistency_recovery() {
  Outcome out;
  double wf_sum = 0.0;
  int runs = 0;
  for (int k : {2, 3, 4}) {
    int k_exact = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const icgtm::SynthScene scene = make_scene(k, seed, 0.4);
      const icgtm::EvalReport rep = run_and_score(scene, seed);
      if (rep.k_pred == k) ++k_exact;
      wf_sum += rep.w_f_measure;
      ++runs;
    }
    out.note("K=" + std::to_string(k) + ": " + std::to_string(k_exact) +
             "/10 exact");
    if (k_exact < 9)
      out.fail("K=" + std::to_string(k) + " recovered only " +
               std::to_string(k_exact) + "/10");
  }
  const double mean_wf = wf_sum / runs;
  out.note("mean W-F " + fmt(mean_wf));
  if (mean_wf < 0.85) out.fail("mean W-F below 0.85");
  return out;
}

Outcome check_single_consistency() {
  Outcome out;
  double p_sum = 0.0, r_sum = 0.0;
  double p_min = 1.0, r_min = 1.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const icgtm::SynthScene scene = make_scene(1, 100 + seed, 0.2);
    const icgtm::EvalReport rep = run_and_score(scene, seed);
    p_sum += rep.precision;
    r_sum += rep.recall;
    p_min = std::min(p_min, rep.precision);
    r_min = std::min(r_min, rep.recall);
  }
  const double p = p_sum / 10.0, r = r_sum / 10.0;
  out.note("mean P " + fmt(p) + " (min " + fmt(p_min) + "), mean R " + fmt(r) +
           " (min " + fmt(r_min) + ")");
  if (p < 0.95) out.fail("precision below 0.95");
  if (r < 0.95) out.fail("recall below 0.95");
  return out;
}

Outcome check_ablation_gap() {
  Outcome out;
  double full_sum = 0.0, skip_sum = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const icgtm::SynthScene scene = make_scene(3, seed, 0.4);
    full_sum += run_and_score(scene, seed).w_recall;
    skip_sum += run_and_score(scene, seed, true).w_recall;
  }
  const double full = full_sum / 10.0, skipped = skip_sum / 10.0;
  out.note("W-R full " + fmt(full) + ", games-only " + fmt(skipped) +
           ", gap " + fmt(full - skipped));
  if (full - skipped < 0.20) out.fail("gap below 0.20");
  return out;
}

// ---------------------------------------------------------------- check 8

Outcome check_metric_reduction_and_sensitivity() {
  Outcome out;

  // K = 1 reduction must hold bitwise on arbitrary labelings.
  std::mt19937_64 rng(8008);
  for (int t = 0; t < 50; ++t) {
    std::vector<int> gt, pred;
    for (int i = 0; i < 40; ++i) {
      gt.push_back(rng() % 3 == 0 ? icgtm::kOutlier : 0);
      pred.push_back(rng() % 4 == 0 ? icgtm::kOutlier : 0);
    }
    gt[0] = 0;
    const icgtm::EvalReport rep = icgtm::weighted_prf(pred, gt, 1);
    if (rep.w_precision != rep.precision || rep.w_recall != rep.recall) {
      out.fail("K=1 reduction broke at trial " + std::to_string(t));
      return out;
    }
  }
  out.note("K=1: W-P==P, W-R==R bitwise over 50 labelings");

  // The 90/10 fixture: hand-derived weights, then the sensitivity claim.
  std::vector<int> gt(100, 0);
  for (int i = 90; i < 100; ++i) gt[static_cast<std::size_t>(i)] = 1;
  const icgtm::WeightSet ws = icgtm::consistency_weights(gt);
  const double w_big = ws.per_consistency[0].weight;
  const double w_small = ws.per_consistency[1].weight;
  out.note("weights " + fmt(w_big) + "/" + fmt(w_small));
  if (std::abs(w_big - 0.310026) > 1e-4 || std::abs(w_small - 0.689974) > 1e-4)
    out.fail("weights stray from the hand evaluation (0.310026, 0.689974)");

  std::vector<int> perfect = gt;
  std::vector<int> missed = gt;
  for (int i = 90; i < 100; ++i)
    missed[static_cast<std::size_t>(i)] = icgtm::kOutlier;
  const icgtm::EvalReport base = icgtm::weighted_prf(perfect, gt, 2);
  const icgtm::EvalReport hurt = icgtm::weighted_prf(missed, gt, 1);
  const double f_drop = base.f_measure - hurt.f_measure;
  const double wf_drop = base.w_f_measure - hurt.w_f_measure;
  out.note("F drop " + fmt(f_drop) + ", W-F drop " + fmt(wf_drop));
  if (wf_drop <= f_drop) out.fail("W-F drop does not exceed F drop");
  return out;
}

// ---------------------------------------------------------------- check 9

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return {};
  return std::string(std::istreambuf_iterator<char>(in), {});
}

int run_cli(const std::string& args) {
  const std::string cmd =
      std::string(ICGTM_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  if (status == -1 || !WIFEXITED(status)) return -1;
  return WEXITSTATUS(status);
}

Outcome check_match_determinism() {
  Outcome out;
  const std::filesystem::path dir =
      std::filesystem::temp_directory_path() /
      ("icgtm_accept_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  const std::string corr = (dir / "scene.corr").string();

  if (run_cli("synth " + corr + " --k 3 --inliers 80 --outlier-ratio 0.4 --seed 17") != 0) {
    out.fail("synth command failed");
    std::filesystem::remove_all(dir);
    return out;
  }
  const std::vector<std::pair<std::string, std::string>> runs = {
      {"a.res", "--seed 5 --threads 1"},
      {"b.res", "--seed 5 --threads 1"},   // rerun, same threading
      {"c.res", "--seed 5 --threads 7"},   // different threading
      {"d.res", "--seed 5"},               // default threading
  };
  std::string reference;
  for (const auto& [name, flags] : runs) {
    const std::string path = (dir / name).string();
    if (run_cli("match " + corr + " " + path + " " + flags) != 0) {
      out.fail("match run '" + flags + "' failed");
      break;
    }
    const std::string bytes = slurp(path);
    if (bytes.empty()) {
      out.fail("empty result from '" + flags + "'");
      break;
    }
    if (reference.empty()) {
      reference = bytes;
    } else if (bytes != reference) {
      out.fail("bytes diverge under '" + flags + "'");
      break;
    }
  }
  if (out.pass)
    out.note("4 runs, " + std::to_string(reference.size()) +
             " bytes each, identical");
  std::filesystem::remove_all(dir);
  return out;
}

// ----------------------------------------------------------------- driver

struct Check {
  int number;
  const char* name;
  Outcome (*fn)();
  double budget_s;  // 0: no runtime bound
};

const Check kChecks[] = {
    {1, "replicator invariants", check_ess_invariants, 5.0},
    {2, "adaptive threshold oracle", check_otsu_oracle, 2.0},
    {3, "homography exactness", check_homography_exactness, 10.0},
    {4, "payoff matrix properties", check_payoff_matrix_properties, 0.0},
    {5, "multi-consistency recovery", check_multi_consistency_recovery, 60.0},
    {6, "single-consistency case", check_single_consistency, 0.0},
    {7, "clustering ablation gap", check_ablation_gap, 0.0},
    {8, "metric reduction and sensitivity", check_metric_reduction_and_sensitivity, 0.0},
    {9, "match determinism", check_match_determinism, 0.0},
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  if (argc > 1) only = std::atoi(argv[1]);

  int failures = 0;
  for (const Check& check : kChecks) {
    if (only != 0 && check.number != only) continue;
    const auto start = Clock::now();
    Outcome out = check.fn();
    const double elapsed =
        std::chrono::duration<double>(Clock::now() - start).count();
    if (check.budget_s > 0.0 && elapsed > check.budget_s)
      out.fail("runtime " + fmt(elapsed) + "s exceeds " +
               fmt(check.budget_s) + "s");
    std::printf("%s  %d. %s (%s) [%.2fs]\n", out.pass ? "PASS" : "FAIL",
                check.number, check.name, out.detail.c_str(), elapsed);
    if (!out.pass) ++failures;
  }
  return failures;
}
