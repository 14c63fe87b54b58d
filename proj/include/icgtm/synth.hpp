#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "icgtm/homography.hpp"
#include "icgtm/payoff.hpp"
#include "icgtm/types.hpp"

// Synthetic multi-consistency scenes with exact ground truth. Each
// consistency is a compact square region in the left image moved by its own
// homography (rotation up to 30 degrees, scale 0.7..1.4, a mild projective
// term, and a translation to a distinct target cell). Rotation and scale are
// stratified across consistencies so no two planted transformations collapse
// into one; an unconstrained draw occasionally plants near-identical motions
// that nothing downstream could tell apart.

namespace icgtm {

struct SynthConfig {
  int consistencies = 3;
  int inliers_per = 100;
  double outlier_ratio = 0.4;  // outlier share of the final set, in [0,1)
  double noise_sigma = 1.0;    // px, right-keypoint jitter
  int image_size = 640;        // both images are square
  int descriptor_dim = 32;
  std::uint64_t seed = 0;
};

struct SynthScene {
  CorrespondenceSet set;
  std::vector<Homography> planted;  // one per consistency id
};

namespace detail {

// All randomness flows through this wrapper; engine output is reduced by
// hand so streams are identical across standard libraries.
class SceneRng {
 public:
  explicit SceneRng(std::uint64_t seed) : engine_(seed) {}

  double uniform() {  // [0, 1)
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  int below(int n) {  // [0, n)
    return static_cast<int>(engine_() % static_cast<std::uint64_t>(n));
  }

  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (int i = static_cast<int>(v.size()) - 1; i > 0; --i)
      std::swap(v[static_cast<std::size_t>(i)],
                v[static_cast<std::size_t>(below(i + 1))]);
  }

 private:
  std::mt19937_64 engine_;
};

inline Descriptor random_descriptor(SceneRng& rng, int dim, double scale,
                                    const Descriptor* base = nullptr) {
  Descriptor d;
  d.values.resize(static_cast<std::size_t>(dim));
  for (int i = 0; i < dim; ++i)
    d.values[static_cast<std::size_t>(i)] =
        (base ? base->values[static_cast<std::size_t>(i)] : 0.0) +
        scale * rng.normal();
  return d;
}

}  // namespace detail

inline SynthScene generate_scene(const SynthConfig& cfg) {
  if (cfg.consistencies < 1)
    throw validation_error("scene needs at least one consistency");
  if (cfg.inliers_per < 4)
    throw validation_error("scene needs at least 4 inliers per consistency");
  if (!(cfg.outlier_ratio >= 0.0 && cfg.outlier_ratio < 1.0))
    throw validation_error("outlier ratio must lie in [0, 1)");
  if (cfg.noise_sigma < 0.0)
    throw validation_error("noise sigma must be nonnegative");
  if (cfg.image_size < 1 || cfg.descriptor_dim < 1)
    throw validation_error("image size and descriptor dimension must be positive");

  const int k = cfg.consistencies;
  const double size = static_cast<double>(cfg.image_size);
  const int slots = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(k))));
  const double slot = size / slots;
  const double region_half = std::min(0.28 * slot, 0.15 * size);
  // Worst-case reach of a mapped region corner plus noise headroom.
  const double extent =
      1.4 * region_half * std::numbers::sqrt2 * 1.05 + 3.0 * cfg.noise_sigma + 2.0;
  if (region_half < 12.0 || extent >= size / 2.0)
    throw validation_error(
        "region packing failed: use fewer consistencies or a larger image");

  detail::SceneRng rng(cfg.seed);

  std::vector<int> target_cells(static_cast<std::size_t>(slots * slots));
  for (std::size_t i = 0; i < target_cells.size(); ++i)
    target_cells[i] = static_cast<int>(i);
  rng.shuffle(target_cells);
  std::vector<int> scale_slots(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) scale_slots[static_cast<std::size_t>(i)] = i;
  rng.shuffle(scale_slots);

  SynthScene scene;
  scene.set.left_size = {cfg.image_size, cfg.image_size};
  scene.set.right_size = {cfg.image_size, cfg.image_size};

  std::vector<Correspondence> items;
  std::vector<int> labels;

  for (int i = 0; i < k; ++i) {
    const Eigen::Vector2d center_l(
        (i % slots + 0.5) * slot, (i / slots + 0.5) * slot);

    const double theta_deg = -30.0 + 60.0 * (i + 0.5) / k +
                             (15.0 / k) * rng.uniform(-1.0, 1.0);
    const double theta = theta_deg * std::numbers::pi / 180.0;
    const double scale =
        0.7 + 0.7 * (scale_slots[static_cast<std::size_t>(i)] + 0.5) / k +
        (0.175 / k) * rng.uniform(-1.0, 1.0);
    Eigen::Matrix2d a;
    a << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    a *= scale;

    const int cell = target_cells[static_cast<std::size_t>(i)];
    Eigen::Vector2d center_r((cell % slots + 0.5) * slot + 0.1 * slot * rng.uniform(-1.0, 1.0),
                             (cell / slots + 0.5) * slot + 0.1 * slot * rng.uniform(-1.0, 1.0));
    center_r.x() = std::clamp(center_r.x(), extent, size - 1.0 - extent);
    center_r.y() = std::clamp(center_r.y(), extent, size - 1.0 - extent);

    Eigen::Matrix3d affine_about_center = Eigen::Matrix3d::Identity();
    affine_about_center.topLeftCorner<2, 2>() = a;
    affine_about_center.topRightCorner<2, 1>() = -a * center_l;
    Eigen::Matrix3d projective = Eigen::Matrix3d::Identity();
    projective(2, 0) = 1e-4 * rng.uniform(-1.0, 1.0);
    projective(2, 1) = 1e-4 * rng.uniform(-1.0, 1.0);
    Eigen::Matrix3d translate = Eigen::Matrix3d::Identity();
    translate.topRightCorner<2, 1>() = center_r;
    Eigen::Matrix3d h = translate * projective * affine_about_center;
    if (!canonicalize(h))
      throw validation_error("planted homography degenerated");
    const Eigen::Matrix3d hinv = h.inverse();
    scene.planted.push_back(Homography{h});

    const Descriptor anchor =
        detail::random_descriptor(rng, cfg.descriptor_dim, 1.0);
    for (int p = 0; p < cfg.inliers_per; ++p) {
      Correspondence c;
      c.left.position = center_l + Eigen::Vector2d(rng.uniform(-1.0, 1.0),
                                                   rng.uniform(-1.0, 1.0)) *
                                       region_half;
      const Eigen::Vector2d mapped = apply_homography(h, c.left.position);
      Eigen::Vector2d noisy = mapped;
      for (int attempt = 0; attempt < 100; ++attempt) {
        noisy = mapped + cfg.noise_sigma *
                             Eigen::Vector2d(rng.normal(), rng.normal());
        if (scene.set.right_size.contains(noisy)) break;
      }
      if (!scene.set.right_size.contains(noisy)) {
        noisy.x() = std::clamp(noisy.x(), 0.0, size - 1e-3);
        noisy.y() = std::clamp(noisy.y(), 0.0, size - 1e-3);
      }
      c.right.position = noisy;
      c.left.affine = homography_jacobian(h, c.left.position);
      c.right.affine = homography_jacobian(hinv, c.right.position);
      c.left_desc = detail::random_descriptor(rng, cfg.descriptor_dim, 0.25, &anchor);
      c.right_desc = detail::random_descriptor(rng, cfg.descriptor_dim, 0.02,
                                               &c.left_desc);
      items.push_back(std::move(c));
      labels.push_back(i);
    }
  }

  const int inlier_total = k * cfg.inliers_per;
  const int outlier_total = static_cast<int>(std::llround(
      cfg.outlier_ratio / (1.0 - cfg.outlier_ratio) * inlier_total));
  for (int p = 0; p < outlier_total; ++p) {
    Correspondence c;
    c.left.position = {rng.uniform() * size, rng.uniform() * size};
    c.right.position = {rng.uniform() * size, rng.uniform() * size};
    for (Keypoint* kp : {&c.left, &c.right}) {
      const double theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
      Eigen::Matrix2d rot;
      rot << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
      Eigen::Matrix2d stretch = Eigen::Matrix2d::Zero();
      stretch(0, 0) = rng.uniform(0.5, 2.0);
      stretch(1, 1) = rng.uniform(0.5, 2.0);
      kp->affine = rot * stretch;
    }
    c.left_desc = detail::random_descriptor(rng, cfg.descriptor_dim, 1.0);
    c.right_desc = detail::random_descriptor(rng, cfg.descriptor_dim, 1.0);
    items.push_back(std::move(c));
    labels.push_back(kOutlier);
  }

  // One joint shuffle, then positional ids.
  std::vector<int> order(items.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  rng.shuffle(order);
  scene.set.items.reserve(items.size());
  scene.set.ground_truth.reserve(items.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    Correspondence c = std::move(items[static_cast<std::size_t>(order[i])]);
    c.index = static_cast<int>(i);
    scene.set.items.push_back(std::move(c));
    scene.set.ground_truth.push_back(labels[static_cast<std::size_t>(order[i])]);
  }

  scene.set = populate_ratios(std::move(scene.set));
  validate(scene.set);
  return scene;
}

}  // namespace icgtm
