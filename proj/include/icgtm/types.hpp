#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace icgtm {

// Label conventions shared by ground truth and results:
//   >= 0  consistency / cluster id
//   -1    outlier
//   -2    ground truth unknown, or (in ablation results) selected by the
//         local games but never assigned to a cluster
inline constexpr int kOutlier = -1;
inline constexpr int kUnlabeled = -2;

class validation_error : public std::runtime_error {
 public:
  explicit validation_error(const std::string& msg) : std::runtime_error(msg) {}
};

class io_error : public std::runtime_error {
 public:
  explicit io_error(const std::string& msg) : std::runtime_error(msg) {}
};

class pipeline_error : public std::runtime_error {
 public:
  explicit pipeline_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct ImageSize {
  int width = 0;
  int height = 0;

  // Keypoints live in the half-open box [0, width) x [0, height).
  bool contains(const Eigen::Vector2d& p) const {
    return p.x() >= 0.0 && p.x() < static_cast<double>(width) &&
           p.y() >= 0.0 && p.y() < static_cast<double>(height);
  }

  friend bool operator==(const ImageSize&, const ImageSize&) = default;
};

// Affine-covariant keypoint: a position plus the local 2x2 frame the
// detector reports around it.
struct Keypoint {
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
  Eigen::Matrix2d affine = Eigen::Matrix2d::Identity();
};

struct Descriptor {
  std::vector<double> values;

  std::size_t size() const { return values.size(); }

  double distance(const Descriptor& other) const {
    if (values.size() != other.values.size())
      throw validation_error("descriptor dimension mismatch (" +
                             std::to_string(values.size()) + " vs " +
                             std::to_string(other.values.size()) + ")");
    double acc = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double d = values[i] - other.values[i];
      acc += d * d;
    }
    return std::sqrt(acc);
  }
};

struct Correspondence {
  int index = 0;  // stable id, unique within a set
  Keypoint left;
  Keypoint right;
  Descriptor left_desc;
  Descriptor right_desc;
  double ratio = -1.0;  // Lowe ratio in [0,1]; negative = not populated

  bool has_ratio() const { return ratio >= 0.0; }
};

struct CorrespondenceSet {
  std::vector<Correspondence> items;
  ImageSize left_size;
  ImageSize right_size;
  // Aligned with items when non-empty; kUnlabeled marks unannotated entries.
  std::vector<int> ground_truth;

  int size() const { return static_cast<int>(items.size()); }

  bool has_ground_truth() const {
    return std::any_of(ground_truth.begin(), ground_truth.end(),
                       [](int g) { return g != kUnlabeled; });
  }

  bool has_full_ground_truth() const {
    return !items.empty() && ground_truth.size() == items.size() &&
           std::none_of(ground_truth.begin(), ground_truth.end(),
                        [](int g) { return g == kUnlabeled; });
  }

  // Number of distinct annotated consistency ids (= max id + 1).
  int consistency_count() const {
    int top = -1;
    for (int g : ground_truth) top = std::max(top, g);
    return top + 1;
  }
};

// Plane-to-plane projective map, stored so the largest-magnitude entry is
// exactly 1 (see canonicalize).
struct Homography {
  Eigen::Matrix3d h = Eigen::Matrix3d::Identity();
};

// Scales m in place so its largest-magnitude entry (first in row-major order
// on ties) becomes exactly +1. Returns false when m is zero or non-finite.
inline bool canonicalize(Eigen::Matrix3d& m) {
  int best_r = -1, best_c = -1;
  double best = 0.0;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      const double v = m(r, c);
      if (!std::isfinite(v)) return false;
      if (std::abs(v) > best) {
        best = std::abs(v);
        best_r = r;
        best_c = c;
      }
    }
  if (best_r < 0) return false;
  m /= m(best_r, best_c);
  m(best_r, best_c) = 1.0;  // exact, despite rounding in the division
  return true;
}

inline Homography canonical_homography(Eigen::Matrix3d m) {
  if (!canonicalize(m))
    throw validation_error("homography is zero or non-finite");
  return Homography{m};
}

struct StageTimings {
  double blocks_ms = 0.0;
  double games_ms = 0.0;
  double clustering_ms = 0.0;
  double recovery_ms = 0.0;

  double total_ms() const {
    return blocks_ms + games_ms + clustering_ms + recovery_ms;
  }
};

struct Diagnostics {
  int blocks_kept = 0;
  int game_survivors = 0;
  int clusters_found = 0;
  int recovered_inliers = 0;
  StageTimings timings;
};

struct MatchResult {
  std::vector<int> indices;  // stable correspondence ids, aligned with labels
  std::vector<int> labels;
  std::vector<Homography> homographies;
  Diagnostics diagnostics;
};

namespace detail {

inline bool finite(const Eigen::Vector2d& v) {
  return std::isfinite(v.x()) && std::isfinite(v.y());
}

inline bool finite(const Eigen::Matrix2d& m) {
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c)
      if (!std::isfinite(m(r, c))) return false;
  return true;
}

inline bool finite(const Eigen::Matrix3d& m) {
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c)
      if (!std::isfinite(m(r, c))) return false;
  return true;
}

inline void check_keypoint(const Keypoint& k, const ImageSize& size,
                           const char* side, int position) {
  const std::string where =
      std::string(side) + " keypoint of correspondence " + std::to_string(position);
  if (!finite(k.position) || !finite(k.affine))
    throw validation_error(where + " has non-finite values");
  if (!size.contains(k.position))
    throw validation_error(where + " position out of bounds");
  if (std::abs(k.affine.determinant()) < 1e-12)
    throw validation_error(where + " has a singular affine frame");
}

}  // namespace detail

inline void validate(const CorrespondenceSet& set) {
  if (set.left_size.width <= 0 || set.left_size.height <= 0 ||
      set.right_size.width <= 0 || set.right_size.height <= 0)
    throw validation_error("image sizes must be positive");
  if (!set.ground_truth.empty() && set.ground_truth.size() != set.items.size())
    throw validation_error("ground truth length does not match item count");

  std::vector<int> seen;
  seen.reserve(set.items.size());
  std::size_t dim = 0;
  for (std::size_t i = 0; i < set.items.size(); ++i) {
    const Correspondence& c = set.items[i];
    const int pos = static_cast<int>(i);
    detail::check_keypoint(c.left, set.left_size, "left", pos);
    detail::check_keypoint(c.right, set.right_size, "right", pos);
    if (c.has_ratio() && !(c.ratio <= 1.0))
      throw validation_error("correspondence " + std::to_string(pos) +
                             " has ratio outside [0,1]");
    if (c.left_desc.size() != c.right_desc.size())
      throw validation_error("correspondence " + std::to_string(pos) +
                             " has mismatched descriptor dimensions");
    if (i == 0)
      dim = c.left_desc.size();
    else if (c.left_desc.size() != dim)
      throw validation_error("correspondence " + std::to_string(pos) +
                             " breaks the common descriptor dimension");
    for (double v : c.left_desc.values)
      if (!std::isfinite(v))
        throw validation_error("correspondence " + std::to_string(pos) +
                               " has a non-finite left descriptor");
    for (double v : c.right_desc.values)
      if (!std::isfinite(v))
        throw validation_error("correspondence " + std::to_string(pos) +
                               " has a non-finite right descriptor");
    seen.push_back(c.index);
  }
  std::sort(seen.begin(), seen.end());
  if (std::adjacent_find(seen.begin(), seen.end()) != seen.end())
    throw validation_error("correspondence ids are not unique");

  if (!set.ground_truth.empty()) {
    int top = -1;
    for (std::size_t i = 0; i < set.ground_truth.size(); ++i) {
      const int g = set.ground_truth[i];
      if (g < kUnlabeled)
        throw validation_error("ground truth label at " + std::to_string(i) +
                               " is invalid");
      top = std::max(top, g);
    }
    if (top >= 0) {
      std::vector<char> present(static_cast<std::size_t>(top) + 1, 0);
      for (int g : set.ground_truth)
        if (g >= 0) present[static_cast<std::size_t>(g)] = 1;
      for (int id = 0; id <= top; ++id)
        if (!present[static_cast<std::size_t>(id)])
          throw validation_error("ground truth consistency ids are not "
                                 "contiguous: id " + std::to_string(id) +
                                 " is missing");
    }
  }
}

inline void validate(const MatchResult& result) {
  if (result.indices.size() != result.labels.size())
    throw validation_error("result index and label counts differ");
  const int k = static_cast<int>(result.homographies.size());
  for (std::size_t i = 0; i < result.labels.size(); ++i) {
    const int label = result.labels[i];
    if (label < kUnlabeled || label >= k)
      throw validation_error("label at " + std::to_string(i) +
                             " does not name a cluster");
  }
  std::vector<int> seen(result.indices);
  std::sort(seen.begin(), seen.end());
  if (std::adjacent_find(seen.begin(), seen.end()) != seen.end())
    throw validation_error("result correspondence ids are not unique");
  for (std::size_t i = 0; i < result.homographies.size(); ++i) {
    const Eigen::Matrix3d& h = result.homographies[i].h;
    if (!detail::finite(h))
      throw validation_error("homography " + std::to_string(i) +
                             " has non-finite entries");
    const double top = h.cwiseAbs().maxCoeff();
    if (std::abs(top - 1.0) > 1e-9)
      throw validation_error("homography " + std::to_string(i) +
                             " is not in canonical scale");
  }
}

// Tolerant comparisons used by round-trip tests.
inline bool approx_equal(const CorrespondenceSet& a, const CorrespondenceSet& b,
                         double tol) {
  if (a.items.size() != b.items.size()) return false;
  if (!(a.left_size == b.left_size) || !(a.right_size == b.right_size))
    return false;
  if (a.ground_truth != b.ground_truth) return false;
  for (std::size_t i = 0; i < a.items.size(); ++i) {
    const Correspondence& x = a.items[i];
    const Correspondence& y = b.items[i];
    if (x.index != y.index) return false;
    if ((x.left.position - y.left.position).cwiseAbs().maxCoeff() > tol ||
        (x.right.position - y.right.position).cwiseAbs().maxCoeff() > tol)
      return false;
    if ((x.left.affine - y.left.affine).cwiseAbs().maxCoeff() > tol ||
        (x.right.affine - y.right.affine).cwiseAbs().maxCoeff() > tol)
      return false;
    if (x.has_ratio() != y.has_ratio()) return false;
    if (x.has_ratio() && std::abs(x.ratio - y.ratio) > tol) return false;
    if (x.left_desc.size() != y.left_desc.size() ||
        x.right_desc.size() != y.right_desc.size())
      return false;
    for (std::size_t d = 0; d < x.left_desc.size(); ++d)
      if (std::abs(x.left_desc.values[d] - y.left_desc.values[d]) > tol)
        return false;
    for (std::size_t d = 0; d < x.right_desc.size(); ++d)
      if (std::abs(x.right_desc.values[d] - y.right_desc.values[d]) > tol)
        return false;
  }
  return true;
}

inline bool approx_equal(const MatchResult& a, const MatchResult& b, double tol) {
  if (a.indices != b.indices || a.labels != b.labels) return false;
  if (a.homographies.size() != b.homographies.size()) return false;
  for (std::size_t i = 0; i < a.homographies.size(); ++i)
    if ((a.homographies[i].h - b.homographies[i].h).cwiseAbs().maxCoeff() > tol)
      return false;
  return true;
}

}  // namespace icgtm
