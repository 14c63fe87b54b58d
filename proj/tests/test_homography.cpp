#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "icgtm/icgtm.hpp"

using namespace icgtm;

namespace {

std::vector<Eigen::Vector2d> random_points(std::mt19937_64& rng, int n,
                                           double lo = -50.0,
                                           double hi = 50.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<Eigen::Vector2d> pts;
  for (int i = 0; i < n; ++i) pts.emplace_back(u(rng), u(rng));
  return pts;
}

std::vector<Eigen::Vector2d> map_points(const Eigen::Matrix3d& h,
                                        const std::vector<Eigen::Vector2d>& p) {
  std::vector<Eigen::Vector2d> out;
  for (const auto& q : p) out.push_back(apply_homography(h, q));
  return out;
}

double max_entry_gap(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("homography application and reprojection error") {
  Eigen::Matrix3d t = Eigen::Matrix3d::Identity();
  t(0, 2) = 3.0;
  t(1, 2) = 4.0;
  const Eigen::Vector2d p{10.0, 20.0};
  CHECK(apply_homography(t, p) == Eigen::Vector2d{13.0, 24.0});
  CHECK(reprojection_error(t, p, p) == 5.0);

  SECTION("projective division") {
    Eigen::Matrix3d h = Eigen::Matrix3d::Identity();
    h(2, 0) = 0.01;
    const Eigen::Vector2d q = apply_homography(h, {10.0, 0.0});
    CHECK_THAT(q.x(), Catch::Matchers::WithinAbs(10.0 / 1.1, 1e-12));
  }
  SECTION("points mapped to infinity score an infinite error") {
    Eigen::Matrix3d h = Eigen::Matrix3d::Identity();
    h(2, 2) = 0.0;
    h(2, 0) = 1.0;
    CHECK(reprojection_error(h, {0.0, 5.0}, {0.0, 5.0}) ==
          std::numeric_limits<double>::infinity());
  }
}

TEST_CASE("jacobian of an affine homography is its linear block") {
  Eigen::Matrix3d h = Eigen::Matrix3d::Identity();
  h(0, 0) = 1.5;
  h(0, 1) = -0.25;
  h(1, 0) = 0.3;
  h(1, 1) = 0.8;
  h(0, 2) = 12.0;
  const Eigen::Matrix2d j = homography_jacobian(h, {7.0, -3.0});
  CHECK((j - h.block<2, 2>(0, 0)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("jacobian matches central finite differences") {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 50; ++t) {
    const Eigen::Matrix3d h = test::random_homography(rng);
    const auto pts = random_points(rng, 1);
    const Eigen::Vector2d p = pts[0];
    const Eigen::Matrix2d j = homography_jacobian(h, p);
    const double step = 1e-5;
    for (int axis = 0; axis < 2; ++axis) {
      Eigen::Vector2d hi = p, lo = p;
      hi[axis] += step;
      lo[axis] -= step;
      const Eigen::Vector2d diff =
          (apply_homography(h, hi) - apply_homography(h, lo)) / (2.0 * step);
      CAPTURE(t, axis);
      CHECK_THAT(j(0, axis), Catch::Matchers::WithinAbs(diff.x(), 1e-5));
      CHECK_THAT(j(1, axis), Catch::Matchers::WithinAbs(diff.y(), 1e-5));
    }
  }
}

TEST_CASE("hartley normalization centers and scales") {
  std::mt19937_64 rng(23);
  const auto pts = random_points(rng, 9, 10.0, 400.0);
  const auto t = detail::hartley_normalization(pts);
  REQUIRE(t.has_value());
  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
  double mean_norm = 0.0;
  for (const auto& p : pts) {
    const Eigen::Vector2d q = apply_homography(*t, p);
    centroid += q;
    mean_norm += q.norm();
  }
  centroid /= static_cast<double>(pts.size());
  mean_norm /= static_cast<double>(pts.size());
  CHECK(centroid.norm() < 1e-9);
  CHECK_THAT(mean_norm, Catch::Matchers::WithinAbs(std::sqrt(2.0), 1e-9));

  SECTION("coincident points cannot be normalized") {
    const std::vector<Eigen::Vector2d> same(5, Eigen::Vector2d{3.0, 3.0});
    CHECK_FALSE(detail::hartley_normalization(same).has_value());
  }
}

TEST_CASE("collinearity and quad degeneracy detection") {
  const Eigen::Vector2d a{0.0, 0.0}, b{10.0, 10.0}, c{20.0, 20.0},
      d{5.0, -7.0};
  CHECK(detail::three_collinear(a, b, c));
  CHECK_FALSE(detail::three_collinear(a, b, d));
  const Eigen::Vector2d quad_bad[4] = {a, b, c, d};
  CHECK(detail::quad_degenerate(quad_bad));
  const Eigen::Vector2d quad_ok[4] = {a, b, d, Eigen::Vector2d{-4.0, 9.0}};
  CHECK_FALSE(detail::quad_degenerate(quad_ok));
}

TEST_CASE("dlt recovers a planted homography from noiseless points") {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 50; ++t) {
    const Eigen::Matrix3d planted = canonical_homography(
        test::random_homography(rng)).h;
    const auto left = random_points(rng, 8);
    const auto right = map_points(planted, left);
    const auto fit = fit_homography_dlt(left, right);
    REQUIRE(fit.has_value());
    CAPTURE(t);
    CHECK(max_entry_gap(fit->h, planted) < 1e-9);
  }
  SECTION("fewer than four points is refused") {
    const auto left = random_points(rng, 3);
    CHECK_FALSE(fit_homography_dlt(left, left).has_value());
  }
  SECTION("mismatched lengths are refused") {
    const auto left = random_points(rng, 5);
    auto right = left;
    right.pop_back();
    CHECK_FALSE(fit_homography_dlt(left, right).has_value());
  }
}

TEST_CASE("ransac tolerates wild outliers") {
  std::mt19937_64 rng(47);
  std::uniform_real_distribution<double> wild(-500.0, 500.0);
  for (int t = 0; t < 10; ++t) {
    const Eigen::Matrix3d planted = canonical_homography(
        test::random_homography(rng)).h;
    auto left = random_points(rng, 30);
    auto right = map_points(planted, left);
    for (int i = 0; i < 10; ++i) {  // 25% of the final 40
      left.emplace_back(wild(rng), wild(rng));
      right.emplace_back(wild(rng), wild(rng));
    }
    const auto fit = ransac_homography(left, right, 500, 1e-3, 7 + t);
    REQUIRE(fit.has_value());
    CAPTURE(t);
    CHECK(max_entry_gap(fit->h, planted) < 1e-4);
  }
}

TEST_CASE("ransac is deterministic in its seed") {
  std::mt19937_64 rng(59);
  const Eigen::Matrix3d planted = test::random_homography(rng);
  auto left = random_points(rng, 25);
  auto right = map_points(planted, left);
  std::normal_distribution<double> jitter(0.0, 0.5);
  for (auto& p : right) p += Eigen::Vector2d{jitter(rng), jitter(rng)};
  const auto a = ransac_homography(left, right, 300, 2.0, 42);
  const auto b = ransac_homography(left, right, 300, 2.0, 42);
  REQUIRE(a.has_value());
  REQUIRE(b.has_value());
  CHECK(a->h == b->h);

  SECTION("and across thread counts") {
    set_thread_count(1);
    const auto serial = ransac_homography(left, right, 300, 2.0, 42);
    set_thread_count(8);
    const auto parallel = ransac_homography(left, right, 300, 2.0, 42);
    set_thread_count(0);
    REQUIRE(serial.has_value());
    REQUIRE(parallel.has_value());
    CHECK(serial->h == parallel->h);
  }
}

TEST_CASE("ransac guards its inputs") {
  std::mt19937_64 rng(61);
  const auto left = random_points(rng, 3);
  CHECK_FALSE(ransac_homography(left, left, 100, 1.0, 0).has_value());
  const auto more = random_points(rng, 10);
  CHECK_FALSE(ransac_homography(more, more, 0, 1.0, 0).has_value());
  CHECK_FALSE(ransac_homography(more, more, 100, 0.0, 0).has_value());
}

TEST_CASE("reprojection error overload reads correspondence positions") {
  Homography h;
  h.h(0, 2) = 3.0;
  h.h(1, 2) = 4.0;
  h.h = canonical_homography(h.h).h;
  const Correspondence c = test::make_corr(0, 1.0, 1.0, 1.0, 1.0);
  CHECK_THAT(reprojection_error(h, c), Catch::Matchers::WithinAbs(5.0, 1e-12));
}
