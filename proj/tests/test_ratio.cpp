#include "msw/error.hpp"
#include "msw/measures.hpp"
#include "msw/ratio.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

using namespace msw;

namespace {

GaussianSpec standard(std::size_t d) {
  const auto dd = static_cast<Eigen::Index>(d);
  return GaussianSpec{Vector::Zero(dd), Matrix::Identity(dd, dd)};
}

ot1d::AnalyticCdf1d projected_law(const GaussianSpec& g, const Direction& theta) {
  const Vector& v = theta.coords();
  return ot1d::AnalyticCdf1d::gaussian(g.mean.dot(v), v.dot(g.covariance * v));
}

// Threshold labelings along directions at and around every critical angle of the planar set.
std::size_t brute_force_shatter_2d(const SampleMatrix& pts) {
  const std::size_t n = pts.n();
  std::vector<double> angles{0.0};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = pts.row(j)(0) - pts.row(i)(0);
      const double dy = pts.row(j)(1) - pts.row(i)(1);
      const double normal = std::atan2(dy, dx) + std::numbers::pi / 2.0;
      for (const double base : {normal, normal + std::numbers::pi}) {
        for (const double off : {-1e-7, 0.0, 1e-7}) angles.push_back(base + off);
      }
    }
  }
  for (int k = 0; k < 720; ++k) angles.push_back(std::numbers::pi * k / 360.0);
  std::set<std::uint64_t> labels{0};
  for (const double a : angles) {
    std::vector<double> proj(n);
    for (std::size_t i = 0; i < n; ++i) proj[i] = std::cos(a) * pts.row(i)(0) + std::sin(a) * pts.row(i)(1);
    for (std::size_t i = 0; i < n; ++i) {
      std::uint64_t mask = 0;
      for (std::size_t k = 0; k < n; ++k) {
        if (proj[k] <= proj[i]) mask |= std::uint64_t{1} << k;
      }
      labels.insert(mask);
    }
  }
  return labels.size();
}

}  // namespace

TEST_CASE("ratio_value branches") {
  CHECK(ratio_value(0.0, 0.0) == 0.0);
  CHECK(ratio_value(0.5, 0.0) == doctest::Approx(std::sqrt(0.5)));
  CHECK(ratio_value(0.25, 1.0) == doctest::Approx(0.75));
  CHECK(ratio_value(0.3, 0.3) == 0.0);
}

TEST_CASE("single point at the law median") {
  const auto xs = test::matrix({{0.0}});
  const auto r = ratio_fixed_direction(xs, Direction::axis(1), ot1d::AnalyticCdf1d::gaussian(0.0, 1.0));
  CHECK(r.value == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
  CHECK(r.arg_t == 0.0);
  CHECK(r.left_limit);
  CHECK(r.branch == RatioBranch::LawAbove);
  CHECK(std::string(to_string(r.branch)) == "law_above");
}

TEST_CASE("quantile grid regression at n = 1000") {
  const std::size_t n = 1000;
  RowMatrix m(n, 1);
  for (std::size_t i = 0; i < n; ++i) m(static_cast<Eigen::Index>(i), 0) = ot1d::normal_quantile((i + 0.5) / n);
  const auto r = ratio_fixed_direction(SampleMatrix(m), Direction::axis(1), ot1d::AnalyticCdf1d::gaussian(0.0, 1.0));
  CHECK(r.value <= 0.08);
  CHECK(r.value > 0.0);
}

TEST_CASE("tabulated law equal to the sample gives zero") {
  RngStream rng(31, 0);
  const auto xs = test::uniform_matrix(20, 1, rng);
  const auto law = ot1d::AnalyticCdf1d::tabulated(ot1d::project(xs, Direction::axis(1)));
  CHECK(ratio_fixed_direction(xs, Direction::axis(1), law).value == 0.0);

  const auto other = test::uniform_matrix(20, 1, rng);
  const auto law2 = ot1d::AnalyticCdf1d::tabulated(ot1d::project(other, Direction::axis(1)));
  CHECK(ratio_fixed_direction(xs, Direction::axis(1), law2).value > 0.0);
}

TEST_CASE("fixed-direction result is nonnegative and reproduced at its argmax") {
  RngStream rng(32, 0);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t d = 1 + trial % 3;
    const auto xs = test::uniform_matrix(3 + trial, d, rng, 2.0);
    RngStream dir_rng(32, 1 + trial);
    Vector v(static_cast<Eigen::Index>(d));
    for (auto& c : v) c = dir_rng.normal();
    const auto theta = Direction::normalized(v);
    const auto law = ot1d::AnalyticCdf1d::gaussian(0.1 * trial - 1.0, 0.5 + 0.1 * trial);
    const auto r = ratio_fixed_direction(xs, theta, law);
    CHECK(r.value >= 0.0);
    CHECK(std::abs(ratio_at(xs, r.arg_theta, law, r.arg_t, r.left_limit) - r.value) <= 1e-10);
    // Dense check of the sup over t.
    const auto proj = ot1d::project(xs, theta);
    double dense = 0.0;
    for (int k = 0; k <= 4000; ++k) {
      const double t = proj[0] - 1.0 + (proj[proj.n() - 1] - proj[0] + 2.0) * k / 4000.0;
      dense = std::max(dense, ratio_at(xs, theta, law, t, false));
    }
    CHECK(dense <= r.value + 1e-12);
  }
}

TEST_CASE("ratio_sup: d = 1 chooses the better sign") {
  RngStream rng(33, 0);
  const auto xs = test::uniform_matrix(15, 1, rng);
  const auto spec = standard(1);
  const auto plus = ratio_fixed_direction(xs, Direction::axis(1), ot1d::AnalyticCdf1d::gaussian(0.0, 1.0));
  const auto minus = ratio_fixed_direction(xs, Direction(Vector::Constant(1, -1.0)),
                                           ot1d::AnalyticCdf1d::gaussian(0.0, 1.0));
  const auto r = ratio_sup(xs, spec, OptimizerOpts{}, RngStream(33, 1));
  CHECK(r.value == std::max(plus.value, minus.value));
}

TEST_CASE("ratio_sup dominates fixed directions") {
  const auto spec = standard(2);
  RngStream draw(34, 0);
  for (int trial = 0; trial < 5; ++trial) {
    const auto xs = sample(spec, 50, draw);
    const auto r = ratio_sup(xs, spec, OptimizerOpts{}, RngStream(34, 1 + trial));
    CHECK(std::abs(ratio_at(xs, r.arg_theta, projected_law(spec, r.arg_theta), r.arg_t, r.left_limit) - r.value) <=
          1e-10);
    for (int k = 0; k < 16; ++k) {
      Vector v(2);
      v << std::cos(k * std::numbers::pi / 8.0), std::sin(k * std::numbers::pi / 8.0);
      const auto theta = Direction::normalized(v);
      CHECK(r.value >= ratio_fixed_direction(xs, theta, projected_law(spec, theta)).value - 1e-12);
    }
  }
  // Quantile grid along the first axis.
  RowMatrix grid(40, 2);
  for (Eigen::Index i = 0; i < 40; ++i) {
    grid(i, 0) = ot1d::normal_quantile((i + 0.5) / 40.0);
    grid(i, 1) = 0.0;
  }
  const SampleMatrix gs(grid);
  const auto r = ratio_sup(gs, spec, OptimizerOpts{}, RngStream(34, 99));
  CHECK(r.value >= ratio_fixed_direction(gs, Direction::axis(2), projected_law(spec, Direction::axis(2))).value);
  CHECK_THROWS_AS(ratio_sup(gs, ParetoProductSpec{8.0, 2}, OptimizerOpts{}, RngStream(1, 1)), UnsupportedError);
}

TEST_CASE("shatter_count examples") {
  CHECK(shatter_count(test::matrix({{0.3}})) == 2);
  CHECK(shatter_count(test::matrix({{0.3, -1.0}})) == 2);
  CHECK(shatter_count(test::matrix({{0, 0}, {1, 0}, {0, 1}})) == 8);
  CHECK(shatter_count(test::matrix({{0, 0}, {1, 0}, {1, 1}, {0, 1}})) == 14);
  CHECK(shatter_count(test::matrix({{0.0}, {1.0}, {2.0}})) == 6);
  CHECK_THROWS_AS(shatter_count(test::matrix({{0, 0, 0}})), ScaleError);
  RngStream rng(35, 0);
  CHECK_THROWS_AS(shatter_count(test::uniform_matrix(11, 2, rng)), ScaleError);
}

TEST_CASE("shatter_count matches brute force and respects the VC bound") {
  RngStream rng(36, 0);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 1 + trial % 8;
    const auto pts = test::uniform_matrix(n, 2, rng);
    const auto count = shatter_count(pts);
    CHECK(count == brute_force_shatter_2d(pts));
    CHECK(count <= vc_bound(n, 2));
    CHECK(count <= (std::uint64_t{1} << n));
  }
  // Collinear and duplicated points.
  CHECK(shatter_count(test::matrix({{0, 0}, {1, 1}, {2, 2}, {3, 3}})) == 8);
  CHECK(shatter_count(test::matrix({{0, 0}, {0, 0}, {1, 0}})) == 4);
}

TEST_CASE("shatter_count is affinely invariant") {
  RngStream rng(37, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const auto pts = test::uniform_matrix(2 + trial % 7, 2, rng);
    Matrix a(2, 2);
    do {
      a << rng.normal(), rng.normal(), rng.normal(), rng.normal();
    } while (std::abs(a.determinant()) < 0.1);
    RowMatrix moved = pts.data() * a.transpose();
    moved.rowwise() += Eigen::RowVector2d(rng.normal(), rng.normal());
    CHECK(shatter_count(SampleMatrix(moved)) == shatter_count(pts));
  }
}

TEST_CASE("vc_bound") {
  CHECK(vc_bound(1, 1) == 4);
  CHECK(vc_bound(3, 2) == 64);
  CHECK(vc_bound(10, 2) == 1331);
  CHECK(vc_bound(10, 2, true) == 1331ull * 1331ull);
  CHECK_THROWS_AS(vc_bound(1000000, 5), ScaleError);
  CHECK(vc_bound_real(1e6, 5) == doctest::Approx(std::pow(1e6 + 1.0, 6.0)));
}

TEST_CASE("ratio_tail_bound") {
  const auto zero = ratio_tail_bound(5, 2, 0.0);
  CHECK(zero.raw == doctest::Approx(8.0 * std::pow(11.0, 3.0)));
  CHECK(zero.clipped == 1.0);
  const auto small = ratio_tail_bound(1, 1, 1.0);
  CHECK(small.raw == doctest::Approx(72.0 * std::exp(-0.25)));
  CHECK(small.raw == doctest::Approx(56.07).epsilon(1e-3));
  CHECK(small.clipped == 1.0);
  const auto big = ratio_tail_bound(10000, 2, 0.2);
  CHECK(std::log(big.raw / 8.0) == doctest::Approx(3.0 * std::log(20001.0) - 100.0));
  CHECK(big.clipped < 1e-29);
  CHECK_THROWS_AS(ratio_tail_bound(10, 2, -0.1), DomainError);
}
