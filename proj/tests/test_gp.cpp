#include <cmath>
#include <cstddef>
#include <vector>

#include "doctest.h"
#include "lagsynth/gp.hpp"
#include "lagsynth/rng.hpp"

using namespace lagsynth;

TEST_SUITE_BEGIN("gp");

TEST_CASE("matern52: unit at zero distance, decays monotonically") {
  const std::vector<double> ll{0.0};  // length scale 1
  const double a = 0.2;
  double prev = 2.0;
  for (double dist : {0.0, 0.1, 0.3, 0.8, 2.0, 5.0}) {
    const double b = a + dist;
    const double k = gp::matern52(&a, &b, 1, ll);
    if (dist == 0.0) CHECK(k == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(k > 0.0);
    CHECK(k < prev);
    prev = k;
  }
  // ARD: doubling the length scale equals halving the distance.
  const std::vector<double> wide{std::log(2.0)};
  const double b1 = a + 1.0, b2 = a + 0.5;
  CHECK(gp::matern52(&a, &b1, 1, wide) ==
        doctest::Approx(gp::matern52(&a, &b2, 1, ll)).epsilon(1e-14));
}

namespace {

gp::GpModel fit_sine(std::size_t n) {
  Matrix x(n, 1);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x(i, 0) = double(i) / double(n - 1);
    y[i] = std::sin(2.0 * M_PI * x(i, 0));
  }
  return gp::fit_gp(x, y);
}

}  // namespace

TEST_CASE("fit_gp: near-interpolation of smooth noiseless data") {
  const auto model = fit_sine(12);
  for (std::size_t i = 0; i < model.size(); ++i) {
    const double xp = model.x(i, 0);
    const auto post = gp::predict(model, &xp);
    CHECK(std::fabs(post.mean - std::sin(2.0 * M_PI * xp)) < 1e-3);
    CHECK(post.sd < 0.05);
  }
  // Midpoints are reconstructed well from 12 samples of a smooth function.
  for (std::size_t i = 0; i + 1 < model.size(); ++i) {
    const double xp = (model.x(i, 0) + model.x(i + 1, 0)) / 2.0;
    const auto post = gp::predict(model, &xp);
    CHECK(std::fabs(post.mean - std::sin(2.0 * M_PI * xp)) < 0.05);
  }
}

TEST_CASE("fit_gp: posterior sd grows away from the data") {
  Matrix x(6, 1);
  std::vector<double> y(6);
  for (std::size_t i = 0; i < 6; ++i) {
    x(i, 0) = 0.05 * double(i);  // clustered at the left edge
    y[i] = std::cos(3.0 * x(i, 0));
  }
  const auto model = gp::fit_gp(x, y);
  const double near = 0.1, far = 1.0;
  CHECK(gp::predict(model, &near).sd < gp::predict(model, &far).sd);
}

TEST_CASE("fit_gp: deterministic, no hidden randomness") {
  const auto m1 = fit_sine(10);
  const auto m2 = fit_sine(10);
  REQUIRE(m1.log_length.size() == m2.log_length.size());
  for (std::size_t i = 0; i < m1.log_length.size(); ++i) {
    CHECK(m1.log_length[i] == m2.log_length[i]);
  }
  CHECK(m1.log_signal_var == m2.log_signal_var);
  const double xp = 0.37;
  CHECK(gp::predict(m1, &xp).mean == gp::predict(m2, &xp).mean);
  CHECK(gp::predict(m1, &xp).sd == gp::predict(m2, &xp).sd);
}

TEST_CASE("fit_gp: constant targets stay constant with finite sd") {
  Matrix x(5, 1);
  for (std::size_t i = 0; i < 5; ++i) x(i, 0) = 0.2 * double(i);
  const std::vector<double> y(5, 3.25);
  const auto model = gp::fit_gp(x, y);
  for (double xp : {0.0, 0.33, 0.9}) {
    const auto post = gp::predict(model, &xp);
    CHECK(post.mean == doctest::Approx(3.25).epsilon(1e-9));
    CHECK(std::isfinite(post.sd));
    CHECK(post.sd >= 0.0);
  }
}

TEST_CASE("fit_gp: 2-d response surface localizes a quadratic minimum") {
  const std::size_t n = 24;
  Matrix x(n, 2);
  std::vector<double> y(n);
  const auto pts = rng::halton2d(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    x(i, 0) = pts[i].first;
    x(i, 1) = pts[i].second;
    y[i] = (x(i, 0) - 0.3) * (x(i, 0) - 0.3) +
           (x(i, 1) - 0.7) * (x(i, 1) - 0.7);
  }
  const auto model = gp::fit_gp(x, y);

  double best_mean = 1e30, bx = 0.0, by = 0.0;
  for (int i = 0; i <= 40; ++i) {
    for (int j = 0; j <= 40; ++j) {
      const double p[2] = {i / 40.0, j / 40.0};
      const auto post = gp::predict(model, p);
      if (post.mean < best_mean) {
        best_mean = post.mean;
        bx = p[0];
        by = p[1];
      }
    }
  }
  CHECK(std::fabs(bx - 0.3) < 0.1);
  CHECK(std::fabs(by - 0.7) < 0.1);
}

TEST_CASE("fit_gp: input validation") {
  Matrix x(2, 1);
  CHECK_THROWS(gp::fit_gp(x, std::vector<double>{1.0}));  // length mismatch
  CHECK_THROWS(gp::fit_gp(Matrix(), {}));                 // empty
  CHECK_THROWS(gp::fit_gp(x, std::vector<double>{1.0, 2.0}, 0.0));  // jitter
}

TEST_SUITE_END();
