#include <cmath>

#include "doctest.h"
#include "osdm/lambert.hpp"
#include "osdm/ratios.hpp"
#include "osdm/workbench.hpp"
#include "test_util.hpp"

using namespace osdm;
using testutil::default_params;

TEST_CASE("lambert_w0 reference points") {
  CHECK(lambert_w0(0.0) == 0.0);
  CHECK(lambert_w0(-1.0 / std::exp(1.0)) == doctest::Approx(-1.0).epsilon(1e-6));
  CHECK(lambert_w0(1.0) == doctest::Approx(0.5671432904097838).epsilon(1e-12));
}

TEST_CASE("lambert_w0 residual bound on a wide grid") {
  for (int i = 0; i <= 2000; ++i) {
    // Log-spaced sweep from near the branch point up to 1e6.
    const double x = -1.0 / std::exp(1.0) + std::pow(10.0, -6.0 + 12.0 * i / 2000.0);
    const double w = lambert_w0(x);
    CHECK(std::abs(w * std::exp(w) - x) <= 1e-12 * std::max(1.0, std::abs(x)));
  }
}

TEST_CASE("ratios at default parameters: residuals and orderings") {
  const CostParams p = default_params();
  const RatioSet r = ratios(p);
  CHECK(r.alpha == doctest::Approx(5.729741).epsilon(1e-5));
  CHECK(std::abs(alpha_residual(p, r.alpha)) <= 1e-9);
  CHECK(std::abs(alpha_T_residual(p, r.alpha_T)) <= 1e-9);
  CHECK(std::abs(alpha_B_residual(p, r.alpha_B)) <= 1e-9);
  CHECK(std::abs(alpha_RORO_residual(p, r.alpha_RORO)) <= 1e-9);
  CHECK(std::abs(alpha_IF_residual(p, r.alpha_IF)) <= 1e-9);
  CHECK(r.alpha >= 1.0);
  CHECK(r.alpha_B >= 1.0);
  CHECK(r.alpha_B < r.alpha);
  CHECK(r.alpha_IF < r.alpha);
  CHECK(r.alpha_IB < r.alpha_B);
}

TEST_CASE("alpha tends to 1 when prices are certain") {
  CostParams p;
  p.p_min = 50.0;
  p.p_max = 50.0;
  p.gamma = 0.0;
  p.delta = 0.0;
  p.c = 0.0;
  p.epsilon = 0.0;
  p.T = 48;
  p.delivery_mode = DeliveryMode::Constant;
  const RatioSet r = ratios(p);
  CHECK(r.alpha <= 1.0 + 1e-6);
  CHECK(r.alpha >= 1.0 - 1e-9);
}

TEST_CASE("alpha is non-decreasing in gamma") {
  CostParams p = default_params();
  double prev = 0.0;
  for (int i = 0; i <= 20; ++i) {
    p.gamma = 90.0 * i / 20.0;  // keeps gamma + delta <= (p_max - p_min)/2
    const double a = ratios(p).alpha;
    CHECK(a >= prev - 1e-12);
    prev = a;
  }
}

TEST_CASE("ratio residuals and orderings on 50 random admissible sets") {
  for (int i = 0; i < 50; ++i) {
    const CostParams p = random_admissible_params(9000 + i, i % 2 == 1);
    CAPTURE(i);
    const RatioSet r = ratios(p);
    CHECK(std::abs(alpha_residual(p, r.alpha)) <= 1e-9);
    CHECK(std::abs(alpha_T_residual(p, r.alpha_T)) <= 1e-9);
    CHECK(std::abs(alpha_B_residual(p, r.alpha_B)) <= 1e-9);
    CHECK(std::abs(alpha_RORO_residual(p, r.alpha_RORO)) <= 1e-9);
    CHECK(r.alpha >= 1.0);
    CHECK(r.alpha_T >= 1.0);
    CHECK(r.alpha_B >= 1.0);
    CHECK(r.alpha_RORO >= 1.0);
    CHECK(r.alpha_IF >= 1.0);
    CHECK(r.alpha_IB >= 1.0);
    CHECK(r.alpha_B < r.alpha);
    CHECK(r.alpha_IF < r.alpha);
    // The increasing-delivery base bound coincides with the base bound when
    // the delivery factor has no storage dependence (c = 0); it is strictly
    // smaller otherwise.
    if (p.c > 0.0) {
      CHECK(r.alpha_IB < r.alpha_B);
    } else {
      CHECK(r.alpha_IB == doctest::Approx(r.alpha_B).epsilon(1e-12));
    }
  }
}
