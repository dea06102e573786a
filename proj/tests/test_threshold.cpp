#include <cmath>

#include "doctest.h"
#include "osdm/ratios.hpp"
#include "osdm/threshold.hpp"
#include "osdm/workbench.hpp"
#include "test_util.hpp"

using namespace osdm;
using testutil::default_params;
using testutil::default_tracking_params;

namespace {

const ThresholdKind kSwitchingKinds[3] = {
    ThresholdKind::BaseS, ThresholdKind::FlexPurchaseS,
    ThresholdKind::FlexDeliveryS};
const ThresholdKind kTrackingKinds[3] = {
    ThresholdKind::BaseT, ThresholdKind::FlexPurchaseT,
    ThresholdKind::FlexDeliveryT};

}  // namespace

TEST_CASE("base threshold initial value matches the identity at w = 0") {
  const CostParams p = default_params();
  const RatioSet r = ratios(p);
  const double P = big_P(p);
  const double kap = kappa(p);
  const AnalyticThreshold th = make_threshold(ThresholdKind::BaseS, p, 1.0);
  const double expected = (P + 2.0 * kap) / r.alpha + 2.0 * p.gamma -
                          p.epsilon * p.p_max - 2.0 * kap / p.T;
  CHECK(th.value_at(0.0) == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("all six threshold kinds are strictly decreasing") {
  for (int mode = 0; mode < 2; ++mode) {
    const CostParams p = mode == 0 ? default_params() : default_tracking_params();
    const auto& kinds = mode == 0 ? kSwitchingKinds : kTrackingKinds;
    for (const ThresholdKind kind : kinds) {
      const AnalyticThreshold th = make_threshold(kind, p, 1.0);
      double prev = th.value_at(0.0);
      for (int i = 1; i <= 1000; ++i) {
        const double w = static_cast<double>(i) / 1000.0;
        const double v = th.value_at(w);
        CHECK(v < prev);
        prev = v;
      }
    }
  }
}

TEST_CASE("threshold integral: endpoints, additivity, quadrature") {
  const CostParams p = default_params();
  const double d = 2.5;
  const AnalyticThreshold th = make_threshold(ThresholdKind::BaseS, p, d);

  CHECK(th.integral(0.7, 0.7) == 0.0);

  for (double w : {0.3 * d, 0.5 * d, 0.9 * d}) {
    const double split = th.integral(0.0, w) + th.integral(w, d);
    const double whole = th.integral(0.0, d);
    CHECK(std::abs(split - whole) <= 1e-12 * std::abs(whole));
  }

  // 1e5-point trapezoid quadrature oracle over [0, d].
  const int N = 100000;
  double quad = 0.0;
  for (int i = 0; i < N; ++i) {
    const double a = d * i / N, b = d * (i + 1) / N;
    quad += 0.5 * (th.value_at(a) + th.value_at(b)) * (b - a);
  }
  CHECK(std::abs(th.integral(0.0, d) - quad) <=
        1e-8 * std::abs(th.integral(0.0, d)));
}

TEST_CASE("threshold inverse: endpoints and round trip") {
  const CostParams p = default_params();
  const double d = 1.7;
  for (const ThresholdKind kind : kSwitchingKinds) {
    const AnalyticThreshold th = make_threshold(kind, p, d);
    CHECK(th.inverse(th.value_at(0.0)) == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(th.inverse(th.value_at(d)) == doctest::Approx(d).epsilon(1e-10));
    CHECK(th.inverse(th.value_at(0.0) + 1.0) == 0.0);
    CHECK(th.inverse(th.value_at(d) - 1.0) == d);
    for (int i = 1; i <= 9; ++i) {
      const double w = d * i / 10.0;
      CHECK(std::abs(th.inverse(th.value_at(w)) - w) <= 1e-10 * d);
    }
  }
}

TEST_CASE("free-function wrappers agree with the members") {
  const CostParams p = default_params();
  const AnalyticThreshold th = make_threshold(ThresholdKind::FlexPurchaseS, p, 1.0);
  CHECK(integral(th, 0.2, 0.8) == th.integral(0.2, 0.8));
  CHECK(inverse(th, 50.0) == th.inverse(50.0));
}

TEST_CASE("identity residuals vanish on dense grids for random parameters") {
  // 6 random admissible sets per smoothing mode (the acceptance suite runs
  // the full 20-set version).
  for (int i = 0; i < 12; ++i) {
    const bool tracking = i % 2 == 1;
    const CostParams p = random_admissible_params(500 + i, tracking);
    const double tol = 1e-7 * p.p_max;
    CAPTURE(i);
    for (int k = 0; k <= 1000; ++k) {
      const double w = static_cast<double>(k) / 1000.0;
      CHECK(std::abs(base_identity_residual(p, w)) <= tol);
    }
    for (int k = 0; k <= 100; ++k) {
      const double w = static_cast<double>(k) / 100.0;
      for (int l = 0; l <= k; ++l) {
        const double v = static_cast<double>(l) / 100.0;
        CHECK(std::abs(flex_identity_residual(p, w, v)) <= tol);
      }
    }
  }
}

TEST_CASE("threshold scales with driver size") {
  const CostParams p = default_params();
  const AnalyticThreshold th1 = make_threshold(ThresholdKind::BaseS, p, 1.0);
  const AnalyticThreshold th3 = make_threshold(ThresholdKind::BaseS, p, 3.0);
  // Same shape in normalized progress; integral scales by d.
  CHECK(th3.value_at(1.5) == doctest::Approx(th1.value_at(0.5)).epsilon(1e-12));
  CHECK(th3.integral(0.0, 3.0) ==
        doctest::Approx(3.0 * th1.integral(0.0, 1.0)).epsilon(1e-12));
}
