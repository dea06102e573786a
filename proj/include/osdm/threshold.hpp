#pragma once
// Threshold curves: analytic exponential thresholds for the optimal online
// algorithm, plus a shared interface also implemented by the learned
// piecewise-affine thresholds. Curves are defined on normalized progress
// u in [0,1] and scaled to a driver size d: all public entry points take and
// return progress in demand units w in [0, d].

#include <memory>
#include <string>
#include <vector>

#include "osdm/core.hpp"
#include "osdm/ratios.hpp"

namespace osdm {

class ThresholdCurve {
 public:
  explicit ThresholdCurve(double d) : d_(d) {}
  virtual ~ThresholdCurve() = default;

  double size() const { return d_; }

  // Threshold value at progress w (units).
  virtual double value_at(double w) const = 0;
  // Exact integral of the threshold over progress [w0, w1] (units).
  virtual double integral(double w0, double w1) const = 0;
  // sup { w : value_at(w) >= price }, clamped to [0, d]. For a price above
  // the initial value returns 0; at or below the final value returns d.
  virtual double inverse(double price) const = 0;

  // Progress points (units) at which a convex pseudo-cost built on this
  // curve can attain its minimum, for the two marginal price levels of the
  // two |.|-regions. Smooth strictly-monotone curves need only the two
  // inverses; piecewise curves add their kinks.
  virtual std::vector<double> candidate_points(double lo_price,
                                               double hi_price) const {
    return {inverse(lo_price), inverse(hi_price)};
  }

 protected:
  double d_ = 1.0;
};

enum class ThresholdKind {
  BaseS,
  FlexPurchaseS,
  FlexDeliveryS,
  BaseT,
  FlexPurchaseT,
  FlexDeliveryT,
};

std::string to_string(ThresholdKind k);

// phi(u) = A + B * exp(rate * u) on u in [0,1], scaled to size d.
// B < 0 for every non-degenerate parameterization (strictly decreasing);
// B == 0 yields the constant threshold that arises in zero-coefficient
// limits (e.g. the delivery threshold at c = epsilon = delta = 0).
class AnalyticThreshold final : public ThresholdCurve {
 public:
  AnalyticThreshold(ThresholdKind kind, double A, double B, double rate,
                    double d);

  ThresholdKind kind() const { return kind_; }
  double A() const { return A_; }
  double B() const { return B_; }
  double rate() const { return rate_; }

  double value_at(double w) const override;
  double integral(double w0, double w1) const override;
  double inverse(double price) const override;

 private:
  ThresholdKind kind_;
  double A_, B_, rate_;
};

// Builds the analytic threshold of the given kind for a driver of size d.
// The competitive ratio is computed from params unless ratio_override > 0 is
// supplied (the full-problem ratio: alpha for *S kinds, alpha_T for *T kinds).
// Throws std::invalid_argument if the resulting B is positive (increasing
// threshold) or d < 0.
AnalyticThreshold make_threshold(ThresholdKind kind, const CostParams& params,
                                 double d, double ratio_override = 0.0);

// Free-function conveniences mirroring the member operations.
double integral(const ThresholdCurve& th, double w0, double w1);
double inverse(const ThresholdCurve& th, double price);

// Signed residual of the base-driver threshold identity at progress
// w in [0,1]: the amortized worst-case cost of a size-1 base driver stopped
// at w, minus the competitive ratio times its offline bound. Zero (up to
// numerics) for the analytic thresholds at every w.
double base_identity_residual(const CostParams& params, double w);

// Signed residual of the flexible-driver pair identity at purchase progress
// w and delivery progress v <= w (both in [0,1]). Zero for the analytic
// threshold pair at every (w, v).
double flex_identity_residual(const CostParams& params, double w, double v);

}  // namespace osdm
