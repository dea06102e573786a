#include "osdm/threshold.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace osdm {

std::string to_string(ThresholdKind k) {
  switch (k) {
    case ThresholdKind::BaseS: return "BaseS";
    case ThresholdKind::FlexPurchaseS: return "FlexPurchaseS";
    case ThresholdKind::FlexDeliveryS: return "FlexDeliveryS";
    case ThresholdKind::BaseT: return "BaseT";
    case ThresholdKind::FlexPurchaseT: return "FlexPurchaseT";
    default: return "FlexDeliveryT";
  }
}

AnalyticThreshold::AnalyticThreshold(ThresholdKind kind, double A, double B,
                                     double rate, double d)
    : ThresholdCurve(d), kind_(kind), A_(A), B_(B), rate_(rate) {
  if (d < 0.0) throw std::invalid_argument("threshold size must be >= 0");
  if (B > 1e-12 * std::max(1.0, std::abs(A)))
    throw std::invalid_argument("threshold coefficient B must be <= 0, got B=" +
                                std::to_string(B));
  if (!(rate > 0.0)) throw std::invalid_argument("threshold rate must be > 0");
}

double AnalyticThreshold::value_at(double w) const {
  const double u = d_ > 0.0 ? std::clamp(w / d_, 0.0, 1.0) : 0.0;
  return A_ + B_ * std::exp(rate_ * u);
}

double AnalyticThreshold::integral(double w0, double w1) const {
  if (d_ <= 0.0) return 0.0;
  const double u0 = std::clamp(w0 / d_, 0.0, 1.0);
  const double u1 = std::clamp(w1 / d_, 0.0, 1.0);
  return d_ * (A_ * (u1 - u0) +
               (B_ / rate_) * (std::exp(rate_ * u1) - std::exp(rate_ * u0)));
}

double AnalyticThreshold::inverse(double price) const {
  if (d_ <= 0.0) return 0.0;
  if (B_ == 0.0) return price <= A_ ? d_ : 0.0;
  // Strictly decreasing: value(u) = A + B e^{rate u}, B < 0.
  if (price >= value_at(0.0)) return 0.0;
  if (price <= value_at(d_)) return d_;
  const double u = std::log((price - A_) / B_) / rate_;
  return std::clamp(u, 0.0, 1.0) * d_;
}

AnalyticThreshold make_threshold(ThresholdKind kind, const CostParams& p,
                                 double d, double ratio_override) {
  const double P = big_P(p);
  const double om = omega(p);
  const double kap = kappa(p);
  const double T = static_cast<double>(p.T);
  const double ce = p.c + p.epsilon;

  double ratio = ratio_override;
  if (!(ratio > 0.0)) {
    const RatioSet r = ratios(p);
    const bool tracking = kind == ThresholdKind::BaseT ||
                          kind == ThresholdKind::FlexPurchaseT ||
                          kind == ThresholdKind::FlexDeliveryT;
    ratio = tracking ? r.alpha_T : r.alpha;
  }
  const double ratio_prime = ratio / om;

  double A = 0.0, B = 0.0, rate = 0.0;
  switch (kind) {
    case ThresholdKind::BaseS:
      A = p.p_max + 2.0 * p.gamma + p.p_min * p.c;
      B = (P + 2.0 * kap) / ratio -
          (p.p_max * (1.0 + p.epsilon) + p.p_min * p.c + 2.0 * kap / T);
      rate = 1.0 / ratio;
      break;
    case ThresholdKind::FlexPurchaseS:
      A = p.p_max + p.p_min * p.c + 2.0 * p.gamma;
      B = (p.p_max + 2.0 * p.gamma) / ratio_prime -
          (p.p_max + p.p_min * p.c + (2.0 * p.gamma / T) * om);
      rate = 1.0 / ratio_prime;
      break;
    case ThresholdKind::FlexDeliveryS:
      A = p.p_max * ce + 2.0 * p.delta;
      B = (p.p_max * ce + 2.0 * p.delta) / ratio_prime -
          (p.p_max * ce + (2.0 * p.delta / T) * om);
      rate = 1.0 / ratio_prime;
      break;
    case ThresholdKind::BaseT:
      A = p.p_max + 2.0 * p.eta + p.p_min * p.c;
      B = (P + 2.0 * (p.eta + p.delta)) / ratio -
          (p.p_max * (1.0 + p.epsilon) + p.p_min * p.c + 2.0 * p.delta / T);
      rate = 1.0 / ratio;
      break;
    case ThresholdKind::FlexPurchaseT:
      A = p.p_max + p.p_min * p.c + 2.0 * p.eta;
      B = (p.p_max + 2.0 * p.eta) / ratio_prime -
          (p.p_max + p.p_min * p.c);
      rate = 1.0 / ratio_prime;
      break;
    case ThresholdKind::FlexDeliveryT:
      A = p.p_max * ce + 2.0 * p.delta;
      B = (p.p_max * ce + 2.0 * p.delta) / ratio_prime -
          (p.p_max * ce + (2.0 * p.delta / T) * om);
      rate = 1.0 / ratio_prime;
      break;
  }
  return AnalyticThreshold(kind, A, B, rate, d);
}

double integral(const ThresholdCurve& th, double w0, double w1) {
  return th.integral(w0, w1);
}

double inverse(const ThresholdCurve& th, double price) {
  return th.inverse(price);
}

double base_identity_residual(const CostParams& params, double w) {
  const bool tracking = params.smoothing_mode == SmoothingMode::Tracking;
  const RatioSet rs = ratios(params);
  const double ratio = tracking ? rs.alpha_T : rs.alpha;
  const AnalyticThreshold th = make_threshold(
      tracking ? ThresholdKind::BaseT : ThresholdKind::BaseS, params, 1.0,
      ratio);
  const double g = tracking ? params.eta : params.gamma;
  const double T = static_cast<double>(params.T);
  const double tail = tracking ? 2.0 * params.delta / T
                               : 2.0 * (params.gamma + params.delta) / T;
  const double lhs = th.integral(0.0, w) +
                     (1.0 - w) * (params.p_max + 2.0 * g) +
                     params.p_max * (params.c + params.epsilon) +
                     2.0 * params.delta - params.c * w * params.p_min;
  const double rhs =
      ratio * (th.value_at(w) - 2.0 * g + params.epsilon * params.p_max + tail);
  return lhs - rhs;
}

double flex_identity_residual(const CostParams& params, double w, double v) {
  const bool tracking = params.smoothing_mode == SmoothingMode::Tracking;
  const RatioSet rs = ratios(params);
  const double ratio = tracking ? rs.alpha_T : rs.alpha;
  const double om = omega(params);
  const double ratio_prime = ratio / om;
  const AnalyticThreshold phi = make_threshold(
      tracking ? ThresholdKind::FlexPurchaseT : ThresholdKind::FlexPurchaseS,
      params, 1.0, ratio);
  const AnalyticThreshold psi = make_threshold(
      tracking ? ThresholdKind::FlexDeliveryT : ThresholdKind::FlexDeliveryS,
      params, 1.0, ratio);
  const double g = tracking ? params.eta : params.gamma;
  const double kap = tracking ? params.eta + params.delta
                              : params.gamma + params.delta;
  const double T = static_cast<double>(params.T);
  const double tail =
      tracking ? 2.0 * params.delta * om / T : 2.0 * kap * om / T;
  const double lhs =
      phi.integral(0.0, w) + (1.0 - w) * (params.p_max + 2.0 * g) -
      params.c * w * params.p_min + psi.integral(0.0, v) +
      (1.0 - v) * (params.p_max * (params.c + params.epsilon) +
                   2.0 * params.delta);
  const double rhs =
      ratio_prime * (phi.value_at(w) + psi.value_at(v) - 2.0 * kap + tail);
  return lhs - rhs;
}

}  // namespace osdm
