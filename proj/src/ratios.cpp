#include "osdm/ratios.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "osdm/lambert.hpp"

namespace osdm {

double big_P(const CostParams& p) { return (1.0 + p.c + p.epsilon) * p.p_max; }
double kappa(const CostParams& p) { return p.gamma + p.delta; }
double omega(const CostParams& p) {
  return (1.0 + p.c + p.epsilon) / (1.0 + p.epsilon);
}

namespace {

double w0_or_throw(double arg, const char* which) {
  try {
    return lambert_w0(arg);
  } catch (const std::domain_error&) {
    throw std::domain_error(std::string("ratios: W argument below branch point "
                                        "while computing ") +
                            which + " (arg=" + std::to_string(arg) + ")");
  }
}

// Shared shape: beta = M/G + W0(-(N/G) * exp(-M/G)); ratio = scale / beta.
double lambert_ratio(double N, double G, double M, double scale,
                     const char* which) {
  const double arg = -(N / G) * std::exp(-M / G);
  const double beta = M / G + w0_or_throw(arg, which);
  if (!(beta > 0.0))
    throw std::domain_error(std::string("ratios: non-positive beta for ") +
                            which);
  return scale / beta;
}

}  // namespace

RatioSet ratios(const CostParams& p) {
  RatioSet r;
  const double P = big_P(p);
  const double om = omega(p);
  const double kap = kappa(p);
  const double T = static_cast<double>(p.T);
  const double N = P - (1.0 + p.epsilon) * p.p_min;

  if (p.p_max == p.p_min) {
    // Degenerate single-price limit: every policy pays the same price; the
    // lambert form below degenerates (N may hit 0); handle via direct limit.
    // With N -> 0 the W argument -> 0, beta -> M/G, ratio -> scale*G/M.
    const double G = P + 2.0 * kap;
    const double M = P + p.p_min * p.c + om * 2.0 * kap / T;
    r.alpha = om * G / M;
    const double G_T = P + 2.0 * (p.eta + p.delta);
    const double M_T = P + p.p_min * p.c + om * 2.0 * p.delta / T;
    r.alpha_T = om * G_T / M_T;
  } else {
    {
      const double G = P + 2.0 * kap;
      const double M = P + p.p_min * p.c + om * 2.0 * kap / T;
      r.alpha = lambert_ratio(N, G, M, om, "alpha");
    }
    {
      const double G = P + 2.0 * (p.eta + p.delta);
      const double M = P + p.p_min * p.c + om * 2.0 * p.delta / T;
      r.alpha_T = lambert_ratio(N, G, M, om, "alpha_T");
    }
  }
  {
    const double G = P + 2.0 * kap;
    const double M = P + 2.0 * p.delta + 2.0 * p.gamma / T;
    const double N_B = (1.0 + p.c) * p.p_max - p.p_min;
    r.alpha_B = N_B <= 0.0 ? 1.0 : lambert_ratio(N_B, G, M, 1.0, "alpha_B");
  }
  {
    // Flexible-only single-threshold baseline.
    const double a = 2.0 * p.gamma / p.p_max;
    const double arg = ((2.0 * p.gamma + p.p_min) / p.p_max - 1.0) *
                       std::exp(a - 1.0);
    const double inv = w0_or_throw(arg, "alpha_RORO") - a + 1.0;
    if (!(inv > 0.0))
      throw std::domain_error("ratios: non-positive 1/alpha_RORO");
    r.alpha_RORO = 1.0 / inv;
  }
  {
    const double denom = p.p_max + 2.0 * kap / (T * (1.0 + p.epsilon));
    const double arg = -(p.p_max - p.p_min) * std::exp(-1.0) / denom;
    const double inv = w0_or_throw(arg, "alpha_IF") + 1.0;
    if (!(inv > 0.0))
      throw std::domain_error("ratios: non-positive 1/alpha_IF");
    r.alpha_IF = 1.0 / inv;
  }
  {
    const double G = (1.0 + p.epsilon) * p.p_max + 2.0 * kap;
    const double M = (1.0 + p.epsilon) * p.p_max + 2.0 * p.delta +
                     2.0 * p.gamma / T;
    const double N_IB = (1.0 - p.c) * p.p_max - p.p_min;
    r.alpha_IB = N_IB <= 0.0 ? 1.0 : lambert_ratio(N_IB, G, M, 1.0, "alpha_IB");
  }
  return r;
}

double alpha_residual(const CostParams& p, double alpha) {
  const double P = big_P(p);
  const double om = omega(p);
  const double kap = kappa(p);
  const double T = static_cast<double>(p.T);
  const double N = P - (1.0 + p.epsilon) * p.p_min;
  const double inner =
      P - om * (P + 2.0 * kap) / alpha + om * 2.0 * kap / T + p.p_min * p.c;
  return 1.0 - (alpha / om) * std::log(N / inner);
}

double alpha_T_residual(const CostParams& p, double alpha_T) {
  const double P = big_P(p);
  const double om = omega(p);
  const double T = static_cast<double>(p.T);
  const double N = P - (1.0 + p.epsilon) * p.p_min;
  const double inner = P - om * (P + 2.0 * (p.eta + p.delta)) / alpha_T +
                       om * 2.0 * p.delta / T + p.p_min * p.c;
  return 1.0 - (alpha_T / om) * std::log(N / inner);
}

double alpha_B_residual(const CostParams& p, double alpha_B) {
  const double P = big_P(p);
  const double kap = kappa(p);
  const double T = static_cast<double>(p.T);
  const double N_B = (1.0 + p.c) * p.p_max - p.p_min;
  const double inner = (1.0 + p.c) * p.p_max - (P + 2.0 * kap) / alpha_B +
                       2.0 * p.gamma / T + p.p_max * p.epsilon + 2.0 * p.delta;
  return 1.0 - alpha_B * std::log(N_B / inner);
}

double alpha_RORO_residual(const CostParams& p, double a) {
  return std::exp(1.0 / a) * (p.p_max - 2.0 * p.gamma - p.p_max / a) -
         (p.p_max - p.p_min - 2.0 * p.gamma);
}

double alpha_IF_residual(const CostParams& p, double a) {
  const double kap = kappa(p);
  const double T = static_cast<double>(p.T);
  const double E = p.p_max + 2.0 * kap / (T * (1.0 + p.epsilon));
  const double N = p.p_max - p.p_min;
  return 1.0 - a * std::log(N / (E - E / a));
}

}  // namespace osdm
