#pragma once
// Comparison algorithms: RORO (online conversion with switching) and its
// demand-doubling extension for the restricted OSDM class, plus naive
// purchase-on-arrival / uniform-spread baselines.

#include <memory>
#include <vector>

#include "osdm/core.hpp"
#include "osdm/threshold.hpp"

namespace osdm {

// One active RORO instance inside the doubling scheme.
struct RoroInstanceState {
  int j = 0;             // instance index
  double d_hat = 1.0;    // guessed demand size 2^j
  std::shared_ptr<const AnalyticThreshold> threshold;
  double assigned = 0.0;  // total flexible demand assigned to this instance
  double w = 0.0;         // satisfied progress
  double x_prev = 0.0;    // previous local decision (smoothing reference)
};

// Builds the RORO threshold for guessed size d_hat:
//   phi(u) = A + B exp(u / alpha_R), A = p_max - gamma,
//   B = p_max / alpha_R - p_max + 2 gamma.
std::shared_ptr<const AnalyticThreshold> make_roro_threshold(
    const CostParams& params, double alpha_roro, double d_hat);

// Local pseudo-cost-minimizing purchase: argmin over x in
// [0, min(assigned, d_hat) - w] of p_t x + gamma |x - x_prev| - Phi(w, w+x).
// Returns 0 when the instance has nothing left to satisfy.
double roro_step(const RoroInstanceState& state, double p_t, double gamma);

// Demand-doubling RORO for the restricted class (flexible demand only,
// c = epsilon = delta = 0, S = 0, switching smoothing). Aggregates active
// instance decisions, sets z_t = x_t, and tops up at binding deadlines.
// Throws std::invalid_argument outside the restricted class.
Schedule doubling_roro_run(const Instance& instance);

enum class NaivePolicy { Immediate, UniformSpread };

// Immediate: x_t = z_t = b_t + f_t on arrival.
// UniformSpread: each flexible demand in equal slices over
// (arrival, deadline]; base demand on arrival. Both keep storage at zero.
Schedule naive_run(const Instance& instance, NaivePolicy policy);

}  // namespace osdm
