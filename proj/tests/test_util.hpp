#pragma once
// Shared helpers for the unit tests.

#include <random>

#include "osdm/core.hpp"
#include "osdm/workbench.hpp"

namespace testutil {

inline osdm::CostParams default_params() {
  osdm::CostParams p;
  p.p_min = 10.0;
  p.p_max = 200.0;
  p.gamma = 10.0;
  p.delta = 5.0;
  p.c = 0.2;
  p.epsilon = 0.05;
  p.S = 1.0;
  p.T = 48;
  p.smoothing_mode = osdm::SmoothingMode::Switching;
  p.delivery_mode = osdm::DeliveryMode::Decreasing;
  return p;
}

inline osdm::CostParams default_tracking_params() {
  osdm::CostParams p = default_params();
  p.smoothing_mode = osdm::SmoothingMode::Tracking;
  p.gamma = 0.0;
  p.eta = 8.0;
  return p;
}

inline osdm::Instance random_instance(const osdm::CostParams& params,
                                      std::uint64_t seed, int T = 0) {
  osdm::GenSpec spec;
  spec.family = osdm::GenFamily::RandomSynthetic;
  spec.params = params;
  if (T > 0) spec.params.T = T;
  spec.seed = seed;
  return osdm::gen(spec);
}

}  // namespace testutil
