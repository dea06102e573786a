#pragma once
// PAAD: the threshold-driven online algorithm. Demand is decomposed into
// per-arrival "drivers" (a storage Manager, Base drivers for storable base
// demand, Flexible drivers for deadline demand), each running a
// one-dimensional threshold rule; their local decisions are assembled into
// the global purchase/delivery pair each step.

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "osdm/core.hpp"
#include "osdm/threshold.hpp"

namespace osdm {

enum class DriverKind { Manager, Base, Flexible };
enum class DecisionSide { Purchase, Delivery };

struct Driver {
  int id = 0;  // 0 for the Manager, 2t for Base, 2t+1 for Flexible created at t
  DriverKind kind = DriverKind::Manager;
  double d = 0.0;     // driver size (demand units)
  int deadline = 0;   // Flexible only
  double w = 0.0;     // purchase progress in [0, d]
  double v = 0.0;     // delivery progress in [0, d] (Flexible only)
  double x_prev = 0.0;
  double z_prev = 0.0;
  std::shared_ptr<const ThresholdCurve> purchase_threshold;
  std::shared_ptr<const ThresholdCurve> delivery_threshold;  // Flexible only
};

struct PaadState {
  std::vector<Driver> base_drivers;  // Manager (id 0) + Base drivers
  std::vector<Driver> flex_drivers;
  double s = 0.0;             // storage after the last completed step
  double x_prev_global = 0.0;
  double z_prev_global = 0.0;
  double b_prev = 0.0;        // base demand of the last completed step
  int t = 0;                  // current step while inside paad_step
};

struct PaadConfig {
  // Use a golden-section search instead of the closed-form candidate set
  // inside get_decision (test oracle / PWA fallback).
  bool use_ternary_fallback = false;
  // Override the competitive ratio used to build analytic thresholds
  // (tests only; 0 = compute from params).
  double ratio_override = 0.0;
};

// Builds the per-driver threshold of the requested kind and size.
using ThresholdFactory =
    std::function<std::shared_ptr<const ThresholdCurve>(ThresholdKind, double d)>;

// One driver's local decision: minimizes the pseudo-cost
//   unit_price * x + switch_coeff * |x - pseudo| + switch_coeff * x - dPhi
// over x in [0, d - progress], where pseudo = prev + q * d / sum(sizes)
// (or, when `target` is set: target * d / sum(sizes) with pseudo-cost
//  unit_price * x + switch_coeff * |x - pseudo| - dPhi, the tracking form).
// A Flexible driver at its deadline returns d - progress unconditionally.
// Ties are broken toward the candidate closest to the pseudo-decision, then
// toward the smaller value.
double get_decision(const PaadState& state, const Driver& driver,
                    DecisionSide side, double q, double unit_price,
                    double switch_coeff, const ThresholdCurve& threshold,
                    const std::optional<double>& target,
                    const PaadConfig& config = {});

// Advances the state by one step; returns the global (x_t, z_t).
std::pair<double, double> paad_step(PaadState& state, const Instance& instance,
                                    int t, const ThresholdFactory& factory,
                                    const PaadConfig& config = {});

// Runs PAAD with its analytic thresholds over the whole instance.
Schedule paad_run(const Instance& instance, const PaadConfig& config = {});

// Runs the same engine with externally supplied threshold curves
// (used by the learned-threshold algorithm).
Schedule run_with_thresholds(const Instance& instance,
                             const ThresholdFactory& factory,
                             const PaadConfig& config = {});

}  // namespace osdm
