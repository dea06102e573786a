#pragma once
// Core problem model: cost parameters, instances, schedules, cost evaluation
// and feasibility checking for online smoothed demand management (OSDM).
//
// Conventions used throughout the library:
//   * decisions are indexed t = 1..T and stored 0-based in vectors,
//   * boundary terms x_0 = z_0 = x_{T+1} = z_{T+1} = 0 are implicit,
//   * storage starts empty (s_0 = 0) and evolves as s_t = s_{t-1} + x_t - z_t.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace osdm {

enum class SmoothingMode { Switching, Tracking };
enum class DeliveryMode { Decreasing, Increasing, Constant };

std::string to_string(SmoothingMode m);
std::string to_string(DeliveryMode m);
SmoothingMode smoothing_mode_from_string(const std::string& s);
DeliveryMode delivery_mode_from_string(const std::string& s);

// Cost model parameters. Field names are also the keys of the sidecar
// key=value file written next to instance CSVs.
struct CostParams {
  double p_min = 1.0;
  double p_max = 100.0;
  double gamma = 0.0;    // purchase switching coefficient (Switching mode)
  double delta = 0.0;    // delivery switching coefficient
  double eta = 0.0;      // purchase tracking coefficient (Tracking mode)
  double c = 0.0;        // storage-dependent delivery rate scale
  double epsilon = 0.0;  // storage-independent delivery rate offset
  double S = 0.0;        // storage capacity
  int T = 1;             // horizon length
  SmoothingMode smoothing_mode = SmoothingMode::Switching;
  DeliveryMode delivery_mode = DeliveryMode::Constant;
};

// One time step of an instance. `deadline` is meaningful only when f > 0 and
// must then lie in (t, T]. `a` is the tracking target (Tracking mode only).
struct Step {
  double p = 0.0;
  double b = 0.0;
  double f = 0.0;
  int deadline = 0;
  double a = 0.0;
};

struct Instance {
  std::vector<Step> steps;
  CostParams params;
  std::string label;
  std::uint64_t seed = 0;

  int T() const { return static_cast<int>(steps.size()); }
  double total_demand() const;
};

struct Schedule {
  std::vector<double> x;  // purchases, index t-1
  std::vector<double> z;  // deliveries, index t-1
  std::vector<double> s;  // storage after step t, index t-1
};

struct CostBreakdown {
  double purchase = 0.0;
  double purchase_smoothing = 0.0;
  double delivery = 0.0;
  double delivery_switching = 0.0;
  double total = 0.0;
};

// A single constraint or parameter violation, reported as data.
struct Violation {
  std::string what;   // human-readable description with step index and magnitude
  int t = 0;          // step index (1-based) or 0 for instance-level issues
  double magnitude = 0.0;
};

// Marginal delivery price factor at storage level s_prev: the delivery cost of
// delivering z at price p is factor * p * z.
double delivery_rate_factor(const CostParams& params, double s_prev);

// Structural validation of parameters and instance data (price bounds,
// deadline windows, admissibility assumptions). Returns all violations found.
std::vector<Violation> validate(const Instance& instance);

// Total cost of a schedule, split into components. Throws std::invalid_argument
// on length mismatch or negative decisions.
CostBreakdown evaluate_cost(const Instance& instance, const Schedule& schedule);

// Checks the four constraint families (storage bounds/dynamics, purchase
// window, per-step delivery window, cumulative deadline coverage) within tol.
std::vector<Violation> check_feasible(const Instance& instance,
                                      const Schedule& schedule,
                                      double tol = 1e-9);

// Derives the storage trajectory implied by (x, z); used by all algorithm
// runners so that Schedule.s is exact by construction.
std::vector<double> derive_storage(const std::vector<double>& x,
                                   const std::vector<double>& z);

}  // namespace osdm
