#pragma once
// PALD: the learned-threshold variant. Thresholds are piecewise-affine
// ("hat basis") curves on K uniform knots; a robustness projection keeps
// them inside convex sets that certify a target competitive ratio rho.

#include <optional>
#include <string>
#include <vector>

#include "osdm/core.hpp"
#include "osdm/paad.hpp"
#include "osdm/threshold.hpp"

namespace osdm {

// Piecewise-affine threshold on normalized progress u in [0,1] with K knots
// at u_j = j / (K-1), j = 0..K-1.
struct PwaThreshold {
  std::vector<double> y;
  int K() const { return static_cast<int>(y.size()); }
};

// (value at w1, exact integral over [w0, w1]) in normalized coordinates.
std::pair<double, double> pwa_eval_integral(const PwaThreshold& th, double w0,
                                            double w1);

// ThresholdCurve adapter scaling a PwaThreshold to driver size d.
class PwaCurve final : public ThresholdCurve {
 public:
  PwaCurve(PwaThreshold th, double d);
  double value_at(double w) const override;
  double integral(double w0, double w1) const override;
  double inverse(double price) const override;
  // All candidate progress points (units) where a pseudo-cost minimum can sit
  // for piecewise-linear thresholds: knots plus crossings of the two marginal
  // price levels.
  std::vector<double> candidate_points(double lo_price, double hi_price) const;

 private:
  PwaThreshold th_;
  std::vector<double> cum_;  // cumulative integral at knots
};

// The full learned-threshold stack used by the runner.
struct PaldThresholds {
  PwaThreshold base;
  PwaThreshold flex_purchase;
  PwaThreshold flex_delivery;
};

enum class RobustSetMode { BaseS, FlexS, BaseT, FlexT };

std::string to_string(RobustSetMode m);

struct RobustSetSpec {
  RobustSetMode mode = RobustSetMode::BaseS;
  double rho = 1.0;
  CostParams params;
  int grid = 201;  // sample points per progress dimension
};

// Affine halfspace g . y <= h over the set's coordinate vector
// (y_base for Base modes; [y_phi, y_psi] concatenated for Flex modes).
struct Halfspace {
  std::vector<double> g;
  double h = 0.0;
  std::string tag;
  double at_w = 0.0, at_v = 0.0;
};

// Materializes the sampled constraint system of the set for K knots.
std::vector<Halfspace> robust_constraints(const RobustSetSpec& set, int K);

struct MembershipResult {
  bool ok = true;
  double worst_violation = 0.0;
  std::string where;
  double at_w = 0.0, at_v = 0.0;
};

// Checks the relevant components of `th` against the set within tol
// (absolute, price units). Base modes additionally maximize the robustness
// residual analytically on every knot segment (the sampled grid plus the
// exact per-segment maximum of the concave quadratic residual).
MembershipResult membership(const PaldThresholds& th, const RobustSetSpec& set,
                            double tol);

// Euclidean projection onto the set via Dykstra's algorithm over the sampled
// halfspaces (plus cutting planes at analytic Base violations). Replaces the
// component(s) the set constrains and returns the updated stack.
PaldThresholds project(const PaldThresholds& th, const RobustSetSpec& set);

// Projection of y0 onto an explicit halfspace system: Dykstra sweeps with an
// exact dual active-set finish for slowly separating systems (the core of
// project(); exposed so small systems can be cross-checked row-for-row
// against the exhaustive oracle below).
std::vector<double> project_onto_rows(const std::vector<double>& y0,
                                      const std::vector<Halfspace>& rows);

// Exhaustive active-set projection oracle for small systems (test support):
// enumerates all candidate active sets of size <= dim(y0). Intended for
// K <= 3 Base systems; cost grows combinatorially.
std::vector<double> project_active_set_oracle(
    const std::vector<double>& y0, const std::vector<Halfspace>& rows);

// Runs the PAAD engine with the learned thresholds.
Schedule pald_run(const Instance& instance, const PaldThresholds& thresholds,
                  const PaadConfig& config = {});

// Samples the analytic thresholds at the knots (the training initializer;
// callers should project the result before use).
PaldThresholds analytic_knots(const CostParams& params, int K,
                              double ratio_override = 0.0);

struct TrainConfig {
  double lr = 0.5;
  int epochs = 20;
  double fd_step = 0.0;  // 0: default 1e-3 * (p_max - p_min)
  std::uint64_t seed = 0;
};

struct TrainResult {
  PaldThresholds thresholds;       // best-loss iterate
  PaldThresholds init;             // projected analytic initialization
  std::vector<double> loss_trace;  // entry 0 = initialization loss
  std::vector<double> opt_costs;   // cached offline optima per instance
};

// Projected finite-difference gradient descent on mean empirical competitive
// ratio over the training instances. Offline optima are computed once
// (opt_lp when exact, opt_bilinear otherwise).
TrainResult train_pald_s(const std::vector<Instance>& instances,
                         const RobustSetSpec& base_set,
                         const RobustSetSpec& flex_set,
                         const TrainConfig& config);

}  // namespace osdm
