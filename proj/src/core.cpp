#include "osdm/core.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace osdm {

std::string to_string(SmoothingMode m) {
  return m == SmoothingMode::Switching ? "Switching" : "Tracking";
}

std::string to_string(DeliveryMode m) {
  switch (m) {
    case DeliveryMode::Decreasing: return "Decreasing";
    case DeliveryMode::Increasing: return "Increasing";
    default: return "Constant";
  }
}

SmoothingMode smoothing_mode_from_string(const std::string& s) {
  if (s == "Switching") return SmoothingMode::Switching;
  if (s == "Tracking") return SmoothingMode::Tracking;
  throw std::invalid_argument("unknown smoothing_mode: " + s);
}

DeliveryMode delivery_mode_from_string(const std::string& s) {
  if (s == "Decreasing") return DeliveryMode::Decreasing;
  if (s == "Increasing") return DeliveryMode::Increasing;
  if (s == "Constant") return DeliveryMode::Constant;
  throw std::invalid_argument("unknown delivery_mode: " + s);
}

double Instance::total_demand() const {
  double d = 0.0;
  for (const Step& st : steps) d += st.b + st.f;
  return d;
}

double delivery_rate_factor(const CostParams& params, double s_prev) {
  // Storage fraction s/S is taken as 0 when S == 0.
  const double frac = params.S > 0.0 ? s_prev / params.S : 0.0;
  switch (params.delivery_mode) {
    case DeliveryMode::Increasing: return params.c * frac + params.epsilon;
    case DeliveryMode::Decreasing: return params.c - params.c * frac + params.epsilon;
    default: return params.epsilon;  // Constant requires c == 0
  }
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

void add_violation(std::vector<Violation>& out, int t, double magnitude,
                   const std::string& what) {
  out.push_back(Violation{what, t, magnitude});
}

}  // namespace

std::vector<Violation> validate(const Instance& instance) {
  std::vector<Violation> out;
  const CostParams& P = instance.params;
  const int T = instance.T();

  if (!(P.p_min > 0.0) || !(P.p_max >= P.p_min))
    add_violation(out, 0, 0.0,
                  "price bounds must satisfy 0 < p_min <= p_max, got p_min=" +
                      fmt(P.p_min) + " p_max=" + fmt(P.p_max));
  if (P.gamma < 0 || P.delta < 0 || P.eta < 0 || P.c < 0 || P.epsilon < 0 ||
      P.S < 0)
    add_violation(out, 0, 0.0,
                  "gamma, delta, eta, c, epsilon, S must be non-negative");
  if (P.T != T)
    add_violation(out, 0, static_cast<double>(P.T - T),
                  "params.T=" + std::to_string(P.T) + " does not match steps.size()=" +
                      std::to_string(T));
  if (T < 1) add_violation(out, 0, 0.0, "instance must have at least one step");
  if (P.c + P.epsilon > 1.0 + 1e-12)
    add_violation(out, 0, P.c + P.epsilon - 1.0,
                  "delivery admissibility requires c + epsilon <= 1");
  if (P.delivery_mode == DeliveryMode::Constant && P.c != 0.0)
    add_violation(out, 0, P.c, "Constant delivery mode requires c == 0");
  const double half_spread = (P.p_max - P.p_min) / 2.0;
  if (P.smoothing_mode == SmoothingMode::Switching) {
    if (P.gamma + P.delta > half_spread + 1e-12)
      add_violation(out, 0, P.gamma + P.delta - half_spread,
                    "switching admissibility requires gamma + delta <= (p_max - p_min)/2");
  } else {
    if (P.eta > half_spread + 1e-12)
      add_violation(out, 0, P.eta - half_spread,
                    "tracking admissibility requires eta <= (p_max - p_min)/2");
    if (P.delta > half_spread + 1e-12)
      add_violation(out, 0, P.delta - half_spread,
                    "tracking admissibility requires delta <= (p_max - p_min)/2");
  }

  double sum_demand = 0.0, sum_target = 0.0;
  for (int t = 1; t <= T; ++t) {
    const Step& st = instance.steps[t - 1];
    if (st.p < P.p_min - 1e-12 || st.p > P.p_max + 1e-12)
      add_violation(out, t, st.p,
                    "price out of [p_min, p_max] at t=" + std::to_string(t) +
                        ": " + fmt(st.p));
    if (st.b < 0)
      add_violation(out, t, st.b, "negative base demand at t=" + std::to_string(t));
    if (st.f < 0)
      add_violation(out, t, st.f,
                    "negative flexible demand at t=" + std::to_string(t));
    if (st.f > 0 && (st.deadline <= t || st.deadline > T))
      add_violation(out, t, static_cast<double>(st.deadline),
                    "deadline must lie in (t, T] at t=" + std::to_string(t) +
                        ": deadline=" + std::to_string(st.deadline));
    if (st.a < 0)
      add_violation(out, t, st.a,
                    "negative tracking target at t=" + std::to_string(t));
    sum_demand += st.b + st.f;
    sum_target += st.a;
  }
  if (instance.params.smoothing_mode == SmoothingMode::Tracking &&
      sum_target > sum_demand + 1e-9)
    add_violation(out, 0, sum_target - sum_demand,
                  "tracking targets exceed total demand: sum a=" + fmt(sum_target) +
                      " > sum (b+f)=" + fmt(sum_demand));
  return out;
}

CostBreakdown evaluate_cost(const Instance& instance, const Schedule& schedule) {
  const int T = instance.T();
  if (static_cast<int>(schedule.x.size()) != T ||
      static_cast<int>(schedule.z.size()) != T)
    throw std::invalid_argument(
        "evaluate_cost: schedule length mismatch (x: " +
        std::to_string(schedule.x.size()) + ", z: " +
        std::to_string(schedule.z.size()) + ", T: " + std::to_string(T) + ")");
  const CostParams& P = instance.params;

  CostBreakdown cb;
  double s_prev = 0.0;
  double x_prev = 0.0, z_prev = 0.0;
  for (int t = 1; t <= T; ++t) {
    const Step& st = instance.steps[t - 1];
    const double x = schedule.x[t - 1];
    const double z = schedule.z[t - 1];
    if (x < 0 || z < 0)
      throw std::invalid_argument("evaluate_cost: negative decision at t=" +
                                  std::to_string(t));
    cb.purchase += st.p * x;
    cb.delivery += delivery_rate_factor(P, s_prev) * st.p * z;
    if (P.smoothing_mode == SmoothingMode::Switching)
      cb.purchase_smoothing += P.gamma * std::abs(x - x_prev);
    else
      cb.purchase_smoothing += P.eta * std::abs(x - st.a);
    cb.delivery_switching += P.delta * std::abs(z - z_prev);
    s_prev = s_prev + x - z;
    x_prev = x;
    z_prev = z;
  }
  // Boundary step t = T+1 with x_{T+1} = z_{T+1} = 0 (tracking target 0).
  if (P.smoothing_mode == SmoothingMode::Switching)
    cb.purchase_smoothing += P.gamma * std::abs(x_prev);
  cb.delivery_switching += P.delta * std::abs(z_prev);
  cb.total = cb.purchase + cb.purchase_smoothing + cb.delivery +
             cb.delivery_switching;
  return cb;
}

std::vector<double> derive_storage(const std::vector<double>& x,
                                   const std::vector<double>& z) {
  std::vector<double> s(x.size());
  double cur = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    cur += x[i] - z[i];
    s[i] = cur;
  }
  return s;
}

std::vector<Violation> check_feasible(const Instance& instance,
                                      const Schedule& schedule, double tol) {
  std::vector<Violation> out;
  const int T = instance.T();
  if (static_cast<int>(schedule.x.size()) != T ||
      static_cast<int>(schedule.z.size()) != T ||
      static_cast<int>(schedule.s.size()) != T) {
    add_violation(out, 0, 0.0, "schedule length mismatch with instance horizon");
    return out;
  }
  const CostParams& P = instance.params;

  // Flexible demand totals keyed by deadline step: due_by[t] = sum of f with
  // deadline <= t, expired_before[t] = sum of f with deadline < t.
  std::vector<double> f_at_deadline(T + 2, 0.0);
  for (int t = 1; t <= T; ++t) {
    const Step& st = instance.steps[t - 1];
    if (st.f > 0 && st.deadline >= 1 && st.deadline <= T)
      f_at_deadline[st.deadline] += st.f;
  }
  std::vector<double> due_by(T + 1, 0.0);
  for (int t = 1; t <= T; ++t) due_by[t] = due_by[t - 1] + f_at_deadline[t];

  double s_prev = 0.0;
  double cum_z = 0.0, cum_b = 0.0, cum_f_arrived = 0.0;
  for (int t = 1; t <= T; ++t) {
    const Step& st = instance.steps[t - 1];
    const double x = schedule.x[t - 1];
    const double z = schedule.z[t - 1];
    const double s = schedule.s[t - 1];

    // Storage dynamics and bounds.
    const double s_expect = s_prev + x - z;
    if (std::abs(s - s_expect) > tol)
      add_violation(out, t, std::abs(s - s_expect),
                    "storage dynamics violated at t=" + std::to_string(t) +
                        ": s=" + fmt(s) + " expected " + fmt(s_expect));
    if (s < -tol)
      add_violation(out, t, -s, "storage below 0 at t=" + std::to_string(t));
    if (s > P.S + tol)
      add_violation(out, t, s - P.S,
                    "storage above capacity at t=" + std::to_string(t) + ": s=" +
                        fmt(s) + " S=" + fmt(P.S));

    // Purchase window (equivalent to storage bounds given exact dynamics, but
    // checked independently as stated).
    if (x < z - s_prev - tol)
      add_violation(out, t, z - s_prev - x,
                    "purchase below delivery shortfall at t=" + std::to_string(t));
    if (x > z + (P.S - s_prev) + tol)
      add_violation(out, t, x - (z + P.S - s_prev),
                    "purchase above storage headroom at t=" + std::to_string(t));
    if (x < -tol)
      add_violation(out, t, -x, "negative purchase at t=" + std::to_string(t));
    if (z < -tol)
      add_violation(out, t, -z, "negative delivery at t=" + std::to_string(t));

    // Per-step delivery window: base demand must be served now; at most the
    // arrived, not-yet-expired flexible demand may be served on top of it.
    cum_f_arrived += st.f;
    const double expired_before_t = t >= 2 ? due_by[t - 1] : 0.0;
    const double upper = st.b + cum_f_arrived - expired_before_t;
    if (z < st.b - tol)
      add_violation(out, t, st.b - z,
                    "delivery below base demand at t=" + std::to_string(t));
    if (z > upper + tol)
      add_violation(out, t, z - upper,
                    "delivery above available demand at t=" + std::to_string(t));

    // Cumulative deadline coverage.
    cum_z += z;
    cum_b += st.b;
    if (cum_z < cum_b + due_by[t] - tol)
      add_violation(out, t, cum_b + due_by[t] - cum_z,
                    "cumulative delivery misses deadline coverage at t=" +
                        std::to_string(t));
    s_prev = s;
  }
  return out;
}

}  // namespace osdm
