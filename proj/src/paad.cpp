#include "osdm/paad.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace osdm {

namespace {

double sum_sizes(const PaadState& state) {
  double den = 0.0;
  for (const Driver& dr : state.base_drivers) den += dr.d;
  for (const Driver& dr : state.flex_drivers) den += dr.d;
  return den;
}

struct PseudoCost {
  double unit_price;
  double coeff;
  double pseudo;
  bool tracking;  // tracking form drops the + coeff * x term
  const ThresholdCurve* th;
  double progress;

  double operator()(double x) const {
    double val = unit_price * x + coeff * std::abs(x - pseudo) -
                 th->integral(progress, progress + x);
    if (!tracking) val += coeff * x;
    return val;
  }
};

double golden_section(const PseudoCost& J, double lo, double hi) {
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double fc = J(c), fd = J(d);
  for (int i = 0; i < 200 && (b - a) > 1e-13 * std::max(1.0, hi); ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = J(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = J(d);
    }
  }
  return (a + b) / 2.0;
}

}  // namespace

double get_decision(const PaadState& state, const Driver& driver,
                    DecisionSide side, double q, double unit_price,
                    double switch_coeff, const ThresholdCurve& threshold,
                    const std::optional<double>& target,
                    const PaadConfig& config) {
  const double progress = side == DecisionSide::Purchase ? driver.w : driver.v;
  const double prev =
      side == DecisionSide::Purchase ? driver.x_prev : driver.z_prev;
  const double room = std::max(0.0, driver.d - progress);

  // A Flexible driver at its deadline completes unconditionally.
  if (driver.kind == DriverKind::Flexible && driver.deadline == state.t)
    return room;
  if (room <= 0.0) return 0.0;

  const double den = sum_sizes(state);
  const double share = den > 0.0 ? driver.d / den : 0.0;
  const double pseudo =
      target.has_value() ? *target * share : prev + q * share;

  PseudoCost J{unit_price, switch_coeff, pseudo, target.has_value(),
               &threshold, progress};

  if (config.use_ternary_fallback) {
    const double x = golden_section(J, 0.0, room);
    // Snap to the nearby kink/boundary if it is at least as good.
    double best = x, bestJ = J(x);
    for (double cand : {0.0, room, std::clamp(pseudo, 0.0, room)}) {
      const double v = J(cand);
      if (v <= bestJ + 1e-12 * (1.0 + std::abs(bestJ)) &&
          (v < bestJ - 1e-12 * (1.0 + std::abs(bestJ)) || cand < best)) {
        best = cand;
        bestJ = v;
      }
    }
    return best;
  }

  // Closed-form candidate set: the pseudo-cost is convex (for monotone
  // thresholds) with its only derivative jump at the pseudo-decision, so the
  // minimum lies at a bound, at the pseudo-decision, or at a threshold
  // crossing of the per-region marginal price (plus curve kinks for
  // piecewise thresholds).
  const double hi_price =
      target.has_value() ? unit_price + switch_coeff
                         : unit_price + 2.0 * switch_coeff;
  const double lo_price =
      target.has_value() ? unit_price - switch_coeff : unit_price;
  std::vector<double> cands{0.0, room, std::clamp(pseudo, 0.0, room)};
  for (double pt : threshold.candidate_points(lo_price, hi_price))
    cands.push_back(std::clamp(pt - progress, 0.0, room));

  double best_x = 0.0, best_J = 0.0, best_dist = 0.0;
  bool first = true;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    const double x = cands[i];
    const double val = J(x);
    const double dist = std::abs(x - pseudo);
    const double tolJ = 1e-11 * (1.0 + std::abs(val) + std::abs(best_J));
    const bool better =
        first || val < best_J - tolJ ||
        (val <= best_J + tolJ &&
         (dist < best_dist - 1e-15 ||
          (dist <= best_dist + 1e-15 && x < best_x)));
    if (better) {
      best_x = x;
      best_J = val;
      best_dist = dist;
      first = false;
    }
  }
  return best_x;
}

std::pair<double, double> paad_step(PaadState& state, const Instance& instance,
                                    int t, const ThresholdFactory& factory,
                                    const PaadConfig& config) {
  const CostParams& P = instance.params;
  const Step& st = instance.steps[t - 1];
  const bool tracking = P.smoothing_mode == SmoothingMode::Tracking;
  state.t = t;

  const ThresholdKind base_kind =
      tracking ? ThresholdKind::BaseT : ThresholdKind::BaseS;
  const ThresholdKind flexp_kind =
      tracking ? ThresholdKind::FlexPurchaseT : ThresholdKind::FlexPurchaseS;
  const ThresholdKind flexd_kind =
      tracking ? ThresholdKind::FlexDeliveryT : ThresholdKind::FlexDeliveryS;

  // (a) Refresh base drivers and storage manager when storage has drained or
  // the last base demand exceeded capacity.
  const double s_prev = state.s;
  if (s_prev <= 1e-12 * std::max(1.0, P.S) || state.b_prev > P.S) {
    state.base_drivers.clear();
    if (P.S > 0.0) {
      Driver mgr;
      mgr.id = 0;
      mgr.kind = DriverKind::Manager;
      mgr.d = P.S;
      mgr.purchase_threshold = factory(base_kind, P.S);
      state.base_drivers.push_back(std::move(mgr));
    }
  }

  // (b) New Base driver for storable base demand.
  if (st.b > 0.0 && st.b < P.S) {
    Driver dr;
    dr.id = 2 * t;
    dr.kind = DriverKind::Base;
    dr.d = st.b;
    dr.purchase_threshold = factory(base_kind, st.b);
    state.base_drivers.push_back(std::move(dr));
  }
  // (c) New Flexible driver for deadline demand.
  if (st.f > 0.0) {
    Driver dr;
    dr.id = 2 * t + 1;
    dr.kind = DriverKind::Flexible;
    dr.d = st.f;
    dr.deadline = st.deadline;
    dr.purchase_threshold = factory(flexp_kind, st.f);
    dr.delivery_threshold = factory(flexd_kind, st.f);
    state.flex_drivers.push_back(std::move(dr));
  }

  // (d) Excess from decisions whose drivers have since been removed or reset.
  double sum_x_prev = 0.0, sum_z_prev = 0.0;
  for (const Driver& dr : state.base_drivers) sum_x_prev += dr.x_prev;
  for (const Driver& dr : state.flex_drivers) {
    sum_x_prev += dr.x_prev;
    sum_z_prev += dr.z_prev;
  }
  const double q_x = state.x_prev_global - sum_x_prev;
  const double q_z = state.z_prev_global - sum_z_prev;

  // (e) Delivery loop over flexible drivers (ascending id).
  const double delivery_unit_cost = delivery_rate_factor(P, s_prev) * st.p;
  double z_flex = 0.0;
  for (Driver& dr : state.flex_drivers) {
    const double z =
        get_decision(state, dr, DecisionSide::Delivery, q_z,
                     delivery_unit_cost, P.delta, *dr.delivery_threshold,
                     std::nullopt, config);
    dr.v = std::min(dr.d, dr.v + z);
    dr.z_prev = z;
    z_flex += z;
  }
  const double z_t = st.b + z_flex;

  // (f) Purchase loop, capped by delivery plus storage headroom.
  double cap = z_t + (P.S - s_prev);
  double x_t = 0.0;
  const std::optional<double> target =
      tracking ? std::optional<double>(st.a) : std::nullopt;
  const double purchase_coeff = tracking ? P.eta : P.gamma;
  auto purchase = [&](Driver& dr) {
    double x = 0.0;
    if (cap > 0.0) {
      const double desired = get_decision(
          state, dr, DecisionSide::Purchase, q_x, st.p, purchase_coeff,
          *dr.purchase_threshold, target, config);
      x = std::min(desired, cap);
      cap -= x;
    }
    dr.w = std::min(dr.d, dr.w + x);
    dr.x_prev = x;
    x_t += x;
  };
  // Ascending driver id across both pools (Base and Flexible interleave).
  std::vector<Driver*> order;
  order.reserve(state.base_drivers.size() + state.flex_drivers.size());
  for (Driver& dr : state.base_drivers) order.push_back(&dr);
  for (Driver& dr : state.flex_drivers) order.push_back(&dr);
  std::sort(order.begin(), order.end(),
            [](const Driver* a, const Driver* b) { return a->id < b->id; });
  for (Driver* dr : order) purchase(*dr);

  // (g) Forced purchase so deliveries never overdraw storage.
  x_t = std::max(x_t, z_t - s_prev);

  // (h) Storage update.
  double s_new = s_prev + x_t - z_t;
  if (s_new < 0.0 && s_new > -1e-9) s_new = 0.0;
  if (s_new > P.S && s_new < P.S + 1e-9) s_new = P.S;
  if (s_new < 0.0 || s_new > P.S + 1e-9)
    throw std::runtime_error("paad_step: storage out of bounds at t=" +
                             std::to_string(t));
  state.s = s_new;

  // (i) Remove finished drivers.
  std::erase_if(state.flex_drivers,
                [&](const Driver& dr) { return dr.deadline == t; });
  std::erase_if(state.base_drivers, [&](const Driver& dr) {
    return dr.w >= dr.d - 1e-12 * std::max(1.0, dr.d);
  });

  state.x_prev_global = x_t;
  state.z_prev_global = z_t;
  state.b_prev = st.b;
  return {x_t, z_t};
}

Schedule run_with_thresholds(const Instance& instance,
                             const ThresholdFactory& factory,
                             const PaadConfig& config) {
  const int T = instance.T();
  PaadState state;
  Schedule sched;
  sched.x.reserve(T);
  sched.z.reserve(T);
  for (int t = 1; t <= T; ++t) {
    const auto [x, z] = paad_step(state, instance, t, factory, config);
    sched.x.push_back(x);
    sched.z.push_back(z);
  }
  sched.s = derive_storage(sched.x, sched.z);
  return sched;
}

Schedule paad_run(const Instance& instance, const PaadConfig& config) {
  const CostParams& P = instance.params;
  double ratio = config.ratio_override;
  if (!(ratio > 0.0)) {
    const RatioSet r = ratios(P);
    ratio = P.smoothing_mode == SmoothingMode::Tracking ? r.alpha_T : r.alpha;
  }
  ThresholdFactory factory = [&P, ratio](ThresholdKind kind, double d) {
    return std::make_shared<AnalyticThreshold>(make_threshold(kind, P, d, ratio));
  };
  return run_with_thresholds(instance, factory, config);
}

}  // namespace osdm
