#include "osdm/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "osdm/ratios.hpp"

namespace osdm {

std::shared_ptr<const AnalyticThreshold> make_roro_threshold(
    const CostParams& params, double alpha_roro, double d_hat) {
  const double A = params.p_max - params.gamma;
  const double B =
      params.p_max / alpha_roro - params.p_max + 2.0 * params.gamma;
  return std::make_shared<AnalyticThreshold>(ThresholdKind::FlexPurchaseS, A,
                                             B, 1.0 / alpha_roro, d_hat);
}

double roro_step(const RoroInstanceState& state, double p_t, double gamma) {
  const double cap = std::min(state.assigned, state.d_hat) - state.w;
  if (cap <= 0.0) return 0.0;
  const AnalyticThreshold& th = *state.threshold;

  auto J = [&](double x) {
    return p_t * x + gamma * std::abs(x - state.x_prev) -
           th.integral(state.w, state.w + x);
  };

  std::vector<double> cands = {0.0, std::clamp(state.x_prev, 0.0, cap), cap};
  for (double level : {p_t + gamma, p_t - gamma}) {
    const double pt = th.inverse(level) - state.w;
    cands.push_back(std::clamp(pt, 0.0, cap));
  }

  double best_x = 0.0;
  double best_J = J(0.0);
  for (double x : cands) {
    const double val = J(x);
    const double tolJ = 1e-11 * (1.0 + std::abs(val) + std::abs(best_J));
    bool better = false;
    if (val < best_J - tolJ) {
      better = true;
    } else if (val <= best_J + tolJ) {
      const double da = std::abs(x - state.x_prev);
      const double db = std::abs(best_x - state.x_prev);
      if (da < db - 1e-15 || (da <= db + 1e-15 && x < best_x)) better = true;
    }
    if (better) {
      best_x = x;
      best_J = val;
    }
  }
  return best_x;
}

Schedule doubling_roro_run(const Instance& instance) {
  const CostParams& P = instance.params;
  if (P.c != 0.0 || P.epsilon != 0.0 || P.delta != 0.0 || P.S != 0.0)
    throw std::invalid_argument(
        "doubling_roro_run: requires c = epsilon = delta = 0 and S = 0");
  if (P.smoothing_mode != SmoothingMode::Switching)
    throw std::invalid_argument(
        "doubling_roro_run: requires switching smoothing");
  for (const Step& st : instance.steps)
    if (st.b != 0.0)
      throw std::invalid_argument(
          "doubling_roro_run: requires flexible demand only (b_t = 0)");

  const double alpha_roro = ratios(P).alpha_RORO;
  const int T = instance.T();

  // Each instance owns the demand chunks assigned to it, in arrival order.
  // Threshold purchases consume the queue front-to-back; when a chunk's
  // deadline passes, the compulsory global top-up covers whatever is left of
  // it, and the owning instance is credited so it stops purchasing for
  // demand that is already satisfied.
  struct Chunk {
    double remaining;
    int deadline;
  };
  std::vector<RoroInstanceState> R;
  std::vector<std::vector<Chunk>> queues;
  R.push_back(RoroInstanceState{0, 1.0, make_roro_threshold(P, alpha_roro, 1.0),
                                0.0, 0.0, 0.0});
  queues.emplace_back();

  // Deadline bookkeeping.
  std::vector<double> due_at(T + 2, 0.0);
  for (int t = 1; t <= T; ++t) {
    const Step& st = instance.steps[t - 1];
    if (st.f > 0.0) due_at[st.deadline] += st.f;
  }

  Schedule sched;
  sched.x.assign(T, 0.0);
  sched.z.assign(T, 0.0);
  sched.s.assign(T, 0.0);

  double delivered = 0.0;
  double due_so_far = 0.0;
  for (int t = 1; t <= T; ++t) {
    const Step& st = instance.steps[t - 1];
    if (st.f > 0.0) {
      RoroInstanceState& cur = R.back();
      if (cur.assigned + st.f <= cur.d_hat) {
        cur.assigned += st.f;
        queues.back().push_back({st.f, st.deadline});
      } else {
        RoroInstanceState next;
        next.j = cur.j + 1;
        next.d_hat = std::pow(2.0, next.j);
        next.threshold = make_roro_threshold(P, alpha_roro, next.d_hat);
        next.assigned = st.f;
        R.push_back(std::move(next));
        queues.push_back({{st.f, st.deadline}});
      }
    }

    double x_prime = 0.0;
    for (std::size_t k = 0; k < R.size(); ++k) {
      RoroInstanceState& inst = R[k];
      const double xi = roro_step(inst, st.p, P.gamma);
      inst.w += xi;
      inst.x_prev = xi;
      x_prime += xi;
      double used = xi;
      for (Chunk& ch : queues[k]) {
        if (used <= 0.0) break;
        const double take = std::min(used, ch.remaining);
        ch.remaining -= take;
        used -= take;
      }
    }

    due_so_far += due_at[t];
    double xt = x_prime;
    if (delivered + x_prime < due_so_far)
      xt += due_so_far - delivered - x_prime;

    // Credit expired chunks: the top-up above (or earlier surplus) covers
    // them, so their owners must not purchase for them again.
    for (std::size_t k = 0; k < R.size(); ++k) {
      for (Chunk& ch : queues[k]) {
        if (ch.deadline <= t && ch.remaining > 0.0) {
          R[k].w += ch.remaining;
          ch.remaining = 0.0;
        }
      }
    }

    sched.x[t - 1] = xt;
    sched.z[t - 1] = xt;
    sched.s[t - 1] = 0.0;
    delivered += xt;
  }
  return sched;
}

Schedule naive_run(const Instance& instance, NaivePolicy policy) {
  const int T = instance.T();
  Schedule sched;
  sched.x.assign(T, 0.0);
  sched.z.assign(T, 0.0);
  sched.s.assign(T, 0.0);

  for (int t = 1; t <= T; ++t) {
    const Step& st = instance.steps[t - 1];
    if (policy == NaivePolicy::Immediate) {
      sched.z[t - 1] += st.b + st.f;
    } else {
      sched.z[t - 1] += st.b;
      if (st.f > 0.0) {
        const int span = st.deadline - t;
        const double slice = st.f / span;
        for (int tau = t + 1; tau <= st.deadline; ++tau)
          sched.z[tau - 1] += slice;
      }
    }
  }
  for (int t = 0; t < T; ++t) sched.x[t] = sched.z[t];
  return sched;
}

}  // namespace osdm
