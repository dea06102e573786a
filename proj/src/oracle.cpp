#include "osdm/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "osdm/simplex.hpp"

namespace osdm {

std::string to_string(OptMethod m) {
  switch (m) {
    case OptMethod::ExactLP: return "ExactLP";
    case OptMethod::AlternatingLP: return "AlternatingLP";
    default: return "BruteForce";
  }
}

namespace {

// Flexible availability prefix data shared by the LP builders.
struct DemandProfile {
  std::vector<double> avail;   // f arrived and not yet expired, by step
  std::vector<double> due_by;  // flexible demand with deadline <= t
  std::vector<double> cum_b;   // cumulative base demand
};

DemandProfile demand_profile(const Instance& inst) {
  const int T = inst.T();
  DemandProfile d;
  d.avail.assign(T + 1, 0.0);
  d.due_by.assign(T + 1, 0.0);
  d.cum_b.assign(T + 1, 0.0);
  std::vector<double> f_at_deadline(T + 2, 0.0);
  for (int t = 1; t <= T; ++t) {
    const Step& st = inst.steps[t - 1];
    if (st.f > 0) f_at_deadline[std::clamp(st.deadline, 1, T)] += st.f;
  }
  double arrived = 0.0;
  for (int t = 1; t <= T; ++t) {
    d.due_by[t] = d.due_by[t - 1] + f_at_deadline[t];
    arrived += inst.steps[t - 1].f;
    const double expired = t >= 2 ? d.due_by[t - 1] : 0.0;
    d.avail[t] = arrived - expired;
    d.cum_b[t] = d.cum_b[t - 1] + inst.steps[t - 1].b;
  }
  return d;
}

// Full per-step epigraph LP with fixed delivery coefficients r[t-1] (the cost
// of delivering one unit at step t). Layout: x (T), z (T), s (T), a (T+1 or T),
// e (T+1).
OptResult solve_full_lp(const Instance& inst, const std::vector<double>& r) {
  const int T = inst.T();
  const CostParams& P = inst.params;
  const bool tracking = P.smoothing_mode == SmoothingMode::Tracking;
  const int na = tracking ? T : T + 1;

  LpProblem lp;
  const int ix = 0, iz = T, is = 2 * T, ia = 3 * T, ie = 3 * T + na;
  lp.num_vars = 3 * T + na + (T + 1);
  lp.objective.assign(lp.num_vars, 0.0);
  for (int t = 1; t <= T; ++t) {
    lp.objective[ix + t - 1] = inst.steps[t - 1].p;
    lp.objective[iz + t - 1] = r[t - 1];
  }
  for (int k = 0; k < na; ++k)
    lp.objective[ia + k] = tracking ? P.eta : P.gamma;
  for (int k = 0; k < T + 1; ++k) lp.objective[ie + k] = P.delta;

  const DemandProfile dp = demand_profile(inst);

  for (int t = 1; t <= T; ++t) {
    // Storage dynamics and capacity.
    std::vector<std::pair<int, double>> row{{is + t - 1, 1.0},
                                            {ix + t - 1, -1.0},
                                            {iz + t - 1, 1.0}};
    if (t >= 2) row.push_back({is + t - 2, -1.0});
    lp.add_row(std::move(row), RowSense::EQ, 0.0);
    lp.add_row({{is + t - 1, 1.0}}, RowSense::LE, P.S);

    // Per-step delivery window.
    lp.add_row({{iz + t - 1, 1.0}}, RowSense::GE, inst.steps[t - 1].b);
    lp.add_row({{iz + t - 1, 1.0}}, RowSense::LE,
               inst.steps[t - 1].b + dp.avail[t]);

    // Cumulative deadline coverage.
    std::vector<std::pair<int, double>> cum;
    cum.reserve(t);
    for (int tau = 1; tau <= t; ++tau) cum.push_back({iz + tau - 1, 1.0});
    lp.add_row(std::move(cum), RowSense::GE, dp.cum_b[t] + dp.due_by[t]);
  }

  // Purchase smoothing epigraph.
  if (!tracking) {
    for (int t = 1; t <= T + 1; ++t) {
      std::vector<std::pair<int, double>> up{{ia + t - 1, 1.0}};
      std::vector<std::pair<int, double>> dn{{ia + t - 1, 1.0}};
      if (t <= T) {
        up.push_back({ix + t - 1, -1.0});
        dn.push_back({ix + t - 1, 1.0});
      }
      if (t >= 2) {
        up.push_back({ix + t - 2, 1.0});
        dn.push_back({ix + t - 2, -1.0});
      }
      lp.add_row(std::move(up), RowSense::GE, 0.0);
      lp.add_row(std::move(dn), RowSense::GE, 0.0);
    }
  } else {
    for (int t = 1; t <= T; ++t) {
      const double tgt = inst.steps[t - 1].a;
      lp.add_row({{ia + t - 1, 1.0}, {ix + t - 1, -1.0}}, RowSense::GE, -tgt);
      lp.add_row({{ia + t - 1, 1.0}, {ix + t - 1, 1.0}}, RowSense::GE, tgt);
    }
  }
  // Delivery switching epigraph.
  for (int t = 1; t <= T + 1; ++t) {
    std::vector<std::pair<int, double>> up{{ie + t - 1, 1.0}};
    std::vector<std::pair<int, double>> dn{{ie + t - 1, 1.0}};
    if (t <= T) {
      up.push_back({iz + t - 1, -1.0});
      dn.push_back({iz + t - 1, 1.0});
    }
    if (t >= 2) {
      up.push_back({iz + t - 2, 1.0});
      dn.push_back({iz + t - 2, -1.0});
    }
    lp.add_row(std::move(up), RowSense::GE, 0.0);
    lp.add_row(std::move(dn), RowSense::GE, 0.0);
  }

  const LpResult res = solve_lp(lp);
  if (!res.feasible)
    throw std::runtime_error("opt_lp: instance LP infeasible");
  if (!res.bounded) throw std::runtime_error("opt_lp: LP unbounded");

  OptResult out;
  out.method = OptMethod::ExactLP;
  out.iterations = res.iterations;
  out.schedule.x.assign(res.x.begin() + ix, res.x.begin() + ix + T);
  out.schedule.z.assign(res.x.begin() + iz, res.x.begin() + iz + T);
  out.schedule.s = derive_storage(out.schedule.x, out.schedule.z);
  out.cost = evaluate_cost(inst, out.schedule).total;
  return out;
}

// Exact segment-collapsed LP for S == 0 flexible-only Switching instances
// whose arrivals sit on constant-price segment starts and deadlines on
// segment ends. With S == 0, z == x, and averaging decisions over a
// constant-price segment preserves both price cost and feasibility while
// never increasing total variation, so an optimal constant-per-segment
// solution exists.
struct Segment {
  int start = 0, end = 0;  // inclusive step range, 1-based
  double price = 0.0;
};

bool collapsible(const Instance& inst, std::vector<Segment>* segs_out) {
  if (inst.params.S != 0.0) return false;
  if (inst.params.smoothing_mode != SmoothingMode::Switching) return false;
  const int T = inst.T();
  std::vector<Segment> segs;
  for (int t = 1; t <= T; ++t) {
    const double p = inst.steps[t - 1].p;
    if (segs.empty() || segs.back().price != p)
      segs.push_back(Segment{t, t, p});
    else
      segs.back().end = t;
  }
  // Arrivals on segment starts, deadlines on segment ends, no base demand.
  std::vector<char> is_start(T + 2, 0), is_end(T + 2, 0);
  for (const Segment& s : segs) {
    is_start[s.start] = 1;
    is_end[s.end] = 1;
  }
  for (int t = 1; t <= T; ++t) {
    const Step& st = inst.steps[t - 1];
    if (st.b != 0.0) return false;
    if (st.f > 0) {
      if (!is_start[t]) return false;
      if (!is_end[st.deadline]) return false;
    }
  }
  if (segs_out) *segs_out = std::move(segs);
  return true;
}

OptResult solve_collapsed_lp(const Instance& inst,
                             const std::vector<Segment>& segs) {
  const CostParams& P = inst.params;
  const int ns = static_cast<int>(segs.size());
  const double rate = delivery_rate_factor(P, 0.0);
  const double tv_coeff = P.gamma + P.delta;

  const DemandProfile dp = demand_profile(inst);

  LpProblem lp;
  const int iu = 0, ie = ns;  // u: per-step level per segment; e: TV aux
  lp.num_vars = ns + (ns + 1);
  lp.objective.assign(lp.num_vars, 0.0);
  for (int j = 0; j < ns; ++j) {
    const double L = segs[j].end - segs[j].start + 1;
    lp.objective[iu + j] = (1.0 + rate) * segs[j].price * L;
    lp.objective[ie + j] = tv_coeff;
  }
  lp.objective[ie + ns] = tv_coeff;

  // TV epigraph across segment boundaries (zero levels at both ends).
  for (int j = 0; j <= ns; ++j) {
    std::vector<std::pair<int, double>> up{{ie + j, 1.0}};
    std::vector<std::pair<int, double>> dn{{ie + j, 1.0}};
    if (j < ns) {
      up.push_back({iu + j, -1.0});
      dn.push_back({iu + j, 1.0});
    }
    if (j >= 1) {
      up.push_back({iu + j - 1, 1.0});
      dn.push_back({iu + j - 1, -1.0});
    }
    lp.add_row(std::move(up), RowSense::GE, 0.0);
    lp.add_row(std::move(dn), RowSense::GE, 0.0);
  }

  // Availability upper bound per segment and cumulative coverage at segment
  // ends where the due amount increases (plus the horizon end).
  for (int j = 0; j < ns; ++j) {
    lp.add_row({{iu + j, 1.0}}, RowSense::LE, dp.avail[segs[j].start]);
  }
  for (int j = 0; j < ns; ++j) {
    const int t_end = segs[j].end;
    const double due = dp.due_by[t_end];
    if (due <= 0.0 && j + 1 < ns) continue;
    std::vector<std::pair<int, double>> cum;
    for (int k = 0; k <= j; ++k)
      cum.push_back({iu + k, static_cast<double>(segs[k].end - segs[k].start + 1)});
    lp.add_row(std::move(cum), RowSense::GE, due);
  }

  const LpResult res = solve_lp(lp);
  if (!res.feasible) throw std::runtime_error("opt_lp: collapsed LP infeasible");
  if (!res.bounded) throw std::runtime_error("opt_lp: collapsed LP unbounded");

  OptResult out;
  out.method = OptMethod::ExactLP;
  out.iterations = res.iterations;
  const int T = inst.T();
  out.schedule.x.assign(T, 0.0);
  for (int j = 0; j < ns; ++j)
    for (int t = segs[j].start; t <= segs[j].end; ++t)
      out.schedule.x[t - 1] = res.x[iu + j];
  out.schedule.z = out.schedule.x;
  out.schedule.s = derive_storage(out.schedule.x, out.schedule.z);
  out.cost = evaluate_cost(inst, out.schedule).total;
  return out;
}

std::vector<double> fixed_delivery_rates(const Instance& inst,
                                         const std::vector<double>& storage) {
  const int T = inst.T();
  std::vector<double> r(T);
  for (int t = 1; t <= T; ++t) {
    const double s_prev = t >= 2 ? storage[t - 2] : 0.0;
    r[t - 1] = delivery_rate_factor(inst.params, s_prev) * inst.steps[t - 1].p;
  }
  return r;
}

}  // namespace

OptResult opt_lp(const Instance& inst) {
  if (inst.params.c != 0.0 && inst.params.S != 0.0)
    throw std::invalid_argument(
        "opt_lp requires a storage-independent delivery coefficient "
        "(c == 0 or S == 0); use opt_bilinear instead");
  std::vector<Segment> segs;
  if (collapsible(inst, &segs) && inst.T() > 96)
    return solve_collapsed_lp(inst, segs);
  const std::vector<double> r =
      fixed_delivery_rates(inst, std::vector<double>(inst.T(), 0.0));
  return solve_full_lp(inst, r);
}

OptResult opt_bilinear(const Instance& inst, int max_iters, double tol) {
  // The alternation is only locally convergent; with a storage-dependent
  // rate it can settle in whichever basin the initial trajectory selects
  // (e.g. a zero-storage start never discovers charge-and-carry when the
  // rate falls with the storage level). Run it from an empty and from a
  // full storage trajectory and keep the best feasible iterate. When the
  // rate does not depend on storage a single start is exact.
  const bool storage_free = inst.params.c == 0.0 || inst.params.S == 0.0;
  std::vector<std::vector<double>> starts;
  starts.emplace_back(inst.T(), 0.0);
  if (!storage_free) starts.emplace_back(inst.T(), inst.params.S);

  OptResult best;
  bool have_best = false;
  bool best_converged = false;
  int total_iters = 0;
  for (std::vector<double>& storage : starts) {
    double prev_cost = 0.0;
    int iter = 0;
    bool converged = false;
    OptResult run_best;
    bool have_run_best = false;
    for (iter = 1; iter <= max_iters; ++iter) {
      const std::vector<double> r = fixed_delivery_rates(inst, storage);
      OptResult cur = solve_full_lp(inst, r);  // evaluates the true cost
      if (!have_run_best || cur.cost < run_best.cost) {
        run_best = cur;
        have_run_best = true;
      }
      if (iter > 1 && std::abs(cur.cost - prev_cost) <
                          tol * std::max(1.0, std::abs(prev_cost))) {
        converged = true;
        break;
      }
      prev_cost = cur.cost;
      storage = cur.schedule.s;
    }
    total_iters += std::min(iter, max_iters);
    if (!have_best || run_best.cost < best.cost) {
      best = run_best;
      have_best = true;
      best_converged = converged;
    }
  }
  best.method = OptMethod::AlternatingLP;
  best.converged = best_converged;
  best.iterations = total_iters;
  return best;
}

namespace {

struct BruteContext {
  const Instance* inst = nullptr;
  double g = 0.0;
  int T = 0;
  // Key: t | s | x_prev | z_prev | pending units per deadline, packed into
  // 6 bits per field (all quantities <= 2/0.25 + storage headroom < 64).
  std::unordered_map<std::uint64_t, double> memo;
  std::unordered_map<std::uint64_t, std::pair<int, int>> choice;  // (xq, zq)
};

std::uint64_t pack_state(int t, int sq, int xq, int zq,
                         const std::vector<int>& pending) {
  std::uint64_t k = 0;
  k = k * 64 + static_cast<std::uint64_t>(t);
  k = k * 64 + static_cast<std::uint64_t>(sq);
  k = k * 64 + static_cast<std::uint64_t>(xq);
  k = k * 64 + static_cast<std::uint64_t>(zq);
  for (int v : pending) k = k * 64 + static_cast<std::uint64_t>(v);
  return k;
}

int to_lattice(double v, double g, const char* what) {
  const double q = v / g;
  const int qi = static_cast<int>(std::llround(q));
  if (std::abs(q - qi) > 1e-9)
    throw std::invalid_argument(std::string("opt_bruteforce: ") + what +
                                " not aligned to the lattice");
  return qi;
}

double brute_rec(BruteContext& ctx, int t, int sq, int xq_prev, int zq_prev,
                 std::vector<int>& pending) {
  const Instance& inst = *ctx.inst;
  const CostParams& P = inst.params;
  const double g = ctx.g;
  if (t > ctx.T) {
    // Boundary terms x_{T+1} = z_{T+1} = 0 (tracking target 0 as well).
    double c = P.delta * (zq_prev * g);
    if (P.smoothing_mode == SmoothingMode::Switching)
      c += P.gamma * (xq_prev * g);
    return c;
  }
  const std::uint64_t key = pack_state(t, sq, xq_prev, zq_prev, pending);
  if (auto it = ctx.memo.find(key); it != ctx.memo.end()) return it->second;

  const Step& st = inst.steps[t - 1];
  const int bq = to_lattice(st.b, g, "base demand");
  const int fq = to_lattice(st.f, g, "flexible demand");
  const int Sq = to_lattice(P.S, g, "storage capacity");
  if (fq > 0) pending[st.deadline - 1] += fq;

  // Pending that must be fully served at its deadline now.
  const int due_now = pending[t - 1];
  int avail = 0;
  for (int d = t - 1; d < ctx.T; ++d) avail += pending[d];

  const double s_prev = sq * g;
  const double rate = delivery_rate_factor(P, s_prev) * st.p;

  double best = std::numeric_limits<double>::infinity();
  int best_xe = -1, best_ze = -1;
  for (int ze = due_now; ze <= avail; ++ze) {  // flexible units served (EDF)
    const int zq = bq + ze;
    // x in [max(0, z - s), z + S - s] on the lattice.
    const int x_lo = std::max(0, zq - sq);
    const int x_hi = zq + Sq - sq;
    if (x_hi < x_lo) continue;
    for (int xq = x_lo; xq <= x_hi; ++xq) {
      double step_cost = st.p * (xq * g) + rate * (zq * g) +
                         P.delta * std::abs(zq - zq_prev) * g;
      if (P.smoothing_mode == SmoothingMode::Switching)
        step_cost += P.gamma * std::abs(xq - xq_prev) * g;
      else
        step_cost += P.eta * std::abs(xq * g - st.a);

      // Serve ze earliest-deadline-first (deliveries are fungible: only the
      // per-step totals are costed, so EDF ordering is optimal).
      std::vector<int> next_pending = pending;
      int remaining = ze;
      for (int d = t - 1; d < ctx.T && remaining > 0; ++d) {
        const int take = std::min(remaining, next_pending[d]);
        next_pending[d] -= take;
        remaining -= take;
      }
      const double rest =
          brute_rec(ctx, t + 1, sq + xq - zq, xq, zq, next_pending);
      if (step_cost + rest < best) {
        best = step_cost + rest;
        best_xe = xq;
        best_ze = zq;
      }
    }
  }
  if (fq > 0) pending[st.deadline - 1] -= fq;
  ctx.memo.emplace(key, best);
  ctx.choice.emplace(key, std::make_pair(best_xe, best_ze));
  return best;
}

}  // namespace

OptResult opt_bruteforce(const Instance& inst, double grid_step) {
  if (!(grid_step > 0))
    throw std::invalid_argument("opt_bruteforce: grid_step must be > 0");
  if (inst.T() > 6)
    throw std::invalid_argument("opt_bruteforce: horizon must be <= 6");
  if (inst.total_demand() > 2.0 + 1e-9)
    throw std::invalid_argument("opt_bruteforce: total demand must be <= 2");
  if (inst.params.S > 1.0 + 1e-12)
    throw std::invalid_argument("opt_bruteforce: storage must be <= 1");

  BruteContext ctx;
  ctx.inst = &inst;
  ctx.g = grid_step;
  ctx.T = inst.T();
  std::vector<int> pending(ctx.T, 0);
  const double cost = brute_rec(ctx, 1, 0, 0, 0, pending);

  OptResult out;
  out.method = OptMethod::BruteForce;
  out.cost = cost;
  out.iterations = static_cast<int>(ctx.memo.size());

  // Reconstruct the schedule by replaying the memoized choices.
  out.schedule.x.assign(ctx.T, 0.0);
  out.schedule.z.assign(ctx.T, 0.0);
  int sq = 0, xq = 0, zq = 0;
  for (int t = 1; t <= ctx.T; ++t) {
    const Step& st = inst.steps[t - 1];
    const int fq = to_lattice(st.f, grid_step, "flexible demand");
    const std::uint64_t key = pack_state(t, sq, xq, zq, pending);
    if (fq > 0) pending[st.deadline - 1] += fq;
    const auto [cx, cz] = ctx.choice.at(key);
    out.schedule.x[t - 1] = cx * grid_step;
    out.schedule.z[t - 1] = cz * grid_step;
    int remaining = cz - to_lattice(st.b, grid_step, "base demand");
    for (int d = t - 1; d < ctx.T && remaining > 0; ++d) {
      const int take = std::min(remaining, pending[d]);
      pending[d] -= take;
      remaining -= take;
    }
    sq += cx - cz;
    xq = cx;
    zq = cz;
  }
  out.schedule.s = derive_storage(out.schedule.x, out.schedule.z);
  out.cost = evaluate_cost(inst, out.schedule).total;
  return out;
}

double ecr(const Instance& inst, double alg_cost, double opt_cost) {
  if (inst.total_demand() <= 0.0) return 1.0;
  if (!(opt_cost > 0.0))
    throw std::invalid_argument(
        "ecr: non-positive optimum cost with positive demand");
  return alg_cost / opt_cost;
}

}  // namespace osdm
