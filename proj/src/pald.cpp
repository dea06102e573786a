#include "osdm/pald.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "osdm/oracle.hpp"

namespace osdm {

std::string to_string(RobustSetMode m) {
  switch (m) {
    case RobustSetMode::BaseS: return "BaseS";
    case RobustSetMode::FlexS: return "FlexS";
    case RobustSetMode::BaseT: return "BaseT";
    default: return "FlexT";
  }
}

// ---------------------------------------------------------------------------
// Piecewise-affine threshold primitives.

std::pair<double, double> pwa_eval_integral(const PwaThreshold& th, double w0,
                                            double w1) {
  const int K = th.K();
  if (K < 2) throw std::invalid_argument("PwaThreshold needs >= 2 knots");
  const double h = 1.0 / (K - 1);
  auto value = [&](double u) {
    u = std::clamp(u, 0.0, 1.0);
    int j = std::min(static_cast<int>(u * (K - 1)), K - 2);
    const double uj = j * h;
    return th.y[j] + (th.y[j + 1] - th.y[j]) * (u - uj) / h;
  };
  auto cum = [&](double u) {
    u = std::clamp(u, 0.0, 1.0);
    double acc = 0.0;
    for (int j = 0; j + 1 < K; ++j) {
      const double a = j * h, b = (j + 1) * h;
      if (u <= a) break;
      const double hi = std::min(u, b);
      const double va = th.y[j];
      const double vb = value(hi);
      acc += 0.5 * (va + vb) * (hi - a);
    }
    return acc;
  };
  return {value(w1), cum(w1) - cum(w0)};
}

PwaCurve::PwaCurve(PwaThreshold th, double d)
    : ThresholdCurve(d), th_(std::move(th)) {
  const int K = th_.K();
  if (K < 2) throw std::invalid_argument("PwaCurve needs >= 2 knots");
  cum_.assign(K, 0.0);
  const double h = 1.0 / (K - 1);
  for (int j = 1; j < K; ++j)
    cum_[j] = cum_[j - 1] + 0.5 * (th_.y[j - 1] + th_.y[j]) * h;
}

double PwaCurve::value_at(double w) const {
  const double u = d_ > 0.0 ? std::clamp(w / d_, 0.0, 1.0) : 0.0;
  return pwa_eval_integral(th_, 0.0, u).first;
}

double PwaCurve::integral(double w0, double w1) const {
  if (d_ <= 0.0) return 0.0;
  const double u0 = std::clamp(w0 / d_, 0.0, 1.0);
  const double u1 = std::clamp(w1 / d_, 0.0, 1.0);
  const int K = th_.K();
  const double h = 1.0 / (K - 1);
  auto cum_at = [&](double u) {
    const int j = std::min(static_cast<int>(u * (K - 1)), K - 2);
    const double uj = j * h;
    const double vj = th_.y[j];
    const double vu = vj + (th_.y[j + 1] - vj) * (u - uj) / h;
    return cum_[j] + 0.5 * (vj + vu) * (u - uj);
  };
  return d_ * (cum_at(u1) - cum_at(u0));
}

double PwaCurve::inverse(double price) const {
  if (d_ <= 0.0) return 0.0;
  const int K = th_.K();
  const double h = 1.0 / (K - 1);
  // sup { u : value(u) >= price }: scan segments from the right so the
  // convention also holds for non-monotone (unprojected) knot vectors.
  for (int j = K - 2; j >= 0; --j) {
    const double ya = th_.y[j], yb = th_.y[j + 1];
    const double a = j * h, b = (j + 1) * h;
    if (yb >= price) return b == 1.0 ? d_ : b * d_;
    if (ya >= price) {
      // Crosses inside the segment (ya >= price > yb).
      const double u = a + (ya - price) / (ya - yb) * h;
      return std::clamp(u, 0.0, 1.0) * d_;
    }
  }
  return 0.0;
}

std::vector<double> PwaCurve::candidate_points(double lo_price,
                                               double hi_price) const {
  std::vector<double> out;
  const int K = th_.K();
  const double h = 1.0 / (K - 1);
  for (int j = 0; j < K; ++j) out.push_back(j * h * d_);
  for (double price : {lo_price, hi_price}) {
    for (int j = 0; j + 1 < K; ++j) {
      const double ya = th_.y[j], yb = th_.y[j + 1];
      const double lo = std::min(ya, yb), hi = std::max(ya, yb);
      if (price >= lo && price <= hi && ya != yb) {
        const double u = j * h + (ya - price) / (ya - yb) * h;
        out.push_back(std::clamp(u, 0.0, 1.0) * d_);
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Robust constraint systems.

namespace {

struct SetConstants {
  double A1 = 0.0;    // coefficient of (1-w)
  double A2 = 0.0;    // coefficient of (1-v) (Flex) or additive constant (Base)
  double rhs0 = 0.0;  // rho-scaled constant moved to the right-hand side
  double ratio_scale = 1.0;  // multiplier of the threshold value on the rhs
  double endpoint_phi = 0.0;
  double endpoint_psi = 0.0;
};

SetConstants set_constants(const RobustSetSpec& set) {
  const CostParams& p = set.params;
  const double om = omega(p);
  const double kap = kappa(p);
  const double T = static_cast<double>(p.T);
  const double ce = p.c + p.epsilon;
  SetConstants k;
  switch (set.mode) {
    case RobustSetMode::BaseS:
      k.A1 = p.p_max + 2.0 * p.gamma;
      k.A2 = p.p_max * ce + 2.0 * p.delta;
      k.rhs0 = set.rho * (-2.0 * p.gamma + p.epsilon * p.p_max + 2.0 * kap / T);
      k.ratio_scale = set.rho;
      k.endpoint_phi = p.p_min + 2.0 * p.gamma;
      break;
    case RobustSetMode::BaseT:
      k.A1 = p.p_max + 2.0 * p.eta;
      k.A2 = p.p_max * ce + 2.0 * p.delta;
      k.rhs0 =
          set.rho * (-2.0 * p.eta + p.epsilon * p.p_max + 2.0 * p.delta / T);
      k.ratio_scale = set.rho;
      k.endpoint_phi = p.p_min + 2.0 * p.eta;
      break;
    case RobustSetMode::FlexS:
      k.A1 = p.p_max + 2.0 * p.gamma;
      k.A2 = p.p_max * ce + 2.0 * p.delta;
      k.rhs0 = set.rho * (-(1.0 / om) * 2.0 * kap + 2.0 * kap / T);
      k.ratio_scale = set.rho / om;
      k.endpoint_phi = p.p_min + 2.0 * p.gamma;
      k.endpoint_psi = p.p_min * ce + 2.0 * p.delta;
      break;
    case RobustSetMode::FlexT:
      k.A1 = p.p_max + 2.0 * p.eta;
      k.A2 = p.p_max * ce + 2.0 * p.delta;
      k.rhs0 = set.rho * (-(1.0 / om) * 2.0 * (p.eta + p.delta) +
                          2.0 * p.delta / T);
      k.ratio_scale = set.rho / om;
      k.endpoint_phi = p.p_min + 2.0 * p.eta;
      k.endpoint_psi = p.p_min * ce + 2.0 * p.delta;
      break;
  }
  return k;
}

bool is_flex(RobustSetMode m) {
  return m == RobustSetMode::FlexS || m == RobustSetMode::FlexT;
}

// Hat basis value and integral at a point, for all K knots.
void hat_basis(int K, double w, std::vector<double>& h_out,
               std::vector<double>& H_out) {
  h_out.assign(K, 0.0);
  H_out.assign(K, 0.0);
  PwaThreshold unit;
  unit.y.assign(K, 0.0);
  for (int j = 0; j < K; ++j) {
    unit.y[j] = 1.0;
    const auto [val, integ] = pwa_eval_integral(unit, 0.0, w);
    h_out[j] = val;
    H_out[j] = integ;
    unit.y[j] = 0.0;
  }
}

}  // namespace

std::vector<Halfspace> robust_constraints(const RobustSetSpec& set, int K) {
  if (K < 2) throw std::invalid_argument("robust_constraints: K must be >= 2");
  if (set.grid < 2)
    throw std::invalid_argument("robust_constraints: grid must be >= 2");
  const CostParams& p = set.params;
  const SetConstants k = set_constants(set);
  const bool flex = is_flex(set.mode);
  const int D = flex ? 2 * K : K;

  std::vector<Halfspace> rows;
  auto unit_row = [&](int coord, double sign, double rhs, const char* tag) {
    Halfspace hs;
    hs.g.assign(D, 0.0);
    hs.g[coord] = sign;
    hs.h = rhs;
    hs.tag = tag;
    rows.push_back(std::move(hs));
  };

  // Box, monotonicity, endpoint caps.
  const int blocks = flex ? 2 : 1;
  for (int b = 0; b < blocks; ++b) {
    const int off = b * K;
    for (int j = 0; j < K; ++j) {
      unit_row(off + j, 1.0, p.p_max, "box_hi");
      unit_row(off + j, -1.0, -p.p_min, "box_lo");
    }
    for (int j = 0; j + 1 < K; ++j) {
      Halfspace hs;
      hs.g.assign(D, 0.0);
      hs.g[off + j + 1] = 1.0;
      hs.g[off + j] = -1.0;
      hs.h = 0.0;
      hs.tag = "mono";
      rows.push_back(std::move(hs));
    }
    unit_row(off + K - 1, 1.0, b == 0 ? k.endpoint_phi : k.endpoint_psi,
             "endpoint");
  }

  // Robustness rows on the sample grid.
  std::vector<double> hw, Hw, hv, Hv;
  const int g = set.grid;
  for (int i = 0; i < g; ++i) {
    const double w = static_cast<double>(i) / (g - 1);
    hat_basis(K, w, hw, Hw);
    if (!flex) {
      Halfspace hs;
      hs.g.assign(D, 0.0);
      for (int j = 0; j < K; ++j) hs.g[j] = Hw[j] - k.ratio_scale * hw[j];
      hs.h = k.rhs0 - (1.0 - w) * k.A1 - k.A2 + p.c * p.p_min * w;
      hs.tag = "robust";
      hs.at_w = w;
      rows.push_back(std::move(hs));
    } else {
      for (int l = 0; l <= i; ++l) {
        const double v = static_cast<double>(l) / (g - 1);
        hat_basis(K, v, hv, Hv);
        Halfspace hs;
        hs.g.assign(D, 0.0);
        for (int j = 0; j < K; ++j) {
          hs.g[j] = Hw[j] - k.ratio_scale * hw[j];
          hs.g[K + j] = Hv[j] - k.ratio_scale * hv[j];
        }
        hs.h = k.rhs0 - (1.0 - w) * k.A1 - (1.0 - v) * k.A2 +
               p.c * p.p_min * w;
        hs.tag = "robust";
        hs.at_w = w;
        hs.at_v = v;
        rows.push_back(std::move(hs));
      }
    }
  }
  return rows;
}

namespace {

// Continuum maximum of the Base robustness residual
//   L(w) = Phi(0,w) + (1-w) A1 + A2 - c p_min w - rho [phi(w)] - rhs0
// over [0,1]: piecewise concave quadratic per knot segment, maximized in
// closed form. Returns (w*, L*).
std::pair<double, double> base_continuum_worst(const PwaThreshold& y,
                                               const RobustSetSpec& set) {
  const CostParams& p = set.params;
  const SetConstants k = set_constants(set);
  const int K = y.K();
  const double h = 1.0 / (K - 1);
  auto L = [&](double w) {
    const auto [val, integ] = pwa_eval_integral(y, 0.0, w);
    return integ + (1.0 - w) * k.A1 + k.A2 - p.c * p.p_min * w -
           k.ratio_scale * val - k.rhs0;
  };
  double best_w = 0.0, best_L = L(0.0);
  for (int j = 0; j + 1 < K; ++j) {
    const double a = j * h, b = (j + 1) * h;
    const double slope = (y.y[j + 1] - y.y[j]) / h;
    // L'(w) = phi(w) - A1 - c p_min - rho slope, linear on the segment.
    const double La = L(a), Lb = L(b);
    if (La > best_L) {
      best_L = La;
      best_w = a;
    }
    if (Lb > best_L) {
      best_L = Lb;
      best_w = b;
    }
    if (slope != 0.0) {
      const double phi_target = k.A1 + p.c * p.p_min + k.ratio_scale * slope;
      const double w_star = a + (phi_target - y.y[j]) / slope;
      if (w_star > a && w_star < b) {
        const double Ls = L(w_star);
        if (Ls > best_L) {
          best_L = Ls;
          best_w = w_star;
        }
      }
    }
  }
  return {best_w, best_L};
}

std::vector<double> stack_coords(const PaldThresholds& th,
                                 const RobustSetSpec& set) {
  if (is_flex(set.mode)) {
    std::vector<double> y = th.flex_purchase.y;
    y.insert(y.end(), th.flex_delivery.y.begin(), th.flex_delivery.y.end());
    return y;
  }
  return th.base.y;
}

void write_coords(PaldThresholds& th, const RobustSetSpec& set,
                  const std::vector<double>& y) {
  if (is_flex(set.mode)) {
    const int K = static_cast<int>(y.size()) / 2;
    th.flex_purchase.y.assign(y.begin(), y.begin() + K);
    th.flex_delivery.y.assign(y.begin() + K, y.end());
  } else {
    th.base.y = y;
  }
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Exact projection onto {y : g_i . y <= h_i} via a dual active-set method:
// the most violated row enters through a full step that keeps the active
// rows tight, dropping blocking rows (whose multiplier would go negative)
// one at a time. A row only joins the active set when its residual against
// the active span is nonzero, so the set stays linearly independent and
// every entry step strictly increases the dual objective -- finite by
// construction. Used as the fallback when alternating projections crawl on
// near-parallel sampled rows. Returns empty on iteration-cap exhaustion.
std::vector<double> dual_active_set_project(const std::vector<double>& y0,
                                            const std::vector<Halfspace>& rows,
                                            double tol_feas) {
  const int n = static_cast<int>(rows.size());
  const int D = static_cast<int>(y0.size());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<int> active;
  std::vector<double> lam;
  std::vector<char> is_active(n, 0);
  std::vector<double> y = y0;

  // Rebuilds y = y0 - G_A^T lam (- pending weight on row p while it is
  // being raised but has not joined the active set yet).
  auto recompute_y = [&](int pending = -1, double pending_lam = 0.0) {
    y = y0;
    for (std::size_t k = 0; k < active.size(); ++k)
      for (int d = 0; d < D; ++d) y[d] -= lam[k] * rows[active[k]].g[d];
    if (pending >= 0 && pending_lam != 0.0)
      for (int d = 0; d < D; ++d) y[d] -= pending_lam * rows[pending].g[d];
  };

  // Solves (G_A G_A^T + ridge I) u = G_A q. The active rows are kept
  // independent, so the system is well conditioned; the tiny ridge is
  // insurance only.
  auto solve_gram = [&](const std::vector<double>& q,
                        std::vector<double>& u) -> bool {
    const int m = static_cast<int>(active.size());
    u.assign(m, 0.0);
    if (m == 0) return true;
    std::vector<std::vector<double>> A(m, std::vector<double>(m + 1, 0.0));
    double max_diag = 1.0;
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j)
        A[i][j] = dot(rows[active[i]].g, rows[active[j]].g);
      max_diag = std::max(max_diag, A[i][i]);
      A[i][m] = dot(rows[active[i]].g, q);
    }
    const double ridge = 1e-12 * max_diag;
    for (int i = 0; i < m; ++i) A[i][i] += ridge;
    for (int col = 0; col < m; ++col) {
      int piv = col;
      for (int r = col + 1; r < m; ++r)
        if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
      if (std::abs(A[piv][col]) < 1e-15 * max_diag) return false;
      std::swap(A[piv], A[col]);
      for (int r = 0; r < m; ++r) {
        if (r == col) continue;
        const double f = A[r][col] / A[col][col];
        for (int cc = col; cc <= m; ++cc) A[r][cc] -= f * A[col][cc];
      }
    }
    for (int i = 0; i < m; ++i) u[i] = A[i][m] / A[i][i];
    return true;
  };

  auto drop_index = [&](int k) {
    is_active[active[k]] = 0;
    active.erase(active.begin() + k);
    lam.erase(lam.begin() + k);
  };

  const int cap = 100 * (D + 10) + 2 * n;
  for (int outer = 0; outer < cap; ++outer) {
    // Most violated inactive row. Active rows are tight up to solve noise;
    // treating that noise as a violation would drop a loaded multiplier and
    // catapult the iterate, so they only re-enter through the safety valve
    // below when materially violated.
    int p = -1;
    double worst = tol_feas;
    int drifted = -1;
    double drift = 1e-6 * std::max(1.0, std::abs(rows[0].h));
    for (int i = 0; i < n; ++i) {
      const double v = dot(rows[i].g, y) - rows[i].h;
      if (is_active[i]) {
        if (v > drift) {
          drift = v;
          drifted = i;
        }
      } else if (v > worst) {
        worst = v;
        p = i;
      }
    }
    if (drifted >= 0) {
      for (std::size_t k = 0; k < active.size(); ++k)
        if (active[k] == drifted) {
          drop_index(static_cast<int>(k));
          break;
        }
      recompute_y();
      continue;
    }
    if (p < 0) {
      // Primal feasible, lam >= 0, complementary. The ridge in solve_gram
      // lets a few e-8 of drift accumulate on the active faces, so finish
      // with one unridged equality re-solve on the final active set and
      // keep whichever iterate violates less.
      const int m = static_cast<int>(active.size());
      if (m == 0) return y;
      std::vector<std::vector<double>> A(m, std::vector<double>(m + 1, 0.0));
      double max_diag = 1.0;
      for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j)
          A[i][j] = dot(rows[active[i]].g, rows[active[j]].g);
        max_diag = std::max(max_diag, A[i][i]);
        A[i][m] = dot(rows[active[i]].g, y0) - rows[active[i]].h;
      }
      bool solvable = true;
      for (int col = 0; col < m && solvable; ++col) {
        int piv = col;
        for (int r = col + 1; r < m; ++r)
          if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
        if (std::abs(A[piv][col]) < 1e-13 * max_diag) {
          solvable = false;
          break;
        }
        std::swap(A[piv], A[col]);
        for (int r = 0; r < m; ++r) {
          if (r == col) continue;
          const double f = A[r][col] / A[col][col];
          for (int cc = col; cc <= m; ++cc) A[r][cc] -= f * A[col][cc];
        }
      }
      if (solvable) {
        std::vector<double> lam_new(m);
        bool sane = true;
        for (int i = 0; i < m; ++i) {
          lam_new[i] = A[i][m] / A[i][i];
          if (lam_new[i] < -1e-7 * (1.0 + std::abs(lam_new[i]))) sane = false;
        }
        if (sane) {
          std::vector<double> y_new = y0;
          for (int i = 0; i < m; ++i)
            for (int dcoord = 0; dcoord < D; ++dcoord)
              y_new[dcoord] -=
                  std::max(0.0, lam_new[i]) * rows[active[i]].g[dcoord];
          double w_old = 0.0, w_new = 0.0;
          for (int i = 0; i < n; ++i) {
            w_old = std::max(w_old, dot(rows[i].g, y) - rows[i].h);
            w_new = std::max(w_new, dot(rows[i].g, y_new) - rows[i].h);
          }
          if (w_new <= w_old) return y_new;
        }
      }
      return y;
    }

    // Raise lambda_p from 0, keeping the active rows tight: the active
    // multipliers move along -u per unit of lambda_p, and the violation of
    // row p shrinks at rate ||d||^2 where d is g_p's residual against the
    // active span.
    double lam_p = 0.0;
    bool resolved = false;
    const int add_cap = static_cast<int>(active.size()) + D + 2;
    for (int round = 0; round < add_cap; ++round) {
      const double viol_p = dot(rows[p].g, y) - rows[p].h;
      if (viol_p <= tol_feas) {
        resolved = true;
        break;
      }
      std::vector<double> u;
      if (!solve_gram(rows[p].g, u)) break;
      std::vector<double> d = rows[p].g;
      for (std::size_t k = 0; k < active.size(); ++k)
        for (int dim = 0; dim < D; ++dim)
          d[dim] -= u[k] * rows[active[k]].g[dim];
      // The violation of p is affine in the step with exact slope
      // g_p . d = d.d + ridge*|u|^2, so sizing the full step by that slope
      // lands on the face without overshoot. Dependence is classified by
      // the residual geometry d.d alone: the ridge term can dwarf it on a
      // truly dependent row, and stepping along that noise direction is
      // what must be avoided.
      const double dd = dot(d, d);
      const double rate = dot(rows[p].g, d);
      const double gg = dot(rows[p].g, rows[p].g);
      const bool dependent = !(dd > 1e-12 * std::max(gg, 1e-30)) || rate <= 0.0;

      const double s_full = dependent ? inf : viol_p / rate;
      double s_block = inf;
      int blocker = -1;
      double u_scale = 0.0;
      for (double v : u) u_scale = std::max(u_scale, std::abs(v));
      for (std::size_t k = 0; k < u.size(); ++k) {
        if (u[k] > 1e-14 * std::max(1.0, u_scale)) {
          const double t = lam[k] / u[k];
          if (t < s_block) {
            s_block = t;
            blocker = static_cast<int>(k);
          }
        }
      }
      if (dependent && blocker < 0) break;  // no progress direction left

      const double s = std::min(s_full, s_block);
      for (std::size_t k = 0; k < lam.size(); ++k)
        lam[k] = std::max(0.0, lam[k] - s * u[k]);
      lam_p += s;
      if (s_full <= s_block) {
        active.push_back(p);
        lam.push_back(lam_p);
        is_active[p] = 1;
        recompute_y();
        resolved = true;
        break;
      }
      drop_index(blocker);
      recompute_y(p, lam_p);
    }
    if (!resolved) return {};
    if (!is_active[p] && lam_p > 0.0) {
      // p became satisfied through drops alone while accumulating weight.
      active.push_back(p);
      lam.push_back(lam_p);
      is_active[p] = 1;
      recompute_y();
    }
  }
  return {};
}

// Dykstra's alternating projection onto the intersection of halfspaces
// (fast on well-separated systems; hands off to the exact dual active-set
// solve above when the sweep cap is hit).
std::vector<double> dykstra(const std::vector<double>& y0,
                            const std::vector<Halfspace>& rows,
                            double tol = 1e-10, int max_sweeps = 20000) {
  const std::size_t n = rows.size();
  const std::size_t D = y0.size();
  std::vector<double> norms(n);
  for (std::size_t i = 0; i < n; ++i) norms[i] = dot(rows[i].g, rows[i].g);

  std::vector<double> y = y0;
  std::vector<std::vector<double>> corr(n, std::vector<double>(D, 0.0));
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double delta = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      // y' = y + correction_i, then project onto halfspace i.
      double viol = -rows[i].h;
      for (std::size_t dcoord = 0; dcoord < D; ++dcoord)
        viol += rows[i].g[dcoord] * (y[dcoord] + corr[i][dcoord]);
      if (viol > 0.0 && norms[i] > 0.0) {
        const double scale = viol / norms[i];
        for (std::size_t dcoord = 0; dcoord < D; ++dcoord) {
          const double new_y = y[dcoord] + corr[i][dcoord] -
                               scale * rows[i].g[dcoord];
          corr[i][dcoord] = y[dcoord] + corr[i][dcoord] - new_y;
          delta = std::max(delta, std::abs(new_y - y[dcoord]));
          y[dcoord] = new_y;
        }
      } else {
        for (std::size_t dcoord = 0; dcoord < D; ++dcoord) {
          const double new_y = y[dcoord] + corr[i][dcoord];
          corr[i][dcoord] = 0.0;
          delta = std::max(delta, std::abs(new_y - y[dcoord]));
          y[dcoord] = new_y;
        }
      }
    }
    if (delta < 1e-13) {
      double worst = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        worst = std::max(worst, dot(rows[i].g, y) - rows[i].h);
      if (worst <= tol) return y;
    }
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    worst = std::max(worst, dot(rows[i].g, y) - rows[i].h);
  if (worst <= tol) return y;

  // Sweep cap hit: near-parallel sampled rows make alternating projections
  // crawl. Finish with the exact finite solve.
  std::vector<double> z = dual_active_set_project(y0, rows, std::max(tol, 1e-10));
  if (!z.empty()) {
    double zw = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      zw = std::max(zw, dot(rows[i].g, z) - rows[i].h);
    if (zw <= std::max(tol, 1e-8)) return z;
    worst = zw;
  }
  throw std::runtime_error(
      "project: projection did not converge (violation " +
      std::to_string(worst) + " after sweep cap and active-set fallback)");
}

}  // namespace

std::vector<double> project_onto_rows(const std::vector<double>& y0,
                                      const std::vector<Halfspace>& rows) {
  return dykstra(y0, rows);
}

MembershipResult membership(const PaldThresholds& th, const RobustSetSpec& set,
                            double tol) {
  const std::vector<double> y = stack_coords(th, set);
  const int K = is_flex(set.mode) ? static_cast<int>(y.size()) / 2
                                  : static_cast<int>(y.size());
  const std::vector<Halfspace> rows = robust_constraints(set, K);

  MembershipResult res;
  for (const Halfspace& hs : rows) {
    if (hs.g.size() != y.size())
      throw std::invalid_argument("membership: knot count mismatch with set");
    const double r = dot(hs.g, y) - hs.h;
    if (r > res.worst_violation) {
      res.worst_violation = r;
      res.where = hs.tag;
      res.at_w = hs.at_w;
      res.at_v = hs.at_v;
    }
  }
  if (!is_flex(set.mode)) {
    const auto [w_star, L_star] = base_continuum_worst(th.base, set);
    if (L_star > res.worst_violation) {
      res.worst_violation = L_star;
      res.where = "robust_continuum";
      res.at_w = w_star;
    }
  }
  res.ok = res.worst_violation <= tol;
  return res;
}

PaldThresholds project(const PaldThresholds& th, const RobustSetSpec& set) {
  const std::vector<double> y0 = stack_coords(th, set);
  const int K = is_flex(set.mode) ? static_cast<int>(y0.size()) / 2
                                  : static_cast<int>(y0.size());
  std::vector<Halfspace> rows = robust_constraints(set, K);

  if (is_flex(set.mode)) {
    // Enforce a small interior margin on the sampled robustness rows so the
    // projected point still satisfies them at face value after later
    // arithmetic.
    const double margin = 1e-6 * set.params.p_max;
    for (Halfspace& hs : rows)
      if (hs.tag == "robust") hs.h -= margin;
  }

  std::vector<double> y = dykstra(y0, rows);

  if (!is_flex(set.mode)) {
    // Cutting planes at analytic violations between sample points.
    PaldThresholds cur = th;
    for (int round = 0; round < 10; ++round) {
      write_coords(cur, set, y);
      const auto [w_star, L_star] = base_continuum_worst(cur.base, set);
      if (L_star <= 1e-12 * std::max(1.0, set.params.p_max)) break;
      const SetConstants k = set_constants(set);
      std::vector<double> hv, Hv;
      hat_basis(K, w_star, hv, Hv);
      Halfspace hs;
      hs.g.assign(K, 0.0);
      for (int j = 0; j < K; ++j) hs.g[j] = Hv[j] - k.ratio_scale * hv[j];
      hs.h = k.rhs0 - (1.0 - w_star) * k.A1 - k.A2 +
             set.params.c * set.params.p_min * w_star;
      hs.tag = "robust_cut";
      hs.at_w = w_star;
      rows.push_back(std::move(hs));
      y = dykstra(y0, rows);
    }
  }

  PaldThresholds out = th;
  write_coords(out, set, y);
  return out;
}

std::vector<double> project_active_set_oracle(
    const std::vector<double>& y0, const std::vector<Halfspace>& rows) {
  const int D = static_cast<int>(y0.size());
  const int n = static_cast<int>(rows.size());

  // Feasibility shortcut.
  auto feasible = [&](const std::vector<double>& y) {
    for (const Halfspace& hs : rows)
      if (dot(hs.g, y) - hs.h > 1e-9) return false;
    return true;
  };
  if (feasible(y0)) return y0;

  double best_dist = std::numeric_limits<double>::infinity();
  std::vector<double> best = y0;
  std::vector<int> subset;

  // Equality-constrained projection onto the rows in `subset`.
  auto try_subset = [&]() {
    const int m = static_cast<int>(subset.size());
    if (m == 0) return;
    // Gram matrix G G^T and residual G y0 - h.
    std::vector<std::vector<double>> A(m, std::vector<double>(m + 1, 0.0));
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j)
        A[i][j] = dot(rows[subset[i]].g, rows[subset[j]].g);
      A[i][m] = dot(rows[subset[i]].g, y0) - rows[subset[i]].h;
    }
    // Gaussian elimination with partial pivoting; skip singular subsets.
    for (int col = 0; col < m; ++col) {
      int piv = col;
      for (int r = col + 1; r < m; ++r)
        if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
      if (std::abs(A[piv][col]) < 1e-12) return;
      std::swap(A[piv], A[col]);
      for (int r = 0; r < m; ++r) {
        if (r == col) continue;
        const double f = A[r][col] / A[col][col];
        for (int cc = col; cc <= m; ++cc) A[r][cc] -= f * A[col][cc];
      }
    }
    std::vector<double> lambda(m);
    for (int i = 0; i < m; ++i) lambda[i] = A[i][m] / A[i][i];
    std::vector<double> y = y0;
    for (int i = 0; i < m; ++i)
      for (int dcoord = 0; dcoord < D; ++dcoord)
        y[dcoord] -= lambda[i] * rows[subset[i]].g[dcoord];
    if (!feasible(y)) return;
    double dist = 0.0;
    for (int dcoord = 0; dcoord < D; ++dcoord)
      dist += (y[dcoord] - y0[dcoord]) * (y[dcoord] - y0[dcoord]);
    if (dist < best_dist) {
      best_dist = dist;
      best = y;
    }
  };

  // Enumerate subsets of size 1..D.
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == 0) return;
    for (int i = start; i < n; ++i) {
      subset.push_back(i);
      try_subset();
      rec(i + 1, depth - 1);
      subset.pop_back();
    }
  };
  rec(0, D);

  if (!std::isfinite(best_dist))
    throw std::runtime_error(
        "project_active_set_oracle: no feasible candidate found");
  return best;
}

// ---------------------------------------------------------------------------
// Runner and training.

Schedule pald_run(const Instance& instance, const PaldThresholds& thresholds,
                  const PaadConfig& config) {
  ThresholdFactory factory = [&thresholds](ThresholdKind kind, double d)
      -> std::shared_ptr<const ThresholdCurve> {
    switch (kind) {
      case ThresholdKind::BaseS:
      case ThresholdKind::BaseT:
        return std::make_shared<PwaCurve>(thresholds.base, d);
      case ThresholdKind::FlexPurchaseS:
      case ThresholdKind::FlexPurchaseT:
        return std::make_shared<PwaCurve>(thresholds.flex_purchase, d);
      default:
        return std::make_shared<PwaCurve>(thresholds.flex_delivery, d);
    }
  };
  return run_with_thresholds(instance, factory, config);
}

PaldThresholds analytic_knots(const CostParams& params, int K,
                              double ratio_override) {
  const bool tracking = params.smoothing_mode == SmoothingMode::Tracking;
  const AnalyticThreshold base = make_threshold(
      tracking ? ThresholdKind::BaseT : ThresholdKind::BaseS, params, 1.0,
      ratio_override);
  const AnalyticThreshold fp = make_threshold(
      tracking ? ThresholdKind::FlexPurchaseT : ThresholdKind::FlexPurchaseS,
      params, 1.0, ratio_override);
  const AnalyticThreshold fd = make_threshold(
      tracking ? ThresholdKind::FlexDeliveryT : ThresholdKind::FlexDeliveryS,
      params, 1.0, ratio_override);
  PaldThresholds th;
  th.base.y.resize(K);
  th.flex_purchase.y.resize(K);
  th.flex_delivery.y.resize(K);
  for (int j = 0; j < K; ++j) {
    const double u = static_cast<double>(j) / (K - 1);
    th.base.y[j] = base.value_at(u);
    th.flex_purchase.y[j] = fp.value_at(u);
    th.flex_delivery.y[j] = fd.value_at(u);
  }
  return th;
}

TrainResult train_pald_s(const std::vector<Instance>& instances,
                         const RobustSetSpec& base_set,
                         const RobustSetSpec& flex_set,
                         const TrainConfig& config) {
  if (instances.empty())
    throw std::invalid_argument("train_pald_s: no training instances");
  const CostParams& P = base_set.params;
  const int K = 10;
  const double fd_step =
      config.fd_step > 0.0 ? config.fd_step : 1e-3 * (P.p_max - P.p_min);

  // Cache offline optima.
  std::vector<double> opts;
  opts.reserve(instances.size());
  for (const Instance& inst : instances) {
    const OptResult o = (inst.params.c == 0.0 || inst.params.S == 0.0)
                            ? opt_lp(inst)
                            : opt_bilinear(inst);
    opts.push_back(o.cost);
  }

  auto project_all = [&](const PaldThresholds& th) {
    return project(project(th, base_set), flex_set);
  };
  auto loss_of = [&](const PaldThresholds& th) {
    double acc = 0.0;
    for (std::size_t i = 0; i < instances.size(); ++i) {
      const Schedule sched = pald_run(instances[i], th);
      const double cost = evaluate_cost(instances[i], sched).total;
      acc += ecr(instances[i], cost, opts[i]);
    }
    return acc / static_cast<double>(instances.size());
  };

  auto pack = [](const PaldThresholds& th) {
    std::vector<double> y = th.base.y;
    y.insert(y.end(), th.flex_purchase.y.begin(), th.flex_purchase.y.end());
    y.insert(y.end(), th.flex_delivery.y.begin(), th.flex_delivery.y.end());
    return y;
  };
  auto unpack = [K](const std::vector<double>& y) {
    PaldThresholds th;
    th.base.y.assign(y.begin(), y.begin() + K);
    th.flex_purchase.y.assign(y.begin() + K, y.begin() + 2 * K);
    th.flex_delivery.y.assign(y.begin() + 2 * K, y.end());
    return th;
  };

  TrainResult result;
  result.opt_costs = opts;
  result.init = project_all(analytic_knots(P, K));
  PaldThresholds cur = result.init;
  double cur_loss = loss_of(cur);
  result.loss_trace.push_back(cur_loss);
  result.thresholds = cur;
  double best_loss = cur_loss;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const std::vector<double> y = pack(cur);
    std::vector<double> grad(y.size(), 0.0);
    for (std::size_t i = 0; i < y.size(); ++i) {
      std::vector<double> yp = y, ym = y;
      yp[i] += fd_step;
      ym[i] -= fd_step;
      grad[i] = (loss_of(unpack(yp)) - loss_of(unpack(ym))) / (2.0 * fd_step);
    }
    std::vector<double> ynew = y;
    for (std::size_t i = 0; i < y.size(); ++i)
      ynew[i] -= config.lr * grad[i];
    cur = project_all(unpack(ynew));
    cur_loss = loss_of(cur);
    result.loss_trace.push_back(cur_loss);
    if (cur_loss < best_loss) {
      best_loss = cur_loss;
      result.thresholds = cur;
    }
  }
  return result;
}

}  // namespace osdm
