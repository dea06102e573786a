#include "osdm/simplex.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace osdm {

namespace {
constexpr double kPivotEps = 1e-9;
constexpr double kCostEps = 1e-9;
}  // namespace

int LpProblem::add_row(std::vector<std::pair<int, double>> coeffs, RowSense s,
                       double b) {
  rows.push_back(std::move(coeffs));
  sense.push_back(s);
  rhs.push_back(b);
  return static_cast<int>(rows.size()) - 1;
}

namespace {

// Dense tableau: m rows x (n_cols + 1); last column is the rhs. An extra
// cost row is maintained at index m.
struct Tableau {
  int m = 0, n = 0;
  std::vector<double> a;  // (m+1) x (n+1), row-major
  std::vector<int> basis;

  double& at(int r, int c) { return a[static_cast<std::size_t>(r) * (n + 1) + c]; }
  double at(int r, int c) const {
    return a[static_cast<std::size_t>(r) * (n + 1) + c];
  }

  void pivot(int pr, int pc) {
    const double pv = at(pr, pc);
    const double inv = 1.0 / pv;
    double* prow = &a[static_cast<std::size_t>(pr) * (n + 1)];
    for (int c = 0; c <= n; ++c) prow[c] *= inv;
    for (int r = 0; r <= m; ++r) {
      if (r == pr) continue;
      double* row = &a[static_cast<std::size_t>(r) * (n + 1)];
      const double factor = row[pc];
      if (factor == 0.0) continue;
      for (int c = 0; c <= n; ++c) row[c] -= factor * prow[c];
      row[pc] = 0.0;
    }
    prow[pc] = 1.0;
    basis[pr] = pc;
  }

  // Bland's rule iteration on the active column set [0, active_n).
  // Returns 0 on optimal, 1 on unbounded, 2 on iteration-limit.
  int iterate(int active_n, long long max_iters, int* iters_out) {
    long long iters = 0;
    while (true) {
      int enter = -1;
      for (int c = 0; c < active_n; ++c) {
        if (at(m, c) < -kCostEps) {
          enter = c;
          break;
        }
      }
      if (enter < 0) {
        if (iters_out) *iters_out += static_cast<int>(iters);
        return 0;
      }
      int leave = -1;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (int r = 0; r < m; ++r) {
        const double coef = at(r, enter);
        if (coef > kPivotEps) {
          const double ratio = at(r, n) / coef;
          if (ratio < best_ratio - 1e-12 ||
              (ratio < best_ratio + 1e-12 &&
               (leave < 0 || basis[r] < basis[leave]))) {
            best_ratio = ratio;
            leave = r;
          }
        }
      }
      if (leave < 0) {
        if (iters_out) *iters_out += static_cast<int>(iters);
        return 1;  // unbounded
      }
      pivot(leave, enter);
      if (++iters > max_iters) {
        if (iters_out) *iters_out += static_cast<int>(iters);
        return 2;
      }
    }
  }
};

}  // namespace

LpResult solve_lp(const LpProblem& problem) {
  const int n_struct = problem.num_vars;
  const int m = static_cast<int>(problem.rows.size());

  // Count slack and artificial columns after normalizing rhs >= 0.
  std::vector<int> slack_col(m, -1), art_col(m, -1);
  int n_slack = 0, n_art = 0;
  std::vector<double> row_scale(m, 1.0);
  for (int r = 0; r < m; ++r) {
    RowSense s = problem.sense[r];
    if (problem.rhs[r] < 0.0) {
      row_scale[r] = -1.0;
      if (s == RowSense::LE)
        s = RowSense::GE;
      else if (s == RowSense::GE)
        s = RowSense::LE;
    }
    if (s == RowSense::LE) {
      slack_col[r] = n_slack++;
    } else if (s == RowSense::GE) {
      slack_col[r] = n_slack++;
      art_col[r] = n_art++;
    } else {
      art_col[r] = n_art++;
    }
  }

  const int n_total = n_struct + n_slack + n_art;
  Tableau tab;
  tab.m = m;
  tab.n = n_total;
  tab.a.assign(static_cast<std::size_t>(m + 1) * (n_total + 1), 0.0);
  tab.basis.assign(m, -1);

  for (int r = 0; r < m; ++r) {
    const double sc = row_scale[r];
    for (const auto& [c, v] : problem.rows[r]) {
      if (c < 0 || c >= n_struct)
        throw std::invalid_argument("solve_lp: column index out of range");
      tab.at(r, c) += sc * v;
    }
    tab.at(r, n_total) = sc * problem.rhs[r];

    RowSense s = problem.sense[r];
    if (sc < 0) {
      if (s == RowSense::LE)
        s = RowSense::GE;
      else if (s == RowSense::GE)
        s = RowSense::LE;
    }
    if (slack_col[r] >= 0)
      tab.at(r, n_struct + slack_col[r]) = (s == RowSense::LE) ? 1.0 : -1.0;
    if (art_col[r] >= 0) {
      tab.at(r, n_struct + n_slack + art_col[r]) = 1.0;
      tab.basis[r] = n_struct + n_slack + art_col[r];
    } else {
      tab.basis[r] = n_struct + slack_col[r];
    }
  }

  LpResult result;
  const long long max_iters =
      4LL * (static_cast<long long>(m) + n_total + 64) *
      (static_cast<long long>(m) + 16);

  // Phase 1: minimize the sum of artificials.
  if (n_art > 0) {
    for (int c = 0; c <= n_total; ++c) {
      double v = 0.0;
      for (int r = 0; r < m; ++r)
        if (tab.basis[r] >= n_struct + n_slack) v -= tab.at(r, c);
      tab.at(m, c) = v;
    }
    for (int r = 0; r < m; ++r)
      if (tab.basis[r] >= n_struct + n_slack) tab.at(m, tab.basis[r]) = 0.0;

    const int status = tab.iterate(n_total, max_iters, &result.iterations);
    if (status == 2)
      throw std::runtime_error("solve_lp: phase-1 iteration limit exceeded");
    const double phase1 = -tab.at(m, n_total);
    if (phase1 > 1e-7) {
      result.feasible = false;
      return result;
    }
    // Drive remaining artificials out of the basis (degenerate rows).
    for (int r = 0; r < m; ++r) {
      if (tab.basis[r] >= n_struct + n_slack) {
        int pc = -1;
        for (int c = 0; c < n_struct + n_slack; ++c) {
          if (std::abs(tab.at(r, c)) > kPivotEps) {
            pc = c;
            break;
          }
        }
        if (pc >= 0) tab.pivot(r, pc);
        // else: the row is all-zero over real columns -> redundant; leave the
        // artificial basic at value ~0, it can never re-enter (restricted
        // column range in phase 2).
      }
    }
  }

  // Phase 2: original objective over structural + slack columns only.
  for (int c = 0; c <= n_total; ++c) tab.at(m, c) = 0.0;
  for (int c = 0; c < n_struct; ++c) tab.at(m, c) = problem.objective[c];
  for (int r = 0; r < m; ++r) {
    const int b = tab.basis[r];
    if (b < n_struct && problem.objective[b] != 0.0) {
      const double cost = problem.objective[b];
      for (int c = 0; c <= n_total; ++c) tab.at(m, c) -= cost * tab.at(r, c);
    }
  }
  const int status =
      tab.iterate(n_struct + n_slack, max_iters, &result.iterations);
  if (status == 2)
    throw std::runtime_error("solve_lp: phase-2 iteration limit exceeded");
  if (status == 1) {
    result.feasible = true;
    result.bounded = false;
    return result;
  }

  result.feasible = true;
  result.bounded = true;
  result.x.assign(n_struct, 0.0);
  for (int r = 0; r < m; ++r)
    if (tab.basis[r] < n_struct)
      result.x[tab.basis[r]] = std::max(0.0, tab.at(r, n_total));
  double obj = 0.0;
  for (int c = 0; c < n_struct; ++c) obj += problem.objective[c] * result.x[c];
  result.objective = obj;
  return result;
}

}  // namespace osdm
