#pragma once
// Dense two-phase primal simplex with Bland's anti-cycling rule.
// Small-scale exact LP solving for the offline oracles; minimization form
// with nonnegative variables and <= / == / >= rows.

#include <utility>
#include <vector>

namespace osdm {

enum class RowSense { LE, EQ, GE };

struct LpProblem {
  int num_vars = 0;
  std::vector<double> objective;                            // size num_vars
  std::vector<std::vector<std::pair<int, double>>> rows;    // sparse coefficients
  std::vector<double> rhs;
  std::vector<RowSense> sense;

  int add_row(std::vector<std::pair<int, double>> coeffs, RowSense s, double b);
};

struct LpResult {
  bool feasible = false;
  bool bounded = true;
  std::vector<double> x;
  double objective = 0.0;
  int iterations = 0;
};

// Solves min c.x s.t. rows, x >= 0. Throws std::runtime_error on iteration
// blow-up (cycling should be impossible under Bland's rule).
LpResult solve_lp(const LpProblem& problem);

}  // namespace osdm
