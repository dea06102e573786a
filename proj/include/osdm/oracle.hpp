#pragma once
// Offline optimum oracles: exact LP (constant delivery coefficient), an
// alternating scheme for the bilinear storage-dependent case, and a
// memoized lattice brute force for tiny instances. Plus the empirical
// competitive ratio helper.

#include <string>

#include "osdm/core.hpp"

namespace osdm {

enum class OptMethod { ExactLP, AlternatingLP, BruteForce };

std::string to_string(OptMethod m);

struct OptResult {
  double cost = 0.0;
  Schedule schedule;
  OptMethod method = OptMethod::ExactLP;
  bool converged = true;
  int iterations = 0;
};

// Exact offline optimum via LP. Valid when the delivery coefficient does not
// depend on the storage level: c == 0 (any mode), or S == 0 (the storage
// fraction is pinned to 0). Large flexible-only S == 0 instances whose
// demand arrivals fall on constant-price segment starts and deadlines on
// segment ends are solved by an exact segment-collapsed LP; everything else
// uses the full per-step epigraph LP (intended for T <= 96).
// Throws std::invalid_argument when neither c == 0 nor S == 0.
OptResult opt_lp(const Instance& instance);

// Alternating scheme for c > 0 with storage: freezes the delivery
// coefficients at the previous iterate's storage trajectory, solves the
// resulting LP, re-evaluates the true bilinear cost, and keeps the best
// feasible iterate. Stops on cost change < tol or max_iters.
OptResult opt_bilinear(const Instance& instance, int max_iters = 100,
                       double tol = 1e-8);

// Exhaustive memoized search on the decision lattice {0, g, 2g, ...}.
// Preconditions: T <= 6, total demand <= 2, S <= 1, and all demands / S
// aligned to the lattice (throws std::invalid_argument otherwise).
OptResult opt_bruteforce(const Instance& instance, double grid_step);

// Empirical competitive ratio; defined as 1 when the instance carries no
// demand. Throws std::invalid_argument on a non-positive optimum with
// positive demand.
double ecr(const Instance& instance, double alg_cost, double opt_cost);

}  // namespace osdm
