#pragma once
// Principal branch of the Lambert W function on [-1/e, inf).

namespace osdm {

// W0(x): solves w * exp(w) = x with w >= -1. Arguments within 1e-12 below
// -1/e are clamped to the branch point; anything lower throws
// std::domain_error. Halley iteration from a series/log initial guess;
// converges to |w e^w - x| <= 1e-12 * max(1, |x|) or throws std::runtime_error.
double lambert_w0(double x);

}  // namespace osdm
