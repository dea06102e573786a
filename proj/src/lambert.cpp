#include "osdm/lambert.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace osdm {

double lambert_w0(double x) {
  const double branch = -std::exp(-1.0);
  if (x < branch) {
    if (x >= branch - 1e-12)
      x = branch;
    else
      throw std::domain_error("lambert_w0: argument " + std::to_string(x) +
                              " below branch point -1/e");
  }
  if (x == 0.0) return 0.0;

  // Initial guess.
  double w;
  if (x < branch + 0.25) {
    // Series around the branch point: w = -1 + q - q^2/3 + 11 q^3/72, with
    // q = sqrt(2 (e x + 1)).
    const double q = std::sqrt(std::max(0.0, 2.0 * (std::exp(1.0) * x + 1.0)));
    w = -1.0 + q - q * q / 3.0 + 11.0 * q * q * q / 72.0;
  } else if (x < std::exp(1.0)) {
    w = x / std::exp(1.0);  // crude but in-basin for moderate x
  } else {
    const double l1 = std::log(x);
    const double l2 = std::log(l1);
    w = l1 - l2 + l2 / l1;
  }

  const double tol = 1e-12 * std::max(1.0, std::abs(x));
  for (int iter = 0; iter < 50; ++iter) {
    const double ew = std::exp(w);
    const double r = w * ew - x;
    if (std::abs(r) <= tol) return w;
    // Halley step.
    const double denom = ew * (w + 1.0) - (w + 2.0) * r / (2.0 * w + 2.0);
    if (denom == 0.0 || !std::isfinite(denom)) break;
    w -= r / denom;
    if (w < -1.0) w = -1.0;  // stay on the principal branch
  }
  const double r = std::abs(w * std::exp(w) - x);
  if (r <= tol) return w;
  throw std::runtime_error("lambert_w0: no convergence for x=" +
                           std::to_string(x) + " residual=" + std::to_string(r));
}

}  // namespace osdm
