#pragma once

// Globally adaptive Gauss-Kronrod (10/21-point) quadrature.

#include <functional>
#include <span>

namespace semivar {

struct QuadratureOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-12;
  int max_subdivisions = 4000;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;  ///< estimated absolute error
  int evaluations = 0;
  bool converged = false;
};

using Integrand = std::function<double(double)>;

/// Integral over [a, b], a <= b; the interval with the largest error estimate is
/// bisected until abs_tol or rel_tol * |value| is met. `breakpoints` inside
/// (a, b) seed the initial partition.
QuadratureResult integrate(const Integrand& f, double a, double b, const QuadratureOptions& options = {},
                           std::span<const double> breakpoints = {});

/// Integral over (-inf, upper]: integrates [upper - w, upper], then blocks of
/// doubling width further left, stopping once a block adds less than 1e-12 of
/// the accumulated value (and the accumulated value is nonzero), or after 64
/// doublings.
QuadratureResult integrate_lower_tail(const Integrand& f, double upper, double initial_width,
                                      const QuadratureOptions& options = {});

}  // namespace semivar
