#pragma once

#include <functional>

namespace mw::quad {

using Integrand = std::function<double(double)>;

/// Adaptive Gauss-Kronrod (61 point) on a finite interval.
double integrate(const Integrand& f, double a, double b, double rel_tol = 1e-12, double* error = nullptr);

struct OriginIntegral {
  double value = 0.0;
  bool converged = false;
  int shells = 0;
  double tail_estimate = 0.0;
};

/// Integral of f over (0, x] for integrands that may be singular at the
/// origin. Sums over dyadic shells [x 2^{-k-1}, x 2^{-k}] and closes with a
/// geometric tail once the shell ratio settles below one. Not converged when
/// the shell contributions stop decaying (non-integrable at 0).
OriginIntegral integrate_from_zero(const Integrand& f, double x, double rel_tol = 1e-11);

}  // namespace mw::quad
