#include "mixedweak/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>

namespace mw::quad {

double integrate(const Integrand& f, double a, double b, double rel_tol, double* error) {
  if (a == b) return 0.0;
  // Boost compares its unscaled error estimate against a scaled tolerance,
  // so short intervals would recurse to full depth; integrate on [-1, 1].
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  auto g = [&](double y) { return f(mid + half * y); };
  double err = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(g, -1.0, 1.0, 15, rel_tol, &err);
  if (error) *error = err * std::abs(half);
  return half * v;
}

OriginIntegral integrate_from_zero(const Integrand& f, double x, double rel_tol) {
  OriginIntegral out;
  double sum = 0.0;
  double prev = 0.0;
  double prev_ratio = -1.0;
  int settled = 0;
  double hi = x;
  constexpr int kMaxShells = 1000;
  for (int k = 0; k < kMaxShells; ++k) {
    const double lo = hi * 0.5;
    if (lo < std::numeric_limits<double>::min() * 1e4) break;
    const double shell = integrate(f, lo, hi, rel_tol * 0.1);
    if (!std::isfinite(shell)) break;
    sum += shell;
    out.shells = k + 1;
    hi = lo;
    if (k > 0 && prev > 0.0) {
      const double ratio = shell / prev;
      if (prev_ratio >= 0.0 && std::abs(ratio - prev_ratio) < 1e-3 * std::max(1.0, ratio))
        ++settled;
      else
        settled = 0;
      prev_ratio = ratio;
      if (settled >= 3 && ratio >= 0.99) break;  // decay too slow to close within the shell budget
      if (settled >= 3) {
        const double tail = shell * ratio / (1.0 - ratio);
        if (tail <= rel_tol * std::abs(sum) || tail == 0.0) {
          out.value = sum + tail;
          out.tail_estimate = tail;
          out.converged = true;
          return out;
        }
      }
    } else if (k > 0 && prev == 0.0 && shell == 0.0) {
      // identically zero near the origin
      if (k > 8) {
        out.value = sum;
        out.converged = true;
        return out;
      }
    }
    prev = shell;
  }
  out.value = sum;
  out.converged = false;
  return out;
}

}  // namespace mw::quad
