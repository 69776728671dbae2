#include "mixedweak/core.hpp"

#include <cstdio>

namespace mw {

std::string ExtendedReal::to_string() const {
  if (infinite_) return "inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", value_);
  return buf;
}

std::vector<double> log_grid(double lo, double hi, int count) {
  if (!(lo > 0.0) || !(hi >= lo) || count < 1) throw DomainError("log_grid: need 0 < lo <= hi, count >= 1");
  std::vector<double> out(static_cast<std::size_t>(count));
  if (count == 1) {
    out[0] = lo;
    return out;
  }
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (count - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

std::vector<double> linear_grid(double lo, double hi, int count) {
  if (count < 1) throw DomainError("linear_grid: count >= 1");
  std::vector<double> out(static_cast<std::size_t>(count));
  if (count == 1) {
    out[0] = lo;
    return out;
  }
  for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (count - 1);
  out.back() = hi;
  return out;
}

Stability refinement_stability(double base, double refined, double tolerance) {
  if (!std::isfinite(refined)) return Stability::Unbounded;
  return refined <= (1.0 + tolerance) * base ? Stability::Stable : Stability::Unbounded;
}

Stability refinement_verdict(const std::vector<double>& estimates, double growth) {
  if (estimates.empty()) return Stability::Stable;
  for (double e : estimates)
    if (!std::isfinite(e)) return Stability::Unbounded;
  if (estimates.size() < 3) {
    if (estimates.size() == 2 && estimates[1] > (1.0 + growth) * estimates[0]) return Stability::Unbounded;
    return Stability::Stable;
  }
  const std::size_t n = estimates.size();
  const bool g1 = estimates[n - 2] > (1.0 + growth) * estimates[n - 3];
  const bool g2 = estimates[n - 1] > (1.0 + growth) * estimates[n - 2];
  return (g1 && g2) ? Stability::Unbounded : Stability::Stable;
}

namespace {
std::atomic<int> g_thread_limit{0};
}

void set_thread_limit(int n) { g_thread_limit = std::max(0, n); }

int thread_limit() {
  const int n = g_thread_limit.load();
  if (n > 0) return n;
  return std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
}

}  // namespace mw
