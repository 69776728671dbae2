#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <exception>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace mw {

/// Raised when an argument lies outside the domain of an operation
/// (negative argument to a Young function, nonpositive weight cell, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised on malformed or inconsistent user input (configs, field files).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A value in [0, +inf]. Infinity is a distinguished state rather than a
/// large float; `as_double()` maps it to IEEE infinity for arithmetic.
class ExtendedReal {
 public:
  constexpr ExtendedReal() = default;
  constexpr ExtendedReal(double v) : value_(v) {}  // NOLINT(google-explicit-constructor)

  static constexpr ExtendedReal infinity() {
    ExtendedReal r;
    r.infinite_ = true;
    return r;
  }

  constexpr bool is_finite() const { return !infinite_; }
  constexpr bool is_infinite() const { return infinite_; }

  double value() const {
    if (infinite_) throw DomainError("ExtendedReal::value() on +inf");
    return value_;
  }
  constexpr double as_double() const {
    return infinite_ ? std::numeric_limits<double>::infinity() : value_;
  }

  friend constexpr bool operator==(const ExtendedReal& a, const ExtendedReal& b) {
    return a.infinite_ == b.infinite_ && (a.infinite_ || a.value_ == b.value_);
  }
  friend constexpr bool operator<(const ExtendedReal& a, const ExtendedReal& b) {
    if (a.infinite_) return false;
    if (b.infinite_) return true;
    return a.value_ < b.value_;
  }
  friend constexpr bool operator>(const ExtendedReal& a, const ExtendedReal& b) { return b < a; }
  friend constexpr bool operator<=(const ExtendedReal& a, const ExtendedReal& b) { return !(b < a); }
  friend constexpr bool operator>=(const ExtendedReal& a, const ExtendedReal& b) { return !(a < b); }

  std::string to_string() const;

 private:
  double value_ = 0.0;
  bool infinite_ = false;
};

/// `count` points spaced geometrically from `lo` to `hi` inclusive.
std::vector<double> log_grid(double lo, double hi, int count);

/// `count` points spaced uniformly from `lo` to `hi` inclusive.
std::vector<double> linear_grid(double lo, double hi, int count);

/// Outcome of comparing a scanned supremum before and after a refinement.
enum class Stability { Stable, Unbounded };

/// Stable when `refined <= (1 + tolerance) * base`.
Stability refinement_stability(double base, double refined, double tolerance = 0.10);

/// Resolution-refinement verdict on a sequence of estimates taken at N, 2N,
/// 4N, ... . Unbounded when every one of the last two doublings grew the
/// estimate by more than `growth` (relative).
Stability refinement_verdict(const std::vector<double>& estimates, double growth = 0.10);

/// Worker cap for parallel_for; 0 means hardware concurrency.
void set_thread_limit(int n);
int thread_limit();

/// Runs body(i) for i in [0, n) on up to thread_limit() threads. Results must
/// be written to per-index slots; the first exception is rethrown.
template <class F>
void parallel_for(std::size_t n, F&& body) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(thread_limit()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto run = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run);
  run();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace mw
