#pragma once

#include "mixedweak/core.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace mw {

enum class YoungFamily { Power, LogPower, LogLog, Table };

std::string to_string(YoungFamily f);

/// Growth witnesses Phi(t) <= c0 * t^r * (log t)^delta for t >= t0.
struct GrowthFit {
  double r = 1.0;
  double delta = 0.0;
  double c0 = 1.0;
  double t0 = 1.0;
};

/// Constants attached to a Young function by the class checks. Each entry is
/// empty until a check has produced it ("unverified").
struct YoungMetadata {
  std::optional<GrowthFit> growth;
  std::optional<double> lower_type_constant;  // C_r
  std::optional<double> submult_constant;     // C_sub
};

/// Convex, nondecreasing profile with value 0 at the origin. Immutable.
///
/// Families:
///  - power:     t^p
///  - log-power: t^r (1 + log+ t)^delta
///  - loglog:    t^q on [0,1]; t^r (L(t)/L(1))^delta for t > 1 with
///               L(t) = log(e + log(e + t)); the L(1) normalization keeps the
///               profile continuous at t = 1.
///  - table:     piecewise linear through (0,0) and the knots, extended with
///               the last slope; optionally +inf beyond `infinite_beyond`.
class YoungFunction {
 public:
  static YoungFunction power(double p);
  static YoungFunction log_power(double r, double delta);
  static YoungFunction loglog(double q, double r, double delta);
  static YoungFunction table(std::vector<std::pair<double, double>> knots,
                             std::optional<double> infinite_beyond = std::nullopt);

  YoungFamily family() const { return family_; }
  /// Exponent parameter: p for power, r otherwise (table: 1).
  double r() const { return r_; }
  double delta() const { return delta_; }
  double q() const { return q_; }

  /// Phi(t) as a double (IEEE inf for the table's infinite region). t >= 0 is
  /// not checked here; this is the hot path used by the averaging loops.
  double operator()(double t) const;

  /// Checked evaluation; throws DomainError on negative t.
  ExtendedReal eval(double t) const;

  bool is_identity() const { return family_ == YoungFamily::Power && r_ == 1.0; }
  bool is_power() const { return family_ == YoungFamily::Power; }

  const YoungMetadata& metadata() const { return meta_; }
  YoungFunction with_metadata(YoungMetadata meta) const;

  std::string describe() const;

 private:
  YoungFamily family_ = YoungFamily::Power;
  double r_ = 1.0;
  double delta_ = 0.0;
  double q_ = 1.0;
  double loglog_norm_ = 1.0;
  std::shared_ptr<const std::vector<std::pair<double, double>>> knots_;
  std::optional<double> infinite_beyond_;
  YoungMetadata meta_;
};

/// Phi(t); throws DomainError for t < 0.
ExtendedReal eval_young(const YoungFunction& phi, double t);

/// inf{ s > 0 : Phi(s) > y }.
double generalized_inverse(const YoungFunction& phi, double y);

/// inf{ s > 0 : f(s) > y } for any nondecreasing extended-valued f.
double generalized_inverse(const std::function<ExtendedReal(double)>& f, double y);

/// Complementary function sup_{s >= 0} (t s - Phi(s)); +inf when the profile
/// is still increasing at s = 1e12.
ExtendedReal conjugate(const YoungFunction& phi, double t);

struct InverseProductReport {
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  double argmin = 0.0;
  double argmax = 0.0;
  bool passed = false;  // min >= 1 - 1e-6 and max <= 2 + 1e-6
};

/// Ratios Phi^{-1}(t) * conj^{-1}(t) / t over the grid.
InverseProductReport inverse_product_check(const YoungFunction& phi, std::span<const double> t_grid);

struct LowerTypeReport {
  double q = 0.0;
  double constant = 0.0;          // sup on the base grid
  double refined_constant = 0.0;  // sup on the range-doubled grid
  double witness_s = 0.0;
  double witness_t = 0.0;
  bool bounded = false;
};

/// sup Phi(st) / (s^q Phi(t)) over s in (0,1], t > 0 on log-grids, with a
/// range-doubling refinement to separate finite constants from blow-up.
LowerTypeReport check_lower_type(const YoungFunction& phi, double q);

struct SubmultReport {
  double constant = 0.0;
  double refined_constant = 0.0;
  double witness_s = 0.0;
  double witness_t = 0.0;
  bool bounded = false;
};

SubmultReport check_submultiplicative(const YoungFunction& phi);

struct ShapeReport {
  bool zero_at_origin = false;
  bool nondecreasing = false;
  bool midpoint_convex = false;
  bool unbounded = false;
  std::string witness;
  bool passed() const { return zero_at_origin && nondecreasing && midpoint_convex && unbounded; }
};

/// Young-function shape invariants on sampled points.
ShapeReport check_shape(const YoungFunction& phi);

struct FrReport {
  double r = 1.0;
  ShapeReport shape;
  LowerTypeReport lower_type;
  SubmultReport submult;
  bool growth_ok = false;
  GrowthFit growth;          // valid when growth_ok
  std::vector<std::pair<double, double>> growth_ladder;  // (delta, sup over [t0, 1e24])
  bool member = false;
  std::string failure;       // failing sub-check and witness
  YoungFunction annotated = YoungFunction::power(1.0);  // phi with metadata filled
};

/// Membership in F_r: lower type r, submultiplicative, and
/// Phi(t) <= C0 t^r (log t)^delta for t >= t0 with delta fitted on a ladder.
FrReport check_Fr(const YoungFunction& phi, double r);

enum class BpVerdict { Converges, Diverges, Unknown };
std::string to_string(BpVerdict v);

struct BpReport {
  double value = 0.0;        // integral over [c, T] plus tail estimate
  double partial = 0.0;      // integral over [c, T]
  double tail = 0.0;
  std::vector<std::pair<double, double>> partials;  // (T_j, integral over [c, T_j])
  BpVerdict verdict = BpVerdict::Unknown;
  std::string diagnostic;
};

/// Integral of Phi(t)/t^p dt/t over [c, inf). Uses the growth fit carried by
/// phi's metadata for the tail beyond T = 1e8.
BpReport bp_integral(const YoungFunction& phi, double p, double c);

struct OrderCheckReport {
  double constant = 0.0;
  double refined_constant = 0.0;
  std::vector<std::pair<double, double>> witnesses;  // (x, alpha)
  std::string grid;
  bool established = false;
  std::string diagnostic;
};

using Profile = std::function<double(double)>;

/// rho = sup_x (1/x) int_0^x phi / phi(x) over the grid. Throws DomainError
/// if the integral near the origin diverges.
OrderCheckReport quasi_increasing_constant(const Profile& phi, std::span<const double> x_grid);

/// Uniform quasi-increasing constant of x -> psi'(x) phi(alpha/x) over the
/// alpha grid, re-run on range-doubled grids for stability.
OrderCheckReport prec_N_check(const Profile& phi, const Profile& psi_prime, std::span<const double> alpha_grid,
                              std::span<const double> x_grid);

/// Default grids for prec_N_check.
OrderCheckReport prec_N_check(const Profile& phi, const Profile& psi_prime);

/// (1 + 1/x)^{x/(1+x)}, equal to 1 at x = 0. Bounded by e^{1/e}.
double epsilon_bound_function(double x);

}  // namespace mw
