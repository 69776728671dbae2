#pragma once

#include "mixedweak/field.hpp"
#include "mixedweak/young.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mw {

/// Parametrized Young function, buildable on demand.
struct YoungSpec {
  YoungFamily family = YoungFamily::Power;
  double p = 1.0;      // power
  double r = 1.0;      // log-power, loglog
  double delta = 0.0;  // log-power, loglog
  double q = 1.0;      // loglog
  std::vector<std::pair<double, double>> knots;  // table
  std::optional<double> infinite_beyond;         // table

  static YoungSpec power(double p);
  static YoungSpec log_power(double r, double delta);
  YoungFunction build() const;
  std::string describe() const;
};

/// Weight sampled on any mesh: scale * value (constant) or scale * |x|^alpha (power).
struct WeightSpec {
  enum class Kind { Constant, Power };
  Kind kind = Kind::Constant;
  double value = 1.0;
  double alpha = 0.0;
  double scale = 1.0;

  static WeightSpec constant(double c);
  static WeightSpec power(double alpha, double scale = 1.0);
  SampledField build(const Mesh& mesh) const;
  std::string describe() const;
};

/// Bounded function sampled on any mesh.
///  - zero
///  - constant: `value` on the whole box
///  - indicator: `value` on the box [lo, hi) (per axis)
///  - random: values uniform in [0, value] on pieces^n equal blocks of the box
///    [lo, hi), drawn from `seed`; zero outside
struct FunctionSpec {
  enum class Kind { Zero, Constant, Indicator, Random };
  Kind kind = Kind::Zero;
  double value = 1.0;
  std::vector<double> lo;
  std::vector<double> hi;
  int pieces = 8;
  std::uint64_t seed = 1;

  static FunctionSpec indicator(std::vector<double> lo, std::vector<double> hi, double value = 1.0);
  /// Random field on the middle half of the box.
  static FunctionSpec random(std::uint64_t seed, double half_width, int dim, int pieces = 8, double value = 1.0);
  SampledField build(const Mesh& mesh) const;
  std::string describe() const;
};

/// True when the support of f lies in the middle half [-L/2, L/2]^n.
bool inside_safety_margin(const SampledField& f);

}  // namespace mw
