#include "mixedweak/specs.hpp"

#include "mixedweak/weights.hpp"

#include <random>
#include <sstream>

namespace mw {

YoungSpec YoungSpec::power(double p) {
  YoungSpec s;
  s.family = YoungFamily::Power;
  s.p = p;
  return s;
}

YoungSpec YoungSpec::log_power(double r, double delta) {
  YoungSpec s;
  s.family = YoungFamily::LogPower;
  s.r = r;
  s.delta = delta;
  return s;
}

YoungFunction YoungSpec::build() const {
  switch (family) {
    case YoungFamily::Power: return YoungFunction::power(p);
    case YoungFamily::LogPower: return YoungFunction::log_power(r, delta);
    case YoungFamily::LogLog: return YoungFunction::loglog(q, r, delta);
    case YoungFamily::Table: return YoungFunction::table(knots, infinite_beyond);
  }
  throw InputError("unknown Young family");
}

std::string YoungSpec::describe() const { return build().describe(); }

WeightSpec WeightSpec::constant(double c) {
  WeightSpec s;
  s.kind = Kind::Constant;
  s.value = c;
  return s;
}

WeightSpec WeightSpec::power(double alpha, double scale) {
  WeightSpec s;
  s.kind = Kind::Power;
  s.alpha = alpha;
  s.scale = scale;
  return s;
}

SampledField WeightSpec::build(const Mesh& mesh) const {
  if (!(scale > 0.0)) throw DomainError("weight scale must be positive");
  if (kind == Kind::Constant) {
    if (!(value > 0.0)) throw DomainError("constant weight must be positive");
    return SampledField::constant(mesh, value * scale, FieldKind::Weight);
  }
  auto w = power_weight(alpha, mesh);
  return scale == 1.0 ? w : w.scaled(scale);
}

std::string WeightSpec::describe() const {
  std::ostringstream os;
  if (kind == Kind::Constant)
    os << "constant(" << value * scale << ")";
  else
    os << (scale == 1.0 ? "" : std::to_string(scale) + "*") << "|x|^" << alpha;
  return os.str();
}

FunctionSpec FunctionSpec::indicator(std::vector<double> lo, std::vector<double> hi, double value) {
  FunctionSpec s;
  s.kind = Kind::Indicator;
  s.lo = std::move(lo);
  s.hi = std::move(hi);
  s.value = value;
  return s;
}

FunctionSpec FunctionSpec::random(std::uint64_t seed, double half_width, int dim, int pieces, double value) {
  FunctionSpec s;
  s.kind = Kind::Random;
  s.seed = seed;
  s.pieces = pieces;
  s.value = value;
  s.lo.assign(static_cast<std::size_t>(dim), -half_width / 2);
  s.hi.assign(static_cast<std::size_t>(dim), half_width / 2);
  return s;
}

namespace {

void require_box(const FunctionSpec& s, int dim) {
  if (static_cast<int>(s.lo.size()) != dim || static_cast<int>(s.hi.size()) != dim)
    throw InputError("function box needs one lo/hi entry per axis");
  for (int d = 0; d < dim; ++d)
    if (!(s.lo[static_cast<std::size_t>(d)] < s.hi[static_cast<std::size_t>(d)]))
      throw InputError("function box needs lo < hi");
}

}  // namespace

SampledField FunctionSpec::build(const Mesh& mesh) const {
  if (!std::isfinite(value)) throw DomainError("function value must be finite");
  switch (kind) {
    case Kind::Zero: return SampledField::constant(mesh, 0.0, FieldKind::Function);
    case Kind::Constant: return SampledField::constant(mesh, value, FieldKind::Function);
    case Kind::Indicator: {
      require_box(*this, mesh.dim);
      return SampledField::sample(
          mesh,
          [&](const Point& x) {
            for (int d = 0; d < mesh.dim; ++d) {
              const auto i = static_cast<std::size_t>(d);
              if (x[i] < lo[i] || x[i] >= hi[i]) return 0.0;
            }
            return value;
          },
          FieldKind::Function);
    }
    case Kind::Random: {
      require_box(*this, mesh.dim);
      if (pieces < 1) throw InputError("random function needs pieces >= 1");
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      std::size_t blocks = 1;
      for (int d = 0; d < mesh.dim; ++d) blocks *= static_cast<std::size_t>(pieces);
      std::vector<double> table(blocks);
      for (double& t : table) t = value * unit(rng);
      return SampledField::sample(
          mesh,
          [&](const Point& x) {
            std::size_t flat = 0;
            for (int d = mesh.dim - 1; d >= 0; --d) {
              const auto i = static_cast<std::size_t>(d);
              if (x[i] < lo[i] || x[i] >= hi[i]) return 0.0;
              const int b = std::min(pieces - 1, static_cast<int>((x[i] - lo[i]) / (hi[i] - lo[i]) * pieces));
              flat = flat * static_cast<std::size_t>(pieces) + static_cast<std::size_t>(b);
            }
            return table[flat];
          },
          FieldKind::Function);
    }
  }
  throw InputError("unknown function kind");
}

std::string FunctionSpec::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::Zero: os << "zero"; break;
    case Kind::Constant: os << "constant(" << value << ")"; break;
    case Kind::Indicator: os << value << "*indicator"; break;
    case Kind::Random: os << "random(seed=" << seed << ",pieces=" << pieces << ")"; break;
  }
  if (!lo.empty()) {
    os << "[";
    for (std::size_t d = 0; d < lo.size(); ++d) os << (d ? "," : "") << lo[d] << ".." << hi[d];
    os << ")";
  }
  return os.str();
}

bool inside_safety_margin(const SampledField& f) {
  const Mesh& m = f.mesh();
  const CellRange s = f.support();
  if (s.empty()) return true;
  const int quarter = m.cells / 4;
  for (int d = 0; d < m.dim; ++d) {
    const auto i = static_cast<std::size_t>(d);
    if (s.lo[i] < quarter || s.hi[i] > m.cells - quarter) return false;
  }
  return true;
}

}  // namespace mw
