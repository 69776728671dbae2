#include "mixedweak/grid.hpp"

#include "mixedweak/core.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mw {

namespace {

std::int64_t floor_div2(std::int64_t a) { return a >= 0 ? a / 2 : -((-a + 1) / 2); }

int sign_for_level(int level) { return (level % 2 == 0) ? 1 : -1; }

void check_level(int level) {
  if (level < -kMaxLevel || level > kMaxLevel) throw DomainError("dyadic level outside [-40, 40]");
}

}  // namespace

double DyadicGrid::offset(int axis, int level) const {
  return sign_for_level(level) * shift_thirds[static_cast<std::size_t>(axis)] / 3.0;
}

std::vector<DyadicGrid> build_grids(int dim) {
  if (dim < 1 || dim > kMaxDim) throw DomainError("build_grids: dimension must be 1, 2 or 3");
  int count = 1;
  for (int d = 0; d < dim; ++d) count *= 3;
  std::vector<DyadicGrid> grids;
  grids.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    DyadicGrid g;
    g.dim = dim;
    g.id = i + 1;
    int rest = i;
    for (int d = 0; d < dim; ++d) {
      g.shift_thirds[static_cast<std::size_t>(d)] = rest % 3;
      rest /= 3;
    }
    grids.push_back(g);
  }
  return grids;
}

double side_length(const Cube& q) { return std::ldexp(1.0, q.level); }

double cube_lower(const DyadicGrid& g, const Cube& q, int axis) {
  return std::ldexp(static_cast<double>(q.corner[static_cast<std::size_t>(axis)]) + g.offset(axis, q.level), q.level);
}

GeneralCube geometry(const DyadicGrid& g, const Cube& q) {
  GeneralCube out;
  out.dim = g.dim;
  out.side = side_length(q);
  for (int d = 0; d < g.dim; ++d) out.lower[static_cast<std::size_t>(d)] = cube_lower(g, q, d);
  return out;
}

Cube containing_cube(const DyadicGrid& g, std::span<const double> x, int level) {
  check_level(level);
  if (static_cast<int>(x.size()) < g.dim) throw DomainError("containing_cube: point dimension mismatch");
  Cube q;
  q.grid_id = g.id;
  q.level = level;
  for (int d = 0; d < g.dim; ++d) {
    const double xi = x[static_cast<std::size_t>(d)];
    if (!std::isfinite(xi)) throw DomainError("containing_cube: non-finite coordinate");
    q.corner[static_cast<std::size_t>(d)] =
        static_cast<std::int64_t>(std::floor(std::ldexp(xi, -level) - g.offset(d, level)));
  }
  return q;
}

bool cube_contains_point(const DyadicGrid& g, const Cube& q, std::span<const double> x) {
  const double side = side_length(q);
  for (int d = 0; d < g.dim; ++d) {
    const double lo = cube_lower(g, q, d);
    const double xi = x[static_cast<std::size_t>(d)];
    if (xi < lo || xi >= lo + side) return false;
  }
  return true;
}

Cube parent(const DyadicGrid& g, const Cube& q) {
  check_level(q.level + 1);
  Cube p;
  p.grid_id = q.grid_id;
  p.level = q.level + 1;
  const int s = sign_for_level(q.level);
  for (int d = 0; d < g.dim; ++d) {
    const auto i = static_cast<std::size_t>(d);
    p.corner[i] = floor_div2(q.corner[i] + s * g.shift_thirds[i]);
  }
  return p;
}

std::vector<Cube> children(const DyadicGrid& g, const Cube& q) {
  check_level(q.level - 1);
  const int child_level = q.level - 1;
  const int s = sign_for_level(child_level);
  std::vector<Cube> out;
  const int count = 1 << g.dim;
  out.reserve(static_cast<std::size_t>(count));
  for (int bits = 0; bits < count; ++bits) {
    Cube c;
    c.grid_id = q.grid_id;
    c.level = child_level;
    for (int d = 0; d < g.dim; ++d) {
      const auto i = static_cast<std::size_t>(d);
      c.corner[i] = 2 * q.corner[i] - s * g.shift_thirds[i] + ((bits >> d) & 1);
    }
    out.push_back(c);
  }
  return out;
}

std::vector<Cube> dyadic_ancestors(const DyadicGrid& g, const Cube& q, int levels) {
  std::vector<Cube> out;
  out.reserve(static_cast<std::size_t>(std::max(levels, 0)));
  Cube cur = q;
  for (int i = 0; i < levels; ++i) {
    cur = parent(g, cur);
    out.push_back(cur);
  }
  return out;
}

bool contains(const DyadicGrid& g, const Cube& outer, const Cube& inner) {
  if (outer.grid_id != inner.grid_id || outer.level < inner.level) return false;
  Cube cur = inner;
  while (cur.level < outer.level) cur = parent(g, cur);
  for (int d = 0; d < g.dim; ++d)
    if (cur.corner[static_cast<std::size_t>(d)] != outer.corner[static_cast<std::size_t>(d)]) return false;
  return true;
}

Cover find_cover(std::span<const DyadicGrid> grids, const GeneralCube& q) {
  if (!(q.side > 0.0)) throw DomainError("find_cover: side length must be positive");
  if (grids.empty()) throw DomainError("find_cover: no grids");
  const int k_lo = static_cast<int>(std::ceil(std::log2(q.side)));
  const int k_hi = static_cast<int>(std::floor(std::log2(3.0 * q.side)));
  Cover best;
  bool found = false;
  for (int k = std::max(k_lo, -kMaxLevel); k <= std::min(k_hi, kMaxLevel); ++k) {
    const double side = std::ldexp(1.0, k);
    for (const auto& g : grids) {
      const Cube c = containing_cube(g, std::span<const double>(q.lower.data(), static_cast<std::size_t>(g.dim)), k);
      bool inside = true;
      for (int d = 0; d < g.dim && inside; ++d) {
        const double lo = cube_lower(g, c, d);
        const double ql = q.lower[static_cast<std::size_t>(d)];
        inside = ql >= lo && ql + q.side <= lo + side;
      }
      if (!inside) continue;
      const double ratio = side / q.side;
      if (!found || ratio < best.ratio) {
        best = Cover{g.id, c, ratio};
        found = true;
      }
    }
  }
  if (!found) {
    std::ostringstream os;
    os << "find_cover: no dyadic cube of side in [" << q.side << ", " << 3.0 * q.side << "] covers the cube at (";
    for (int d = 0; d < q.dim; ++d) os << (d ? "," : "") << q.lower[static_cast<std::size_t>(d)];
    os << ")";
    throw std::logic_error(os.str());
  }
  return best;
}

std::string cube_json(const Cube& q, int dim) {
  std::ostringstream os;
  os << "{\"grid\":" << q.grid_id << ",\"k\":" << q.level << ",\"m\":[";
  for (int d = 0; d < dim; ++d) os << (d ? "," : "") << q.corner[static_cast<std::size_t>(d)];
  os << "]}";
  return os.str();
}

}  // namespace mw
