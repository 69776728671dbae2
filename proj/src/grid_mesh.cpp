#include "mixedweak/grid_mesh.hpp"

#include <algorithm>
#include <cmath>

namespace mw {

GridMesh::GridMesh(const Mesh& mesh, const DyadicGrid& grid) : mesh_(mesh), grid_(grid) {
  if (grid.dim != mesh.dim) throw InputError("grid and mesh dimensions differ");
  k_min_ = mesh.cell_level();
  k_top_ = k_min_;
  while (std::ldexp(1.0, k_top_ + 1) <= 2.0 * mesh.half_width) ++k_top_;
  if (k_min_ < -kMaxLevel || k_top_ > kMaxLevel) throw DomainError("mesh levels exceed the dyadic level clamp");

  const double L = mesh.half_width;
  const double h = mesh.h();
  levels_.resize(static_cast<std::size_t>(k_top_ - k_min_ + 1));
  for (int k = k_min_; k <= k_top_; ++k) {
    auto& per_axis = levels_[static_cast<std::size_t>(k - k_min_)];
    per_axis.resize(static_cast<std::size_t>(mesh.dim));
    const double side = std::ldexp(1.0, k);
    for (int d = 0; d < mesh.dim; ++d) {
      AxisLevel& al = per_axis[static_cast<std::size_t>(d)];
      const double o = grid.offset(d, k);
      const auto m_lo = static_cast<std::int64_t>(std::floor(-L / side - o));
      const auto m_hi = static_cast<std::int64_t>(std::floor(L / side - o));
      al.first_m = m_lo;
      for (std::int64_t m = m_lo; m <= m_hi; ++m) {
        const double a = side * (static_cast<double>(m) + o);
        const double b = a + side;
        // Cell i is owned when its center -L + (i + 1/2) h lies in [a, b).
        Segment s;
        s.lo = static_cast<int>(std::clamp(std::ceil((a + L) / h - 0.5), 0.0, static_cast<double>(mesh.cells)));
        s.hi = static_cast<int>(std::clamp(std::ceil((b + L) / h - 0.5), 0.0, static_cast<double>(mesh.cells)));
        const double slack = 1e-9 * h;
        s.inside = s.lo < s.hi && (k == k_min_ || (a >= -L - slack && b <= L + slack));
        al.segments.push_back(s);
      }
      al.owner.assign(static_cast<std::size_t>(mesh.cells), -1);
      for (std::size_t si = 0; si < al.segments.size(); ++si)
        for (int i = al.segments[si].lo; i < al.segments[si].hi; ++i)
          al.owner[static_cast<std::size_t>(i)] = static_cast<int>(si);
    }
  }

  // Top-down: level-k_top cubes meeting the mesh, descending through
  // inadmissible cubes until admissible ones are reached.
  std::vector<Cube> stack;
  for (std::size_t c = 0; c < mesh.size(); ++c) {
    const Cube q = cube_of_cell(c, k_top_);
    bool seen = false;
    for (const auto& t : stack) seen = seen || t == q;
    if (!seen) stack.push_back(q);
  }
  while (!stack.empty()) {
    const Cube q = stack.back();
    stack.pop_back();
    if (admissible(q)) {
      roots_.push_back(q);
      continue;
    }
    for (const Cube& c : children(q)) stack.push_back(c);
  }
}

const GridMesh::AxisLevel& GridMesh::axis_level(int level, int axis) const {
  return levels_[static_cast<std::size_t>(level - k_min_)][static_cast<std::size_t>(axis)];
}

CellRange GridMesh::cells(const Cube& q) const {
  CellRange r;
  r.dim = mesh_.dim;
  if (q.level < k_min_ || q.level > k_top_) return r;
  for (int d = 0; d < mesh_.dim; ++d) {
    const AxisLevel& al = axis_level(q.level, d);
    const std::int64_t s = q.corner[static_cast<std::size_t>(d)] - al.first_m;
    if (s < 0 || s >= static_cast<std::int64_t>(al.segments.size())) return CellRange{mesh_.dim, {}, {}};
    r.lo[static_cast<std::size_t>(d)] = al.segments[static_cast<std::size_t>(s)].lo;
    r.hi[static_cast<std::size_t>(d)] = al.segments[static_cast<std::size_t>(s)].hi;
  }
  return r;
}

bool GridMesh::admissible(const Cube& q) const {
  if (q.grid_id != grid_.id || q.level < k_min_ || q.level > k_top_) return false;
  for (int d = 0; d < mesh_.dim; ++d) {
    const AxisLevel& al = axis_level(q.level, d);
    const std::int64_t s = q.corner[static_cast<std::size_t>(d)] - al.first_m;
    if (s < 0 || s >= static_cast<std::int64_t>(al.segments.size())) return false;
    if (!al.segments[static_cast<std::size_t>(s)].inside) return false;
  }
  return true;
}

Cube GridMesh::cube_of_cell(const std::array<int, kMaxDim>& idx, int level) const {
  Cube q;
  q.grid_id = grid_.id;
  q.level = level;
  for (int d = 0; d < mesh_.dim; ++d) {
    const AxisLevel& al = axis_level(level, d);
    q.corner[static_cast<std::size_t>(d)] =
        al.first_m + al.owner[static_cast<std::size_t>(idx[static_cast<std::size_t>(d)])];
  }
  return q;
}

std::vector<Cube> GridMesh::children(const Cube& q) const {
  std::vector<Cube> out;
  if (q.level <= k_min_) return out;
  for (const Cube& c : mw::children(grid_, q))
    if (!cells(c).empty()) out.push_back(c);
  return out;
}

std::optional<Cube> GridMesh::admissible_parent(const Cube& q) const {
  if (q.level >= k_top_) return std::nullopt;
  const Cube p = parent(grid_, q);
  if (!admissible(p)) return std::nullopt;
  return p;
}

std::vector<Cube> GridMesh::chain(std::size_t flat) const {
  std::vector<Cube> out;
  out.push_back(cube_of_cell(flat, k_min_));
  while (auto p = admissible_parent(out.back())) out.push_back(*p);
  return out;
}

std::vector<GridMesh> bind_grids(const Mesh& mesh) {
  std::vector<GridMesh> out;
  for (const auto& g : build_grids(mesh.dim)) out.emplace_back(mesh, g);
  return out;
}

}  // namespace mw
