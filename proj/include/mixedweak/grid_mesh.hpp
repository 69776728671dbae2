#pragma once

#include "mixedweak/field.hpp"
#include "mixedweak/grid.hpp"

#include <optional>
#include <vector>

namespace mw {

/// A dyadic grid restricted to a mesh. A cube owns the cells whose centers
/// lie in it; cell centers never sit on a cube boundary (boundaries are
/// multiples of h/3, centers are odd multiples of h/2), so cell sets nest
/// exactly like the cubes. A cube is admissible when it lies inside the box;
/// single-cell cubes at the cell level are admissible by convention.
class GridMesh {
 public:
  GridMesh(const Mesh& mesh, const DyadicGrid& grid);

  const Mesh& mesh() const { return mesh_; }
  const DyadicGrid& grid() const { return grid_; }
  int min_level() const { return k_min_; }
  int max_level() const { return k_top_; }

  /// Cells owned by q (empty range if none or q is off the mesh levels).
  CellRange cells(const Cube& q) const;
  bool admissible(const Cube& q) const;
  /// Level-k cube owning the cell.
  Cube cube_of_cell(const std::array<int, kMaxDim>& idx, int level) const;
  Cube cube_of_cell(std::size_t flat, int level) const { return cube_of_cell(mesh_.unflatten(flat), level); }

  /// Maximal admissible cubes; their cell sets partition the mesh.
  const std::vector<Cube>& roots() const { return roots_; }
  /// Children owning at least one cell.
  std::vector<Cube> children(const Cube& q) const;
  /// Parent if it is admissible, else nullopt.
  std::optional<Cube> admissible_parent(const Cube& q) const;
  /// Admissible ancestors-or-self of the cell's atom, from the atom upward.
  std::vector<Cube> chain(std::size_t flat) const;

 private:
  struct Segment {
    int lo = 0;
    int hi = 0;
    bool inside = false;
  };
  struct AxisLevel {
    std::int64_t first_m = 0;
    std::vector<Segment> segments;  // indexed by m - first_m
    std::vector<int> owner;         // cell index -> segment index
  };
  const AxisLevel& axis_level(int level, int axis) const;

  Mesh mesh_;
  DyadicGrid grid_;
  int k_min_ = 0;
  int k_top_ = 0;
  std::vector<std::vector<AxisLevel>> levels_;  // [level - k_min][axis]
  std::vector<Cube> roots_;
};

/// One GridMesh per grid (3^n of them).
std::vector<GridMesh> bind_grids(const Mesh& mesh);

}  // namespace mw
