#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace mw {

constexpr int kMaxDim = 3;
/// Dyadic levels are clamped to |k| <= kMaxLevel so 2^k and 2^k/3 stay exact
/// enough in double precision.
constexpr int kMaxLevel = 40;

using Point = std::array<double, kMaxDim>;
using Corner = std::array<std::int64_t, kMaxDim>;

/// One of the 3^n shifted dyadic grids. Its level-k cubes are
///   2^k (m + [0,1)^n) + (-1)^k 2^k t,   t = shift_thirds / 3.
struct DyadicGrid {
  int dim = 1;
  int id = 1;  // 1-based; grid 1 is the standard grid
  std::array<int, kMaxDim> shift_thirds{};

  /// Per-axis offset of level-k cube corners in units of 2^k.
  double offset(int axis, int level) const;
};

/// A cube of a dyadic grid, identified by integers only.
struct Cube {
  int grid_id = 1;
  int level = 0;
  Corner corner{};

  friend bool operator==(const Cube&, const Cube&) = default;
};

/// Axis-parallel cube [lower, lower + side)^n.
struct GeneralCube {
  int dim = 1;
  Point lower{};
  double side = 1.0;
};

std::vector<DyadicGrid> build_grids(int dim);

double side_length(const Cube& q);
double cube_lower(const DyadicGrid& g, const Cube& q, int axis);
GeneralCube geometry(const DyadicGrid& g, const Cube& q);

Cube containing_cube(const DyadicGrid& g, std::span<const double> x, int level);
bool cube_contains_point(const DyadicGrid& g, const Cube& q, std::span<const double> x);

Cube parent(const DyadicGrid& g, const Cube& q);
std::vector<Cube> children(const DyadicGrid& g, const Cube& q);

/// Q's ancestors one level at a time: parent, grandparent, ... (`levels` of them).
std::vector<Cube> dyadic_ancestors(const DyadicGrid& g, const Cube& q, int levels);

/// Containment within one grid, decided on integer coordinates.
bool contains(const DyadicGrid& g, const Cube& outer, const Cube& inner);

struct Cover {
  int grid_id = 0;
  Cube cube;
  double ratio = 0.0;  // side(cube) / side(Q)
};

/// A dyadic cube Q0 of some grid with Q inside Q0 and side(Q0) <= 3 side(Q).
/// Throws std::logic_error when no grid covers Q (a shift-formula bug).
Cover find_cover(std::span<const DyadicGrid> grids, const GeneralCube& q);

/// {"grid":i,"k":k,"m":[...]}
std::string cube_json(const Cube& q, int dim);

}  // namespace mw
