#pragma once

#include "mixedweak/core.hpp"
#include "mixedweak/grid.hpp"

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace mw {

/// Uniform mesh of N^n cells on the box [-L, L]^n. N and L are powers of
/// two, so every cell width is a power of two and the standard dyadic grid
/// aligns with cell boundaries.
struct Mesh {
  int dim = 1;
  double half_width = 1.0;
  int cells = 2;  // per axis

  Mesh() = default;
  Mesh(int dim, double half_width, int cells);

  double h() const { return 2.0 * half_width / cells; }
  int cell_level() const;  // log2(h)
  std::size_t size() const;
  double cell_volume() const;
  double axis_center(int index) const { return -half_width + (index + 0.5) * h(); }
  Point center(std::size_t flat) const;
  std::array<int, kMaxDim> unflatten(std::size_t flat) const;
  std::size_t flatten(const std::array<int, kMaxDim>& idx) const;
  /// Cell containing x (clamped to the box).
  std::size_t locate(std::span<const double> x) const;
  Mesh refined() const { return Mesh(dim, half_width, cells * 2); }

  friend bool operator==(const Mesh&, const Mesh&) = default;
};

/// Half-open block of cell indices [lo, hi) per axis.
struct CellRange {
  int dim = 1;
  std::array<int, kMaxDim> lo{};
  std::array<int, kMaxDim> hi{};

  static CellRange whole(const Mesh& m);
  std::size_t count() const;
  bool empty() const { return count() == 0; }
  bool contains(const std::array<int, kMaxDim>& idx) const;
  bool contains(const CellRange& other) const;
  bool touches_boundary(const Mesh& m) const;

  /// Visits flat indices in storage order.
  template <class F>
  void for_each(const Mesh& m, F&& f) const {
    const auto N = static_cast<std::size_t>(m.cells);
    const int z_lo = dim >= 3 ? lo[2] : 0;
    const int z_hi = dim >= 3 ? hi[2] : 1;
    const int y_lo = dim >= 2 ? lo[1] : 0;
    const int y_hi = dim >= 2 ? hi[1] : 1;
    for (int z = z_lo; z < z_hi; ++z)
      for (int y = y_lo; y < y_hi; ++y) {
        const std::size_t row = (static_cast<std::size_t>(z) * N + static_cast<std::size_t>(y)) * N;
        for (int x = lo[0]; x < hi[0]; ++x) f(row + static_cast<std::size_t>(x));
      }
  }
};

enum class FieldKind { Function, Weight };

/// Piecewise-constant function or weight on a mesh.
class SampledField {
 public:
  SampledField() = default;
  static SampledField function(const Mesh& mesh, std::vector<double> values);
  /// Throws DomainError if any cell is nonpositive or non-finite.
  static SampledField weight(const Mesh& mesh, std::vector<double> values);
  static SampledField constant(const Mesh& mesh, double value, FieldKind kind);
  /// Cell values = averages of g over each cell, by midpoint-rule
  /// subsampling with `sub` points per axis.
  static SampledField sample(const Mesh& mesh, const std::function<double(const Point&)>& g, FieldKind kind,
                             int sub = 1);

  const Mesh& mesh() const { return mesh_; }
  FieldKind kind() const { return kind_; }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }

  double integral() const;
  double sup_abs() const;
  /// Cells where the value is nonzero.
  CellRange support() const;

  SampledField map(const std::function<double(double)>& f, FieldKind kind) const;
  SampledField pow(double e) const;
  SampledField scaled(double c) const;
  SampledField times(const SampledField& other, FieldKind kind) const;
  SampledField divided_by(const SampledField& other, FieldKind kind) const;
  /// Averages over blocks of 2^n cells on the mesh with N/2 cells per axis.
  SampledField coarsened() const;

 private:
  SampledField(Mesh mesh, std::vector<double> values, FieldKind kind)
      : mesh_(mesh), values_(std::move(values)), kind_(kind) {}
  Mesh mesh_;
  std::vector<double> values_;
  FieldKind kind_ = FieldKind::Function;
};

/// Summed-area table for exact cell sums over blocks.
class PrefixSums {
 public:
  PrefixSums() = default;
  PrefixSums(const Mesh& mesh, std::span<const double> values);
  /// Sum of cell values (not multiplied by the cell volume).
  double sum(const CellRange& r) const;

 private:
  Mesh mesh_;
  std::vector<long double> table_;  // (N+1)^n
  std::size_t stride(int axis) const;
};

double range_min(const SampledField& f, const CellRange& r);
double range_max(const SampledField& f, const CellRange& r);
double range_sum(const SampledField& f, const CellRange& r);

}  // namespace mw
