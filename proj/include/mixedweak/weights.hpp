#pragma once

#include "mixedweak/field.hpp"
#include "mixedweak/grid_mesh.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace mw {

/// Cubes scanned by the constant estimators: every admissible dyadic cube of
/// every grid, plus seeded random mesh-aligned cubes.
struct CubeFamilySpec {
  bool dyadic = true;
  int random_cubes = 2000;
  std::uint64_t seed = 1;
};

struct ScannedCube {
  CellRange cells;
  std::string label;  // cube_json for dyadic cubes, "random" otherwise
};

/// The scanned family in deterministic order (dyadic grid by grid, then random).
std::vector<ScannedCube> cube_family(const Mesh& mesh, const CubeFamilySpec& spec);

struct AinftyFit {
  double C = 1.0;
  double epsilon = 1.0;
  std::size_t pairs = 0;
  /// (epsilon, smallest C) on the ladder 0.05, 0.10, ..., 1.
  std::vector<std::pair<double, double>> ladder;
};

struct MuckenhouptReport {
  double p = 1.0;
  double ap = 0.0;  // A_p estimate for the requested p
  double a1 = 0.0;  // A_1 estimate
  std::optional<double> rh_s;
  std::optional<double> rh;
  std::optional<AinftyFit> ainfty;
  std::size_t cubes = 0;
  std::string attaining;  // cube attaining the A_p sup
};

/// p = 1: sup avg(w)/min_Q w. p > 1: sup avg(w) avg(w^{1-p'})^{p-1}.
/// Cell-exact sums. Throws DomainError if w is not a weight.
MuckenhouptReport ap_constant(const SampledField& w, double p, const CubeFamilySpec& spec = {});

struct RhReport {
  double s = 1.0;
  double constant = 0.0;
  std::size_t cubes = 0;
  std::string attaining;
};

/// sup over cubes of (avg w^s)^{1/s} / avg w.
RhReport rh_constant(const SampledField& w, double s, const CubeFamilySpec& spec = {});

/// Fits (C, epsilon) in w(E)/w(Q) <= C (|E|/|Q|)^epsilon over sublevel sets,
/// superlevel sets and random cell unions of the scanned cubes. C(epsilon) is
/// the smallest constant valid on every pair; the returned epsilon is the
/// largest on the ladder whose C stays within twice C(0.05).
AinftyFit ainfty_fit(const SampledField& w, const CubeFamilySpec& spec = {}, int subsets_per_cube = 4);

/// Cell averages of |x|^alpha: exact per cell in one dimension, 4^n-point
/// midpoint quadrature otherwise. Rejects alpha <= -n.
SampledField power_weight(double alpha, const Mesh& mesh);

/// (Mf)^delta with the uncentered maximal function. Rejects delta outside
/// [0,1) and f vanishing identically.
SampledField coifman_rochberg_weight(const SampledField& f, double delta);

struct RefinementScan {
  std::vector<int> resolutions;
  std::vector<double> estimates;
  Stability verdict = Stability::Stable;
};

/// Runs estimate(N) at N0, 2 N0, ..., 2^doublings N0 and applies the
/// divergence rule of refinement_verdict.
RefinementScan refinement_scan(const std::function<double(int)>& estimate, int N0, int doublings = 2);

}  // namespace mw
