#pragma once

#include "mixedweak/field.hpp"
#include "mixedweak/grid_mesh.hpp"
#include "mixedweak/young.hpp"

#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace mw {

struct LuxemburgResult {
  double value = 0.0;
  int iterations = 0;
  double residual = 0.0;  // |avg Phi(|f|/value) - 1|; 0 when value = 0
};

/// Relative tolerance of the Luxemburg bisection.
constexpr double kLuxemburgTol = 1e-12;

/// Cells whose centers lie in q. Throws DomainError when q leaves the box.
CellRange snap(const Mesh& mesh, const GeneralCube& q);

/// inf{lambda > 0 : avg_Q Phi(|f|/lambda) <= 1}, by bisection in log(lambda).
LuxemburgResult luxemburg_average(const SampledField& f, const CellRange& q, const YoungFunction& phi);

/// Same with the measure w dx: inf{lambda : (1/w(Q)) int_Q Phi(|f|/lambda) w <= 1}.
LuxemburgResult weighted_luxemburg_average(const SampledField& f, const CellRange& q, const YoungFunction& phi,
                                           const SampledField& w);

/// Luxemburg average for an arbitrary nondecreasing profile (e.g. a conjugate).
/// `weights` may be empty (Lebesgue measure).
LuxemburgResult luxemburg_profile(std::span<const double> values, std::span<const double> weights,
                                  const std::function<double(double)>& phi,
                                  const std::function<double(double)>& phi_inverse);

/// inf_{tau > 0} tau + tau/w(Q) int_Q Phi(|f|/tau) w.
double infimum_form(const SampledField& f, const CellRange& q, const YoungFunction& phi, const SampledField& w);

/// [(1/w(Q)) int_Q |fg| w] / (||f||_{Phi,Q,w} ||g||_{conj Phi,Q,w}). Throws
/// DomainError when the denominator vanishes under a nonzero numerator.
double generalized_holder_ratio(const SampledField& f, const SampledField& g, const CellRange& q,
                                const SampledField& w, const YoungFunction& phi);

/// Luxemburg averages over cell blocks, evaluated exactly as the dyadic
/// maximal fields evaluate them: p-means through prefix sums for power Phi,
/// the bisection otherwise. Holds scratch buffers, so one instance per thread.
class CubeAverager {
 public:
  CubeAverager(const SampledField& f, const YoungFunction& phi);
  double operator()(const CellRange& q) const;
  /// f vanishes on every cell of q.
  bool vanishes(const CellRange& q) const;
  const SampledField& field() const { return f_; }
  const YoungFunction& phi() const { return phi_; }

 private:
  SampledField f_;
  YoungFunction phi_;
  bool power_ = false;
  PrefixSums support_;
  PrefixSums moments_;
  mutable std::vector<double> a_;
  mutable std::vector<double> ws_;
};

/// Uncentered: all mesh-aligned cubes inside the box. Dyadic: one grid's
/// admissible cubes. Grids: the largest of the 3^n dyadic maximal functions.
enum class MaximalMode { Uncentered, Dyadic, Grids };

std::string to_string(MaximalMode m);

/// Field-wide Hardy-Littlewood maximal function.
SampledField maximal_hl_field(const SampledField& f, MaximalMode mode, int grid_id = 1);

/// Dyadic Orlicz maximal function for one bound grid.
SampledField dyadic_orlicz_field(const SampledField& f, const YoungFunction& phi, const GridMesh& gm);

struct OrliczMaximalField {
  SampledField value;  // the operator in the requested mode
  /// Grids mode only: max_i M_{Phi,D_i} f and 3^n sum_i M_{Phi,D_i} f.
  std::optional<SampledField> grids_sup;
  std::optional<SampledField> inflated_bound;
  MaximalMode mode = MaximalMode::Dyadic;
};

/// M_Phi on the whole mesh. Uncentered mode is exact for power Phi (the
/// Luxemburg average of t^p is the p-mean) and is otherwise evaluated
/// through the 3^n grids.
OrliczMaximalField maximal_orlicz_field(const SampledField& f, const YoungFunction& phi, MaximalMode mode,
                                        int grid_id = 1);

/// Point queries (value at the cell containing x).
double maximal_hl(const SampledField& f, std::span<const double> x, MaximalMode mode, int grid_id = 1);
double maximal_orlicz(const SampledField& f, std::span<const double> x, const YoungFunction& phi, MaximalMode mode,
                      int grid_id = 1);

/// S_Phi f = M_Phi(f v) / v, cellwise.
SampledField sawyer_field(const SampledField& f, const SampledField& v, const YoungFunction& phi, MaximalMode mode);
double sawyer_operator(const SampledField& f, const SampledField& v, const YoungFunction& phi,
                       std::span<const double> x, MaximalMode mode);

/// Uncentered mode for power Phi, grids otherwise.
MaximalMode default_mode(const YoungFunction& phi);

}  // namespace mw
