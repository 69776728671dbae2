#pragma once

#include "mixedweak/maximal.hpp"
#include "mixedweak/specs.hpp"
#include "mixedweak/weights.hpp"
#include "mixedweak/young.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mw {

/// Log-spaced t values; `relative` scales the range by sup|f|. A nonempty
/// `values` list overrides the spacing.
struct TGridSpec {
  int count = 40;
  double lo = 0.01;
  double hi = 100.0;
  bool relative = true;
  std::vector<double> values;

  std::vector<double> build(double f_sup) const;
  /// The same range with 2 count - 1 points (every original point kept).
  TGridSpec refined() const;
};

struct ExperimentConfig {
  std::string name = "experiment";
  int dim = 1;
  double half_width = 4.0;
  int cells = 1024;
  WeightSpec u;
  WeightSpec v;
  double r = 1.0;
  YoungSpec phi;
  FunctionSpec f;
  TGridSpec t_grid;
  double a = 0.0;     // claims only; 0 means 2^{n+1}
  double beta = 0.0;  // claims only; 0 means eta/2
  std::optional<MaximalMode> mode;  // default_mode(phi) when empty
  int grid_id = 1;                  // dyadic mode
  std::uint64_t seed = 1;
  bool resolution_doubling = false;
  bool homogeneity_check = true;
  /// Base resolution of the A_1 refinement scans; 0 picks 1024, 32, 8 by dimension.
  int scan_cells = 0;

  Mesh mesh() const { return Mesh(dim, half_width, cells); }
  MaximalMode resolved_mode() const;
};

struct ReportRow {
  double t = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;  // lhs / rhs; 0 when rhs = 0
  bool truncated = false;  // the level set touches the box boundary
};

struct PropertyResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ConstantsLedger {
  double u_a1 = 0.0;
  double v_a1 = 0.0;
  double vr_a1 = 0.0;
  double rh_s = 0.0;  // exponent of the reverse Hoelder fit of v^r
  double rh = 0.0;
  double ainfty_epsilon = 0.0;  // A_infinity fit of v^r
  double ainfty_C = 0.0;
  double sphi_linf = 0.0;  // sup S_Phi f / sup |f| on this instance
  std::optional<GrowthFit> growth;
  double lower_type = 0.0;
  double submult = 0.0;
};

struct HypothesisCheck {
  bool ok = true;
  std::string failure;
  std::vector<PropertyResult> scans;
};

struct VerificationReport {
  std::string name;
  Mesh mesh;
  MaximalMode mode = MaximalMode::Uncentered;
  HypothesisCheck hypotheses;
  std::vector<ReportRow> rows;
  double c_emp = 0.0;              // sup ratio over rows with rhs > 0
  double c_emp_untruncated = 0.0;  // same, rows without the truncation flag
  double c_emp_t_refined = 0.0;    // sup ratio on the refined t grid
  std::optional<double> c_emp_refined;  // at doubled resolution
  std::optional<double> refinement_change;  // |c(2N) - c(N)| / c(N)
  ConstantsLedger constants;
  std::vector<PropertyResult> properties;
  std::optional<SampledField> sphi;  // S_Phi f, for plotting

  bool refused() const { return !hypotheses.ok; }
  bool passed() const;
  /// 0 all properties pass, 2 a property fails, 3 hypothesis refusal.
  int exit_code() const;
};

/// Hypothesis scans: r >= 1, Phi in F_r, finite A_1 scans of u and v^r, f
/// inside the middle half of the box.
HypothesisCheck theorem_hypotheses(const ExperimentConfig& cfg);

/// uv^r({S_Phi f > t}) against int Phi(|f|/t) u v^r over the t grid.
VerificationReport mixed_weak_report(const ExperimentConfig& cfg);

/// mixed_weak_report for Phi(t) = t, r = 1, plus the v -> 10 v scaling check.
VerificationReport sawyer_special_case(const ExperimentConfig& cfg);

struct MwWeakReport {
  double p = 1.0;
  double ap = 0.0;
  bool hypothesis_ok = false;
  std::string failure;
  std::vector<ReportRow> rows;
  double c_emp = 0.0;
};

/// |{Mf w^{1/p} > t}| against t^{-p} int |f|^p w, with the uncentered M.
/// The A_p hypothesis is a refinement scan over two coarsenings of w.
MwWeakReport mw_weak_check(const SampledField& w, double p, const SampledField& f, const std::vector<double>& t_grid);

struct SphiLinfReport {
  bool conclusive = false;
  std::string diagnostic;
  double epsilon = 0.0;        // largest ladder value with v^{r+e} finite-A_1 for all e <= epsilon
  double v_r_eps_a1 = 0.0;
  double constant = 0.0;       // sup S_Phi f / sup |f|
  double coarse_constant = 0.0;  // the same on the once-coarsened fields
  bool stable = false;
  double max_over_sup_ratio = 0.0;  // sup M_Phi f / sup |f| (sanity, >= 1 for nonzero f)
  std::size_t samples = 0;
};

/// L^infinity bound of S_Phi over sample fields.
SphiLinfReport sphi_linf_check(const SampledField& v, const YoungFunction& phi, double r,
                               const std::vector<SampledField>& f_samples, MaximalMode mode);

struct InterpolationReport {
  bool rejected = false;    // p <= r
  bool hypothesis_ok = false;
  std::string diagnostic;
  double p = 0.0;
  double c = 1.0;
  double C = 0.0;          // constant used in the hypothesis
  double C_fitted = 0.0;   // smallest C valid on the lambda grid
  double lhs = 0.0;        // int psi(F) dmu, cell sums
  double lhs_layer_cake = 0.0;  // the same by layer-cake quadrature
  double layer_cake_error = 0.0;  // half-width of the quadrature bracket
  double rhs = 0.0;        // int psi(2G/c) dmu
  double implied_constant = 0.0;  // lhs / rhs
  double rho = 0.0;        // prec_N constant of phi against psi'
  double bound = 0.0;      // C rho phi(c)
  bool conclusion_holds = false;  // lhs <= C rhs (with lhs <= bound rhs reported)
};

/// Modular interpolation with psi(t) = t^p. Verifies
/// mu(F > lambda) <= C int_{G > c lambda} phi(G/lambda) dmu on a lambda grid
/// (C <= 0 uses the fitted constant), then evaluates both sides of
/// int psi(F) dmu <= C int psi(2G/c) dmu.
InterpolationReport modular_interpolation_check(const SampledField& F, const SampledField& G, const SampledField& mu,
                                                const YoungFunction& phi, double p, double c, double C);

struct LpSample {
  double lhs = 0.0;  // int M_Phi(f)^p w
  double rhs = 0.0;  // int |f|^p w
  double ratio = 0.0;
  double coarse_ratio = 0.0;
  double identity_error = 0.0;  // max relative cellwise difference
  bool skipped = false;         // f = 0
};

struct LpReport {
  bool rejected = false;
  std::string diagnostic;
  double p = 0.0;
  std::vector<LpSample> samples;
  double identity_error = 0.0;
  double sup_ratio = 0.0;
  double sup_coarse_ratio = 0.0;
  bool identity_ok = false;  // identity_error <= 1e-9
  bool finite = false;
  bool stable = false;       // sup ratio changes <= 10% under one coarsening
};

/// Boundedness of M_Phi in L^p(w), w = u v^{r-p}, through S_Phi in L^p(u v^r).
LpReport lp_boundedness_check(const SampledField& u, const SampledField& v, double r, double p,
                              const YoungFunction& phi, const std::vector<SampledField>& f_samples,
                              MaximalMode mode);

/// Finite-A_1 scan of a field over two coarsenings.
RefinementScan a1_coarsening_scan(const SampledField& w);

}  // namespace mw
