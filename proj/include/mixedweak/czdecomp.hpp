#pragma once

#include "mixedweak/field.hpp"
#include "mixedweak/grid_mesh.hpp"
#include "mixedweak/maximal.hpp"
#include "mixedweak/young.hpp"

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mw {

/// Per-cube data carried by the forests. Masses include the cell volume;
/// entries whose field is absent are NaN.
struct CubePayload {
  double luxemburg = 0.0;  // ||g||_{Phi,Q}
  double avg_v = std::numeric_limits<double>::quiet_NaN();
  double avg_vr = std::numeric_limits<double>::quiet_NaN();
  double avg_u = std::numeric_limits<double>::quiet_NaN();
  double u_mass = std::numeric_limits<double>::quiet_NaN();
  double vr_mass = std::numeric_limits<double>::quiet_NaN();
  double volume = 0.0;
};

struct ForestCube {
  Cube cube;
  CellRange cells;
  CubePayload payload;
  std::optional<std::size_t> parent;  // index into the previous layer (k - 1)
  bool in_gamma = false;
};

/// Maximal dyadic cubes of one level set, in level order (largest first),
/// ties by lexicographic corner.
struct DecompositionForest {
  int grid_id = 1;
  double lambda = 0.0;
  std::optional<int> k;  // lambda = a^k for layered forests
  double a = 0.0;
  std::vector<ForestCube> cubes;
  std::size_t visited = 0;  // cubes examined by the recursion
};

/// Fields and cached maximal functions shared by the decompositions on one
/// grid. v and u are optional; operations that need them throw InputError
/// when they are absent.
class CzContext {
 public:
  CzContext(const SampledField& g, const YoungFunction& phi, const GridMesh& gm,
            std::optional<SampledField> v = std::nullopt, std::optional<SampledField> u = std::nullopt,
            double r = 1.0);

  const GridMesh& grid_mesh() const { return gm_; }
  const Mesh& mesh() const { return gm_.mesh(); }
  const SampledField& g() const { return g_avg_.field(); }
  const YoungFunction& phi() const { return g_avg_.phi(); }
  double r() const { return r_; }
  const std::optional<SampledField>& v() const { return v_; }
  const std::optional<SampledField>& u() const { return u_; }

  /// ||g||_{Phi,Q}, evaluated as the dyadic maximal field evaluates it.
  double luxemburg(const CellRange& q) const { return q.empty() ? 0.0 : g_avg_(q); }
  double avg_v(const CellRange& q) const;
  CubePayload payload(const CellRange& q) const;

  /// M_{Phi,D} g and M_D v on the bound grid.
  const SampledField& maximal_g() const { return mg_; }
  const SampledField& maximal_v() const;

 private:
  GridMesh gm_;
  CubeAverager g_avg_;
  std::optional<SampledField> v_;
  std::optional<SampledField> u_;
  double r_ = 1.0;
  std::optional<CubeAverager> v_avg_;
  std::optional<PrefixSums> vr_sums_;
  std::optional<PrefixSums> u_sums_;
  SampledField mg_;
  std::optional<SampledField> mv_;
};

/// Maximal cubes Q of the grid with ||g||_{Phi,Q} > lambda. Top-down from
/// the roots; subtrees without a cell of {M_{Phi,D} g > lambda} are skipped.
/// Throws DomainError for lambda <= 0.
DecompositionForest level_set_decomposition(const CzContext& ctx, double lambda);
DecompositionForest level_set_decomposition(const SampledField& g, const YoungFunction& phi, const GridMesh& gm,
                                            double lambda);

/// Maximal cubes of {M_D v > a^k} ∩ {M_{Phi,D} g > a^k}. A cube lies in the
/// intersection iff some ancestor-or-self has avg v > a^k and some
/// ancestor-or-self has ||g||_{Phi} > a^k; the first such cube on each
/// branch is emitted. Requires v and a > 2^n.
DecompositionForest omega_layer(const CzContext& ctx, double a, int k);

/// Cubes meeting {v <= a^{k+1}} in at least one cell.
std::vector<bool> gamma_filter(const DecompositionForest& forest, const SampledField& v, double a, int k);

/// Omega_k for k = N, N+1, ... until the layer is empty (at most 400
/// layers), with Gamma flags and parent links into the previous layer.
std::vector<DecompositionForest> omega_layers(const CzContext& ctx, double a, int N);

/// Level sets {M_{Phi,D} g > a^k} for k = N .. N + count - 1; count <= 0
/// runs until the level set is empty (at most 400 layers).
std::vector<DecompositionForest> tilde_layers(const CzContext& ctx, double a, int N, int count);

/// Smallest k with a^k >= (min v)/2, clamped to [-40, 40].
int default_truncation(const SampledField& v, double a);

/// A pair (k, j) of Gamma_N: cube j of layer k.
struct PrincipalNode {
  int k = 0;
  std::size_t j = 0;
  Cube cube;
  CellRange cells;
  double avg_u = 0.0;
  double mu = 0.0;  // a^{-beta k} avg u
  int generation = -1;  // -1 when not principal
  std::optional<std::size_t> witness;  // G_{n} ancestor selecting this node
};

struct PrincipalForest {
  double a = 0.0;
  double beta = 0.0;
  double eta = 0.0;
  int N = 0;
  int grid_id = 1;
  std::vector<PrincipalNode> nodes;  // Gamma_N in (k, j) order
  std::vector<std::vector<std::size_t>> generations;  // G_0, G_1, ...
  std::vector<std::size_t> principal;  // P, sorted
  std::size_t gamma_total = 0;  // Gamma pairs over all supplied layers
};

/// Principal cubes of the Omega layers (layer i has k = N + i). G_0 holds the
/// pairs whose cube is maximal in Delta_N; G_{n+1} holds, for each member
/// (t,s) of G_n, the first descendants D in level order with
/// avg_D u > a^{(k-t)beta} avg_{Q_s^t} u, every pair strictly between them
/// satisfying the reverse inequality. Rejects beta outside (0, eta).
PrincipalForest principal_cubes(const std::vector<DecompositionForest>& layers, const SampledField& u, double a,
                                double beta, double eta);

struct PrincipalAudit {
  bool ok = true;
  std::size_t checks = 0;
  std::vector<std::string> failures;
};

/// Re-derives every generation from raw cell sums of u: maximality of G_0,
/// the selecting inequality for each later member, the reverse inequality for
/// every intermediate pair, and P = union of generations.
PrincipalAudit audit_principal(const PrincipalForest& forest, const SampledField& u);

struct ClaimReport {
  int claim = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  double constant = 0.0;  // lhs / rhs; 0 when both vanish
  bool finite = true;
  std::vector<std::pair<std::string, double>> witnesses;
  std::vector<std::string> notes;
};

/// Sum over Gamma_N and over P of v^r(Q) u(Q) / |Q|. Throws DomainError when
/// P is empty while Gamma_N is not.
ClaimReport claim1_check(const PrincipalForest& principal, const SampledField& vr, const SampledField& u);

/// Scanned constants used by the Claim 2 machinery.
struct Claim2Constants {
  double r = 1.0;
  double v_a1 = 1.0;   // [v]_{A_1}
  double vr_a1 = 1.0;  // [v^r]_{A_1}
  double s = 2.0;      // reverse Hölder exponent of v^r
  double rh = 1.0;     // [v^r]_{RH_s}
  double t0 = 1.0;
  double c0 = 1.0;
  double delta = 0.0;
  double lower_type = 1.0;  // C_r
  double submult = 1.0;     // C_sub
};

/// Scans v for the constants: A_1 of v and v^r, and the largest s on the
/// ladder 1.1, 1.2, ..., 4 whose RH_s estimate for v^r is refinement-stable
/// over the mesh and two coarsenings; the growth data come from check_Fr.
Claim2Constants claim2_constants(const SampledField& v, double r, const YoungFunction& phi);

struct Claim2Cube {
  Cube cube;
  double lhs = 0.0;   // a^{kr}
  double rhs = 0.0;   // avg Phi(f/t) v^r over the cube
  double ratio = 0.0;
  double norm = 0.0;  // ||g / a^k||_{Phi}
  double I = 0.0;     // ||(g / a^k) chi_A||_{Phi}
  double II = 0.0;    // ||(g / a^k) chi_B||_{Phi}
  int branch = 1;                 // 1: I > 1/2, else 2
  bool branch_ok = false;         // I > 1/2 or II > 1/2
  double branch_mass = 0.0;       // avg over A (branch I) or B (branch II) of Phi(2 g / a^k)
  double branch_one_bound = 0.0;  // C_sub^2 C_r Phi(2 t0) Phi(1) t0^{-r} rhs
  bool branch_one_holds = false;
  bool b_covered = true;          // B inside the Omega_k cubes of this cube
  std::size_t omega_cubes = 0;
  bool omega_in_gamma = true;     // every Omega_k cube inside is a Gamma cube
  double wk_max = 0.0;            // largest w_k-average term over the Omega_k cubes
  double holder_rhs = 0.0;        // right side of the Hölder display
  bool holder_holds = false;
  double large_cube_avg = 0.0;    // avg v^r
  double large_cube_bound = 0.0;  // (1 + a^r [v]^r [v^r]) a^{kr}
  bool large_cube_holds = false;
};

struct Claim2Report {
  ClaimReport summary;
  int k = 0;
  double t = 1.0;
  Claim2Constants constants;
  double s_prime = 2.0;
  double X = 0.0;  // s' [v]^{1/s'} a^{1/s'} [v^r]_{RH_s} delta_0
  double delta0 = 1.0;
  double eps0 = 1.0;
  double gamma = 2.0;
  double gamma_prime = 2.0;
  double chain_bound = 0.0;  // (X gamma')^{1/gamma'}
  double lemma_bound = 0.0;  // e^{2/e}
  double log_bound = 0.0;    // bound from log y <= y^xi / (e xi), xi = 1/(s' delta gamma')
  double tau = 0.0;
  double wk_max = 0.0;
  bool wk_within = true;  // wk_max <= e^{2/e} + 1e-6
  std::vector<Claim2Cube> cubes;
};

/// Claim 2 on every cube of the level set {M_{Phi,D} g > a^k}, g = f v / t:
/// both sides, the A/B split at v <= t0 a^k, the Hölder step with
/// gamma = 1 + eps0 and its w_k-average term, and the large-cube display.
/// `omega` is Omega_k on the same grid. Throws DomainError on a cube with
/// zero v^r mass.
Claim2Report claim2_check(const DecompositionForest& tilde, const DecompositionForest& omega, const SampledField& f,
                          const SampledField& v, const YoungFunction& phi, double t, double a, int k,
                          const Claim2Constants& constants);

struct Claim3Report {
  ClaimReport summary;
  Point x{};
  double u_x = 0.0;
  std::vector<int> G;
  std::vector<int> k_m;
  std::vector<std::vector<int>> F;
  std::vector<double> partial_sums;      // per m
  std::vector<double> geometric_bounds;  // per m: sum over F_m of a^{(k_m - l) beta nu}
  std::vector<double> averages;          // per m: avg of u over tilde Q^{k_m}
  double h = 0.0;
  double h_over_u = 0.0;
  double chain_bound = 0.0;  // 2 sum_m C_m S_m
  bool finite_sequence = true;
  std::size_t ec1_checked = 0;
  std::size_t ec1_failed = 0;
};

/// Claim 3 at the point x. `tilde` holds {M_{Phi,D} g > a^k} for
/// k = principal.N, principal.N + 1, ...; u_a1 and nu are the A_1 constant and
/// A_infinity exponent of u.
Claim3Report claim3_check(const PrincipalForest& principal, const std::vector<DecompositionForest>& tilde,
                          const SampledField& u, const Point& x, double u_a1, double nu);

struct ClaimsConfig {
  double a = 0.0;     // 0: 2^{n+1}
  double beta = 0.0;  // 0: eta / 2
  std::optional<int> N;
  double t = 1.0;
  int grid_id = 1;
  std::vector<Point> points;
};

struct ClaimsBattery {
  double a = 0.0;
  double beta = 0.0;
  double eta = 0.0;
  int N = 0;
  Claim2Constants constants;
  std::vector<DecompositionForest> omega;
  std::vector<DecompositionForest> tilde;
  PrincipalForest principal;
  PrincipalAudit audit;
  ClaimReport claim1;
  std::vector<Claim2Report> claim2;  // one per nonempty tilde layer
  std::vector<Claim3Report> claim3;
  double u_a1 = 1.0;
  double nu = 1.0;
};

/// The three claims on one instance with g = f v / t.
ClaimsBattery run_claims(const SampledField& f, const SampledField& u, const SampledField& v, double r,
                         const YoungFunction& phi, const ClaimsConfig& cfg);

}  // namespace mw
