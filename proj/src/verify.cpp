#include "mixedweak/verify.hpp"

#include "mixedweak/czdecomp.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace mw {

std::vector<double> TGridSpec::build(double f_sup) const {
  if (!values.empty()) {
    auto out = values;
    for (double t : out)
      if (!(t > 0.0) || !std::isfinite(t)) throw InputError("t values must be positive and finite");
    std::sort(out.begin(), out.end());
    return out;
  }
  if (count < 1) throw InputError("t grid needs count >= 1");
  if (!(lo > 0.0) || !(hi >= lo)) throw InputError("t grid needs 0 < lo <= hi");
  const double scale = relative && f_sup > 0.0 ? f_sup : 1.0;
  return log_grid(lo * scale, hi * scale, count);
}

TGridSpec TGridSpec::refined() const {
  TGridSpec out = *this;
  if (!values.empty()) {
    out.values.clear();
    auto v = values;
    std::sort(v.begin(), v.end());
    for (std::size_t i = 0; i < v.size(); ++i) {
      out.values.push_back(v[i]);
      if (i + 1 < v.size()) out.values.push_back(std::sqrt(v[i] * v[i + 1]));
    }
    return out;
  }
  out.count = std::max(1, 2 * count - 1);
  return out;
}

MaximalMode ExperimentConfig::resolved_mode() const { return mode ? *mode : default_mode(phi.build()); }

bool VerificationReport::passed() const {
  if (refused()) return false;
  return std::all_of(properties.begin(), properties.end(), [](const PropertyResult& p) { return p.passed; });
}

int VerificationReport::exit_code() const {
  if (refused()) return 3;
  return passed() ? 0 : 2;
}

namespace {

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

int default_scan_cells(int dim) { return dim == 1 ? 1024 : dim == 2 ? 32 : 8; }

SampledField abs_field(const SampledField& f) {
  return f.map([](double x) { return std::abs(x); }, FieldKind::Function);
}

/// Thresholding S against t: sorted once, queried per row.
class LevelSets {
 public:
  LevelSets(const SampledField& s, const SampledField& mu) : s_(s) {
    const Mesh& m = s.mesh();
    order_.resize(s.size());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) { return s[a] > s[b]; });
    mass_.assign(order_.size() + 1, 0.0L);
    for (std::size_t i = 0; i < order_.size(); ++i)
      mass_[i + 1] = mass_[i] + static_cast<long double>(mu[order_[i]]) * m.cell_volume();
    boundary_max_ = 0.0;
    for (std::size_t c = 0; c < s.size(); ++c) {
      const auto idx = m.unflatten(c);
      bool edge = false;
      for (int d = 0; d < m.dim; ++d) {
        const int i = idx[static_cast<std::size_t>(d)];
        edge = edge || i == 0 || i == m.cells - 1;
      }
      if (edge) boundary_max_ = std::max(boundary_max_, s[c]);
    }
  }

  /// Number of cells with S > t.
  std::size_t count_above(double t) const {
    const auto it = std::partition_point(order_.begin(), order_.end(), [&](std::size_t c) { return s_[c] > t; });
    return static_cast<std::size_t>(it - order_.begin());
  }
  double mass_above(double t) const { return static_cast<double>(mass_[count_above(t)]); }
  bool truncated(double t) const { return boundary_max_ > t; }
  double sup() const { return order_.empty() ? 0.0 : s_[order_.front()]; }

 private:
  SampledField s_;
  std::vector<std::size_t> order_;
  std::vector<long double> mass_;
  double boundary_max_ = 0.0;
};

struct RowsResult {
  std::vector<ReportRow> rows;
  double c_emp = 0.0;
  double c_emp_untruncated = 0.0;
};

/// Rows of sum_{level > t} mu against rhs(t).
template <class Rhs>
RowsResult level_rows(const LevelSets& level, const std::vector<double>& t_grid, Rhs&& rhs) {
  RowsResult out;
  out.rows.resize(t_grid.size());
  parallel_for(t_grid.size(), [&](std::size_t i) {
    ReportRow& row = out.rows[i];
    row.t = t_grid[i];
    row.lhs = level.mass_above(row.t);
    row.rhs = rhs(row.t);
    row.truncated = row.lhs > 0.0 && level.truncated(row.t);
    row.ratio = row.rhs > 0.0 ? row.lhs / row.rhs : 0.0;
  });
  for (const auto& row : out.rows) {
    if (!(row.rhs > 0.0)) continue;
    out.c_emp = std::max(out.c_emp, row.ratio);
    if (!row.truncated) out.c_emp_untruncated = std::max(out.c_emp_untruncated, row.ratio);
  }
  return out;
}

/// int Phi(|f|/t) mu over the support of f.
double orlicz_rhs(const SampledField& f, const SampledField& mu, const YoungFunction& phi, double t) {
  long double s = 0.0L;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (f[i] != 0.0) s += static_cast<long double>(phi(f[i] / t)) * mu[i];
  return static_cast<double>(s * f.mesh().cell_volume());
}

struct Instance {
  SampledField f;
  SampledField v;
  SampledField mu;  // u v^r
  SampledField s;   // S_Phi f
};

Instance build_instance(const ExperimentConfig& cfg, const Mesh& mesh, const YoungFunction& phi, MaximalMode mode) {
  Instance in;
  in.f = abs_field(cfg.f.build(mesh));
  in.v = cfg.v.build(mesh);
  const auto u = cfg.u.build(mesh);
  in.mu = u.times(in.v.pow(cfg.r), FieldKind::Weight);
  in.s = sawyer_field(in.f, in.v, phi, mode);
  return in;
}

RowsResult instance_rows(const Instance& in, const YoungFunction& phi, const std::vector<double>& t_grid) {
  const LevelSets level(in.s, in.mu);
  return level_rows(level, t_grid, [&](double t) { return orlicz_rhs(in.f, in.mu, phi, t); });
}

PropertyResult scan_property(const std::string& name, const RefinementScan& scan) {
  PropertyResult p;
  p.name = name;
  p.passed = scan.verdict == Stability::Stable;
  std::ostringstream os;
  for (std::size_t i = 0; i < scan.estimates.size(); ++i)
    os << (i ? ", " : "") << "N=" << scan.resolutions[i] << ": " << fmt(scan.estimates[i]);
  p.detail = os.str();
  return p;
}

RefinementScan a1_spec_scan(const std::function<SampledField(const Mesh&)>& build, const ExperimentConfig& cfg) {
  const int n0 = cfg.scan_cells > 0 ? cfg.scan_cells : default_scan_cells(cfg.dim);
  return refinement_scan([&](int N) { return ap_constant(build(Mesh(cfg.dim, cfg.half_width, N)), 1.0).ap; }, n0);
}

RefinementScan ap_coarsening_scan(const SampledField& w, double p) {
  RefinementScan out;
  std::vector<SampledField> levels{w};
  while (levels.size() < 3 && levels.back().mesh().cells >= 16) levels.push_back(levels.back().coarsened());
  std::reverse(levels.begin(), levels.end());
  for (const auto& l : levels) {
    out.resolutions.push_back(l.mesh().cells);
    out.estimates.push_back(ap_constant(l, p).ap);
  }
  out.verdict = refinement_verdict(out.estimates);
  return out;
}

}  // namespace

RefinementScan a1_coarsening_scan(const SampledField& w) { return ap_coarsening_scan(w, 1.0); }

namespace {

/// A_1 scan of v^e where v is coarsened before the power is taken.
RefinementScan a1_power_scan(const SampledField& v, double e) {
  RefinementScan out;
  std::vector<SampledField> levels{v};
  while (levels.size() < 3 && levels.back().mesh().cells >= 16) levels.push_back(levels.back().coarsened());
  std::reverse(levels.begin(), levels.end());
  for (const auto& l : levels) {
    out.resolutions.push_back(l.mesh().cells);
    out.estimates.push_back(ap_constant(l.pow(e), 1.0).ap);
  }
  out.verdict = refinement_verdict(out.estimates);
  return out;
}

}  // namespace

HypothesisCheck theorem_hypotheses(const ExperimentConfig& cfg) {
  HypothesisCheck h;
  auto fail = [&](const std::string& why) {
    if (h.ok) h.failure = why;
    h.ok = false;
  };
  if (!(cfg.r >= 1.0)) {
    fail("r >= 1 fails: r = " + fmt(cfg.r));
    return h;
  }
  const auto fr = check_Fr(cfg.phi.build(), cfg.r);
  h.scans.push_back({"phi_in_F_r", fr.member, fr.member ? cfg.phi.describe() : fr.failure});
  if (!fr.member) fail("Phi not in F_r: " + fr.failure);

  const auto u_scan = a1_spec_scan([&](const Mesh& m) { return cfg.u.build(m); }, cfg);
  h.scans.push_back(scan_property("u_in_A1", u_scan));
  if (!h.scans.back().passed) fail("u fails the finite A_1 scan (" + h.scans.back().detail + ")");
  const auto vr_scan = a1_spec_scan([&](const Mesh& m) { return cfg.v.build(m).pow(cfg.r); }, cfg);
  h.scans.push_back(scan_property("v^r_in_A1", vr_scan));
  if (!h.scans.back().passed) fail("v^r fails the finite A_1 scan (" + h.scans.back().detail + ")");

  const auto f = cfg.f.build(cfg.mesh());
  const bool bounded = std::isfinite(f.sup_abs());
  const bool margin = inside_safety_margin(f);
  h.scans.push_back({"f_bounded_in_margin", bounded && margin,
                     bounded ? (margin ? "support inside the middle half" : "support leaves the middle half")
                             : "f is not bounded"});
  if (!(bounded && margin)) fail("f must be bounded with support in the middle half of the box");
  return h;
}

VerificationReport mixed_weak_report(const ExperimentConfig& cfg) {
  VerificationReport rep;
  rep.name = cfg.name;
  rep.mesh = cfg.mesh();
  rep.mode = cfg.resolved_mode();
  rep.hypotheses = theorem_hypotheses(cfg);
  if (rep.refused()) return rep;

  const auto phi = check_Fr(cfg.phi.build(), cfg.r).annotated;
  const auto in = build_instance(cfg, rep.mesh, phi, rep.mode);
  const double fsup = in.f.sup_abs();
  const auto t_grid = cfg.t_grid.build(fsup);
  const LevelSets level(in.s, in.mu);
  const auto rhs = [&](double t) { return orlicz_rhs(in.f, in.mu, phi, t); };
  auto rows = level_rows(level, t_grid, rhs);
  rep.rows = rows.rows;
  rep.c_emp = rows.c_emp;
  rep.c_emp_untruncated = rows.c_emp_untruncated;
  rep.c_emp_t_refined = level_rows(level, cfg.t_grid.refined().build(fsup), rhs).c_emp;
  rep.sphi = in.s;

  auto& L = rep.constants;
  const auto c2 = claim2_constants(in.v, cfg.r, phi);
  L.u_a1 = ap_constant(cfg.u.build(rep.mesh), 1.0).ap;
  L.v_a1 = c2.v_a1;
  L.vr_a1 = c2.vr_a1;
  L.rh_s = c2.s;
  L.rh = c2.rh;
  const auto fit = ainfty_fit(in.v.pow(cfg.r));
  L.ainfty_epsilon = fit.epsilon;
  L.ainfty_C = fit.C;
  L.sphi_linf = fsup > 0.0 ? level.sup() / fsup : 0.0;
  L.growth = phi.metadata().growth;
  L.lower_type = c2.lower_type;
  L.submult = c2.submult;

  auto add = [&](std::string name, bool ok, std::string detail) {
    rep.properties.push_back({std::move(name), ok, std::move(detail)});
  };
  {
    std::size_t bad = 0;
    for (const auto& row : rep.rows)
      if (row.rhs == 0.0 && row.lhs != 0.0) ++bad;
    add("rhs_zero_implies_lhs_zero", bad == 0, std::to_string(bad) + " violating rows");
  }
  add("finite_c_emp", std::isfinite(rep.c_emp), "C_emp = " + fmt(rep.c_emp));
  {
    bool lhs_mono = true;
    bool rhs_mono = true;
    for (std::size_t i = 1; i < rep.rows.size(); ++i) {
      lhs_mono = lhs_mono && rep.rows[i].lhs <= rep.rows[i - 1].lhs;
      rhs_mono = rhs_mono && rep.rows[i].rhs <= rep.rows[i - 1].rhs * (1 + 1e-12);
    }
    add("lhs_nonincreasing_in_t", lhs_mono, "");
    add("rhs_nonincreasing_in_t", rhs_mono, "");
  }
  {
    const double cutoff = L.sphi_linf * fsup;
    std::size_t bad = 0;
    for (const auto& row : rep.rows)
      if (row.t > cutoff && row.lhs != 0.0) ++bad;
    add("linf_cutoff", bad == 0, "LHS = 0 for t > " + fmt(cutoff) + "; " + std::to_string(bad) + " violating rows");
  }
  add("t_grid_stable", rep.c_emp_t_refined <= 1.10 * rep.c_emp,
      "C_emp " + fmt(rep.c_emp) + " -> " + fmt(rep.c_emp_t_refined) + " on the refined t grid");
  if (cfg.homogeneity_check) {
    const auto s2 = sawyer_field(in.f.scaled(2.0), in.v, phi, rep.mode);
    double worst = 0.0;
    for (std::size_t i = 0; i < s2.size(); ++i) {
      const double a = 2.0 * in.s[i];
      if (a > 0.0 || s2[i] > 0.0) worst = std::max(worst, std::abs(s2[i] - a) / std::max(a, s2[i]));
    }
    add("homogeneity_in_f", worst <= 1e-9, "max |S(2f) - 2S(f)| / 2S(f) = " + fmt(worst));
  }
  if (cfg.resolution_doubling) {
    const auto fine = build_instance(cfg, rep.mesh.refined(), phi, rep.mode);
    const double c2n = instance_rows(fine, phi, t_grid).c_emp;
    rep.c_emp_refined = c2n;
    rep.refinement_change = rep.c_emp > 0.0 ? std::abs(c2n - rep.c_emp) / rep.c_emp : (c2n > 0.0 ? INFINITY : 0.0);
    add("resolution_stable", *rep.refinement_change <= 0.10,
        "C_emp " + fmt(rep.c_emp) + " at N=" + std::to_string(rep.mesh.cells) + ", " + fmt(c2n) + " at N=" +
            std::to_string(2 * rep.mesh.cells));
  }
  return rep;
}

VerificationReport sawyer_special_case(const ExperimentConfig& cfg) {
  if (!(cfg.phi.family == YoungFamily::Power && cfg.phi.p == 1.0) || cfg.r != 1.0)
    throw InputError("the Sawyer case needs Phi(t) = t and r = 1");
  auto rep = mixed_weak_report(cfg);
  if (rep.refused()) return rep;
  const auto phi = cfg.phi.build();
  const auto t_grid = cfg.t_grid.build(abs_field(cfg.f.build(rep.mesh)).sup_abs());
  ExperimentConfig scaled = cfg;
  scaled.v.scale *= 10.0;
  const auto base = build_instance(cfg, rep.mesh, phi, rep.mode);
  const auto tenfold = build_instance(scaled, rep.mesh, phi, rep.mode);
  const auto rows = instance_rows(tenfold, phi, t_grid);

  std::size_t flips = 0;
  for (double t : t_grid)
    for (std::size_t i = 0; i < base.s.size(); ++i)
      if ((base.s[i] > t) != (tenfold.s[i] > t)) ++flips;
  double lhs_err = 0.0;
  double rhs_err = 0.0;
  double ratio_err = 0.0;
  for (std::size_t i = 0; i < rows.rows.size(); ++i) {
    const auto& a = rep.rows[i];
    const auto& b = rows.rows[i];
    if (a.lhs > 0.0) lhs_err = std::max(lhs_err, std::abs(b.lhs / (10.0 * a.lhs) - 1.0));
    else if (b.lhs != 0.0) lhs_err = INFINITY;
    if (a.rhs > 0.0) rhs_err = std::max(rhs_err, std::abs(b.rhs / (10.0 * a.rhs) - 1.0));
    else if (b.rhs != 0.0) rhs_err = INFINITY;
    if (a.ratio > 0.0) ratio_err = std::max(ratio_err, std::abs(b.ratio / a.ratio - 1.0));
    else if (b.ratio != 0.0) ratio_err = INFINITY;
  }
  rep.properties.push_back({"v_scaling_level_sets", flips == 0, std::to_string(flips) + " cells differ"});
  rep.properties.push_back({"v_scaling_lhs", lhs_err <= 1e-12, "max relative error " + fmt(lhs_err)});
  rep.properties.push_back({"v_scaling_rhs", rhs_err <= 1e-12, "max relative error " + fmt(rhs_err)});
  rep.properties.push_back({"v_scaling_ratio", ratio_err <= 1e-12, "max relative error " + fmt(ratio_err)});
  return rep;
}

MwWeakReport mw_weak_check(const SampledField& w, double p, const SampledField& f, const std::vector<double>& t_grid) {
  if (!(p >= 1.0)) throw DomainError("mw_weak_check: p must be >= 1");
  if (!(w.mesh() == f.mesh())) throw InputError("mw_weak_check: fields on different meshes");
  MwWeakReport out;
  out.p = p;
  const auto scan = ap_coarsening_scan(w, p);
  out.ap = scan.estimates.back();
  out.hypothesis_ok = scan.verdict == Stability::Stable;
  if (!out.hypothesis_ok) {
    out.failure = "w fails the finite A_p scan: " + scan_property("w", scan).detail;
    return out;
  }
  const auto af = abs_field(f);
  const auto mf = maximal_hl_field(af, MaximalMode::Uncentered);
  const auto level = mf.times(w.pow(1.0 / p), FieldKind::Function);
  const auto lebesgue = SampledField::constant(f.mesh(), 1.0, FieldKind::Weight);
  const LevelSets sets(level, lebesgue);
  long double mass = 0.0L;
  for (std::size_t i = 0; i < af.size(); ++i) mass += std::pow(static_cast<long double>(af[i]), p) * w[i];
  const double fp = static_cast<double>(mass * f.mesh().cell_volume());
  const auto rows = level_rows(sets, t_grid, [&](double t) { return fp / std::pow(t, p); });
  out.rows = rows.rows;
  out.c_emp = rows.c_emp;
  return out;
}

SphiLinfReport sphi_linf_check(const SampledField& v, const YoungFunction& phi, double r,
                               const std::vector<SampledField>& f_samples, MaximalMode mode) {
  SphiLinfReport out;
  for (int i = 1; i <= 20; ++i) {
    const double eps = 0.05 * i;
    const auto scan = a1_power_scan(v, r + eps);
    if (scan.verdict != Stability::Stable) break;
    out.epsilon = eps;
    out.v_r_eps_a1 = scan.estimates.back();
  }
  if (out.epsilon == 0.0) {
    out.diagnostic = "inconclusive: no epsilon on the ladder 0.05..1 gives a finite A_1 scan of v^{r+epsilon}";
    return out;
  }
  const auto coarse_v = v.coarsened();
  std::vector<double> fine(f_samples.size(), 0.0);
  std::vector<double> coarse(f_samples.size(), 0.0);
  std::vector<double> plain(f_samples.size(), 0.0);
  parallel_for(f_samples.size(), [&](std::size_t k) {
    const auto f = abs_field(f_samples[k]);
    const double sup = f.sup_abs();
    if (sup == 0.0) return;
    const auto s = sawyer_field(f, v, phi, mode);
    fine[k] = *std::max_element(s.values().begin(), s.values().end()) / sup;
    const auto cf = f.coarsened();
    const auto cs = sawyer_field(cf, coarse_v, phi, mode);
    coarse[k] = *std::max_element(cs.values().begin(), cs.values().end()) / cf.sup_abs();
    const auto m = maximal_orlicz_field(f, phi, mode).value;
    plain[k] = *std::max_element(m.values().begin(), m.values().end()) / sup;
  });
  for (std::size_t k = 0; k < f_samples.size(); ++k) {
    if (fine[k] == 0.0) continue;
    ++out.samples;
    out.constant = std::max(out.constant, fine[k]);
    out.coarse_constant = std::max(out.coarse_constant, coarse[k]);
    out.max_over_sup_ratio = std::max(out.max_over_sup_ratio, plain[k]);
  }
  out.conclusive = true;
  out.stable = std::isfinite(out.constant) && refinement_stability(out.coarse_constant, out.constant) == Stability::Stable;
  out.diagnostic = "C0 = " + fmt(out.constant) + " (coarse " + fmt(out.coarse_constant) + "), epsilon = " +
                   fmt(out.epsilon) + ", [v^{r+epsilon}]_{A_1} = " + fmt(out.v_r_eps_a1);
  return out;
}

InterpolationReport modular_interpolation_check(const SampledField& F, const SampledField& G, const SampledField& mu,
                                                const YoungFunction& phi, double p, double c, double C) {
  InterpolationReport out;
  out.p = p;
  out.c = c;
  if (!(p > phi.r())) {
    out.rejected = true;
    out.diagnostic = "p <= r: the order Phi <_N p t^{p-1} needs p > r";
    return out;
  }
  if (!(c > 0.0)) throw DomainError("modular_interpolation_check: c must be positive");
  if (!(F.mesh() == G.mesh()) || !(F.mesh() == mu.mesh())) throw InputError("fields on different meshes");
  const double vol = F.mesh().cell_volume();
  const double max_f = F.sup_abs();
  const double max_g = G.sup_abs();

  // Hypothesis on a lambda grid.
  const double top = std::max(max_f, max_g / c);
  double fitted = 0.0;
  bool finite = true;
  if (top > 0.0) {
    const auto lambdas = log_grid(top * 1e-4, top, 200);
    std::vector<double> ratio(lambdas.size(), 0.0);
    parallel_for(lambdas.size(), [&](std::size_t i) {
      const double lam = lambdas[i];
      long double num = 0.0L;
      long double den = 0.0L;
      for (std::size_t k = 0; k < F.size(); ++k) {
        if (F[k] > lam) num += mu[k];
        const double g = std::abs(G[k]);
        if (g > c * lam) den += static_cast<long double>(phi(g / lam)) * mu[k];
      }
      ratio[i] = den > 0.0L ? static_cast<double>(num / den) : (num > 0.0L ? INFINITY : 0.0);
    });
    for (double x : ratio) {
      if (!std::isfinite(x)) finite = false;
      fitted = std::max(fitted, x);
    }
  }
  out.C_fitted = fitted;
  out.C = C > 0.0 ? C : fitted;
  out.hypothesis_ok = finite && fitted <= out.C * (1 + 1e-12);

  long double lhs = 0.0L;
  long double rhs = 0.0L;
  for (std::size_t k = 0; k < F.size(); ++k) {
    lhs += std::pow(static_cast<long double>(std::abs(F[k])), p) * mu[k];
    rhs += std::pow(2.0L * std::abs(G[k]) / c, p) * mu[k];
  }
  out.lhs = static_cast<double>(lhs * vol);
  out.rhs = static_cast<double>(rhs * vol);
  out.implied_constant = out.rhs > 0.0 ? out.lhs / out.rhs : 0.0;

  // Layer cake: int psi(F) = int_0^inf psi'(lambda) mu(F > lambda), bracketed.
  if (max_f > 0.0) {
    const LevelSets level(F.map([](double x) { return std::abs(x); }, FieldKind::Function), mu);
    auto lambdas = log_grid(max_f * 1e-6, max_f, 2000);
    long double lower = std::pow(static_cast<long double>(lambdas[0]), p) * level.mass_above(lambdas[0]);
    long double upper = std::pow(static_cast<long double>(lambdas[0]), p) * level.mass_above(0.0);
    for (std::size_t i = 0; i + 1 < lambdas.size(); ++i) {
      const long double d = std::pow(static_cast<long double>(lambdas[i + 1]), p) -
                            std::pow(static_cast<long double>(lambdas[i]), p);
      lower += d * level.mass_above(lambdas[i + 1]);
      upper += d * level.mass_above(lambdas[i]);
    }
    out.lhs_layer_cake = static_cast<double>((lower + upper) / 2);
    out.layer_cake_error = static_cast<double>((upper - lower) / 2);
  }

  const auto order = prec_N_check([&](double x) { return phi(x); },
                                  [p](double x) { return p * std::pow(x, p - 1.0); });
  out.rho = std::max(order.constant, order.refined_constant);
  out.bound = out.C * out.rho * phi(c);
  if (!out.hypothesis_ok) {
    out.diagnostic = "hypothesis fails: C_fitted = " + fmt(fitted) + " exceeds C = " + fmt(out.C);
    return out;
  }
  out.conclusion_holds = out.lhs <= out.bound * out.rhs * (1 + 1e-12);
  out.diagnostic = "implied constant " + fmt(out.implied_constant) + " against C rho Phi(c) = " + fmt(out.bound);
  return out;
}

LpReport lp_boundedness_check(const SampledField& u, const SampledField& v, double r, double p,
                              const YoungFunction& phi, const std::vector<SampledField>& f_samples,
                              MaximalMode mode) {
  LpReport out;
  out.p = p;
  if (!(p > r)) {
    out.rejected = true;
    out.diagnostic = "p <= r rejected";
    return out;
  }
  const double vol = u.mesh().cell_volume();
  const auto w = u.times(v.pow(r - p), FieldKind::Weight);
  const auto mu = u.times(v.pow(r), FieldKind::Weight);
  const auto cu = u.coarsened();
  const auto cv = v.coarsened();
  const auto cw = cu.times(cv.pow(r - p), FieldKind::Weight);

  auto ratio_of = [&](const SampledField& f, const SampledField& weight, SampledField* m_out) {
    const auto m = maximal_orlicz_field(f, phi, mode).value;
    long double lhs = 0.0L;
    long double rhs = 0.0L;
    for (std::size_t i = 0; i < f.size(); ++i) {
      lhs += std::pow(static_cast<long double>(m[i]), p) * weight[i];
      rhs += std::pow(static_cast<long double>(f[i]), p) * weight[i];
    }
    if (m_out) *m_out = m;
    return std::make_pair(static_cast<double>(lhs), static_cast<double>(rhs));
  };

  out.samples.resize(f_samples.size());
  parallel_for(f_samples.size(), [&](std::size_t k) {
    LpSample& s = out.samples[k];
    const auto f = abs_field(f_samples[k]);
    if (f.sup_abs() == 0.0) {
      s.skipped = true;
      return;
    }
    SampledField m;
    const auto [lhs, rhs] = ratio_of(f, w, &m);
    s.lhs = lhs * vol;
    s.rhs = rhs * vol;
    s.ratio = lhs / rhs;
    const auto [clhs, crhs] = ratio_of(f.coarsened(), cw, nullptr);
    s.coarse_ratio = clhs / crhs;
    const auto sf = sawyer_field(f.divided_by(v, FieldKind::Function), v, phi, mode);
    for (std::size_t i = 0; i < f.size(); ++i) {
      const double a = std::pow(m[i], p) * u[i] * std::pow(v[i], r - p);
      const double b = std::pow(sf[i], p) * mu[i];
      if (a == 0.0 && b == 0.0) continue;
      s.identity_error = std::max(s.identity_error, std::abs(a - b) / std::max(std::abs(a), std::abs(b)));
    }
  });
  bool finite = true;
  for (const auto& s : out.samples) {
    if (s.skipped) continue;
    out.identity_error = std::max(out.identity_error, s.identity_error);
    out.sup_ratio = std::max(out.sup_ratio, s.ratio);
    out.sup_coarse_ratio = std::max(out.sup_coarse_ratio, s.coarse_ratio);
    finite = finite && std::isfinite(s.ratio);
  }
  out.identity_ok = out.identity_error <= 1e-9;
  out.finite = finite;
  out.stable = finite && out.sup_coarse_ratio > 0.0 &&
               std::abs(out.sup_ratio - out.sup_coarse_ratio) <= 0.10 * out.sup_coarse_ratio;
  std::ostringstream os;
  os << "sup ratio " << fmt(out.sup_ratio) << " (coarse " << fmt(out.sup_coarse_ratio) << "), identity error "
     << fmt(out.identity_error);
  out.diagnostic = os.str();
  return out;
}

}  // namespace mw
