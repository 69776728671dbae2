// Acceptance suite: one PASS/FAIL line per criterion. The exit status is 0
// when the set of failing criteria equals the --expect-fail set.

#include "mixedweak/czdecomp.hpp"
#include "mixedweak/verify.hpp"
#include "mixedweak/weights.hpp"

#include <CLI11.hpp>
#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

using namespace mw;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string title;
  std::function<Outcome()> run;
};

std::string fmt(double x, int digits = 6) {
  std::ostringstream os;
  os.precision(digits);
  os << x;
  return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ExperimentConfig i1_config(int cells) {
  ExperimentConfig cfg;
  cfg.name = "I1";
  cfg.dim = 1;
  cfg.half_width = 4.0;
  cfg.cells = cells;
  cfg.u = WeightSpec::constant(1.0);
  cfg.v = WeightSpec::power(-0.25);
  cfg.r = 2.0;
  cfg.phi = YoungSpec::log_power(2.0, 1.0);
  cfg.f = FunctionSpec::indicator({-0.125}, {0.125});
  cfg.t_grid.count = 40;
  return cfg;
}

Outcome main_sweep() {
  set_thread_limit(1);
  const auto t0 = std::chrono::steady_clock::now();
  auto cfg = i1_config(1 << 14);
  cfg.resolution_doubling = true;
  const auto rep = mixed_weak_report(cfg);
  const double elapsed = seconds_since(t0);
  set_thread_limit(0);
  if (rep.refused()) return {false, "hypotheses refused: " + rep.hypotheses.failure};
  std::size_t violations = 0;
  for (const auto& row : rep.rows)
    if (row.rhs == 0.0 && row.lhs != 0.0) ++violations;
  const bool finite = std::isfinite(rep.c_emp) && rep.c_emp > 0.0;
  const double change = rep.refinement_change.value_or(INFINITY);
  const bool pass = finite && violations == 0 && rep.rows.size() == 40 && change <= 0.10 && elapsed <= 60.0;
  return {pass, "C_emp " + fmt(rep.c_emp) + " at N=2^14, " + fmt(rep.c_emp_refined.value_or(NAN)) +
                    " at N=2^15 (change " + fmt(100 * change, 3) + "% <= 10%), RHS=0 => LHS=0 violations " +
                    std::to_string(violations) + ", " + fmt(elapsed, 3) + " s single-threaded (<= 60 s)"};
}

// Uncentered maximal function of a 1D step function: every interval of cells
// through prefix sums.
std::vector<double> brute_maximal(std::span<const double> f) {
  const std::size_t n = f.size();
  std::vector<long double> s(n + 1, 0.0L);
  for (std::size_t i = 0; i < n; ++i) s[i + 1] = s[i] + std::abs(f[i]);
  std::vector<double> best(n, 0.0);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a; b < n; ++b) {
      const double avg = static_cast<double>((s[b + 1] - s[a]) / static_cast<long double>(b - a + 1));
      for (std::size_t i = a; i <= b; ++i) best[i] = std::max(best[i], avg);
    }
  return best;
}

Outcome sawyer() {
  ExperimentConfig cfg;
  cfg.cells = 256;
  cfg.u = WeightSpec::constant(1.0);
  cfg.v = WeightSpec::constant(1.0);
  cfg.r = 1.0;
  cfg.phi = YoungSpec::power(1.0);
  cfg.f = FunctionSpec::indicator({0.0}, {1.0});
  cfg.t_grid.values = {0.5};
  cfg.t_grid.relative = false;
  const auto rep = sawyer_special_case(cfg);
  if (rep.refused() || rep.rows.size() != 1) return {false, "no row at t = 1/2"};
  const double h = cfg.mesh().h();
  const auto& row = rep.rows.front();
  const auto oracle = brute_maximal(cfg.f.build(cfg.mesh()).values());
  double oracle_lhs = 0.0;
  for (double m : oracle)
    if (m > 0.5) oracle_lhs += h;
  const bool pass = std::abs(row.lhs - 3.0) <= 2.0 * h + 1e-12 && row.rhs == 2.0 && row.lhs == oracle_lhs;
  return {pass, "LHS " + fmt(row.lhs, 10) + " (|LHS - 3| <= 2h = " + fmt(2 * h) + ", brute-force oracle " +
                    fmt(oracle_lhs, 10) + "), RHS " + fmt(row.rhs, 17)};
}

Outcome covering() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(31337);
  std::uniform_real_distribution<double> logside(std::log(1e-4), std::log(1e4));
  std::uniform_real_distribution<double> pos(-1e4, 1e4);
  std::size_t failures = 0;
  double worst = 0.0;
  for (int dim : {1, 2}) {
    const auto grids = build_grids(dim);
    for (int i = 0; i < 10000; ++i) {
      GeneralCube q;
      q.dim = dim;
      q.side = std::exp(logside(rng));
      for (int d = 0; d < dim; ++d) q.lower[static_cast<std::size_t>(d)] = pos(rng);
      const Cover c = find_cover(grids, q);
      const auto& g = grids[static_cast<std::size_t>(c.grid_id - 1)];
      const double side = side_length(c.cube);
      bool inside = true;
      for (int d = 0; d < dim; ++d) {
        const double lo = cube_lower(g, c.cube, d);
        const double x = q.lower[static_cast<std::size_t>(d)];
        inside = inside && lo <= x && x + q.side <= lo + side;
      }
      const double ratio = side / q.side;
      worst = std::max(worst, ratio);
      if (!inside || ratio > 3.0) ++failures;
    }
  }
  const double elapsed = seconds_since(t0);
  return {failures == 0 && elapsed <= 5.0, "2 x 10^4 cubes, " + std::to_string(failures) + " uncovered, max ratio " +
                                               fmt(worst) + " (<= 3), " + fmt(elapsed, 3) + " s (<= 5 s)"};
}

Outcome luxemburg_exactness() {
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> U(-5.0, 5.0);
  std::uniform_int_distribution<int> start(0, 47);
  std::uniform_int_distribution<int> len(1, 16);
  double worst = 0.0;
  std::size_t count = 0;
  for (double p : {1.0, 1.5, 2.0, 4.0}) {
    const auto phi = YoungFunction::power(p);
    for (int t = 0; t < 200; ++t) {
      const int dim = 1 + t % 2;
      const Mesh mesh(dim, 2.0, 64);
      std::vector<double> v(mesh.size());
      for (auto& x : v) x = U(rng);
      const auto f = SampledField::function(mesh, v);
      CellRange q;
      q.dim = dim;
      const int s = len(rng);
      for (int d = 0; d < dim; ++d) {
        q.lo[static_cast<std::size_t>(d)] = start(rng);
        q.hi[static_cast<std::size_t>(d)] = q.lo[static_cast<std::size_t>(d)] + s;
      }
      long double acc = 0.0L;
      q.for_each(mesh, [&](std::size_t i) { acc += std::pow(static_cast<long double>(std::abs(v[i])), p); });
      const long double mean = std::pow(acc / static_cast<long double>(q.count()), 1.0L / p);
      const double got = luxemburg_average(f, q, phi).value;
      worst = std::max(worst, static_cast<double>(std::abs(got - mean) / mean));
      ++count;
    }
  }
  return {worst <= 1e-9, std::to_string(count) + " instances, max relative error " + fmt(worst, 3) + " (<= 1e-9)"};
}

Outcome conjugate_laws() {
  std::vector<double> grid(50);
  for (int i = 0; i < 50; ++i) grid[static_cast<std::size_t>(i)] = std::pow(10.0, -3.0 + 6.0 * i / 49.0);
  std::vector<double> fine(241);
  for (int i = 0; i < 241; ++i) fine[static_cast<std::size_t>(i)] = std::pow(10.0, -6.0 + 12.0 * i / 240.0);
  const std::vector<std::pair<std::string, YoungFunction>> phis{{"t^2", YoungFunction::power(2.0)},
                                                                {"t^3", YoungFunction::power(3.0)},
                                                                {"Phi_0(1,1)", YoungFunction::log_power(1.0, 1.0)}};
  // closed forms: conj(t^2)(s) = s^2/4, conj(t^3)(s) = 2 (s/3)^{3/2}, and for
  // t (1 + log+ t): 0 on [0, 1], s - 1 on (1, 2], e^{s-2} beyond
  const std::vector<std::function<double(double)>> closed{
      [](double s) { return s * s / 4.0; }, [](double s) { return 2.0 * std::pow(s / 3.0, 1.5); },
      [](double s) { return s <= 1.0 ? 0.0 : s <= 2.0 ? s - 1.0 : std::exp(s - 2.0); }};
  std::size_t young_violations = 0;
  double closed_err = 0.0;
  std::string ranges;
  bool inverse_ok = true;
  for (std::size_t k = 0; k < phis.size(); ++k) {
    const auto& phi = phis[k].second;
    for (double s : grid) {
      const auto cs = conjugate(phi, s);
      const double exact = closed[k](s);
      if (cs.is_infinite()) {
        // Young's inequality holds trivially; only an overflowing exact value may be infinite
        if (std::isfinite(exact)) closed_err = INFINITY;
        continue;
      }
      const double err = std::abs(cs.value() - exact);
      closed_err = std::max(closed_err, exact > 0.0 ? err / exact : err);
      for (double t : grid)
        if (t * s > phi(t) + cs.value() + 1e-12 * (t * s)) ++young_violations;
    }
    const auto ip = inverse_product_check(phi, fine);
    inverse_ok = inverse_ok && ip.passed;
    ranges += (k ? ", " : "") + phis[k].first + " [" + fmt(ip.min_ratio, 8) + ", " + fmt(ip.max_ratio, 8) + "]";
  }
  const bool pass = young_violations == 0 && closed_err <= 1e-9 && inverse_ok;
  return {pass, "Young violations " + std::to_string(young_violations) + " on 3 x 50 x 50, closed-form conjugate error " +
                    fmt(closed_err, 3) + "; inverse product / t in " + ranges};
}

Outcome epsilon_lemma() {
  const int n = 100000;
  double lo = INFINITY;
  double hi = -INFINITY;
  int best = 0;
  for (int i = 0; i < n; ++i) {
    const double x = 1000.0 * i / (n - 1);
    const double y = epsilon_bound_function(x);
    lo = std::min(lo, y);
    if (y > hi) {
      hi = y;
      best = i;
    }
  }
  const double step = 1000.0 / (n - 1);
  const double a = std::max(0.0, step * (best - 1));
  const double b = step * (best + 1);
  const auto [xmax, neg] =
      boost::math::tools::brent_find_minima([](double x) { return -epsilon_bound_function(x); }, a, b, 52);
  const double target = 1.0 / (std::numbers::e - 1.0);
  const double upper = std::exp(1.0 / std::numbers::e);
  const bool pass = lo >= 1.0 - 1e-9 && hi <= upper + 1e-9 && -neg <= upper + 1e-9 && std::abs(xmax - target) <= 1e-6;
  return {pass, "range [" + fmt(lo, 12) + ", " + fmt(hi, 12) + "] within [1, e^{1/e} = " + fmt(upper, 12) +
                    "], argmax " + fmt(xmax, 10) + " vs 1/(e-1) = " + fmt(target, 10)};
}

Outcome cz_soundness() {
  std::mt19937_64 rng(2718);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const std::vector<YoungFunction> phis{YoungFunction::power(1.0), YoungFunction::power(2.0),
                                        YoungFunction::log_power(1.0, 1.0), YoungFunction::log_power(2.0, 1.0),
                                        YoungFunction::loglog(2.0, 1.5, 1.0)};
  int instances = 0;
  std::size_t mismatched = 0;
  std::size_t overlaps = 0;
  std::size_t bad_avg = 0;
  std::size_t bad_parent = 0;
  std::size_t cubes = 0;
  while (instances < 100) {
    const int dim = instances % 3 == 2 ? 2 : 1;
    const Mesh mesh(dim, 2.0, dim == 1 ? 64 : 16);
    const auto grids = build_grids(dim);
    const GridMesh gm(mesh, grids[static_cast<std::size_t>(instances) % grids.size()]);
    std::vector<double> vals(mesh.size());
    for (auto& v : vals) v = U(rng) < 0.3 ? 0.0 : std::exp(3.0 * U(rng)) - 1.0;
    const auto g = SampledField::function(mesh, vals);
    const auto& phi = phis[static_cast<std::size_t>(instances) % phis.size()];
    // oracle: the dyadic maximal function by walking every cell's ancestor chain
    std::vector<double> oracle(g.size(), 0.0);
    for (std::size_t i = 0; i < g.size(); ++i)
      for (const Cube& q : gm.chain(i)) oracle[i] = std::max(oracle[i], luxemburg_average(g, gm.cells(q), phi).value);
    std::vector<double> levels = oracle;
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    if (levels.size() < 2) continue;
    const std::size_t pick = static_cast<std::size_t>(U(rng) * static_cast<double>(levels.size() - 1));
    const double lambda = 0.5 * (levels[pick] + levels[pick + 1]);
    if (!(lambda > 0.0) || levels[pick + 1] - levels[pick] < 1e-9 * lambda) continue;
    const auto forest = level_set_decomposition(g, phi, gm, lambda);
    std::vector<int> cover(mesh.size(), 0);
    for (const auto& c : forest.cubes) {
      c.cells.for_each(mesh, [&](std::size_t i) { ++cover[i]; });
      if (!(luxemburg_average(g, c.cells, phi).value > lambda)) ++bad_avg;
      if (auto p = gm.admissible_parent(c.cube))
        if (!(luxemburg_average(g, gm.cells(*p), phi).value <= lambda)) ++bad_parent;
    }
    for (std::size_t i = 0; i < mesh.size(); ++i) {
      if (cover[i] > 1) ++overlaps;
      if ((cover[i] >= 1) != (oracle[i] > lambda)) ++mismatched;
    }
    cubes += forest.cubes.size();
    ++instances;
  }
  const bool pass = mismatched == 0 && overlaps == 0 && bad_avg == 0 && bad_parent == 0;
  return {pass, std::to_string(instances) + " instances, " + std::to_string(cubes) + " cubes; level-set mismatches " +
                    std::to_string(mismatched) + ", overlaps " + std::to_string(overlaps) + ", avg <= lambda " +
                    std::to_string(bad_avg) + ", parent > lambda " + std::to_string(bad_parent)};
}

Outcome claims_battery() {
  const auto cfg = i1_config(1 << 14);
  const Mesh mesh = cfg.mesh();
  ClaimsConfig cc;
  cc.a = 4.0;
  cc.N = -8;
  for (double x : {0.1, -0.05, 0.01, 0.3, -1.0}) cc.points.push_back(Point{x, 0.0, 0.0});
  const auto b = run_claims(cfg.f.build(mesh), cfg.u.build(mesh), cfg.v.build(mesh), cfg.r, cfg.phi.build(), cc);
  bool finite = b.claim1.finite && std::isfinite(b.claim1.constant);
  std::size_t cubes = 0;
  std::size_t over = 0;
  double wk = 0.0;
  for (const auto& c : b.claim2) {
    finite = finite && c.summary.finite && std::isfinite(c.summary.constant);
    for (const auto& q : c.cubes) {
      ++cubes;
      wk = std::max(wk, q.wk_max);
      if (!(q.wk_max <= std::exp(2.0 / std::numbers::e) + 1e-6)) ++over;
    }
  }
  double c3 = 0.0;
  for (const auto& c : b.claim3) {
    finite = finite && c.summary.finite && std::isfinite(c.summary.constant);
    c3 = std::max(c3, c.summary.constant);
  }
  const bool pass = finite && b.claim3.size() == 5 && over == 0;
  return {pass, std::string("constants ") + (finite ? "finite" : "NOT finite") + " (claim 1 " +
                    fmt(b.claim1.constant) + ", claim 3 max " + fmt(c3) + "); beta " + fmt(b.beta, 4) + "; w_k term max " +
                    fmt(wk) + " vs e^{2/e} = " + fmt(std::exp(2.0 / std::numbers::e)) + ", " + std::to_string(over) +
                    " of " + std::to_string(cubes) + " cubes over"};
}

Outcome lp_chain() {
  const double r = 2.0;
  const auto phi = YoungFunction::log_power(r, 1.0);
  const Mesh mesh(1, 4.0, 1024);
  const auto u = SampledField::constant(mesh, 1.0, FieldKind::Weight);
  const auto v = power_weight(-0.25, mesh);
  std::vector<SampledField> fs;
  for (std::uint64_t s = 1; s <= 10; ++s) fs.push_back(FunctionSpec::random(s, 4.0, 1).build(mesh));
  bool pass = true;
  std::string detail;
  for (double p : {r + 0.5, 2.0 * r}) {
    const auto order =
        prec_N_check([&](double t) { return phi(t); }, [p](double t) { return p * std::pow(t, p - 1.0); });
    const auto lp = lp_boundedness_check(u, v, r, p, phi, fs, MaximalMode::Grids);
    const bool ok = order.established && lp.identity_ok && lp.identity_error <= 1e-9 && lp.finite && lp.stable &&
                    lp.samples.size() == 10;
    pass = pass && ok;
    detail += (detail.empty() ? "" : "; ") + std::string("p=") + fmt(p) + ": rho " + fmt(order.constant) + " -> " +
              fmt(order.refined_constant) + (order.established ? " stable" : " NOT stable") + ", identity error " +
              fmt(lp.identity_error, 3) + ", ratio " + fmt(lp.sup_ratio) + " (coarse " + fmt(lp.sup_coarse_ratio) + ")";
  }
  return {pass, detail};
}

Outcome bp_law() {
  const auto phi0 = check_Fr(YoungFunction::log_power(1.0, 1.0), 1.0).annotated;
  const auto b = bp_integral(phi0, 2.0, 1.0);
  const auto probe = bp_integral(phi0, 1.0, 1.0);
  const bool pass = std::abs(b.value - 2.0) <= 1e-6 && probe.verdict == BpVerdict::Diverges;
  return {pass, "B_2 = " + fmt(b.value, 12) + " (2 +- 1e-6); xi = r probe verdict " + to_string(probe.verdict)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mixed weak-type acceptance suite"};
  std::vector<int> expect_fail;
  std::vector<int> only;
  app.add_option("--expect-fail", expect_fail, "criteria whose failure is documented and expected");
  app.add_option("--only", only, "run only these criteria");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria{
      {1, "main theorem sweep on I1", main_sweep},
      {2, "Sawyer reduction at t = 1/2", sawyer},
      {3, "dyadic covering by the 3^n grids", covering},
      {4, "Luxemburg exactness for powers", luxemburg_exactness},
      {5, "conjugate and inverse laws", conjugate_laws},
      {6, "epsilon-bound lemma", epsilon_lemma},
      {7, "CZ decomposition soundness", cz_soundness},
      {8, "claims battery on I1", claims_battery},
      {9, "L^p chain through S_Phi", lp_chain},
      {10, "B_p law", bp_law},
  };
  const std::set<int> expected(expect_fail.begin(), expect_fail.end());
  std::set<int> failed;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) failed.insert(c.id);
    std::cout << "criterion " << c.id << ": " << (o.pass ? "PASS" : "FAIL") << "  " << c.title << " ["
              << fmt(seconds_since(t0), 3) << " s] " << o.detail
              << (!o.pass && expected.count(c.id) ? " (expected failure)" : "") << std::endl;
  }
  std::set<int> expected_run;
  for (int id : expected)
    if (only.empty() || std::find(only.begin(), only.end(), id) != only.end()) expected_run.insert(id);
  const bool match = failed == expected_run;
  std::cout << "summary: " << failed.size() << " failing";
  for (int id : failed) std::cout << " " << id;
  std::cout << "; expected";
  for (int id : expected_run) std::cout << " " << id;
  std::cout << (match ? " (match)" : " (MISMATCH)") << std::endl;
  return match ? 0 : 1;
}
