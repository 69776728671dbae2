#include "mixedweak/maximal.hpp"
#include "mixedweak/weights.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace mw;

TEST_CASE("constant weight has unit constants") {
  const Mesh mesh(1, 1.0, 256);
  const auto one = SampledField::constant(mesh, 1.0, FieldKind::Weight);
  for (double p : {1.0, 2.0, 3.5}) CHECK(ap_constant(one, p).ap == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rh_constant(one, 2.0).constant == doctest::Approx(1.0).epsilon(1e-12));
  const auto fit = ainfty_fit(one);
  CHECK(fit.epsilon == doctest::Approx(1.0));
  CHECK(fit.C == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("A_1 of |x|^{-1/2}") {
  const Mesh mesh(1, 1.0, 1 << 14);
  const auto w = power_weight(-0.5, mesh);
  const auto rep = ap_constant(w, 1.0);
  // Over [-tb, b] the ratio is 2(1 + sqrt t)/(1 + t), maximal at
  // t = (sqrt 2 - 1)^2 with value 1 + sqrt 2. Intervals with an endpoint at
  // the origin give 1/(1 + alpha) = 2.
  CHECK(std::abs(rep.ap - (1.0 + std::sqrt(2.0))) <= 0.03 * (1.0 + std::sqrt(2.0)));
  CHECK(rep.a1 == rep.ap);
  CHECK(rep.cubes > 3u * (1u << 14));
  double one_sided = 0.0;
  for (int m = 1; m <= (1 << 13); m *= 2) {
    CellRange r;
    r.dim = 1;
    r.lo[0] = 1 << 13;
    r.hi[0] = (1 << 13) + m;
    double s = 0.0;
    r.for_each(mesh, [&](std::size_t i) { s += w[i]; });
    one_sided = std::max(one_sided, s / m / range_min(w, r));
  }
  CHECK(std::abs(one_sided - 2.0) <= 0.03 * 2.0);
}

TEST_CASE("A_1 of |x|^{1/2} is unbounded under refinement") {
  const auto scan = refinement_scan([](int N) { return ap_constant(power_weight(0.5, Mesh(1, 1.0, N)), 1.0).ap; }, 256);
  CHECK(scan.verdict == Stability::Unbounded);
}

TEST_CASE("reverse Hölder scans") {
  const auto stable =
      refinement_scan([](int N) { return rh_constant(power_weight(-0.5, Mesh(1, 1.0, N)), 1.5).constant; }, 1024);
  CHECK(stable.verdict == Stability::Stable);
  CHECK(std::isfinite(stable.estimates.back()));
  const auto diverge =
      refinement_scan([](int N) { return rh_constant(power_weight(-0.5, Mesh(1, 1.0, N)), 3.0).constant; }, 1024);
  CHECK(diverge.verdict == Stability::Unbounded);
}

TEST_CASE("A_infinity fit of |x|^{-1/2}") {
  const auto a = ainfty_fit(power_weight(-0.5, Mesh(1, 1.0, 1024)));
  const auto b = ainfty_fit(power_weight(-0.5, Mesh(1, 1.0, 2048)));
  CHECK(a.epsilon > 0.0);
  CHECK(a.epsilon <= 1.0);
  CHECK(std::isfinite(a.C));
  CHECK(b.epsilon == doctest::Approx(a.epsilon));
  CHECK(b.C <= 1.1 * a.C);
  MESSAGE("A_inf fit: eps=" << a.epsilon << " C=" << a.C);
}

TEST_CASE("A_infinity fit satisfies its display on sublevel pairs") {
  const Mesh mesh(1, 1.0, 128);
  const auto w = power_weight(-0.3, mesh);
  const auto fit = ainfty_fit(w, {true, 50, 3}, 4);
  for (const auto& q : cube_family(mesh, {true, 50, 3})) {
    std::vector<double> vals;
    q.cells.for_each(mesh, [&](std::size_t i) { vals.push_back(w[i]); });
    std::sort(vals.begin(), vals.end());
    double total = 0.0;
    for (double v : vals) total += v;
    double mass = 0.0;
    for (std::size_t j = 0; j < vals.size(); ++j) {
      mass += vals[j];
      const double rm = static_cast<double>(j + 1) / vals.size();
      const bool probed = ((j + 1) & j) == 0 || j + 1 == vals.size();
      if (probed) CHECK(mass / total <= fit.C * std::pow(rm, fit.epsilon) * (1 + 1e-12));
    }
  }
}

TEST_CASE("A_p family monotonicity and class inclusion") {
  const Mesh mesh(1, 2.0, 512);
  const auto w = power_weight(-0.4, mesh);
  const double small = ap_constant(w, 2.0, {true, 10, 5}).ap;
  const double large = ap_constant(w, 2.0, {true, 1000, 5}).ap;
  CHECK(large >= small);
  for (double alpha : {-0.6, -0.25, 0.0}) {
    const auto v = power_weight(alpha, mesh);
    const auto a1 = ap_constant(v, 1.0);
    for (double p : {1.5, 2.0, 4.0}) CHECK(ap_constant(v, p).ap <= a1.ap * (1 + 1e-12));
  }
}

TEST_CASE("v and v^r in A_1 at scan scale") {
  const auto fine = refinement_scan(
      [](int N) { return ap_constant(power_weight(-0.25, Mesh(1, 1.0, N)).pow(2.0), 1.0).ap; }, 512);
  CHECK(fine.verdict == Stability::Stable);
  const auto blow = refinement_scan(
      [](int N) { return ap_constant(power_weight(-0.25, Mesh(1, 1.0, N)).pow(6.0), 1.0).ap; }, 512);
  CHECK(blow.verdict == Stability::Unbounded);
}

TEST_CASE("power weight") {
  const Mesh mesh(1, 1.0, 64);
  const auto one = power_weight(0.0, mesh);
  for (double v : one.values()) CHECK(v == 1.0);
  const auto w = power_weight(-0.5, mesh);
  const double h = mesh.h();
  CHECK(w[32] == doctest::Approx(2.0 / std::sqrt(h)).epsilon(1e-13));
  CHECK_THROWS_AS(power_weight(-1.5, mesh), DomainError);
  CHECK_THROWS_AS(power_weight(-2.0, Mesh(2, 1.0, 8)), DomainError);
  const auto w2 = power_weight(-0.5, Mesh(2, 1.0, 8));
  for (double v : w2.values()) CHECK(v > 0.0);
}

TEST_CASE("Coifman-Rochberg weights") {
  const Mesh mesh(1, 4.0, 512);
  const auto chi = SampledField::sample(mesh, [](const Point& p) { return p[0] >= 0 && p[0] < 1 ? 1.0 : 0.0; },
                                        FieldKind::Function);
  const auto w0 = coifman_rochberg_weight(chi, 0.0);
  for (double v : w0.values()) CHECK(v == 1.0);
  const auto w = coifman_rochberg_weight(chi, 0.5);
  // direct computation: M chi(x) = min(1, 1/(dist-based interval length))
  const auto m = maximal_hl_field(chi, MaximalMode::Uncentered);
  for (std::size_t i = 0; i < mesh.size(); i += 9) CHECK(w[i] == doctest::Approx(std::sqrt(m[i])).epsilon(1e-14));
  double x = 3.0 - mesh.h() / 2;
  CHECK(m[mesh.locate(std::span<const double>(&x, 1))] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(std::isfinite(ap_constant(w, 1.0).ap));
  CHECK_THROWS_AS(coifman_rochberg_weight(chi, 1.0), DomainError);
  CHECK_THROWS_AS(coifman_rochberg_weight(SampledField::constant(mesh, 0.0, FieldKind::Function), 0.5), DomainError);
}

TEST_CASE("ap_constant rejects non-weights") {
  const Mesh mesh(1, 1.0, 4);
  const auto f = SampledField::function(mesh, {1, 0, 2, 3});
  CHECK_THROWS_AS(ap_constant(f, 1.0), DomainError);
}
