#include "mixedweak/weights.hpp"

#include "mixedweak/maximal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace mw {

namespace {

void require_weight(const SampledField& w) {
  for (double v : w.values())
    if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("not a weight: nonpositive or non-finite cell");
}

std::vector<double> ladder() {
  std::vector<double> out;
  for (int i = 1; i <= 20; ++i) out.push_back(0.05 * i);
  return out;
}

}  // namespace

std::vector<ScannedCube> cube_family(const Mesh& mesh, const CubeFamilySpec& spec) {
  std::vector<ScannedCube> out;
  if (spec.dyadic) {
    for (const auto& gm : bind_grids(mesh)) {
      std::vector<Cube> stack(gm.roots().rbegin(), gm.roots().rend());
      while (!stack.empty()) {
        const Cube q = stack.back();
        stack.pop_back();
        out.push_back({gm.cells(q), cube_json(q, mesh.dim)});
        const auto kids = gm.children(q);
        for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back(*it);
      }
    }
  }
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> logside(0.0, std::log(static_cast<double>(mesh.cells)));
  for (int i = 0; i < spec.random_cubes; ++i) {
    const int side = std::clamp(static_cast<int>(std::lround(std::exp(logside(rng)))), 1, mesh.cells);
    std::uniform_int_distribution<int> pos(0, mesh.cells - side);
    CellRange r;
    r.dim = mesh.dim;
    for (int d = 0; d < mesh.dim; ++d) {
      r.lo[static_cast<std::size_t>(d)] = pos(rng);
      r.hi[static_cast<std::size_t>(d)] = r.lo[static_cast<std::size_t>(d)] + side;
    }
    out.push_back({r, "random"});
  }
  return out;
}

MuckenhouptReport ap_constant(const SampledField& w, double p, const CubeFamilySpec& spec) {
  if (!(p >= 1.0)) throw DomainError("ap_constant: p must be >= 1");
  require_weight(w);
  const Mesh& mesh = w.mesh();
  const PrefixSums sw(mesh, w.values());
  std::optional<PrefixSums> sdual;
  const double pp = p > 1.0 ? p / (p - 1.0) : 0.0;
  if (p > 1.0) {
    std::vector<double> dual(w.size());
    for (std::size_t i = 0; i < dual.size(); ++i) dual[i] = std::pow(w[i], 1.0 - pp);
    sdual.emplace(mesh, dual);
  }
  MuckenhouptReport rep;
  rep.p = p;
  const auto family = cube_family(mesh, spec);
  rep.cubes = family.size();
  for (const auto& q : family) {
    const double n = static_cast<double>(q.cells.count());
    const double avg = sw.sum(q.cells) / n;
    const double a1 = avg / range_min(w, q.cells);
    rep.a1 = std::max(rep.a1, a1);
    const double ap = p > 1.0 ? avg * std::pow(sdual->sum(q.cells) / n, p - 1.0) : a1;
    if (ap > rep.ap) {
      rep.ap = ap;
      rep.attaining = q.label;
    }
  }
  return rep;
}

RhReport rh_constant(const SampledField& w, double s, const CubeFamilySpec& spec) {
  if (!(s > 1.0)) throw DomainError("rh_constant: s must be > 1");
  require_weight(w);
  const Mesh& mesh = w.mesh();
  const PrefixSums sw(mesh, w.values());
  std::vector<double> ws(w.size());
  for (std::size_t i = 0; i < ws.size(); ++i) ws[i] = std::pow(w[i], s);
  const PrefixSums sws(mesh, ws);
  RhReport rep;
  rep.s = s;
  const auto family = cube_family(mesh, spec);
  rep.cubes = family.size();
  for (const auto& q : family) {
    const double n = static_cast<double>(q.cells.count());
    const double ratio = std::pow(sws.sum(q.cells) / n, 1.0 / s) / (sw.sum(q.cells) / n);
    if (ratio > rep.constant) {
      rep.constant = ratio;
      rep.attaining = q.label;
    }
  }
  return rep;
}

AinftyFit ainfty_fit(const SampledField& w, const CubeFamilySpec& spec, int subsets_per_cube) {
  require_weight(w);
  const Mesh& mesh = w.mesh();
  const auto eps = ladder();
  std::vector<double> C(eps.size(), 1.0);
  AinftyFit fit;
  auto add_pair = [&](double rm, double rw) {
    ++fit.pairs;
    if (rm <= 0.0) return;
    const double lrm = std::log(rm);
    for (std::size_t i = 0; i < eps.size(); ++i) C[i] = std::max(C[i], rw * std::exp(-eps[i] * lrm));
  };
  std::mt19937_64 rng(spec.seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<double> vals;
  std::vector<double> cum;
  for (const auto& q : cube_family(mesh, spec)) {
    vals.clear();
    q.cells.for_each(mesh, [&](std::size_t i) { vals.push_back(w[i]); });
    const std::size_t m = vals.size();
    std::vector<double> unsorted = vals;
    std::sort(vals.begin(), vals.end());
    cum.assign(m + 1, 0.0);
    for (std::size_t i = 0; i < m; ++i) cum[i + 1] = cum[i] + vals[i];
    const double total = cum[m];
    add_pair(1.0, 1.0);
    std::vector<std::size_t> sizes;
    for (std::size_t j = 1; j < m; j *= 2) sizes.push_back(j);
    for (int dec = 1; dec <= 9; ++dec) sizes.push_back(std::max<std::size_t>(1, m * static_cast<std::size_t>(dec) / 10));
    for (std::size_t j : sizes) {
      if (j == 0 || j >= m) continue;
      const double rm = static_cast<double>(j) / static_cast<double>(m);
      add_pair(rm, cum[j] / total);             // sublevel set
      add_pair(rm, (total - cum[m - j]) / total);  // superlevel set
    }
    for (int s = 0; s < subsets_per_cube && m > 1; ++s) {
      const double pi = 0.05 + 0.9 * U(rng);
      double mass = 0.0;
      std::size_t count = 0;
      for (double v : unsorted)
        if (U(rng) < pi) {
          mass += v;
          ++count;
        }
      if (count == 0) continue;
      add_pair(static_cast<double>(count) / static_cast<double>(m), mass / total);
    }
  }
  for (std::size_t i = 0; i < eps.size(); ++i) fit.ladder.emplace_back(eps[i], C[i]);
  std::size_t pick = 0;
  for (std::size_t i = 0; i < eps.size(); ++i)
    if (C[i] <= 2.0 * C[0]) pick = i;
  fit.epsilon = eps[pick];
  fit.C = C[pick];
  return fit;
}

SampledField power_weight(double alpha, const Mesh& mesh) {
  if (!(alpha > -mesh.dim)) throw DomainError("power_weight: |x|^alpha is not locally integrable for alpha <= -n");
  if (alpha == 0.0) return SampledField::constant(mesh, 1.0, FieldKind::Weight);
  if (mesh.dim == 1) {
    auto F = [alpha](double x) {
      const double m = std::pow(std::abs(x), alpha + 1.0) / (alpha + 1.0);
      return x < 0.0 ? -m : m;
    };
    std::vector<double> v(mesh.size());
    const double h = mesh.h();
    for (int i = 0; i < mesh.cells; ++i) {
      const double a = -mesh.half_width + i * h;
      v[static_cast<std::size_t>(i)] = (F(a + h) - F(a)) / h;
    }
    return SampledField::weight(mesh, std::move(v));
  }
  return SampledField::sample(
      mesh,
      [&](const Point& p) {
        double r2 = 0.0;
        for (int d = 0; d < mesh.dim; ++d) r2 += p[static_cast<std::size_t>(d)] * p[static_cast<std::size_t>(d)];
        return std::pow(r2, 0.5 * alpha);
      },
      FieldKind::Weight, 4);
}

SampledField coifman_rochberg_weight(const SampledField& f, double delta) {
  if (!(delta >= 0.0) || !(delta < 1.0)) throw DomainError("coifman_rochberg_weight: delta must lie in [0,1)");
  if (f.sup_abs() == 0.0) throw DomainError("coifman_rochberg_weight: f vanishes identically");
  if (delta == 0.0) return SampledField::constant(f.mesh(), 1.0, FieldKind::Weight);
  const auto mf = maximal_hl_field(f, MaximalMode::Uncentered);
  return mf.map([delta](double x) { return std::pow(x, delta); }, FieldKind::Weight);
}

RefinementScan refinement_scan(const std::function<double(int)>& estimate, int N0, int doublings) {
  RefinementScan out;
  int N = N0;
  for (int i = 0; i <= doublings; ++i) {
    out.resolutions.push_back(N);
    out.estimates.push_back(estimate(N));
    N *= 2;
  }
  out.verdict = refinement_verdict(out.estimates);
  return out;
}

}  // namespace mw
