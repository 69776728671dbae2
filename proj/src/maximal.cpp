#include "mixedweak/maximal.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>

namespace mw {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Bisection in log(lambda) on the monotone predicate
//   sum_i w_i Phi(a_i / lambda) <= total.
// `a` holds the nonzero |f| values, `w` their masses (empty = unit masses).
template <class Phi>
LuxemburgResult lux_core(std::span<const double> a, std::span<const double> w, double total, Phi&& phi,
                         double inv_one, const std::function<double(double)>& inv) {
  LuxemburgResult res;
  if (a.empty() || !(total > 0.0)) return res;
  double M = 0.0;
  double w_at_max = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double wi = w.empty() ? 1.0 : w[i];
    if (a[i] > M || (a[i] == M && wi > w_at_max)) {
      M = a[i];
      w_at_max = wi;
    }
  }
  if (M == 0.0) return res;
  auto mass = [&](double lambda) {
    double s = 0.0;
    const double inv_l = 1.0 / lambda;
    if (w.empty()) {
      for (double x : a) s += phi(x * inv_l);
    } else {
      for (std::size_t i = 0; i < a.size(); ++i) s += w[i] * phi(a[i] * inv_l);
    }
    return s;
  };
  auto holds = [&](double lambda) { return mass(lambda) <= total; };

  double hi = M / inv_one * (1.0 + 1e-12);
  while (!holds(hi)) hi *= 2.0;
  double lo = M / inv(total / w_at_max);
  if (!(lo > 0.0) || lo >= hi) lo = hi * 0.5;
  while (holds(lo)) {
    hi = lo;
    lo *= 0.5;
    if (lo < 1e-300) break;
  }
  int it = 0;
  while (std::log(hi / lo) > kLuxemburgTol && it < 200) {
    const double mid = std::sqrt(lo * hi);
    if (mid <= lo || mid >= hi) break;
    if (holds(mid))
      hi = mid;
    else
      lo = mid;
    ++it;
  }
  res.value = hi;
  res.iterations = it;
  res.residual = std::abs(mass(hi) / total - 1.0);
  return res;
}

LuxemburgResult lux_young(std::span<const double> a, std::span<const double> w, double total,
                          const YoungFunction& phi) {
  const std::function<double(double)> inv = [&](double y) { return generalized_inverse(phi, y); };
  const double inv1 = generalized_inverse(phi, 1.0);
  switch (phi.family()) {
    case YoungFamily::Power:
      if (phi.r() == 1.0) return lux_core(a, w, total, [](double t) { return t; }, inv1, inv);
      if (phi.r() == 2.0) return lux_core(a, w, total, [](double t) { return t * t; }, inv1, inv);
      return lux_core(a, w, total, [p = phi.r()](double t) { return std::pow(t, p); }, inv1, inv);
    default:
      return lux_core(a, w, total, [&phi](double t) { return phi(t); }, inv1, inv);
  }
}

void gather(const SampledField& f, const CellRange& q, const SampledField* w, std::vector<double>& a,
            std::vector<double>& ws, double& total) {
  a.clear();
  ws.clear();
  total = 0.0;
  q.for_each(f.mesh(), [&](std::size_t i) {
    const double wi = w ? (*w)[i] : 1.0;
    total += wi;
    const double v = std::abs(f[i]);
    if (v != 0.0) {
      a.push_back(v);
      if (w) ws.push_back(wi);
    }
  });
}

void require_cells(const CellRange& q) {
  if (q.empty()) throw DomainError("cube contains no cell centers");
}

std::vector<double> abs_pow(std::span<const double> v, double p) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double a = std::abs(v[i]);
    out[i] = p == 1.0 ? a : (p == 2.0 ? a * a : std::pow(a, p));
  }
  return out;
}

// Max over windows [j, j+s) containing i of in[j], along one axis of an
// array with the given extents; the axis extent grows from M to N.
std::vector<double> sliding_max_axis(const std::vector<double>& in, std::array<int, kMaxDim> ext, int dim, int axis,
                                     int s, int N) {
  const int M = ext[static_cast<std::size_t>(axis)];
  std::array<int, kMaxDim> out_ext = ext;
  out_ext[static_cast<std::size_t>(axis)] = N;
  std::size_t stride = 1;
  for (int d = 0; d < axis; ++d) stride *= static_cast<std::size_t>(ext[static_cast<std::size_t>(d)]);
  std::size_t out_stride = stride;
  std::size_t lines = 1;
  for (int d = 0; d < dim; ++d)
    if (d != axis) lines *= static_cast<std::size_t>(ext[static_cast<std::size_t>(d)]);
  std::size_t out_total = 1;
  for (int d = 0; d < dim; ++d) out_total *= static_cast<std::size_t>(out_ext[static_cast<std::size_t>(d)]);
  std::vector<double> out(out_total, 0.0);
  std::deque<int> dq;
  for (std::size_t line = 0; line < lines; ++line) {
    // base offsets: split line into (below-axis, above-axis) coordinates
    const std::size_t below = line % stride;
    const std::size_t above = line / stride;
    const std::size_t in_base = below + above * stride * static_cast<std::size_t>(M);
    const std::size_t out_base = below + above * out_stride * static_cast<std::size_t>(N);
    dq.clear();
    int next = 0;
    for (int i = 0; i < N; ++i) {
      // windows j with i - s + 1 <= j <= i, j < M
      while (next <= i && next < M) {
        const double v = in[in_base + static_cast<std::size_t>(next) * stride];
        while (!dq.empty() && in[in_base + static_cast<std::size_t>(dq.back()) * stride] <= v) dq.pop_back();
        dq.push_back(next);
        ++next;
      }
      while (!dq.empty() && dq.front() < i - s + 1) dq.pop_front();
      out[out_base + static_cast<std::size_t>(i) * out_stride] =
          dq.empty() ? 0.0 : in[in_base + static_cast<std::size_t>(dq.front()) * stride];
    }
  }
  return out;
}

// sup over mesh-aligned cubes containing each cell of the mean of g.
std::vector<double> uncentered_mean_max(const Mesh& mesh, std::span<const double> g) {
  const PrefixSums ps(mesh, g);
  const int N = mesh.cells;
  const int dim = mesh.dim;
  std::vector<double> best(mesh.size(), 0.0);
  for (int s = 1; s <= N; ++s) {
    const int M = N - s + 1;
    std::array<int, kMaxDim> ext{1, 1, 1};
    std::size_t total = 1;
    for (int d = 0; d < dim; ++d) {
      ext[static_cast<std::size_t>(d)] = M;
      total *= static_cast<std::size_t>(M);
    }
    double vol = 1.0;
    for (int d = 0; d < dim; ++d) vol *= s;
    std::vector<double> avg(total);
    for (std::size_t j = 0; j < total; ++j) {
      CellRange r;
      r.dim = dim;
      std::size_t rest = j;
      for (int d = 0; d < dim; ++d) {
        const int c = static_cast<int>(rest % static_cast<std::size_t>(M));
        rest /= static_cast<std::size_t>(M);
        r.lo[static_cast<std::size_t>(d)] = c;
        r.hi[static_cast<std::size_t>(d)] = c + s;
      }
      avg[j] = ps.sum(r) / vol;
    }
    std::vector<double> cur = std::move(avg);
    for (int d = 0; d < dim; ++d) {
      cur = sliding_max_axis(cur, ext, dim, d, s, N);
      ext[static_cast<std::size_t>(d)] = N;
    }
    for (std::size_t i = 0; i < best.size(); ++i) best[i] = std::max(best[i], cur[i]);
  }
  return best;
}

std::vector<double> dyadic_field(const CubeAverager& avg, const GridMesh& gm) {
  const Mesh& mesh = gm.mesh();
  std::vector<double> out(mesh.size(), 0.0);
  struct Item {
    Cube q;
    double run;
  };
  std::vector<Item> stack;
  for (const Cube& r : gm.roots()) stack.push_back({r, 0.0});
  while (!stack.empty()) {
    const Item it = stack.back();
    stack.pop_back();
    const CellRange cells = gm.cells(it.q);
    const bool empty = avg.vanishes(cells);
    const double val = empty ? it.run : std::max(it.run, avg(cells));
    if (empty || it.q.level == gm.min_level()) {
      // no support below: every descendant average is zero
      cells.for_each(mesh, [&](std::size_t i) { out[i] = val; });
      continue;
    }
    for (const Cube& c : gm.children(it.q)) stack.push_back({c, val});
  }
  return out;
}

}  // namespace

CellRange snap(const Mesh& mesh, const GeneralCube& q) {
  if (q.dim != mesh.dim) throw DomainError("snap: dimension mismatch");
  if (!(q.side > 0.0)) throw DomainError("snap: side must be positive");
  const double L = mesh.half_width;
  const double h = mesh.h();
  const double slack = 1e-12 * L;
  CellRange r;
  r.dim = mesh.dim;
  for (int d = 0; d < mesh.dim; ++d) {
    const double a = q.lower[static_cast<std::size_t>(d)];
    const double b = a + q.side;
    if (a < -L - slack || b > L + slack) {
      std::ostringstream os;
      os << "cube [" << a << ", " << b << ") on axis " << d << " leaves the box [-" << L << ", " << L << "]";
      throw DomainError(os.str());
    }
    r.lo[static_cast<std::size_t>(d)] = static_cast<int>(std::clamp(std::ceil((a + L) / h - 0.5), 0.0, 1.0 * mesh.cells));
    r.hi[static_cast<std::size_t>(d)] = static_cast<int>(std::clamp(std::ceil((b + L) / h - 0.5), 0.0, 1.0 * mesh.cells));
  }
  return r;
}

LuxemburgResult luxemburg_profile(std::span<const double> values, std::span<const double> weights,
                                  const std::function<double(double)>& phi,
                                  const std::function<double(double)>& phi_inverse) {
  std::vector<double> a;
  std::vector<double> ws;
  double total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double wi = weights.empty() ? 1.0 : weights[i];
    total += wi;
    if (values[i] != 0.0) {
      a.push_back(std::abs(values[i]));
      if (!weights.empty()) ws.push_back(wi);
    }
  }
  return lux_core(a, ws, total, phi, phi_inverse(1.0), phi_inverse);
}

LuxemburgResult luxemburg_average(const SampledField& f, const CellRange& q, const YoungFunction& phi) {
  require_cells(q);
  std::vector<double> a;
  std::vector<double> ws;
  double total = 0.0;
  gather(f, q, nullptr, a, ws, total);
  return lux_young(a, ws, total, phi);
}

LuxemburgResult weighted_luxemburg_average(const SampledField& f, const CellRange& q, const YoungFunction& phi,
                                           const SampledField& w) {
  require_cells(q);
  if (!(f.mesh() == w.mesh())) throw InputError("function and weight live on different meshes");
  std::vector<double> a;
  std::vector<double> ws;
  double total = 0.0;
  gather(f, q, &w, a, ws, total);
  return lux_young(a, ws, total, phi);
}

double infimum_form(const SampledField& f, const CellRange& q, const YoungFunction& phi, const SampledField& w) {
  const double lux = weighted_luxemburg_average(f, q, phi, w).value;
  if (lux == 0.0) return 0.0;
  std::vector<double> a;
  std::vector<double> ws;
  double total = 0.0;
  gather(f, q, &w, a, ws, total);
  auto g = [&](double u) {
    const double tau = std::exp(u);
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += ws[i] * phi(a[i] / tau);
    return tau * (1.0 + s / total);
  };
  // tau (1 + avg Phi(|f|/tau)) is convex in tau, hence unimodal in log tau
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = std::log(lux) - 40.0;
  double hi = std::log(lux) + 5.0;
  double c = hi - gr * (hi - lo);
  double d = lo + gr * (hi - lo);
  double fc = g(c);
  double fd = g(d);
  double best = std::min(fc, fd);
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    if (fc <= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - gr * (hi - lo);
      fc = g(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + gr * (hi - lo);
      fd = g(d);
    }
    best = std::min({best, fc, fd});
  }
  return best;
}

double generalized_holder_ratio(const SampledField& f, const SampledField& g, const CellRange& q,
                                const SampledField& w, const YoungFunction& phi) {
  require_cells(q);
  double num = 0.0;
  double total = 0.0;
  std::vector<double> fv;
  std::vector<double> gv;
  std::vector<double> wv;
  q.for_each(f.mesh(), [&](std::size_t i) {
    num += std::abs(f[i] * g[i]) * w[i];
    total += w[i];
    fv.push_back(f[i]);
    gv.push_back(g[i]);
    wv.push_back(w[i]);
  });
  num /= total;
  if (num == 0.0) return 0.0;
  const double nf = weighted_luxemburg_average(f, q, phi, w).value;
  const std::function<double(double)> conj = [&](double t) { return conjugate(phi, t).as_double(); };
  const std::function<ExtendedReal(double)> conj_ext = [&](double t) { return conjugate(phi, t); };
  const std::function<double(double)> conj_inv = [&](double y) { return generalized_inverse(conj_ext, y); };
  const double ng = luxemburg_profile(gv, wv, conj, conj_inv).value;
  const double den = nf * ng;
  if (!(den > 0.0)) throw DomainError("generalized Hölder: zero denominator with nonzero numerator");
  return num / den;
}

CubeAverager::CubeAverager(const SampledField& f, const YoungFunction& phi)
    : f_(f), phi_(phi), power_(phi.is_power()) {
  const Mesh& mesh = f.mesh();
  std::vector<double> nonzero(mesh.size());
  for (std::size_t i = 0; i < nonzero.size(); ++i) nonzero[i] = f[i] != 0.0 ? 1.0 : 0.0;
  support_ = PrefixSums(mesh, nonzero);
  if (power_) moments_ = PrefixSums(mesh, abs_pow(f.values(), phi.r()));
}

bool CubeAverager::vanishes(const CellRange& q) const { return support_.sum(q) == 0.0; }

double CubeAverager::operator()(const CellRange& q) const {
  require_cells(q);
  if (vanishes(q)) return 0.0;
  if (power_) {
    const double p = phi_.r();
    const double mean = moments_.sum(q) / static_cast<double>(q.count());
    return p == 1.0 ? mean : std::pow(std::max(mean, 0.0), 1.0 / p);
  }
  double total = 0.0;
  gather(f_, q, nullptr, a_, ws_, total);
  return lux_young(a_, ws_, total, phi_).value;
}

std::string to_string(MaximalMode m) {
  switch (m) {
    case MaximalMode::Uncentered: return "uncentered";
    case MaximalMode::Dyadic: return "dyadic";
    case MaximalMode::Grids: return "grids";
  }
  return "?";
}

MaximalMode default_mode(const YoungFunction& phi) {
  return phi.is_power() ? MaximalMode::Uncentered : MaximalMode::Grids;
}

SampledField dyadic_orlicz_field(const SampledField& f, const YoungFunction& phi, const GridMesh& gm) {
  if (!(gm.mesh() == f.mesh())) throw InputError("grid bound to a different mesh");
  return SampledField::function(f.mesh(), dyadic_field(CubeAverager(f, phi), gm));
}

OrliczMaximalField maximal_orlicz_field(const SampledField& f, const YoungFunction& phi, MaximalMode mode,
                                        int grid_id) {
  const Mesh& mesh = f.mesh();
  OrliczMaximalField out;
  out.mode = mode;
  if (mode == MaximalMode::Dyadic) {
    const auto grids = build_grids(mesh.dim);
    if (grid_id < 1 || grid_id > static_cast<int>(grids.size())) throw InputError("grid id out of range");
    out.value = dyadic_orlicz_field(f, phi, GridMesh(mesh, grids[static_cast<std::size_t>(grid_id - 1)]));
    return out;
  }
  if (mode == MaximalMode::Uncentered && phi.is_power()) {
    const double p = phi.r();
    auto best = uncentered_mean_max(mesh, abs_pow(f.values(), p));
    if (p != 1.0)
      for (double& v : best) v = std::pow(v, 1.0 / p);
    out.value = SampledField::function(mesh, std::move(best));
    return out;
  }
  std::vector<double> sup(mesh.size(), 0.0);
  std::vector<double> sum(mesh.size(), 0.0);
  const auto gms = bind_grids(mesh);
  std::vector<SampledField> fields(gms.size());
  parallel_for(gms.size(), [&](std::size_t g) { fields[g] = dyadic_orlicz_field(f, phi, gms[g]); });
  for (const auto& field : fields) {
    for (std::size_t i = 0; i < sup.size(); ++i) {
      sup[i] = std::max(sup[i], field[i]);
      sum[i] += field[i];
    }
  }
  const double factor = std::pow(3.0, mesh.dim);
  for (double& v : sum) v *= factor;
  out.mode = MaximalMode::Grids;
  out.value = SampledField::function(mesh, sup);
  out.grids_sup = SampledField::function(mesh, std::move(sup));
  out.inflated_bound = SampledField::function(mesh, std::move(sum));
  return out;
}

SampledField maximal_hl_field(const SampledField& f, MaximalMode mode, int grid_id) {
  return maximal_orlicz_field(f, YoungFunction::power(1.0), mode, grid_id).value;
}

double maximal_orlicz(const SampledField& f, std::span<const double> x, const YoungFunction& phi, MaximalMode mode,
                      int grid_id) {
  const Mesh& mesh = f.mesh();
  const std::size_t cell = mesh.locate(x);
  if (mode == MaximalMode::Dyadic) {
    const auto grids = build_grids(mesh.dim);
    if (grid_id < 1 || grid_id > static_cast<int>(grids.size())) throw InputError("grid id out of range");
    const GridMesh gm(mesh, grids[static_cast<std::size_t>(grid_id - 1)]);
    double best = 0.0;
    for (const Cube& q : gm.chain(cell)) best = std::max(best, luxemburg_average(f, gm.cells(q), phi).value);
    return best;
  }
  return maximal_orlicz_field(f, phi, mode, grid_id).value[cell];
}

double maximal_hl(const SampledField& f, std::span<const double> x, MaximalMode mode, int grid_id) {
  return maximal_orlicz(f, x, YoungFunction::power(1.0), mode, grid_id);
}

SampledField sawyer_field(const SampledField& f, const SampledField& v, const YoungFunction& phi, MaximalMode mode) {
  const auto fv = f.times(v, FieldKind::Function);
  return maximal_orlicz_field(fv, phi, mode).value.divided_by(v, FieldKind::Function);
}

double sawyer_operator(const SampledField& f, const SampledField& v, const YoungFunction& phi,
                       std::span<const double> x, MaximalMode mode) {
  const auto fv = f.times(v, FieldKind::Function);
  const std::size_t cell = f.mesh().locate(x);
  return maximal_orlicz(fv, x, phi, mode) / v[cell];
}

}  // namespace mw
