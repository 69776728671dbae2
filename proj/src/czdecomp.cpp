#include "mixedweak/czdecomp.hpp"

#include "mixedweak/weights.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

namespace mw {

namespace {

constexpr int kMaxLayers = 400;

bool level_order(const Cube& a, const Cube& b) {
  if (a.level != b.level) return a.level > b.level;
  return a.corner < b.corner;
}

using CubeKey = std::pair<int, Corner>;
CubeKey key_of(const Cube& q) { return {q.level, q.corner}; }

void sort_forest(DecompositionForest& f) {
  std::sort(f.cubes.begin(), f.cubes.end(),
            [](const ForestCube& a, const ForestCube& b) { return level_order(a.cube, b.cube); });
}

const DyadicGrid& grid_of(const std::vector<DyadicGrid>& grids, int id) {
  if (id < 1 || id > static_cast<int>(grids.size())) throw InputError("grid id out of range");
  return grids[static_cast<std::size_t>(id - 1)];
}

// Strict containment of nested dyadic cubes, read off their cell sets.
bool strictly_inside(const CellRange& inner, const CellRange& outer) {
  return outer.contains(inner) && outer.count() > inner.count();
}

double raw_average(const SampledField& u, const CellRange& q) {
  long double s = 0.0L;
  q.for_each(u.mesh(), [&](std::size_t i) { s += u[i]; });
  return static_cast<double>(s / static_cast<long double>(q.count()));
}

void require_base(double a, int dim) {
  if (!(a > std::ldexp(1.0, dim))) throw DomainError("the base a must exceed 2^n");
}

}  // namespace

CzContext::CzContext(const SampledField& g, const YoungFunction& phi, const GridMesh& gm,
                     std::optional<SampledField> v, std::optional<SampledField> u, double r)
    : gm_(gm), g_avg_(g, phi), v_(std::move(v)), u_(std::move(u)), r_(r) {
  const Mesh& mesh = gm_.mesh();
  if (!(g.mesh() == mesh)) throw InputError("g lives on a different mesh than the grid");
  mg_ = dyadic_orlicz_field(g, phi, gm_);
  if (v_) {
    if (!(v_->mesh() == mesh)) throw InputError("v lives on a different mesh");
    const auto identity = YoungFunction::power(1.0);
    v_avg_.emplace(*v_, identity);
    vr_sums_.emplace(mesh, v_->pow(r_).values());
    mv_ = dyadic_orlicz_field(*v_, identity, gm_);
  }
  if (u_) {
    if (!(u_->mesh() == mesh)) throw InputError("u lives on a different mesh");
    u_sums_.emplace(mesh, u_->values());
  }
}

double CzContext::avg_v(const CellRange& q) const {
  if (!v_avg_) throw InputError("the decomposition needs v");
  return (*v_avg_)(q);
}

const SampledField& CzContext::maximal_v() const {
  if (!mv_) throw InputError("the decomposition needs v");
  return *mv_;
}

CubePayload CzContext::payload(const CellRange& q) const {
  CubePayload p;
  const double n = static_cast<double>(q.count());
  const double cv = mesh().cell_volume();
  p.volume = n * cv;
  p.luxemburg = luxemburg(q);
  if (v_) {
    p.avg_v = (*v_avg_)(q);
    const double s = vr_sums_->sum(q);
    p.avg_vr = s / n;
    p.vr_mass = s * cv;
  }
  if (u_) {
    const double s = u_sums_->sum(q);
    p.avg_u = s / n;
    p.u_mass = s * cv;
  }
  return p;
}

DecompositionForest level_set_decomposition(const CzContext& ctx, double lambda) {
  if (!(lambda > 0.0)) throw DomainError("level_set_decomposition: lambda must be positive");
  const GridMesh& gm = ctx.grid_mesh();
  DecompositionForest out;
  out.grid_id = gm.grid().id;
  out.lambda = lambda;
  std::vector<Cube> stack(gm.roots().rbegin(), gm.roots().rend());
  while (!stack.empty()) {
    const Cube q = stack.back();
    stack.pop_back();
    const CellRange cells = gm.cells(q);
    ++out.visited;
    if (ctx.luxemburg(cells) > lambda) {
      out.cubes.push_back({q, cells, ctx.payload(cells), std::nullopt, false});
      continue;
    }
    if (q.level == gm.min_level() || range_max(ctx.maximal_g(), cells) <= lambda) continue;
    const auto kids = gm.children(q);
    for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back(*it);
  }
  sort_forest(out);
  return out;
}

DecompositionForest level_set_decomposition(const SampledField& g, const YoungFunction& phi, const GridMesh& gm,
                                            double lambda) {
  if (!(lambda > 0.0)) throw DomainError("level_set_decomposition: lambda must be positive");
  return level_set_decomposition(CzContext(g, phi, gm), lambda);
}

DecompositionForest omega_layer(const CzContext& ctx, double a, int k) {
  require_base(a, ctx.mesh().dim);
  const GridMesh& gm = ctx.grid_mesh();
  const SampledField& mv = ctx.maximal_v();
  const SampledField& mg = ctx.maximal_g();
  const double lambda = std::pow(a, k);
  DecompositionForest out;
  out.grid_id = gm.grid().id;
  out.lambda = lambda;
  out.k = k;
  out.a = a;
  struct Item {
    Cube q;
    bool v_hit;
    bool g_hit;
  };
  std::vector<Item> stack;
  for (auto it = gm.roots().rbegin(); it != gm.roots().rend(); ++it) stack.push_back({*it, false, false});
  while (!stack.empty()) {
    const Item it = stack.back();
    stack.pop_back();
    const CellRange cells = gm.cells(it.q);
    ++out.visited;
    const bool v_hit = it.v_hit || ctx.avg_v(cells) > lambda;
    const bool g_hit = it.g_hit || ctx.luxemburg(cells) > lambda;
    if (v_hit && g_hit) {
      out.cubes.push_back({it.q, cells, ctx.payload(cells), std::nullopt, false});
      continue;
    }
    if (it.q.level == gm.min_level()) continue;
    bool meets = false;
    cells.for_each(ctx.mesh(), [&](std::size_t i) { meets = meets || (mv[i] > lambda && mg[i] > lambda); });
    if (!meets) continue;
    const auto kids = gm.children(it.q);
    for (auto c = kids.rbegin(); c != kids.rend(); ++c) stack.push_back({*c, v_hit, g_hit});
  }
  sort_forest(out);
  return out;
}

std::vector<bool> gamma_filter(const DecompositionForest& forest, const SampledField& v, double a, int k) {
  const double bound = std::pow(a, k + 1);
  std::vector<bool> out;
  out.reserve(forest.cubes.size());
  for (const auto& c : forest.cubes) out.push_back(range_min(v, c.cells) <= bound);
  return out;
}

std::vector<DecompositionForest> omega_layers(const CzContext& ctx, double a, int N) {
  if (!ctx.v()) throw InputError("omega_layers needs v");
  const DyadicGrid& grid = ctx.grid_mesh().grid();
  std::vector<DecompositionForest> out;
  for (int k = N; k < N + kMaxLayers; ++k) {
    auto layer = omega_layer(ctx, a, k);
    if (layer.cubes.empty()) break;
    const auto flags = gamma_filter(layer, *ctx.v(), a, k);
    for (std::size_t j = 0; j < flags.size(); ++j) layer.cubes[j].in_gamma = flags[j];
    if (!out.empty()) {
      const auto& prev = out.back();
      std::map<CubeKey, std::size_t> index;
      int top = ctx.grid_mesh().max_level();
      for (std::size_t j = 0; j < prev.cubes.size(); ++j) index[key_of(prev.cubes[j].cube)] = j;
      for (auto& c : layer.cubes) {
        Cube q = c.cube;
        while (q.level <= top) {
          if (auto f = index.find(key_of(q)); f != index.end()) {
            c.parent = f->second;
            break;
          }
          q = parent(grid, q);
        }
        if (!c.parent) throw std::logic_error("omega_layers: a cube of Omega_k is not inside Omega_{k-1}");
      }
    }
    out.push_back(std::move(layer));
  }
  return out;
}

std::vector<DecompositionForest> tilde_layers(const CzContext& ctx, double a, int N, int count) {
  std::vector<DecompositionForest> out;
  const int last = count > 0 ? N + count : N + kMaxLayers;
  for (int k = N; k < last; ++k) {
    auto layer = level_set_decomposition(ctx, std::pow(a, k));
    layer.k = k;
    layer.a = a;
    if (count <= 0 && layer.cubes.empty()) break;
    out.push_back(std::move(layer));
  }
  return out;
}

int default_truncation(const SampledField& v, double a) {
  if (!(a > 1.0)) throw DomainError("default_truncation: a must exceed 1");
  double vmin = std::numeric_limits<double>::infinity();
  for (double x : v.values()) vmin = std::min(vmin, x);
  if (!(vmin > 0.0)) throw DomainError("default_truncation: v must be positive");
  int k = static_cast<int>(std::ceil(std::log(vmin / 2.0) / std::log(a)));
  while (std::pow(a, k - 1) >= vmin / 2.0) --k;
  while (std::pow(a, k) < vmin / 2.0) ++k;
  return std::clamp(k, -40, 40);
}

PrincipalForest principal_cubes(const std::vector<DecompositionForest>& layers, const SampledField& u, double a,
                                double beta, double eta) {
  if (!(eta > 0.0) || !(beta > 0.0) || !(beta < eta)) throw DomainError("principal_cubes: beta must lie in (0, eta)");
  if (!(a > 1.0)) throw DomainError("principal_cubes: a must exceed 1");
  const Mesh& mesh = u.mesh();
  PrincipalForest out;
  out.a = a;
  out.beta = beta;
  out.eta = eta;
  if (layers.empty()) return out;
  if (!layers.front().k) throw InputError("principal_cubes: layers must carry their index k");
  out.N = *layers.front().k;
  out.grid_id = layers.front().grid_id;
  const auto grids = build_grids(mesh.dim);
  const DyadicGrid& grid = grid_of(grids, out.grid_id);
  const PrefixSums us(mesh, u.values());

  for (const auto& layer : layers) {
    const int k = *layer.k;
    for (std::size_t j = 0; j < layer.cubes.size(); ++j) {
      const auto& c = layer.cubes[j];
      if (!c.in_gamma) continue;
      ++out.gamma_total;
      PrincipalNode node;
      node.k = k;
      node.j = j;
      node.cube = c.cube;
      node.cells = c.cells;
      node.avg_u = us.sum(c.cells) / static_cast<double>(c.cells.count());
      node.mu = std::pow(a, -beta * k) * node.avg_u;
      out.nodes.push_back(node);
    }
  }
  auto& nodes = out.nodes;

  // Distinct cubes of Delta_N and their nesting tree.
  std::map<CubeKey, std::size_t> index;
  std::vector<Cube> cubes;
  std::vector<std::vector<std::size_t>> members;
  std::vector<std::size_t> cube_of_node(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    auto [it, fresh] = index.try_emplace(key_of(nodes[i].cube), cubes.size());
    if (fresh) {
      cubes.push_back(nodes[i].cube);
      members.emplace_back();
    }
    members[it->second].push_back(i);
    cube_of_node[i] = it->second;
  }
  int top = std::numeric_limits<int>::min();
  for (const auto& c : cubes) top = std::max(top, c.level);
  std::vector<std::optional<std::size_t>> up(cubes.size());
  std::vector<std::vector<std::size_t>> down(cubes.size());
  for (std::size_t c = 0; c < cubes.size(); ++c) {
    Cube q = cubes[c];
    while (q.level < top) {
      q = parent(grid, q);
      if (auto f = index.find(key_of(q)); f != index.end()) {
        up[c] = f->second;
        down[f->second].push_back(c);
        break;
      }
    }
  }
  auto by_level = [&](std::size_t x, std::size_t y) { return level_order(cubes[x], cubes[y]); };
  auto node_order = [&](std::size_t x, std::size_t y) {
    if (cube_of_node[x] != cube_of_node[y]) return level_order(nodes[x].cube, nodes[y].cube);
    return nodes[x].k < nodes[y].k;
  };

  std::vector<std::size_t> current;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (!up[cube_of_node[i]]) {
      nodes[i].generation = 0;
      current.push_back(i);
    }
  std::sort(current.begin(), current.end(), node_order);
  int gen = 0;
  while (!current.empty()) {
    out.generations.push_back(current);
    std::vector<std::size_t> next;
    for (std::size_t s : current) {
      const int t = nodes[s].k;
      const double avg_s = nodes[s].avg_u;
      auto reverse_holds = [&](std::size_t l) {
        return nodes[l].avg_u <= std::pow(a, (nodes[l].k - t) * beta) * avg_s;
      };
      // pairs sharing the cube of (t,s) sit between it and every descendant
      bool blocked = false;
      for (std::size_t l : members[cube_of_node[s]]) blocked = blocked || !reverse_holds(l);
      if (blocked) continue;
      std::set<std::size_t, decltype(by_level)> frontier(by_level);
      for (std::size_t c : down[cube_of_node[s]]) frontier.insert(c);
      while (!frontier.empty()) {
        const std::size_t c = *frontier.begin();
        frontier.erase(frontier.begin());
        bool violated = false;
        for (std::size_t d : members[c]) {
          if (reverse_holds(d)) continue;
          violated = true;
          if (nodes[d].generation < 0) {
            nodes[d].generation = gen + 1;
            nodes[d].witness = s;
            next.push_back(d);
          }
        }
        if (!violated)
          for (std::size_t child : down[c]) frontier.insert(child);
      }
    }
    std::sort(next.begin(), next.end(), node_order);
    current = std::move(next);
    ++gen;
  }
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].generation >= 0) out.principal.push_back(i);
  return out;
}

PrincipalAudit audit_principal(const PrincipalForest& forest, const SampledField& u) {
  PrincipalAudit audit;
  const auto& nodes = forest.nodes;
  constexpr double tol = 1e-12;
  auto fail = [&](const std::string& msg) {
    audit.ok = false;
    audit.failures.push_back(msg);
  };
  auto name = [&](std::size_t i) {
    std::ostringstream os;
    os << "(k=" << nodes[i].k << ", j=" << nodes[i].j << ")";
    return os.str();
  };
  std::vector<double> raw(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    raw[i] = raw_average(u, nodes[i].cells);
    ++audit.checks;
    if (std::abs(raw[i] - nodes[i].avg_u) > tol * std::abs(raw[i])) fail("stored average differs from cells " + name(i));
  }
  std::vector<int> gen_of(nodes.size(), -1);
  for (std::size_t g = 0; g < forest.generations.size(); ++g)
    for (std::size_t i : forest.generations[g]) {
      if (gen_of[i] >= 0) fail("pair in two generations " + name(i));
      gen_of[i] = static_cast<int>(g);
    }
  auto bound = [&](std::size_t l, std::size_t s) {
    return std::pow(forest.a, (nodes[l].k - nodes[s].k) * forest.beta) * raw[s];
  };
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    bool maximal = true;
    for (std::size_t j = 0; j < nodes.size(); ++j)
      if (strictly_inside(nodes[i].cells, nodes[j].cells)) maximal = false;
    ++audit.checks;
    if (maximal != (gen_of[i] == 0)) fail("G_0 membership disagrees with maximality " + name(i));
  }
  for (std::size_t g = 1; g < forest.generations.size(); ++g)
    for (std::size_t d : forest.generations[g]) {
      if (!nodes[d].witness) {
        fail("missing witness " + name(d));
        continue;
      }
      const std::size_t s = *nodes[d].witness;
      ++audit.checks;
      if (gen_of[s] != static_cast<int>(g) - 1) fail("witness not in the previous generation " + name(d));
      if (!strictly_inside(nodes[d].cells, nodes[s].cells)) fail("witness does not strictly contain " + name(d));
      if (!(raw[d] > bound(d, s) * (1.0 - tol))) fail("selecting inequality fails " + name(d));
      for (std::size_t l = 0; l < nodes.size(); ++l) {
        if (!strictly_inside(nodes[d].cells, nodes[l].cells) || !nodes[s].cells.contains(nodes[l].cells)) continue;
        ++audit.checks;
        if (!(raw[l] <= bound(l, s) * (1.0 + tol))) fail("intermediate " + name(l) + " violates the reverse inequality");
      }
    }
  // Completeness: every first violator below a generation member is selected.
  for (std::size_t g = 0; g < forest.generations.size(); ++g)
    for (std::size_t s : forest.generations[g]) {
      std::vector<std::size_t> below;
      for (std::size_t l = 0; l < nodes.size(); ++l)
        if (nodes[s].cells.contains(nodes[l].cells)) below.push_back(l);
      for (std::size_t d : below) {
        if (!strictly_inside(nodes[d].cells, nodes[s].cells)) continue;
        if (!(raw[d] > bound(d, s) * (1.0 + tol))) continue;
        bool clear = true;
        for (std::size_t l : below)
          if (strictly_inside(nodes[d].cells, nodes[l].cells) && raw[l] > bound(l, s) * (1.0 - tol)) clear = false;
        if (!clear) continue;
        ++audit.checks;
        if (gen_of[d] < 0) fail("first violator not selected " + name(d));
      }
    }
  std::size_t principal = 0;
  for (int g : gen_of) principal += g >= 0 ? 1 : 0;
  ++audit.checks;
  if (principal != forest.principal.size()) fail("P differs from the union of generations");
  return audit;
}

ClaimReport claim1_check(const PrincipalForest& principal, const SampledField& vr, const SampledField& u) {
  if (!principal.nodes.empty() && principal.principal.empty())
    throw DomainError("claim1_check: no principal cube although Gamma_N is nonempty");
  ClaimReport rep;
  rep.claim = 1;
  const PrefixSums vs(vr.mesh(), vr.values());
  const PrefixSums us(u.mesh(), u.values());
  const double cv = u.mesh().cell_volume();
  std::vector<double> term(principal.nodes.size());
  for (std::size_t i = 0; i < term.size(); ++i) {
    const auto& c = principal.nodes[i].cells;
    const double vol = static_cast<double>(c.count()) * cv;
    term[i] = vs.sum(c) * cv * us.sum(c) * cv / vol;
    rep.lhs += term[i];
  }
  for (std::size_t i : principal.principal) rep.rhs += term[i];
  rep.constant = rep.rhs > 0.0 ? rep.lhs / rep.rhs : 0.0;
  rep.finite = std::isfinite(rep.constant);
  rep.witnesses = {{"gamma_n", static_cast<double>(principal.nodes.size())},
                   {"principal", static_cast<double>(principal.principal.size())},
                   {"generations", static_cast<double>(principal.generations.size())}};
  if (principal.nodes.empty()) rep.notes.push_back("Gamma_N is empty; both sums vanish");
  return rep;
}

Claim2Constants claim2_constants(const SampledField& v, double r, const YoungFunction& phi) {
  const FrReport fr = check_Fr(phi, r);
  if (!fr.member) throw DomainError("claim2_constants: Phi is not in F_r: " + fr.failure);
  Claim2Constants c;
  c.r = r;
  c.t0 = fr.growth.t0;
  c.c0 = fr.growth.c0;
  c.delta = fr.growth.delta;
  c.lower_type = fr.lower_type.constant;
  c.submult = fr.submult.constant;
  const auto vr = v.pow(r);
  c.v_a1 = ap_constant(v, 1.0).ap;
  c.vr_a1 = ap_constant(vr, 1.0).ap;
  std::vector<SampledField> ladder_fields{vr};
  while (ladder_fields.size() < 3 && ladder_fields.back().mesh().cells >= 8)
    ladder_fields.push_back(ladder_fields.back().coarsened());
  std::reverse(ladder_fields.begin(), ladder_fields.end());
  c.s = 0.0;
  for (int i = 11; i <= 40; ++i) {
    const double s = 0.1 * i;
    std::vector<double> est;
    for (const auto& w : ladder_fields) est.push_back(rh_constant(w, s).constant);
    if (refinement_verdict(est) != Stability::Stable) break;
    c.s = s;
    c.rh = est.back();
  }
  if (c.s == 0.0) throw DomainError("claim2_constants: no reverse Hölder exponent of v^r is refinement-stable");
  return c;
}

Claim2Report claim2_check(const DecompositionForest& tilde, const DecompositionForest& omega, const SampledField& f,
                          const SampledField& v, const YoungFunction& phi, double t, double a, int k,
                          const Claim2Constants& K) {
  const Mesh& mesh = f.mesh();
  if (!(v.mesh() == mesh)) throw InputError("claim2_check: f and v live on different meshes");
  if (!(t > 0.0)) throw DomainError("claim2_check: t must be positive");
  Claim2Report rep;
  rep.summary.claim = 2;
  rep.k = k;
  rep.t = t;
  rep.constants = K;
  const double r = K.r;
  const double lambda = std::pow(a, k);
  const double lhs = std::pow(a, k * r);
  rep.s_prime = K.s / (K.s - 1.0);
  rep.delta0 = std::max(K.delta, 1.0);
  const double sp = rep.s_prime;
  rep.X = sp * std::pow(K.v_a1, 1.0 / sp) * std::pow(a, 1.0 / sp) * K.rh * rep.delta0;
  rep.eps0 = rep.X > 2.0 ? 1.0 / (rep.X - 1.0) : 1.0;
  rep.gamma = 1.0 + rep.eps0;
  rep.gamma_prime = 1.0 + 1.0 / rep.eps0;
  const double gp = rep.gamma_prime;
  rep.chain_bound = std::pow(rep.X * gp, 1.0 / gp);
  rep.lemma_bound = std::exp(2.0 / std::numbers::e);
  rep.log_bound = std::pow(std::pow(K.delta * sp * gp / std::numbers::e, K.delta * gp) *
                               std::pow(K.v_a1 * a, 1.0 / sp) * K.rh,
                           1.0 / gp);
  const double subsq = K.submult * K.submult;
  const double c_one = subsq * K.lower_type * phi(2.0 * K.t0) * phi(1.0) / std::pow(K.t0, r);
  const double c_two = K.c0 * phi(2.0) * subsq;
  const double large = 1.0 + std::pow(a, r) * std::pow(K.v_a1, r) * K.vr_a1;
  rep.tau = 1.0 / (2.0 * c_two * rep.lemma_bound * large);

  const std::function<double(double)> phi_fn = [&](double x) { return phi(x); };
  const std::function<double(double)> phi_inv = [&](double y) { return generalized_inverse(phi, y); };
  std::vector<char> in_omega(mesh.size(), 0);
  for (const auto& c : omega.cubes) c.cells.for_each(mesh, [&](std::size_t i) { in_omega[i] = 1; });

  double best = 0.0;
  for (const auto& tc : tilde.cubes) {
    Claim2Cube cr;
    cr.cube = tc.cube;
    cr.lhs = lhs;
    const double n = static_cast<double>(tc.cells.count());
    std::vector<double> all;
    std::vector<double> part_a;
    std::vector<double> part_b;
    double rhs = 0.0;
    double vr_sum = 0.0;
    double mass_a = 0.0;
    double mass_b = 0.0;
    tc.cells.for_each(mesh, [&](std::size_t i) {
      const double y = std::abs(f[i]) * v[i] / t / lambda;
      const bool in_a = v[i] <= K.t0 * lambda;
      all.push_back(y);
      part_a.push_back(in_a ? y : 0.0);
      part_b.push_back(in_a ? 0.0 : y);
      const double vr = std::pow(v[i], r);
      rhs += phi(std::abs(f[i]) / t) * vr;
      vr_sum += vr;
      (in_a ? mass_a : mass_b) += phi(2.0 * y);
      if (!in_a && !in_omega[i]) cr.b_covered = false;
    });
    if (!(vr_sum > 0.0)) throw DomainError("claim2_check: cube with zero v^r mass");
    cr.rhs = rhs / n;
    cr.ratio = cr.rhs > 0.0 ? lhs / cr.rhs : std::numeric_limits<double>::infinity();
    cr.norm = luxemburg_profile(all, {}, phi_fn, phi_inv).value;
    cr.I = luxemburg_profile(part_a, {}, phi_fn, phi_inv).value;
    cr.II = luxemburg_profile(part_b, {}, phi_fn, phi_inv).value;
    cr.branch = cr.I > 0.5 ? 1 : 2;
    cr.branch_ok = cr.I > 0.5 || cr.II > 0.5;
    cr.branch_mass = (cr.branch == 1 ? mass_a : mass_b) / n;
    cr.branch_one_bound = c_one * cr.rhs;
    cr.branch_one_holds = lhs < cr.branch_one_bound;
    cr.large_cube_avg = vr_sum / n;
    cr.large_cube_bound = large * lhs;
    cr.large_cube_holds = cr.large_cube_avg <= cr.large_cube_bound;

    double holder = 0.0;
    for (const auto& oc : omega.cubes) {
      if (!tc.cells.contains(oc.cells)) continue;
      ++cr.omega_cubes;
      cr.omega_in_gamma = cr.omega_in_gamma && oc.in_gamma;
      double mass = 0.0;
      double wk = 0.0;
      double phig = 0.0;
      oc.cells.for_each(mesh, [&](std::size_t i) {
        const double vr = std::pow(v[i], r);
        mass += vr;
        phig += std::pow(phi(std::abs(f[i]) / t), rep.gamma) * vr;
        if (v[i] > K.t0 * lambda) wk += std::pow(std::log(v[i] / lambda), K.delta * gp) * vr;
      });
      if (!(mass > 0.0)) throw DomainError("claim2_check: Omega cube with zero v^r mass");
      const double term = std::pow(wk / mass, 1.0 / gp);
      cr.wk_max = std::max(cr.wk_max, term);
      holder += mass * std::pow(phig / mass, 1.0 / rep.gamma) * term;
    }
    cr.holder_rhs = c_two * holder / n;
    cr.holder_holds = lhs < cr.holder_rhs;
    rep.wk_max = std::max(rep.wk_max, cr.wk_max);
    if (cr.ratio >= best) {
      best = cr.ratio;
      rep.summary.lhs = lhs;
      rep.summary.rhs = cr.rhs;
    }
    rep.cubes.push_back(cr);
  }
  rep.summary.constant = best;
  rep.summary.finite = std::isfinite(best);
  rep.wk_within = rep.wk_max <= rep.lemma_bound + 1e-6;
  rep.summary.witnesses = {{"s", K.s},
                           {"eps0", rep.eps0},
                           {"delta0", rep.delta0},
                           {"gamma", rep.gamma},
                           {"tau", rep.tau},
                           {"wk_max", rep.wk_max},
                           {"chain_bound", rep.chain_bound},
                           {"log_bound", rep.log_bound}};
  if (tilde.cubes.empty()) rep.summary.notes.push_back("level set empty; vacuous");
  return rep;
}

Claim3Report claim3_check(const PrincipalForest& principal, const std::vector<DecompositionForest>& tilde,
                          const SampledField& u, const Point& x, double u_a1, double nu) {
  const Mesh& mesh = u.mesh();
  Claim3Report rep;
  rep.summary.claim = 3;
  rep.x = x;
  const std::size_t cell = mesh.locate(std::span<const double>(x.data(), static_cast<std::size_t>(mesh.dim)));
  const auto idx = mesh.unflatten(cell);
  rep.u_x = u[cell];
  if (!(rep.u_x > 0.0) || !std::isfinite(rep.u_x)) throw DomainError("claim3_check: u(x) must be positive and finite");

  struct Layer {
    int k;
    CellRange box;
    double avg;
    std::vector<double> fractions;  // u(Q_j^k) / u(Q~^k) for P_k
    std::vector<double> averages;   // avg of u over Q_j^k
  };
  std::map<int, Layer> layers;
  for (const auto& layer : tilde) {
    if (!layer.k) throw InputError("claim3_check: tilde layers must carry k");
    for (const auto& c : layer.cubes)
      if (c.cells.contains(idx)) layers[*layer.k] = {*layer.k, c.cells, raw_average(u, c.cells), {}, {}};
  }
  for (std::size_t p : principal.principal) {
    const auto& node = principal.nodes[p];
    auto it = layers.find(node.k);
    if (it == layers.end() || !it->second.box.contains(node.cells)) continue;
    const double avg = raw_average(u, node.cells);
    const double frac = avg * static_cast<double>(node.cells.count()) /
                        (it->second.avg * static_cast<double>(it->second.box.count()));
    it->second.fractions.push_back(frac);
    it->second.averages.push_back(avg);
  }
  for (const auto& [k, l] : layers)
    if (!l.fractions.empty()) rep.G.push_back(k);
  if (rep.G.empty()) {
    rep.summary.notes.push_back("no principal cube below a tilde cube containing x");
    return rep;
  }
  rep.k_m.push_back(rep.G.front());
  for (int k : rep.G)
    if (k > rep.k_m.back() && layers[k].avg > 2.0 * layers[rep.k_m.back()].avg) rep.k_m.push_back(k);
  rep.finite_sequence = rep.k_m.size() <= rep.G.size();
  double worst_ratio = 0.0;
  for (std::size_t m = 0; m < rep.k_m.size(); ++m) {
    const int km = rep.k_m[m];
    const int next = m + 1 < rep.k_m.size() ? rep.k_m[m + 1] : std::numeric_limits<int>::max();
    std::vector<int> F;
    double S = 0.0;
    double geom = 0.0;
    for (int l : rep.G) {
      if (l < km || l >= next) continue;
      F.push_back(l);
      const Layer& L = layers[l];
      for (std::size_t j = 0; j < L.fractions.size(); ++j) {
        S += L.fractions[j];
        ++rep.ec1_checked;
        const double need = std::pow(principal.a, (l - km) * principal.beta) / (2.0 * u_a1) * L.avg;
        if (!(L.averages[j] > need)) ++rep.ec1_failed;
      }
      geom += std::pow(principal.a, (km - l) * principal.beta * nu);
    }
    rep.F.push_back(F);
    rep.partial_sums.push_back(S);
    rep.geometric_bounds.push_back(geom);
    rep.averages.push_back(layers[km].avg);
    rep.chain_bound += 2.0 * layers[km].avg * S;
    worst_ratio = std::max(worst_ratio, S / geom);
  }
  for (int l : rep.G) {
    const Layer& L = layers[l];
    for (double frac : L.fractions) rep.h += L.avg * frac;
  }
  rep.h_over_u = rep.h / rep.u_x;
  const double smax = *std::max_element(rep.partial_sums.begin(), rep.partial_sums.end());
  rep.summary.lhs = smax;
  rep.summary.rhs = 1.0;
  rep.summary.constant = smax;
  rep.summary.finite = std::isfinite(smax) && std::isfinite(rep.h_over_u);
  rep.summary.witnesses = {{"h", rep.h},
                           {"u_x", rep.u_x},
                           {"h_over_u", rep.h_over_u},
                           {"terms_km", static_cast<double>(rep.k_m.size())},
                           {"max_sum_over_geometric", worst_ratio},
                           {"chain_bound", rep.chain_bound}};
  return rep;
}

ClaimsBattery run_claims(const SampledField& f, const SampledField& u, const SampledField& v, double r,
                         const YoungFunction& phi, const ClaimsConfig& cfg) {
  const Mesh& mesh = f.mesh();
  if (!(u.mesh() == mesh) || !(v.mesh() == mesh)) throw InputError("run_claims: fields live on different meshes");
  ClaimsBattery out;
  out.a = cfg.a > 0.0 ? cfg.a : std::ldexp(1.0, mesh.dim + 1);
  require_base(out.a, mesh.dim);
  const auto vr = v.pow(r);
  out.eta = ainfty_fit(vr).epsilon;
  out.beta = cfg.beta > 0.0 ? cfg.beta : out.eta / 2.0;
  out.N = cfg.N ? *cfg.N : default_truncation(v, out.a);
  out.constants = claim2_constants(v, r, phi);
  const auto grids = build_grids(mesh.dim);
  const GridMesh gm(mesh, grid_of(grids, cfg.grid_id));
  const auto g = f.times(v, FieldKind::Function).scaled(1.0 / cfg.t);
  const CzContext ctx(g, phi, gm, v, u, r);
  out.omega = omega_layers(ctx, out.a, out.N);
  out.tilde = tilde_layers(ctx, out.a, out.N, 0);
  out.principal = principal_cubes(out.omega, u, out.a, out.beta, out.eta);
  out.audit = audit_principal(out.principal, u);
  out.claim1 = claim1_check(out.principal, vr, u);
  for (const auto& layer : out.tilde) {
    const int k = *layer.k;
    const std::size_t i = static_cast<std::size_t>(k - out.N);
    DecompositionForest empty;
    const DecompositionForest& omega = i < out.omega.size() ? out.omega[i] : empty;
    out.claim2.push_back(claim2_check(layer, omega, f, v, phi, cfg.t, out.a, k, out.constants));
  }
  out.u_a1 = ap_constant(u, 1.0).ap;
  out.nu = ainfty_fit(u).epsilon;
  for (const auto& x : cfg.points) out.claim3.push_back(claim3_check(out.principal, out.tilde, u, x, out.u_a1, out.nu));
  return out;
}

}  // namespace mw
