#include "mixedweak/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace mw {

namespace {

Json num(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

Json nums(const std::vector<double>& xs) {
  Json a = Json::array();
  for (double x : xs) a.push_back(num(x));
  return a;
}

Json pairs(const std::vector<std::pair<double, double>>& xs) {
  Json a = Json::array();
  for (const auto& [x, y] : xs) a.push_back(Json::array({num(x), num(y)}));
  return a;
}

const char* type_name(const Json& j) { return j.type_name(); }

}  // namespace

ConfigNode::ConfigNode(const Json& j, std::string path) : j_(&j), path_(std::move(path)) {
  if (!j.is_object()) throw ConfigError(path_.empty() ? "/" : path_, std::string("expected an object, got ") + type_name(j));
}

bool ConfigNode::has(const std::string& key) const { return j_->contains(key); }

const Json& ConfigNode::raw(const std::string& key) const {
  if (!has(key)) throw ConfigError(key_path(key), "missing required key");
  used_.insert(key);
  return (*j_)[key];
}

ConfigNode ConfigNode::child(const std::string& key) const { return ConfigNode(raw(key), key_path(key)); }

double ConfigNode::number(const std::string& key) const {
  const Json& v = raw(key);
  if (!v.is_number()) throw ConfigError(key_path(key), std::string("expected a number, got ") + type_name(v));
  return v.get<double>();
}

double ConfigNode::number(const std::string& key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

int ConfigNode::integer(const std::string& key) const {
  const Json& v = raw(key);
  if (!v.is_number_integer()) throw ConfigError(key_path(key), std::string("expected an integer, got ") + type_name(v));
  const auto x = v.get<std::int64_t>();
  if (x < INT32_MIN || x > INT32_MAX) throw ConfigError(key_path(key), "integer out of range");
  return static_cast<int>(x);
}

int ConfigNode::integer(const std::string& key, int fallback) const { return has(key) ? integer(key) : fallback; }

std::uint64_t ConfigNode::seed(const std::string& key, std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  const Json& v = raw(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
    throw ConfigError(key_path(key), "expected a nonnegative integer");
  return v.get<std::uint64_t>();
}

bool ConfigNode::boolean(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const Json& v = raw(key);
  if (!v.is_boolean()) throw ConfigError(key_path(key), std::string("expected a boolean, got ") + type_name(v));
  return v.get<bool>();
}

std::string ConfigNode::string(const std::string& key) const {
  const Json& v = raw(key);
  if (!v.is_string()) throw ConfigError(key_path(key), std::string("expected a string, got ") + type_name(v));
  return v.get<std::string>();
}

std::string ConfigNode::string(const std::string& key, const std::string& fallback) const {
  return has(key) ? string(key) : fallback;
}

std::vector<double> ConfigNode::numbers(const std::string& key) const {
  const Json& v = raw(key);
  if (!v.is_array()) throw ConfigError(key_path(key), std::string("expected an array, got ") + type_name(v));
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number())
      throw ConfigError(key_path(key) + "/" + std::to_string(i), std::string("expected a number, got ") + type_name(v[i]));
    out.push_back(v[i].get<double>());
  }
  return out;
}

void ConfigNode::accept(std::initializer_list<const char*> keys) const {
  for (const char* k : keys)
    if (has(k)) used_.insert(k);
}

void ConfigNode::finish() const {
  for (const auto& [key, value] : j_->items())
    if (!used_.count(key)) throw ConfigError(key_path(key), "unknown key");
}

namespace {

template <class F>
auto rethrow_at(const std::string& path, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const DomainError& e) {
    throw ConfigError(path, e.what());
  } catch (const InputError& e) {
    throw ConfigError(path, e.what());
  }
}

}  // namespace

Mesh parse_mesh(const ConfigNode& node) {
  const int dim = node.integer("dim", 1);
  const double L = node.number("half_width", 4.0);
  const int cells = node.integer("cells", 1024);
  node.finish();
  return rethrow_at(node.path(), [&] { return Mesh(dim, L, cells); });
}

YoungSpec parse_young(const ConfigNode& node) {
  const std::string family = node.string("family");
  YoungSpec s;
  if (family == "power") {
    s.family = YoungFamily::Power;
    s.p = node.number("p");
  } else if (family == "log_power") {
    s.family = YoungFamily::LogPower;
    s.r = node.number("r");
    s.delta = node.number("delta");
  } else if (family == "loglog") {
    s.family = YoungFamily::LogLog;
    s.q = node.number("q");
    s.r = node.number("r");
    s.delta = node.number("delta");
  } else if (family == "table") {
    s.family = YoungFamily::Table;
    const Json& knots = node.raw("knots");
    const std::string kp = node.key_path("knots");
    if (!knots.is_array()) throw ConfigError(kp, "expected an array of [t, phi] pairs");
    for (std::size_t i = 0; i < knots.size(); ++i) {
      const Json& k = knots[i];
      if (!k.is_array() || k.size() != 2 || !k[0].is_number() || !k[1].is_number())
        throw ConfigError(kp + "/" + std::to_string(i), "expected a [t, phi] pair of numbers");
      s.knots.emplace_back(k[0].get<double>(), k[1].get<double>());
    }
    if (node.has("infinite_beyond")) s.infinite_beyond = node.number("infinite_beyond");
  } else {
    throw ConfigError(node.key_path("family"), "unknown family '" + family + "' (power, log_power, loglog, table)");
  }
  node.finish();
  rethrow_at(node.path(), [&] { return s.build(); });
  return s;
}

WeightSpec parse_weight(const ConfigNode& node) {
  const std::string kind = node.string("kind");
  WeightSpec s;
  if (kind == "constant") {
    s = WeightSpec::constant(node.number("value", 1.0));
  } else if (kind == "power") {
    s = WeightSpec::power(node.number("alpha"));
  } else {
    throw ConfigError(node.key_path("kind"), "unknown weight kind '" + kind + "' (constant, power)");
  }
  s.scale = node.number("scale", 1.0);
  node.finish();
  if (!(s.scale > 0.0)) throw ConfigError(node.key_path("scale"), "must be positive");
  if (s.kind == WeightSpec::Kind::Constant && !(s.value > 0.0))
    throw ConfigError(node.key_path("value"), "must be positive");
  return s;
}

FunctionSpec parse_function(const ConfigNode& node) {
  const std::string kind = node.string("kind");
  FunctionSpec s;
  if (kind == "zero") {
    s.kind = FunctionSpec::Kind::Zero;
  } else if (kind == "constant") {
    s.kind = FunctionSpec::Kind::Constant;
    s.value = node.number("value", 1.0);
  } else if (kind == "indicator") {
    s.kind = FunctionSpec::Kind::Indicator;
    s.value = node.number("value", 1.0);
    s.lo = node.numbers("lo");
    s.hi = node.numbers("hi");
  } else if (kind == "random") {
    s.kind = FunctionSpec::Kind::Random;
    s.value = node.number("value", 1.0);
    s.seed = node.seed("seed", 1);
    s.pieces = node.integer("pieces", 8);
    if (node.has("lo")) s.lo = node.numbers("lo");
    if (node.has("hi")) s.hi = node.numbers("hi");
  } else {
    throw ConfigError(node.key_path("kind"), "unknown function kind '" + kind + "' (zero, constant, indicator, random)");
  }
  node.finish();
  if (!std::isfinite(s.value)) throw ConfigError(node.key_path("value"), "must be finite");
  if (s.lo.size() != s.hi.size()) throw ConfigError(node.key_path("hi"), "lo and hi need the same length");
  for (std::size_t i = 0; i < s.lo.size(); ++i)
    if (!(s.lo[i] < s.hi[i])) throw ConfigError(node.key_path("hi") + "/" + std::to_string(i), "needs lo < hi");
  if (s.pieces < 1) throw ConfigError(node.key_path("pieces"), "must be >= 1");
  return s;
}

TGridSpec parse_t_grid(const ConfigNode& node) {
  TGridSpec s;
  s.count = node.integer("count", s.count);
  s.lo = node.number("lo", s.lo);
  s.hi = node.number("hi", s.hi);
  s.relative = node.boolean("relative", s.relative);
  if (node.has("values")) s.values = node.numbers("values");
  node.finish();
  if (s.count < 1) throw ConfigError(node.key_path("count"), "must be >= 1");
  if (!(s.lo > 0.0) || !(s.hi >= s.lo)) throw ConfigError(node.key_path("lo"), "needs 0 < lo <= hi");
  for (std::size_t i = 0; i < s.values.size(); ++i)
    if (!(s.values[i] > 0.0)) throw ConfigError(node.key_path("values") + "/" + std::to_string(i), "must be positive");
  return s;
}

MaximalMode parse_mode(const std::string& s, const std::string& path) {
  if (s == "uncentered") return MaximalMode::Uncentered;
  if (s == "dyadic") return MaximalMode::Dyadic;
  if (s == "grids") return MaximalMode::Grids;
  throw ConfigError(path, "unknown mode '" + s + "' (uncentered, dyadic, grids)");
}

CubeFamilySpec parse_cube_family(const ConfigNode& node) {
  CubeFamilySpec s;
  s.dyadic = node.boolean("dyadic", s.dyadic);
  s.random_cubes = node.integer("random_cubes", s.random_cubes);
  s.seed = node.seed("seed", s.seed);
  node.finish();
  if (s.random_cubes < 0) throw ConfigError(node.key_path("random_cubes"), "must be >= 0");
  return s;
}

ExperimentConfig parse_experiment(const ConfigNode& node) {
  ExperimentConfig c;
  c.name = node.string("name", c.name);
  if (node.has("mesh")) {
    const Mesh m = parse_mesh(node.child("mesh"));
    c.dim = m.dim;
    c.half_width = m.half_width;
    c.cells = m.cells;
  }
  c.seed = node.seed("seed", c.seed);
  c.u = node.has("u") ? parse_weight(node.child("u")) : WeightSpec::constant(1.0);
  c.v = node.has("v") ? parse_weight(node.child("v")) : WeightSpec::constant(1.0);
  c.r = node.number("r", c.r);
  c.phi = node.has("phi") ? parse_young(node.child("phi")) : YoungSpec::power(1.0);
  c.f = node.has("f") ? parse_function(node.child("f")) : FunctionSpec{};
  if (c.f.kind == FunctionSpec::Kind::Random && !node.raw("f").contains("seed")) c.f.seed = c.seed;
  if (c.f.kind == FunctionSpec::Kind::Random && c.f.lo.empty()) {
    c.f.lo.assign(static_cast<std::size_t>(c.dim), -c.half_width / 2);
    c.f.hi.assign(static_cast<std::size_t>(c.dim), c.half_width / 2);
  }
  if (!c.f.lo.empty() && static_cast<int>(c.f.lo.size()) != c.dim)
    throw ConfigError(node.key_path("f") + "/lo", "needs one entry per axis");
  if (node.has("t_grid")) c.t_grid = parse_t_grid(node.child("t_grid"));
  if (node.has("mode")) c.mode = parse_mode(node.string("mode"), node.key_path("mode"));
  c.grid_id = node.integer("grid_id", c.grid_id);
  c.a = node.number("a", c.a);
  c.beta = node.number("beta", c.beta);
  c.resolution_doubling = node.boolean("resolution_doubling", c.resolution_doubling);
  c.homogeneity_check = node.boolean("homogeneity_check", c.homogeneity_check);
  c.scan_cells = node.integer("scan_cells", c.scan_cells);
  if (!(c.r > 0.0)) throw ConfigError(node.key_path("r"), "must be positive");
  const int grids = c.dim == 1 ? 3 : c.dim == 2 ? 9 : 27;
  if (c.grid_id < 1 || c.grid_id > grids)
    throw ConfigError(node.key_path("grid_id"), "must be in 1.." + std::to_string(grids));
  if (c.a < 0.0) throw ConfigError(node.key_path("a"), "must be positive (0 selects the default)");
  if (c.beta < 0.0) throw ConfigError(node.key_path("beta"), "must be positive (0 selects the default)");
  if (c.scan_cells < 0 || (c.scan_cells > 0 && (c.scan_cells & (c.scan_cells - 1)) != 0))
    throw ConfigError(node.key_path("scan_cells"), "must be 0 or a power of two");
  return c;
}

Json to_json(const YoungSpec& s) {
  Json j;
  switch (s.family) {
    case YoungFamily::Power: j = {{"family", "power"}, {"p", s.p}}; break;
    case YoungFamily::LogPower: j = {{"family", "log_power"}, {"r", s.r}, {"delta", s.delta}}; break;
    case YoungFamily::LogLog: j = {{"family", "loglog"}, {"q", s.q}, {"r", s.r}, {"delta", s.delta}}; break;
    case YoungFamily::Table:
      j = {{"family", "table"}, {"knots", pairs(s.knots)}};
      if (s.infinite_beyond) j["infinite_beyond"] = *s.infinite_beyond;
      break;
  }
  return j;
}

Json to_json(const WeightSpec& s) {
  if (s.kind == WeightSpec::Kind::Constant) return {{"kind", "constant"}, {"value", s.value}, {"scale", s.scale}};
  return {{"kind", "power"}, {"alpha", s.alpha}, {"scale", s.scale}};
}

Json to_json(const FunctionSpec& s) {
  Json j;
  switch (s.kind) {
    case FunctionSpec::Kind::Zero: j["kind"] = "zero"; break;
    case FunctionSpec::Kind::Constant: j = {{"kind", "constant"}, {"value", s.value}}; break;
    case FunctionSpec::Kind::Indicator: j = {{"kind", "indicator"}, {"value", s.value}}; break;
    case FunctionSpec::Kind::Random:
      j = {{"kind", "random"}, {"value", s.value}, {"seed", s.seed}, {"pieces", s.pieces}};
      break;
  }
  if (!s.lo.empty()) {
    j["lo"] = s.lo;
    j["hi"] = s.hi;
  }
  return j;
}

Json to_json(const Mesh& m) {
  return {{"dim", m.dim}, {"half_width", m.half_width}, {"cells", m.cells}, {"h", m.h()}};
}

Json to_json(const Cube& q, int dim) {
  Json m = Json::array();
  for (int d = 0; d < dim; ++d) m.push_back(q.corner[static_cast<std::size_t>(d)]);
  return {{"grid", q.grid_id}, {"k", q.level}, {"m", m}};
}

Json to_json(const CellRange& r) {
  Json lo = Json::array();
  Json hi = Json::array();
  for (int d = 0; d < r.dim; ++d) {
    lo.push_back(r.lo[static_cast<std::size_t>(d)]);
    hi.push_back(r.hi[static_cast<std::size_t>(d)]);
  }
  return {{"lo", lo}, {"hi", hi}};
}

Json to_json(const FrReport& r) {
  Json j;
  j["r"] = r.r;
  j["member"] = r.member;
  j["failure"] = r.failure;
  j["shape"] = {{"zero_at_origin", r.shape.zero_at_origin},
                {"nondecreasing", r.shape.nondecreasing},
                {"midpoint_convex", r.shape.midpoint_convex},
                {"unbounded", r.shape.unbounded},
                {"witness", r.shape.witness}};
  j["lower_type"] = {{"q", r.lower_type.q},
                     {"constant", num(r.lower_type.constant)},
                     {"refined_constant", num(r.lower_type.refined_constant)},
                     {"witness", {num(r.lower_type.witness_s), num(r.lower_type.witness_t)}},
                     {"bounded", r.lower_type.bounded}};
  j["submultiplicative"] = {{"constant", num(r.submult.constant)},
                            {"refined_constant", num(r.submult.refined_constant)},
                            {"witness", {num(r.submult.witness_s), num(r.submult.witness_t)}},
                            {"bounded", r.submult.bounded}};
  j["growth_ok"] = r.growth_ok;
  if (r.growth_ok)
    j["growth"] = {{"r", r.growth.r}, {"delta", r.growth.delta}, {"c0", num(r.growth.c0)}, {"t0", r.growth.t0}};
  j["growth_ladder"] = pairs(r.growth_ladder);
  return j;
}

Json to_json(const AinftyFit& r) {
  return {{"C", num(r.C)}, {"epsilon", r.epsilon}, {"pairs", r.pairs}, {"ladder", pairs(r.ladder)}};
}

Json to_json(const MuckenhouptReport& r) {
  Json j = {{"p", r.p}, {"ap", num(r.ap)}, {"a1", num(r.a1)}, {"cubes", r.cubes}, {"attaining", r.attaining}};
  if (r.rh_s) j["rh_s"] = *r.rh_s;
  if (r.rh) j["rh"] = num(*r.rh);
  if (r.ainfty) j["ainfty"] = to_json(*r.ainfty);
  return j;
}

Json to_json(const RhReport& r) {
  return {{"s", r.s}, {"constant", num(r.constant)}, {"cubes", r.cubes}, {"attaining", r.attaining}};
}

Json to_json(const RefinementScan& r) {
  return {{"resolutions", r.resolutions},
          {"estimates", nums(r.estimates)},
          {"verdict", r.verdict == Stability::Stable ? "stable" : "unbounded"}};
}

Json to_json(const BpReport& r) {
  Json partials = Json::array();
  for (const auto& [T, v] : r.partials) partials.push_back({{"T", T}, {"integral", num(v)}});
  return {{"value", num(r.value)}, {"partial", num(r.partial)}, {"tail", num(r.tail)},
          {"partials", partials},  {"verdict", to_string(r.verdict)}, {"diagnostic", r.diagnostic}};
}

Json to_json(const OrderCheckReport& r) {
  return {{"constant", num(r.constant)}, {"refined_constant", num(r.refined_constant)},
          {"witnesses", pairs(r.witnesses)}, {"grid", r.grid},
          {"established", r.established},    {"diagnostic", r.diagnostic}};
}

Json to_json(const InverseProductReport& r) {
  return {{"min_ratio", num(r.min_ratio)}, {"max_ratio", num(r.max_ratio)}, {"argmin", r.argmin},
          {"argmax", r.argmax},           {"passed", r.passed}};
}

namespace {

Json properties_json(const std::vector<PropertyResult>& ps) {
  Json a = Json::array();
  for (const auto& p : ps) a.push_back({{"name", p.name}, {"passed", p.passed}, {"detail", p.detail}});
  return a;
}

Json rows_json(const std::vector<ReportRow>& rows) {
  Json a = Json::array();
  for (const auto& r : rows)
    a.push_back({{"t", num(r.t)}, {"lhs", num(r.lhs)}, {"rhs", num(r.rhs)}, {"ratio", num(r.ratio)},
                 {"truncated", r.truncated}});
  return a;
}

}  // namespace

Json to_json(const VerificationReport& r) {
  Json j;
  j["name"] = r.name;
  j["mesh"] = to_json(r.mesh);
  j["mode"] = to_string(r.mode);
  j["hypotheses"] = {{"ok", r.hypotheses.ok}, {"failure", r.hypotheses.failure},
                     {"scans", properties_json(r.hypotheses.scans)}};
  j["c_emp"] = num(r.c_emp);
  j["c_emp_untruncated"] = num(r.c_emp_untruncated);
  j["c_emp_t_refined"] = num(r.c_emp_t_refined);
  if (r.c_emp_refined) j["c_emp_refined"] = num(*r.c_emp_refined);
  if (r.refinement_change) j["refinement_change"] = num(*r.refinement_change);
  const auto& L = r.constants;
  Json ledger = {{"u_a1", num(L.u_a1)},
                 {"v_a1", num(L.v_a1)},
                 {"vr_a1", num(L.vr_a1)},
                 {"rh_s", L.rh_s},
                 {"rh", num(L.rh)},
                 {"ainfty_epsilon", L.ainfty_epsilon},
                 {"ainfty_C", num(L.ainfty_C)},
                 {"sphi_linf", num(L.sphi_linf)},
                 {"lower_type", num(L.lower_type)},
                 {"submult", num(L.submult)}};
  if (L.growth)
    ledger["growth"] = {{"r", L.growth->r}, {"delta", L.growth->delta}, {"c0", num(L.growth->c0)}, {"t0", L.growth->t0}};
  j["constants"] = ledger;
  j["properties"] = properties_json(r.properties);
  j["passed"] = r.passed();
  j["exit_code"] = r.exit_code();
  j["rows"] = rows_json(r.rows);
  return j;
}

Json to_json(const MwWeakReport& r) {
  return {{"p", r.p},         {"ap", num(r.ap)},     {"hypothesis_ok", r.hypothesis_ok},
          {"failure", r.failure}, {"c_emp", num(r.c_emp)}, {"rows", rows_json(r.rows)}};
}

Json to_json(const SphiLinfReport& r) {
  return {{"conclusive", r.conclusive},
          {"diagnostic", r.diagnostic},
          {"epsilon", r.epsilon},
          {"v_r_eps_a1", num(r.v_r_eps_a1)},
          {"constant", num(r.constant)},
          {"coarse_constant", num(r.coarse_constant)},
          {"stable", r.stable},
          {"max_over_sup_ratio", num(r.max_over_sup_ratio)},
          {"samples", r.samples}};
}

Json to_json(const InterpolationReport& r) {
  return {{"rejected", r.rejected},
          {"hypothesis_ok", r.hypothesis_ok},
          {"diagnostic", r.diagnostic},
          {"p", r.p},
          {"c", num(r.c)},
          {"C", num(r.C)},
          {"C_fitted", num(r.C_fitted)},
          {"lhs", num(r.lhs)},
          {"lhs_layer_cake", num(r.lhs_layer_cake)},
          {"layer_cake_error", num(r.layer_cake_error)},
          {"rhs", num(r.rhs)},
          {"implied_constant", num(r.implied_constant)},
          {"rho", num(r.rho)},
          {"bound", num(r.bound)},
          {"conclusion_holds", r.conclusion_holds}};
}

Json to_json(const LpReport& r) {
  Json samples = Json::array();
  for (const auto& s : r.samples)
    samples.push_back({{"lhs", num(s.lhs)},
                       {"rhs", num(s.rhs)},
                       {"ratio", num(s.ratio)},
                       {"coarse_ratio", num(s.coarse_ratio)},
                       {"identity_error", num(s.identity_error)},
                       {"skipped", s.skipped}});
  return {{"rejected", r.rejected},     {"diagnostic", r.diagnostic},
          {"p", r.p},                   {"identity_error", num(r.identity_error)},
          {"sup_ratio", num(r.sup_ratio)}, {"sup_coarse_ratio", num(r.sup_coarse_ratio)},
          {"identity_ok", r.identity_ok}, {"finite", r.finite},
          {"stable", r.stable},          {"samples", samples}};
}

namespace {

Json payload_json(const CubePayload& p) {
  return {{"luxemburg_g", num(p.luxemburg)}, {"avg_v", num(p.avg_v)},   {"avg_vr", num(p.avg_vr)},
          {"avg_u", num(p.avg_u)},           {"u_mass", num(p.u_mass)}, {"vr_mass", num(p.vr_mass)},
          {"volume", p.volume}};
}

}  // namespace

Json to_json(const DecompositionForest& f, int dim) {
  Json cubes = Json::array();
  for (const auto& c : f.cubes) {
    Json q = to_json(c.cube, dim);
    q["cells"] = to_json(c.cells);
    q["stats"] = payload_json(c.payload);
    if (c.parent) q["parent"] = *c.parent;
    q["in_gamma"] = c.in_gamma;
    cubes.push_back(q);
  }
  Json j = {{"grid_id", f.grid_id}, {"lambda", num(f.lambda)}};
  if (f.k) j["k"] = *f.k;
  if (f.a > 0.0) j["a"] = f.a;
  j["visited"] = f.visited;
  j["cubes"] = cubes;
  return j;
}

Json to_json(const PrincipalForest& f, int dim) {
  Json nodes = Json::array();
  for (const auto& n : f.nodes) {
    Json q = {{"k", n.k}, {"j", n.j}, {"cube", to_json(n.cube, dim)}, {"avg_u", num(n.avg_u)},
              {"mu", num(n.mu)}, {"generation", n.generation}};
    if (n.witness) q["witness"] = *n.witness;
    nodes.push_back(q);
  }
  return {{"a", f.a},
          {"beta", f.beta},
          {"eta", f.eta},
          {"N", f.N},
          {"grid_id", f.grid_id},
          {"gamma_total", f.gamma_total},
          {"generations", f.generations},
          {"principal", f.principal},
          {"nodes", nodes}};
}

Json to_json(const PrincipalAudit& a) {
  return {{"ok", a.ok}, {"checks", a.checks}, {"failures", a.failures}};
}

Json to_json(const ClaimReport& c) {
  Json w = Json::object();
  for (const auto& [k, v] : c.witnesses) w[k] = num(v);
  return {{"claim", c.claim},       {"lhs", num(c.lhs)}, {"rhs", num(c.rhs)}, {"constant", num(c.constant)},
          {"finite", c.finite},     {"witnesses", w},    {"notes", c.notes}};
}

Json to_json(const Claim2Constants& c) {
  return {{"r", c.r},           {"v_a1", num(c.v_a1)},   {"vr_a1", num(c.vr_a1)},       {"s", c.s},
          {"rh", num(c.rh)},    {"t0", c.t0},            {"c0", num(c.c0)},             {"delta", c.delta},
          {"lower_type", num(c.lower_type)}, {"submult", num(c.submult)}};
}

Json to_json(const Claim2Report& c, int dim) {
  Json cubes = Json::array();
  for (const auto& q : c.cubes)
    cubes.push_back({{"cube", to_json(q.cube, dim)},
                     {"lhs", num(q.lhs)},
                     {"rhs", num(q.rhs)},
                     {"ratio", num(q.ratio)},
                     {"norm", num(q.norm)},
                     {"I", num(q.I)},
                     {"II", num(q.II)},
                     {"branch", q.branch},
                     {"branch_ok", q.branch_ok},
                     {"branch_mass", num(q.branch_mass)},
                     {"branch_one_bound", num(q.branch_one_bound)},
                     {"branch_one_holds", q.branch_one_holds},
                     {"b_covered", q.b_covered},
                     {"omega_cubes", q.omega_cubes},
                     {"omega_in_gamma", q.omega_in_gamma},
                     {"wk_max", num(q.wk_max)},
                     {"holder_rhs", num(q.holder_rhs)},
                     {"holder_holds", q.holder_holds},
                     {"large_cube_avg", num(q.large_cube_avg)},
                     {"large_cube_bound", num(q.large_cube_bound)},
                     {"large_cube_holds", q.large_cube_holds}});
  return {{"summary", to_json(c.summary)},
          {"k", c.k},
          {"t", c.t},
          {"s_prime", c.s_prime},
          {"X", num(c.X)},
          {"delta0", c.delta0},
          {"eps0", c.eps0},
          {"gamma", c.gamma},
          {"gamma_prime", c.gamma_prime},
          {"chain_bound", num(c.chain_bound)},
          {"lemma_bound", num(c.lemma_bound)},
          {"log_bound", num(c.log_bound)},
          {"tau", num(c.tau)},
          {"wk_max", num(c.wk_max)},
          {"wk_within", c.wk_within},
          {"cubes", cubes}};
}

Json to_json(const Claim3Report& c, int dim) {
  Json x = Json::array();
  for (int d = 0; d < dim; ++d) x.push_back(c.x[static_cast<std::size_t>(d)]);
  return {{"summary", to_json(c.summary)},
          {"x", x},
          {"u_x", num(c.u_x)},
          {"G", c.G},
          {"k_m", c.k_m},
          {"F", c.F},
          {"partial_sums", nums(c.partial_sums)},
          {"geometric_bounds", nums(c.geometric_bounds)},
          {"averages", nums(c.averages)},
          {"h", num(c.h)},
          {"h_over_u", num(c.h_over_u)},
          {"chain_bound", num(c.chain_bound)},
          {"finite_sequence", c.finite_sequence},
          {"ec1_checked", c.ec1_checked},
          {"ec1_failed", c.ec1_failed}};
}

Json to_json(const ClaimsBattery& b, int dim) {
  Json c2 = Json::array();
  for (const auto& c : b.claim2) c2.push_back(to_json(c, dim));
  Json c3 = Json::array();
  for (const auto& c : b.claim3) c3.push_back(to_json(c, dim));
  return {{"a", b.a},
          {"beta", b.beta},
          {"eta", b.eta},
          {"N", b.N},
          {"u_a1", num(b.u_a1)},
          {"nu", b.nu},
          {"constants", to_json(b.constants)},
          {"omega_layers", b.omega.size()},
          {"tilde_layers", b.tilde.size()},
          {"principal", to_json(b.principal, dim)},
          {"audit", to_json(b.audit)},
          {"claim1", to_json(b.claim1)},
          {"claim2", c2},
          {"claim3", c3}};
}

std::string csv_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

Json json_number(double x) { return num(x); }

std::string rows_csv(const std::vector<ReportRow>& rows) {
  std::string out = "t,lhs,rhs,ratio,flags\n";
  for (const auto& r : rows) {
    out += csv_number(r.t) + "," + csv_number(r.lhs) + "," + csv_number(r.rhs) + "," + csv_number(r.ratio) + ",";
    std::string flags;
    if (r.truncated) flags += "truncated";
    if (r.rhs == 0.0) flags += flags.empty() ? "rhs_zero" : "|rhs_zero";
    out += flags + "\n";
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("cannot write " + path.string());
  os << text;
  if (!os) throw InputError("failed writing " + path.string());
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot open " + path.string());
  try {
    return Json::parse(is);
  } catch (const Json::parse_error& e) {
    throw InputError(path.string() + ": malformed JSON: " + e.what());
  }
}

void write_field(const SampledField& f, const std::filesystem::path& dir, const std::string& name) {
  std::filesystem::create_directories(dir);
  static_assert(std::endian::native == std::endian::little, "field files are little-endian");
  const auto bin = dir / (name + ".bin");
  std::ofstream os(bin, std::ios::binary);
  if (!os) throw InputError("cannot write " + bin.string());
  os.write(reinterpret_cast<const char*>(f.values().data()),
           static_cast<std::streamsize>(f.values().size() * sizeof(double)));
  Json header = {{"format", "float64-le"},
                 {"order", "axis 0 fastest"},
                 {"data", name + ".bin"},
                 {"kind", f.kind() == FieldKind::Weight ? "weight" : "function"},
                 {"mesh", {{"dim", f.mesh().dim}, {"half_width", f.mesh().half_width}, {"cells", f.mesh().cells}}}};
  write_text(dir / (name + ".json"), header.dump(2) + "\n");
}

SampledField read_field(const std::filesystem::path& header_path) {
  const Json header = read_json(header_path);
  const ConfigNode node(header, "");
  if (node.string("format") != "float64-le") throw ConfigError("/format", "only float64-le is supported");
  node.accept({"order"});
  const std::string data = node.string("data");
  const std::string kind = node.string("kind");
  const Mesh mesh = parse_mesh(node.child("mesh"));
  node.finish();
  const auto bin = header_path.parent_path() / data;
  std::ifstream is(bin, std::ios::binary);
  if (!is) throw InputError("cannot open " + bin.string());
  std::vector<double> values(mesh.size());
  is.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(double)));
  if (is.gcount() != static_cast<std::streamsize>(values.size() * sizeof(double)))
    throw InputError(bin.string() + ": expected " + std::to_string(values.size()) + " float64 values");
  if (kind == "weight") return SampledField::weight(mesh, std::move(values));
  if (kind == "function") return SampledField::function(mesh, std::move(values));
  throw ConfigError("/kind", "expected 'weight' or 'function'");
}

std::string config_hash(const Json& config) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : config.dump()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

}  // namespace mw
