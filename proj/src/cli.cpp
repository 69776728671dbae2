#include "mixedweak/cli.hpp"

#include "mixedweak/czdecomp.hpp"
#include "mixedweak/io.hpp"
#include "mixedweak/verify.hpp"

#include <CLI11.hpp>
#include <boost/version.hpp>

#include <cmath>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#ifndef MW_VERSION
#define MW_VERSION "0.0.0"
#endif
#ifndef MW_SCHEMA_PATH
#define MW_SCHEMA_PATH "configs/schema.json"
#endif

namespace mw {

namespace fs = std::filesystem;

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"young", "weights", "maximal", "luxemburg", "decompose", "verify", "claims"};
  return names;
}

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Run {
  const CommandSpec& spec;
  std::ostream& out;
  std::ostream& err;
  fs::path dir;
  std::vector<std::string> outputs;
  std::vector<PropertyResult> properties;

  void log(const std::string& msg) const {
    if (spec.verbosity > 0) err << "[" << spec.subcommand << "] " << msg << "\n";
  }
  void write(const std::string& name, const std::string& text) {
    write_text(dir / name, text);
    outputs.push_back(name);
  }
  void write_json(const std::string& name, const Json& j) { write(name, j.dump(2) + "\n"); }
  void field(const SampledField& f, const std::string& name) {
    write_field(f, dir / "fields", name);
    outputs.push_back("fields/" + name + ".bin");
    outputs.push_back("fields/" + name + ".json");
  }
  void check(std::string name, bool passed, std::string detail = {}) {
    properties.push_back({std::move(name), passed, std::move(detail)});
  }
  bool all_passed() const {
    for (const auto& p : properties)
      if (!p.passed) return false;
    return true;
  }
  Json properties_json() const {
    Json a = Json::array();
    for (const auto& p : properties) a.push_back({{"name", p.name}, {"passed", p.passed}, {"detail", p.detail}});
    return a;
  }
  void print_properties() const {
    for (const auto& p : properties)
      out << (p.passed ? "  pass  " : "  FAIL  ") << p.name << (p.detail.empty() ? "" : ": " + p.detail) << "\n";
  }
};

std::string fmt(double x) { return csv_number(x); }

Json parse_value(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error&) {
    return text;
  }
}

void apply_override(Json& config, const std::string& item) {
  const auto eq = item.find('=');
  if (eq == std::string::npos || eq == 0) throw UsageError("--set expects key=value, got '" + item + "'");
  const std::string key = item.substr(0, eq);
  Json* node = &config;
  std::string path;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw UsageError("--set: empty key segment in '" + key + "'");
    path += "/" + part;
    if (!node->is_object()) throw ConfigError(path, "--set descends into a non-object");
    if (dot == std::string::npos) {
      (*node)[part] = parse_value(item.substr(eq + 1));
      return;
    }
    if (!node->contains(part)) (*node)[part] = Json::object();
    node = &(*node)[part];
    start = dot + 1;
  }
}

Json effective_config(const CommandSpec& spec) {
  Json config = read_json(spec.config);
  if (!config.is_object()) throw ConfigError("/", "expected an object");
  for (const auto& item : spec.overrides) apply_override(config, item);
  if (spec.seed) config["seed"] = *spec.seed;
  if (spec.resolution_doubling) {
    if (spec.subcommand != "verify") throw UsageError("--resolution-doubling applies to verify only");
    config["resolution_doubling"] = true;
  }
  return config;
}

template <class F>
auto at(const std::string& path, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const InputError& e) {
    throw ConfigError(path, e.what());
  } catch (const DomainError& e) {
    throw ConfigError(path, e.what());
  }
}

SampledField weight_field(const ConfigNode& root, const std::string& key, const Mesh& mesh) {
  const WeightSpec s = parse_weight(root.child(key));
  return at(root.key_path(key), [&] { return s.build(mesh); });
}

/// A function spec read outside parse_experiment; random fields default to
/// the middle half of the box and the top-level seed.
SampledField function_field(const ConfigNode& root, const std::string& key, const Mesh& mesh) {
  FunctionSpec s = parse_function(root.child(key));
  if (s.kind == FunctionSpec::Kind::Random) {
    if (!root.raw(key).contains("seed")) s.seed = root.seed("seed", 1);
    if (s.lo.empty()) {
      s.lo.assign(static_cast<std::size_t>(mesh.dim), -mesh.half_width / 2);
      s.hi.assign(static_cast<std::size_t>(mesh.dim), mesh.half_width / 2);
    }
  }
  return at(root.key_path(key), [&] { return s.build(mesh); });
}

YoungFunction young_or(const ConfigNode& root, const std::string& key, const YoungSpec& fallback) {
  return root.has(key) ? parse_young(root.child(key)).build() : fallback.build();
}

std::vector<double> log_grid(double lo, double hi, int count) {
  std::vector<double> g(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i)
    g[static_cast<std::size_t>(i)] = count == 1 ? lo : lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1));
  return g;
}

int young_cmd(Run& run, const ConfigNode& root) {
  const YoungSpec spec = parse_young(root.child("phi"));
  const YoungFunction phi = spec.build();
  const double r = root.number("r", phi.r());
  Json rep = {{"phi", spec.describe()}};
  run.log("checking F_r membership");
  const FrReport fr = check_Fr(phi, r);
  rep["fr"] = to_json(fr);
  run.check("fr_member", fr.member, fr.member ? "" : fr.failure);
  run.out << spec.describe() << " in F_" << r << ": " << (fr.member ? "yes" : "no") << "\n";
  if (root.has("bp")) {
    const ConfigNode bp = root.child("bp");
    const double p = bp.number("p");
    const double c = bp.number("c", 1.0);
    bp.finish();
    const BpReport b = at(bp.path(), [&] { return bp_integral(phi, p, c); });
    rep["bp"] = to_json(b);
    run.out << "B_p(p=" << p << ", c=" << c << ") = " << fmt(b.value) << " (" << to_string(b.verdict) << ")\n";
  }
  if (root.has("inverse_product")) {
    const ConfigNode ip = root.child("inverse_product");
    const double lo = ip.number("lo", 1e-6);
    const double hi = ip.number("hi", 1e6);
    const int count = ip.integer("count", 241);
    ip.finish();
    if (!(lo > 0.0 && hi > lo) || count < 2) throw ConfigError(ip.path(), "needs 0 < lo < hi and count >= 2");
    const auto grid = log_grid(lo, hi, count);
    const auto ipr = inverse_product_check(phi, grid);
    rep["inverse_product"] = to_json(ipr);
    run.check("inverse_product_in_[1,2]", ipr.passed, "ratio range [" + fmt(ipr.min_ratio) + ", " + fmt(ipr.max_ratio) + "]");
  }
  if (root.has("prec_N")) {
    const ConfigNode pn = root.child("prec_N");
    const double p = pn.number("p");
    pn.finish();
    if (!(p > 1.0)) throw ConfigError(pn.key_path("p"), "must be > 1");
    const auto order = prec_N_check([&](double t) { return phi(t); },
                                    [p](double t) { return p * std::pow(t, p - 1.0); });
    rep["prec_N"] = to_json(order);
    run.check("prec_N_established", order.established, order.diagnostic);
  }
  root.accept({"seed"});
  root.finish();
  rep["properties"] = run.properties_json();
  run.write_json("report.json", rep);
  run.print_properties();
  return run.all_passed() ? 0 : 2;
}

int weights_cmd(Run& run, const ConfigNode& root) {
  const Mesh mesh = parse_mesh(root.child("mesh"));
  const WeightSpec ws = parse_weight(root.child("w"));
  const SampledField w = at(root.key_path("w"), [&] { return ws.build(mesh); });
  const double p = root.number("p", 1.0);
  if (!(p >= 1.0)) throw ConfigError(root.key_path("p"), "must be >= 1");
  const CubeFamilySpec cubes = root.has("cubes") ? parse_cube_family(root.child("cubes")) : CubeFamilySpec{};
  const bool refine = root.boolean("refinement", true);
  const bool ainfty = root.boolean("ainfty", false);
  std::optional<double> rh_s;
  if (root.has("rh_s")) {
    rh_s = root.number("rh_s");
    if (!(*rh_s > 1.0)) throw ConfigError(root.key_path("rh_s"), "must be > 1");
  }
  root.accept({"seed"});
  root.finish();

  run.log("A_p scan over " + std::to_string(mesh.size()) + " cells");
  MuckenhouptReport rep = ap_constant(w, p, cubes);
  if (rh_s) {
    const RhReport rh = rh_constant(w, *rh_s, cubes);
    rep.rh_s = rh.s;
    rep.rh = rh.constant;
  }
  if (ainfty) rep.ainfty = ainfty_fit(w, cubes);
  Json j = {{"w", ws.describe()}, {"mesh", to_json(mesh)}, {"constants", to_json(rep)}};
  run.out << "[" << ws.describe() << "]_{A_" << p << "} = " << fmt(rep.ap) << ", [w]_{A_1} = " << fmt(rep.a1) << "\n";
  if (refine) {
    run.log("refinement scan");
    const auto scan = refinement_scan(
        [&](int n) { return ap_constant(ws.build(Mesh(mesh.dim, mesh.half_width, n)), p, cubes).ap; }, mesh.cells);
    j["refinement"] = to_json(scan);
    std::string detail;
    for (std::size_t i = 0; i < scan.estimates.size(); ++i)
      detail += (i ? ", " : "") + std::string("N=") + std::to_string(scan.resolutions[i]) + ": " + fmt(scan.estimates[i]);
    run.check("ap_refinement_stable", scan.verdict == Stability::Stable, detail);
  }
  run.field(w, "w");
  j["properties"] = run.properties_json();
  run.write_json("report.json", j);
  run.print_properties();
  return run.all_passed() ? 0 : 2;
}

std::string cells_csv(const SampledField& f, const SampledField& value) {
  const Mesh& mesh = f.mesh();
  std::string out = "cell";
  for (int d = 0; d < mesh.dim; ++d) out += ",x" + std::to_string(d);
  out += ",f,value\n";
  for (std::size_t i = 0; i < f.size(); ++i) {
    out += std::to_string(i);
    const Point c = mesh.center(i);
    for (int d = 0; d < mesh.dim; ++d) out += "," + fmt(c[static_cast<std::size_t>(d)]);
    out += "," + fmt(f[i]) + "," + fmt(value[i]) + "\n";
  }
  return out;
}

int maximal_cmd(Run& run, const ConfigNode& root) {
  const Mesh mesh = parse_mesh(root.child("mesh"));
  const SampledField f = function_field(root, "f", mesh);
  const YoungFunction phi = young_or(root, "phi", YoungSpec::power(1.0));
  const MaximalMode mode =
      root.has("mode") ? parse_mode(root.string("mode"), root.key_path("mode")) : default_mode(phi);
  const int grid_id = root.integer("grid_id", 1);
  const int grids = static_cast<int>(std::pow(3, mesh.dim));
  if (grid_id < 1 || grid_id > grids) throw ConfigError(root.key_path("grid_id"), "must be in 1.." + std::to_string(grids));
  std::optional<SampledField> v;
  if (root.has("v")) v = weight_field(root, "v", mesh);
  root.finish();

  run.log(std::string(v ? "S_Phi" : "M_Phi") + " in " + to_string(mode) + " mode");
  const SampledField value =
      v ? sawyer_field(f, *v, phi, mode) : maximal_orlicz_field(f, phi, mode, grid_id).value;
  const std::string op = v ? "sawyer" : "maximal";
  run.field(f, "f");
  if (v) run.field(*v, "v");
  run.field(value, op);
  run.write("cells.csv", cells_csv(f, value));
  Json j = {{"operator", op},           {"phi", phi.describe()},         {"mode", to_string(mode)},
            {"grid_id", grid_id},       {"mesh", to_json(mesh)},         {"f_sup", json_number(f.sup_abs())},
            {"value_sup", json_number(value.sup_abs())}};
  run.write_json("report.json", j);
  run.out << op << " (" << to_string(mode) << "): sup = " << fmt(value.sup_abs()) << ", sup|f| = " << fmt(f.sup_abs())
          << "\n";
  return 0;
}

int luxemburg_cmd(Run& run, const ConfigNode& root) {
  const Mesh mesh = parse_mesh(root.child("mesh"));
  const SampledField f = function_field(root, "f", mesh);
  const YoungSpec ys = root.has("phi") ? parse_young(root.child("phi")) : YoungSpec::power(1.0);
  const YoungFunction phi = ys.build();
  const ConfigNode cube = root.child("cube");
  GeneralCube q;
  q.dim = mesh.dim;
  const auto lower = cube.numbers("lower");
  if (static_cast<int>(lower.size()) != mesh.dim) throw ConfigError(cube.key_path("lower"), "needs one entry per axis");
  for (int d = 0; d < mesh.dim; ++d) q.lower[static_cast<std::size_t>(d)] = lower[static_cast<std::size_t>(d)];
  q.side = cube.number("side");
  cube.finish();
  if (!(q.side > 0.0)) throw ConfigError(cube.key_path("side"), "must be positive");
  std::optional<SampledField> w;
  if (root.has("w")) w = weight_field(root, "w", mesh);
  root.finish();

  const CellRange cells = at(cube.path(), [&] { return snap(mesh, q); });
  if (cells.empty()) throw ConfigError(cube.path(), "contains no cell centers");
  const LuxemburgResult res = w ? weighted_luxemburg_average(f, cells, phi, *w) : luxemburg_average(f, cells, phi);
  Json j = {{"phi", ys.describe()},     {"cells", to_json(cells)}, {"count", cells.count()},
            {"value", json_number(res.value)}, {"iterations", res.iterations}, {"residual", json_number(res.residual)},
            {"weighted", w.has_value()}};
  run.out << "||f||_{" << ys.describe() << ",Q} = " << fmt(res.value) << " (" << res.iterations << " iterations)\n";
  if (ys.family == YoungFamily::Power && !w) {
    long double s = 0.0L;
    cells.for_each(mesh, [&](std::size_t i) { s += std::pow(std::abs(f[i]), ys.p); });
    const double pmean =
        static_cast<double>(std::pow(s / static_cast<long double>(cells.count()), 1.0L / static_cast<long double>(ys.p)));
    const double rel = pmean > 0.0 ? std::abs(res.value - pmean) / pmean : std::abs(res.value);
    j["p_mean"] = json_number(pmean);
    j["relative_error"] = json_number(rel);
    run.check("matches_p_mean", rel <= 1e-9, "relative error " + fmt(rel));
  }
  j["properties"] = run.properties_json();
  run.write_json("report.json", j);
  run.print_properties();
  return run.all_passed() ? 0 : 2;
}

std::string corner_text(const Cube& q, int dim) {
  std::string s;
  for (int d = 0; d < dim; ++d) s += (d ? " " : "") + std::to_string(q.corner[static_cast<std::size_t>(d)]);
  return s;
}

int decompose_cmd(Run& run, const ConfigNode& root) {
  const Mesh mesh = parse_mesh(root.child("mesh"));
  const SampledField g = function_field(root, "f", mesh);
  const YoungFunction phi = young_or(root, "phi", YoungSpec::power(1.0));
  const int grid_id = root.integer("grid_id", 1);
  const auto grids = build_grids(mesh.dim);
  if (grid_id < 1 || grid_id > static_cast<int>(grids.size()))
    throw ConfigError(root.key_path("grid_id"), "must be in 1.." + std::to_string(grids.size()));
  std::optional<SampledField> v;
  std::optional<SampledField> u;
  if (root.has("v")) v = weight_field(root, "v", mesh);
  if (root.has("u")) u = weight_field(root, "u", mesh);
  const double r = root.number("r", 1.0);
  if (!(r > 0.0)) throw ConfigError(root.key_path("r"), "must be positive");
  const bool layered = root.has("a") || root.has("N");
  std::optional<double> lambda;
  double a = 0.0;
  int N = 0;
  if (layered) {
    if (root.has("lambda")) throw ConfigError(root.key_path("lambda"), "give either lambda or a and N");
    if (!v) throw ConfigError(root.key_path("a"), "layered decompositions need v");
    a = root.number("a");
    N = root.integer("N");
    if (!(a > std::pow(2.0, mesh.dim))) throw ConfigError(root.key_path("a"), "must exceed 2^n");
  } else {
    lambda = root.number("lambda");
    if (!(*lambda > 0.0) || !std::isfinite(*lambda)) throw ConfigError(root.key_path("lambda"), "must be positive and finite");
  }
  root.accept({"seed"});
  root.finish();

  const GridMesh gm(mesh, grids[static_cast<std::size_t>(grid_id - 1)]);
  const CzContext ctx(g, phi, gm, v, u, r);
  std::vector<DecompositionForest> layers;
  if (lambda) {
    run.log("level set decomposition at lambda = " + fmt(*lambda));
    layers.push_back(level_set_decomposition(ctx, *lambda));
  } else {
    run.log("Omega layers from k = " + std::to_string(N));
    layers = omega_layers(ctx, a, N);
  }
  Json forests = Json::array();
  std::string csv = "k,j,grid,level,corner,avg_v,avg_u,luxemburg_g\n";
  std::size_t total = 0;
  for (const auto& layer : layers) {
    forests.push_back(to_json(layer, mesh.dim));
    for (std::size_t j = 0; j < layer.cubes.size(); ++j) {
      const auto& c = layer.cubes[j];
      csv += (layer.k ? std::to_string(*layer.k) : std::string()) + "," + std::to_string(j) + "," +
             std::to_string(c.cube.grid_id) + "," + std::to_string(c.cube.level) + "," +
             corner_text(c.cube, mesh.dim) + "," + fmt(c.payload.avg_v) + "," + fmt(c.payload.avg_u) + "," +
             fmt(c.payload.luxemburg) + "\n";
    }
    total += layer.cubes.size();
  }
  run.write_json("forest.json", {{"mesh", to_json(mesh)}, {"phi", phi.describe()}, {"layers", forests}});
  run.write("cubes.csv", csv);
  run.write_json("report.json", {{"layers", layers.size()}, {"cubes", total}});
  run.out << "decomposition: " << layers.size() << " layer(s), " << total << " cube(s)\n";
  return 0;
}

void write_experiment_fields(Run& run, const ExperimentConfig& cfg) {
  const Mesh mesh = cfg.mesh();
  run.field(cfg.f.build(mesh), "f");
  run.field(cfg.u.build(mesh), "u");
  run.field(cfg.v.build(mesh), "v");
}

std::vector<SampledField> random_samples(const ExperimentConfig& cfg, int count) {
  const Mesh mesh = cfg.mesh();
  std::vector<SampledField> fs;
  for (int i = 0; i < count; ++i)
    fs.push_back(FunctionSpec::random(cfg.seed + static_cast<std::uint64_t>(i), cfg.half_width, cfg.dim).build(mesh));
  return fs;
}

int report_exit(Run& run, const VerificationReport& rep) {
  run.write_json("report.json", to_json(rep));
  run.write("rows.csv", rows_csv(rep.rows));
  if (rep.sphi) run.field(*rep.sphi, "sphi");
  if (rep.refused()) {
    run.out << "hypotheses refused: " << rep.hypotheses.failure << "\n";
    return 3;
  }
  run.out << rep.name << ": C_emp = " << fmt(rep.c_emp);
  if (rep.refinement_change) run.out << ", refinement change " << fmt(*rep.refinement_change);
  run.out << "\n";
  for (const auto& p : rep.properties)
    run.out << (p.passed ? "  pass  " : "  FAIL  ") << p.name << (p.detail.empty() ? "" : ": " + p.detail) << "\n";
  return rep.exit_code();
}

int verify_cmd(Run& run, const ConfigNode& root) {
  const std::string type = root.string("experiment", "mixed_weak");
  const ExperimentConfig cfg = parse_experiment(root);
  const Mesh mesh = at(root.path(), [&] { return cfg.mesh(); });
  const MaximalMode mode = cfg.resolved_mode();
  const YoungFunction phi = at(root.key_path("phi"), [&] { return cfg.phi.build(); });
  const SampledField f = at(root.key_path("f"), [&] { return cfg.f.build(mesh); });
  run.log(type + " on " + std::to_string(mesh.size()) + " cells, mode " + to_string(mode));

  if (type == "mixed_weak" || type == "sawyer") {
    root.finish();
    write_experiment_fields(run, cfg);
    const auto rep = type == "sawyer" ? at(root.path(), [&] { return sawyer_special_case(cfg); })
                                      : mixed_weak_report(cfg);
    return report_exit(run, rep);
  }
  if (type == "mw_weak") {
    const SampledField w = weight_field(root, "w", mesh);
    const double p = root.number("p", 1.0);
    if (!(p >= 1.0)) throw ConfigError(root.key_path("p"), "must be >= 1");
    root.finish();
    const auto rep = mw_weak_check(w, p, f, cfg.t_grid.build(f.sup_abs()));
    run.field(f, "f");
    run.field(w, "w");
    run.write_json("report.json", to_json(rep));
    run.write("rows.csv", rows_csv(rep.rows));
    if (!rep.hypothesis_ok) {
      run.out << "hypotheses refused: " << rep.failure << "\n";
      return 3;
    }
    run.out << "M weak type on L^" << p << "(w): C_emp = " << fmt(rep.c_emp) << "\n";
    return std::isfinite(rep.c_emp) ? 0 : 2;
  }

  const SampledField u = cfg.u.build(mesh);
  const SampledField v = cfg.v.build(mesh);
  if (type == "sphi_linf") {
    const int samples = root.integer("samples", 10);
    if (samples < 1) throw ConfigError(root.key_path("samples"), "must be >= 1");
    root.finish();
    const auto rep = sphi_linf_check(v, phi, cfg.r, random_samples(cfg, samples), mode);
    run.field(v, "v");
    run.write_json("report.json", to_json(rep));
    run.out << rep.diagnostic << "\n";
    if (!rep.conclusive) return 3;
    return std::isfinite(rep.constant) && rep.stable ? 0 : 2;
  }
  if (type == "interpolation") {
    const double p = root.number("p");
    const double c_in = root.number("c", 0.0);
    const double C = root.number("C", 0.0);
    root.finish();
    const SampledField s = sawyer_field(f, v, phi, mode);
    const SampledField mu = u.times(v.pow(cfg.r), FieldKind::Weight);
    const double c = c_in > 0.0 ? c_in : 1.0 / (2.0 * s.sup_abs());
    if (!std::isfinite(c)) throw ConfigError(root.key_path("f"), "S_Phi f vanishes; give c explicitly");
    const auto rep = modular_interpolation_check(s, f, mu, phi, p, c, C);
    run.field(f, "f");
    run.field(s, "sphi");
    run.field(mu, "mu");
    run.write_json("report.json", to_json(rep));
    run.out << rep.diagnostic << "\n";
    if (rep.rejected || !rep.hypothesis_ok) return 3;
    return rep.conclusion_holds ? 0 : 2;
  }
  if (type == "lp") {
    const double p = root.number("p");
    const int samples = root.integer("samples", 10);
    if (samples < 1) throw ConfigError(root.key_path("samples"), "must be >= 1");
    root.finish();
    const auto rep = lp_boundedness_check(u, v, cfg.r, p, phi, random_samples(cfg, samples), mode);
    run.field(u, "u");
    run.field(v, "v");
    run.write_json("report.json", to_json(rep));
    run.out << rep.diagnostic << "\n";
    if (rep.rejected) return 3;
    return rep.identity_ok && rep.finite && rep.stable ? 0 : 2;
  }
  throw ConfigError(root.key_path("experiment"),
                    "unknown experiment '" + type + "' (mixed_weak, sawyer, mw_weak, sphi_linf, interpolation, lp)");
}

int claims_cmd(Run& run, const ConfigNode& root) {
  const ExperimentConfig cfg = parse_experiment(root);
  const Mesh mesh = at(root.path(), [&] { return cfg.mesh(); });
  ClaimsConfig cc;
  cc.a = cfg.a;
  cc.beta = cfg.beta;
  cc.grid_id = cfg.grid_id;
  if (root.has("N")) cc.N = root.integer("N");
  cc.t = root.number("t", 1.0);
  if (!(cc.t > 0.0)) throw ConfigError(root.key_path("t"), "must be positive");
  if (root.has("points")) {
    const Json& pts = root.raw("points");
    const std::string pp = root.key_path("points");
    if (!pts.is_array()) throw ConfigError(pp, "expected an array of points");
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const Json& x = pts[i];
      const std::string ip = pp + "/" + std::to_string(i);
      if (!x.is_array() || static_cast<int>(x.size()) != mesh.dim) throw ConfigError(ip, "expected one coordinate per axis");
      Point pt{};
      for (int d = 0; d < mesh.dim; ++d) {
        const Json& xd = x[static_cast<std::size_t>(d)];
        if (!xd.is_number()) throw ConfigError(ip + "/" + std::to_string(d), "expected a number");
        pt[static_cast<std::size_t>(d)] = xd.get<double>();
        if (std::abs(pt[static_cast<std::size_t>(d)]) >= mesh.half_width) throw ConfigError(ip, "outside the box");
      }
      cc.points.push_back(pt);
    }
  }
  root.finish();

  const auto hyp = theorem_hypotheses(cfg);
  if (!hyp.ok) {
    run.write_json("report.json", {{"hypotheses", {{"ok", false}, {"failure", hyp.failure}}}});
    run.out << "hypotheses refused: " << hyp.failure << "\n";
    return 3;
  }
  run.log("claims battery");
  const auto b = run_claims(cfg.f.build(mesh), cfg.u.build(mesh), cfg.v.build(mesh), cfg.r, cfg.phi.build(), cc);

  bool c2_finite = true;
  bool wk = true;
  double wk_max = 0.0;
  std::string csv = "k,grid,level,corner,lhs,rhs,ratio,branch,branch_ok,wk_max,holder_holds,large_cube_holds\n";
  for (const auto& c : b.claim2) {
    c2_finite = c2_finite && c.summary.finite;
    wk = wk && c.wk_within;
    wk_max = std::max(wk_max, c.wk_max);
    for (const auto& q : c.cubes)
      csv += std::to_string(c.k) + "," + std::to_string(q.cube.grid_id) + "," + std::to_string(q.cube.level) + "," +
             corner_text(q.cube, mesh.dim) + "," + fmt(q.lhs) + "," + fmt(q.rhs) + "," + fmt(q.ratio) + "," +
             std::to_string(q.branch) + "," + (q.branch_ok ? "1" : "0") + "," + fmt(q.wk_max) + "," +
             (q.holder_holds ? "1" : "0") + "," + (q.large_cube_holds ? "1" : "0") + "\n";
  }
  bool c3_finite = true;
  for (const auto& c : b.claim3) c3_finite = c3_finite && c.summary.finite;
  run.check("principal_audit", b.audit.ok, std::to_string(b.audit.checks) + " checks");
  run.check("claim1_finite", b.claim1.finite, "constant " + fmt(b.claim1.constant));
  run.check("claim2_finite", c2_finite, std::to_string(b.claim2.size()) + " layers");
  run.check("claim3_finite", c3_finite, std::to_string(b.claim3.size()) + " points");
  run.check("claim2_wk_bound", wk, "max w_k term " + fmt(wk_max) + " against e^{2/e} = " + fmt(std::exp(2.0 / std::exp(1.0))));

  run.write_json("claims.json", to_json(b, mesh.dim));
  run.write("claim2.csv", csv);
  run.write_json("report.json", {{"hypotheses", {{"ok", true}}}, {"properties", run.properties_json()}});
  run.out << "claims battery: a = " << b.a << ", beta = " << fmt(b.beta) << ", N = " << b.N << "\n";
  run.print_properties();
  return run.all_passed() ? 0 : 2;
}

const std::map<std::string, std::function<int(Run&, const ConfigNode&)>>& handlers() {
  static const std::map<std::string, std::function<int(Run&, const ConfigNode&)>> h{
      {"young", young_cmd},         {"weights", weights_cmd}, {"maximal", maximal_cmd}, {"luxemburg", luxemburg_cmd},
      {"decompose", decompose_cmd}, {"verify", verify_cmd},   {"claims", claims_cmd}};
  return h;
}

Json versions() {
  std::ostringstream json_version;
  json_version << NLOHMANN_JSON_VERSION_MAJOR << "." << NLOHMANN_JSON_VERSION_MINOR << "." << NLOHMANN_JSON_VERSION_PATCH;
  return {{"mwlab", MW_VERSION},
          {"nlohmann_json", json_version.str()},
          {"cli11", CLI11_VERSION},
          {"boost", BOOST_LIB_VERSION},
          {"compiler", __VERSION__}};
}

}  // namespace

int run(const CommandSpec& spec, std::ostream& out, std::ostream& err) {
  const auto h = handlers().find(spec.subcommand);
  if (h == handlers().end()) {
    err << "error: unknown subcommand '" << spec.subcommand << "'\n";
    return 1;
  }
  if (spec.threads < 0) {
    err << "error: --threads must be >= 0\n";
    return 1;
  }
  set_thread_limit(spec.threads);
  Run r{spec, out, err, spec.out, {}, {}};
  try {
    const Json config = effective_config(spec);
    const ConfigNode root(config, "");
    root.accept({"$schema", "description"});
    const int code = h->second(r, root);
    Json manifest = {{"tool", "mwlab"},
                     {"subcommand", spec.subcommand},
                     {"config_hash", config_hash(config)},
                     {"seed", config.contains("seed") ? config["seed"] : Json(1)},
                     {"threads", spec.threads},
                     {"versions", versions()},
                     {"exit_code", code},
                     {"outputs", r.outputs},
                     {"config", config}};
    write_text(r.dir / "manifest.json", manifest.dump(2) + "\n");
    write_text(r.dir / "config.json", config.dump(2) + "\n");
    return code;
  } catch (const ConfigError& e) {
    err << "config error at " << (e.path().empty() ? "/" : e.path()) << ": "
        << std::string(e.what()).substr(e.path().size() + 2) << "\n";
    return 1;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const InputError& e) {
    err << "input error: " << e.what() << "\n";
    return 1;
  } catch (const DomainError& e) {
    err << "domain error: " << e.what() << "\n";
    return 1;
  }
}

int run_main(int argc, char** argv) {
  CLI::App app{"mwlab: numerical laboratory for mixed weak-type inequalities of Orlicz maximal operators"};
  app.require_subcommand(1, 1);
  app.footer(std::string("Subcommands read a JSON config; the schema is configs/schema.json (") + MW_SCHEMA_PATH +
             ").\nExit codes: 0 pass, 1 usage or config error, 2 a property fails, 3 hypothesis refusal.");
  app.set_version_flag("--version", MW_VERSION);

  // separate storage per subcommand: CLI11 resets the bound variables of
  // subcommands that were not invoked
  std::map<std::string, CommandSpec> specs;
  std::map<std::string, std::uint64_t> seeds;
  const std::map<std::string, std::string> about{
      {"young", "F_r membership, B_p integral, inverse product and prec_N checks of a Young function"},
      {"weights", "A_p, A_1, RH_s and A_infinity constants of a sampled weight"},
      {"maximal", "M_Phi f on the mesh (S_Phi f = M_Phi(f v)/v when v is given)"},
      {"luxemburg", "Luxemburg average of f over one cube"},
      {"decompose", "Calderon-Zygmund decomposition at a level lambda, or the Omega_k layers"},
      {"verify", "verification experiments: mixed_weak, sawyer, mw_weak, sphi_linf, interpolation, lp"},
      {"claims", "principal cubes and the three claims of the main proof on one instance"}};
  for (const auto& name : subcommands()) {
    CommandSpec& spec = specs[name];
    spec.subcommand = name;
    CLI::App* sub = app.add_subcommand(name, about.at(name));
    sub->add_option("-c,--config", spec.config, "JSON config file")->required()->check(CLI::ExistingFile);
    sub->add_option("-o,--out", spec.out, "output directory")->capture_default_str();
    sub->add_option("--set", spec.overrides, "override a config key: dotted.key=json_value")->take_all();
    sub->add_option("--seed", seeds[name], "override the config seed");
    sub->add_option("--threads", spec.threads, "worker thread cap (0: hardware concurrency)")->capture_default_str();
    sub->add_flag("-v,--verbose", spec.verbosity, "progress on stderr (repeatable)");
    if (name == "verify") sub->add_flag("--resolution-doubling", spec.resolution_doubling, "rerun at 2N cells");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  const CLI::App* sub = app.get_subcommands().front();
  CommandSpec& spec = specs.at(sub->get_name());
  if (sub->count("--seed") > 0) spec.seed = seeds.at(sub->get_name());
  return run(spec, std::cout, std::cerr);
}

}  // namespace mw
