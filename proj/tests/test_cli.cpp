#include "mixedweak/cli.hpp"
#include "mixedweak/io.hpp"

#include <doctest.h>

#include <fstream>
#include <sstream>

using namespace mw;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "mwlab_tests" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_config(const fs::path& dir, const Json& j) {
  const fs::path p = dir / "config.in.json";
  write_text(p, j.dump(2));
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

struct Outcome {
  int code = 0;
  std::string out;
  std::string err;
};

Outcome run_cmd(CommandSpec spec) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = run(spec, out, err);
  return {code, out.str(), err.str()};
}

CommandSpec command(const std::string& sub, const fs::path& dir, const Json& config) {
  CommandSpec s;
  s.subcommand = sub;
  s.config = write_config(dir, config);
  s.out = dir / "out";
  return s;
}

Json sawyer_json() {
  return Json::parse(R"({
    "experiment": "sawyer",
    "mesh": {"dim": 1, "half_width": 4, "cells": 256},
    "u": {"kind": "constant", "value": 1},
    "v": {"kind": "constant", "value": 1},
    "r": 1,
    "phi": {"family": "power", "p": 1},
    "f": {"kind": "indicator", "lo": [0], "hi": [1]},
    "t_grid": {"values": [0.25, 0.5, 0.75], "relative": false}
  })");
}

Json random_mixed_json() {
  return Json::parse(R"({
    "experiment": "mixed_weak",
    "mesh": {"dim": 1, "half_width": 4, "cells": 512},
    "v": {"kind": "power", "alpha": -0.25},
    "r": 2,
    "phi": {"family": "log_power", "r": 2, "delta": 1},
    "f": {"kind": "random"},
    "t_grid": {"count": 12},
    "seed": 5
  })");
}

}  // namespace

TEST_CASE("cli exit codes") {
  SUBCASE("sawyer instance passes") {
    const auto dir = scratch("sawyer");
    const auto r = run_cmd(command("verify", dir, sawyer_json()));
    CHECK(r.code == 0);
    const auto rows = slurp(dir / "out" / "rows.csv");
    CHECK(rows.rfind("t,lhs,rhs,ratio,flags\n", 0) == 0);
    CHECK(rows.find("\n0.5,") != std::string::npos);
    CHECK(fs::exists(dir / "out" / "fields" / "f.bin"));
    CHECK(fs::exists(dir / "out" / "manifest.json"));
  }
  SUBCASE("young membership") {
    const auto dir = scratch("young");
    Json c = {{"phi", {{"family", "log_power"}, {"r", 1}, {"delta", 1}}}, {"r", 1}};
    CHECK(run_cmd(command("young", dir, c)).code == 0);
    const Json rep = read_json(dir / "out" / "report.json");
    CHECK(rep["fr"]["member"].get<bool>());
  }
  SUBCASE("a failing property exits 2") {
    const auto dir = scratch("young_fail");
    Json c = {{"phi", {{"family", "power"}, {"p", 2}}}, {"r", 3}};
    CHECK(run_cmd(command("young", dir, c)).code == 2);
  }
  SUBCASE("hypothesis refusal exits 3") {
    const auto dir = scratch("refusal");
    Json c = sawyer_json();
    c["experiment"] = "mixed_weak";
    c["v"] = {{"kind", "power"}, {"alpha", -0.75}};
    c["r"] = 2;
    c["phi"] = {{"family", "log_power"}, {"r", 2}, {"delta", 1}};
    const auto r = run_cmd(command("verify", dir, c));
    CHECK(r.code == 3);
    CHECK(r.out.find("refused") != std::string::npos);
  }
  SUBCASE("decompose with lambda <= 0 exits 1") {
    const auto dir = scratch("lambda");
    Json c = {{"mesh", {{"dim", 1}, {"half_width", 4}, {"cells", 64}}},
              {"f", {{"kind", "indicator"}, {"lo", {0}}, {"hi", {1}}}},
              {"lambda", 0}};
    const auto r = run_cmd(command("decompose", dir, c));
    CHECK(r.code == 1);
    CHECK(r.err.find("/lambda") != std::string::npos);
    c["lambda"] = 0.3;
    CHECK(run_cmd(command("decompose", dir, c)).code == 0);
    CHECK(slurp(dir / "out" / "cubes.csv").rfind("k,j,grid,level,corner,avg_v,avg_u,luxemburg_g\n", 0) == 0);
  }
  SUBCASE("unknown subcommand and missing file") {
    const auto dir = scratch("usage");
    auto s = command("verify", dir, sawyer_json());
    s.subcommand = "plot";
    CHECK(run_cmd(s).code == 1);
    s.subcommand = "verify";
    s.config = dir / "missing.json";
    CHECK(run_cmd(s).code == 1);
  }
}

TEST_CASE("cli config diagnostics point into the JSON") {
  const auto dir = scratch("diagnostics");
  SUBCASE("unknown key") {
    Json c = sawyer_json();
    c["f"]["bogus"] = 1;
    const auto r = run_cmd(command("verify", dir, c));
    CHECK(r.code == 1);
    CHECK(r.err.find("/f/bogus") != std::string::npos);
    CHECK(r.err.find("unknown key") != std::string::npos);
  }
  SUBCASE("unknown top-level key") {
    Json c = sawyer_json();
    c["colour"] = "blue";
    const auto r = run_cmd(command("verify", dir, c));
    CHECK(r.code == 1);
    CHECK(r.err.find("/colour") != std::string::npos);
  }
  SUBCASE("type error") {
    Json c = sawyer_json();
    c["mesh"]["cells"] = "many";
    const auto r = run_cmd(command("verify", dir, c));
    CHECK(r.code == 1);
    CHECK(r.err.find("/mesh/cells") != std::string::npos);
  }
  SUBCASE("array element") {
    Json c = sawyer_json();
    c["t_grid"]["values"][1] = -1;
    const auto r = run_cmd(command("verify", dir, c));
    CHECK(r.code == 1);
    CHECK(r.err.find("/t_grid/values/1") != std::string::npos);
  }
  SUBCASE("bad mesh") {
    Json c = sawyer_json();
    c["mesh"]["cells"] = 100;
    const auto r = run_cmd(command("verify", dir, c));
    CHECK(r.code == 1);
    CHECK(r.err.find("/mesh") != std::string::npos);
  }
  SUBCASE("unknown family") {
    Json c = sawyer_json();
    c["phi"]["family"] = "exp";
    const auto r = run_cmd(command("verify", dir, c));
    CHECK(r.code == 1);
    CHECK(r.err.find("/phi/family") != std::string::npos);
  }
  SUBCASE("malformed JSON") {
    CommandSpec s;
    s.subcommand = "verify";
    s.config = dir / "broken.json";
    s.out = dir / "out";
    write_text(s.config, "{\"mesh\": ");
    const auto r = run_cmd(s);
    CHECK(r.code == 1);
    CHECK(r.err.find("malformed") != std::string::npos);
  }
  SUBCASE("sawyer rejects Phi != t") {
    Json c = sawyer_json();
    c["phi"] = {{"family", "power"}, {"p", 2}};
    c["r"] = 2;
    CHECK(run_cmd(command("verify", dir, c)).code == 1);
  }
}

TEST_CASE("cli determinism and manifest") {
  const auto a = scratch("det_a");
  const auto b = scratch("det_b");
  auto sa = command("verify", a, random_mixed_json());
  auto sb = command("verify", b, random_mixed_json());
  sb.threads = 2;
  const auto ra = run_cmd(sa);
  const auto rb = run_cmd(sb);
  CHECK(ra.code == rb.code);
  const auto rows = slurp(a / "out" / "rows.csv");
  CHECK(rows.size() > 100);
  CHECK(rows == slurp(b / "out" / "rows.csv"));
  CHECK(slurp(a / "out" / "fields" / "f.bin") == slurp(b / "out" / "fields" / "f.bin"));

  const Json manifest = read_json(a / "out" / "manifest.json");
  CHECK(manifest["subcommand"] == "verify");
  CHECK(manifest["seed"] == 5);
  CHECK(manifest["config_hash"] == config_hash(manifest["config"]));
  CHECK(manifest["versions"].contains("mwlab"));
  CHECK_FALSE(manifest.contains("timestamp"));

  SUBCASE("rerun from the manifest config") {
    const auto c = scratch("det_c");
    CommandSpec sc;
    sc.subcommand = manifest["subcommand"].get<std::string>();
    sc.config = a / "out" / "config.json";
    sc.out = c / "out";
    CHECK(run_cmd(sc).code == ra.code);
    CHECK(slurp(c / "out" / "rows.csv") == rows);
  }
  SUBCASE("seed override changes the sample") {
    const auto c = scratch("det_seed");
    auto sc = command("verify", c, random_mixed_json());
    sc.seed = 6;
    run_cmd(sc);
    CHECK(slurp(c / "out" / "fields" / "f.bin") != slurp(a / "out" / "fields" / "f.bin"));
    CHECK(read_json(c / "out" / "manifest.json")["config"]["seed"] == 6);
  }
  SUBCASE("key overrides") {
    const auto c = scratch("det_set");
    auto sc = command("verify", c, random_mixed_json());
    sc.overrides = {"mesh.cells=256", "name=\"renamed\""};
    CHECK(run_cmd(sc).code == ra.code);
    const Json m = read_json(c / "out" / "manifest.json");
    CHECK(m["config"]["mesh"]["cells"] == 256);
    CHECK(read_json(c / "out" / "report.json")["name"] == "renamed");
    CHECK(m["config_hash"] != manifest["config_hash"]);
    sc.overrides = {"mesh.bogus=1"};
    const auto bad = run_cmd(sc);
    CHECK(bad.code == 1);
    CHECK(bad.err.find("/mesh/bogus") != std::string::npos);
  }
}

TEST_CASE("field files round-trip") {
  const auto dir = scratch("fields");
  const Mesh mesh(2, 2.0, 8);
  const auto f = FunctionSpec::random(4, 2.0, 2, 4).build(mesh);
  write_field(f, dir, "f");
  const auto g = read_field(dir / "f.json");
  CHECK(g.mesh() == mesh);
  CHECK(g.kind() == FieldKind::Function);
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(g[i] == f[i]);
  CHECK(fs::file_size(dir / "f.bin") == mesh.size() * sizeof(double));
}

TEST_CASE("csv numbers") {
  CHECK(csv_number(0.1) == "0.10000000000000001");
  CHECK(csv_number(2.0) == "2");
  CHECK(csv_number(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(csv_number(std::nan("")) == "nan");
  CHECK(json_number(-std::numeric_limits<double>::infinity()) == "-inf");
}

TEST_CASE("command line parsing") {
  const auto dir = scratch("argv");
  const Json c = {{"mesh", {{"dim", 1}, {"half_width", 4}, {"cells", 64}}},
                  {"f", {{"kind", "indicator"}, {"lo", {0}}, {"hi", {1}}}},
                  {"lambda", 0.3}};
  const auto config = write_config(dir, c).string();
  const auto out = (dir / "out").string();
  auto call = [](std::vector<std::string> args) {
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    return run_main(static_cast<int>(argv.size()), argv.data());
  };
  CHECK(call({"mwlab", "decompose", "-c", config, "-o", out, "--seed", "11"}) == 0);
  CHECK(read_json(dir / "out" / "manifest.json")["seed"] == 11);
  CHECK(call({"mwlab", "decompose", "-c", config, "-o", out, "--set", "lambda=0"}) == 1);
  CHECK(call({"mwlab", "decompose", "-c", config, "-o", out, "--resolution-doubling"}) == 1);
  CHECK(call({"mwlab", "decompose"}) == 1);
  CHECK(call({"mwlab"}) == 1);
}
