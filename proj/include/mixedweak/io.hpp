#pragma once

#include "mixedweak/czdecomp.hpp"
#include "mixedweak/specs.hpp"
#include "mixedweak/verify.hpp"
#include "mixedweak/weights.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

namespace mw {

using Json = nlohmann::ordered_json;

/// Malformed config; `path` points into the JSON document ("/f/lo/0").
class ConfigError : public InputError {
 public:
  ConfigError(const std::string& path, const std::string& what)
      : InputError(path + ": " + what), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

/// Strict view of a JSON object: every key read is recorded and finish()
/// rejects the rest.
class ConfigNode {
 public:
  ConfigNode(const Json& j, std::string path);

  const std::string& path() const { return path_; }
  const Json& json() const { return *j_; }
  bool has(const std::string& key) const;
  std::string key_path(const std::string& key) const { return path_ + "/" + key; }

  ConfigNode child(const std::string& key) const;
  const Json& raw(const std::string& key) const;

  double number(const std::string& key) const;
  double number(const std::string& key, double fallback) const;
  int integer(const std::string& key) const;
  int integer(const std::string& key, int fallback) const;
  std::uint64_t seed(const std::string& key, std::uint64_t fallback) const;
  bool boolean(const std::string& key, bool fallback) const;
  std::string string(const std::string& key) const;
  std::string string(const std::string& key, const std::string& fallback) const;
  std::vector<double> numbers(const std::string& key) const;

  /// Marks keys as accepted without reading them.
  void accept(std::initializer_list<const char*> keys) const;
  void finish() const;

 private:
  const Json* j_;
  std::string path_;
  mutable std::set<std::string> used_;
};

Mesh parse_mesh(const ConfigNode& node);
YoungSpec parse_young(const ConfigNode& node);
WeightSpec parse_weight(const ConfigNode& node);
FunctionSpec parse_function(const ConfigNode& node);
TGridSpec parse_t_grid(const ConfigNode& node);
MaximalMode parse_mode(const std::string& s, const std::string& path);
CubeFamilySpec parse_cube_family(const ConfigNode& node);

/// Reads the experiment keys of `node` (mesh, u, v, r, phi, f, t_grid, mode,
/// grid_id, a, beta, seed, resolution_doubling, homogeneity_check,
/// scan_cells, name). Leaves finish() to the caller.
ExperimentConfig parse_experiment(const ConfigNode& node);

Json to_json(const YoungSpec& s);
Json to_json(const WeightSpec& s);
Json to_json(const FunctionSpec& s);
Json to_json(const Mesh& m);
Json to_json(const Cube& q, int dim);
Json to_json(const CellRange& r);
Json to_json(const FrReport& r);
Json to_json(const MuckenhouptReport& r);
Json to_json(const RhReport& r);
Json to_json(const AinftyFit& r);
Json to_json(const RefinementScan& r);
Json to_json(const BpReport& r);
Json to_json(const OrderCheckReport& r);
Json to_json(const InverseProductReport& r);
Json to_json(const VerificationReport& r);
Json to_json(const MwWeakReport& r);
Json to_json(const SphiLinfReport& r);
Json to_json(const InterpolationReport& r);
Json to_json(const LpReport& r);
Json to_json(const DecompositionForest& f, int dim);
Json to_json(const PrincipalForest& f, int dim);
Json to_json(const PrincipalAudit& a);
Json to_json(const ClaimReport& c);
Json to_json(const Claim2Constants& c);
Json to_json(const Claim2Report& c, int dim);
Json to_json(const Claim3Report& c, int dim);
Json to_json(const ClaimsBattery& b, int dim);

/// Numbers are written with 17 significant digits; non-finite values as
/// "inf", "-inf", "nan".
std::string csv_number(double x);
/// A JSON number, or the same text as csv_number when not finite.
Json json_number(double x);
std::string rows_csv(const std::vector<ReportRow>& rows);

/// fields/<name>.bin (float64 little-endian, axis 0 fastest) and
/// fields/<name>.json (mesh and kind).
void write_field(const SampledField& f, const std::filesystem::path& dir, const std::string& name);
/// Reads a field from its JSON header; the .bin file sits next to it.
SampledField read_field(const std::filesystem::path& header);

/// FNV-1a 64 of the canonical dump, as 16 hex digits.
std::string config_hash(const Json& config);
void write_text(const std::filesystem::path& path, const std::string& text);
Json read_json(const std::filesystem::path& path);

}  // namespace mw
