#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qkr/analysis.hpp"
#include "qkr/ensemble.hpp"
#include "qkr/units.hpp"

namespace qkr {

inline constexpr std::string_view kArtifactVersion = "1.0.0";

struct AnalysisConfig {
  std::vector<double> a_grid;
  double tolerance = kCollapseToleranceDefault;
  int core_exclusion = kCoreExclusionDefault;
};

// Fully resolved run description in dimensionless form. Execution details
// (threads, output directory, snapshots) never change results and are
// excluded from the canonical text and the config hash.
struct RunSpec {
  Engine engine = Engine::quantum;
  ScaledParams params;
  std::optional<LabParams> lab;  // audit metadata when configured lab-side
  EnsembleConfig ens;            // ens.seed mirrors the run seed
  AnalysisConfig analysis;
  std::string preset;            // preset name when one was used
  std::string out_dir = ".";
};

struct Preset {
  std::string name;
  ScaledParams scaled;  // the printed parameter values
  LabParams lab;        // corresponding laboratory-side metadata
  double loc_time_const = kLocTimeConstDefault;
};

const std::vector<Preset>& presets();
const Preset& find_preset(const std::string& name);

// Parsed `[section] key = value` file, order and line numbers preserved.
struct ConfigFile {
  struct Entry {
    std::string key, value;
    int line = 0;
  };
  std::map<std::string, std::vector<Entry>> sections;
  std::map<std::string, int> section_lines;
  bool has(const std::string& section) const {
    return sections.count(section) != 0;
  }
};

ConfigFile parse_config_text(const std::string& text);
ConfigFile parse_config_file(const std::string& path);

// Command-line overrides; applied after the file, before validation.
struct Overrides {
  std::optional<std::string> preset;
  std::optional<std::string> engine;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::vector<double>> a_grid;
  std::optional<double> tolerance;
  std::optional<double> amp_ratio;
  std::optional<std::int64_t> n_traj;
  std::optional<std::string> out_dir;
};

// Merges preset/file/overrides into a validated RunSpec. Exactly one of
// [lab], [scaled], or a preset must define the physics; a preset may be
// refined by [scaled] keys. The seed must be given explicitly.
RunSpec resolve_config(const ConfigFile& file, const Overrides& overrides);

std::vector<double> parse_grid(const std::string& text);  // comma list

// Deterministic dimensionless rendering of the spec: fixed key order,
// 17-significant-digit floats. Feeding this text back through
// parse_config_text/resolve_config reproduces the run.
std::string canonical_text(const RunSpec& spec);

std::uint64_t config_hash(const RunSpec& spec);  // FNV-1a of canonical_text
std::string hash_hex(std::uint64_t h);

std::string fmt_g17(double v);  // %.17g, locale-independent

}  // namespace qkr
