#include "qkr/config.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "qkr/errors.hpp"

namespace qkr {

std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

[[noreturn]] void fail(int line, const std::string& msg) {
  throw ConfigError("config line " + std::to_string(line) + ": " + msg);
}

double to_double(const ConfigFile::Entry& e) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(e.value, &pos);
    if (pos != e.value.size()) throw std::invalid_argument(e.value);
    return v;
  } catch (const ConfigError&) {
    throw;
  } catch (...) {
    fail(e.line, "invalid number for '" + e.key + "': '" + e.value + "'");
  }
}

std::int64_t to_int(const ConfigFile::Entry& e) {
  try {
    std::size_t pos = 0;
    const std::int64_t v = std::stoll(e.value, &pos);
    if (pos != e.value.size()) throw std::invalid_argument(e.value);
    return v;
  } catch (const ConfigError&) {
    throw;
  } catch (...) {
    fail(e.line, "invalid integer for '" + e.key + "': '" + e.value + "'");
  }
}

std::uint64_t to_u64(const ConfigFile::Entry& e) {
  try {
    std::size_t pos = 0;
    const std::uint64_t v = std::stoull(e.value, &pos);
    if (pos != e.value.size() || e.value.front() == '-')
      throw std::invalid_argument(e.value);
    return v;
  } catch (const ConfigError&) {
    throw;
  } catch (...) {
    fail(e.line, "invalid unsigned integer for '" + e.key + "': '" + e.value +
                     "'");
  }
}

FreqRatio to_ratio(const ConfigFile::Entry& e) {
  const auto slash = e.value.find('/');
  try {
    if (slash != std::string::npos) {
      const std::int64_t num = std::stoll(e.value.substr(0, slash));
      const std::int64_t den = std::stoll(e.value.substr(slash + 1));
      return FreqRatio::from_rational(num, den);
    }
    std::size_t pos = 0;
    const double v = std::stod(e.value, &pos);
    if (pos != e.value.size()) throw std::invalid_argument(e.value);
    return FreqRatio::from_double(v);
  } catch (const ConfigError&) {
    throw;
  } catch (...) {
    fail(e.line, "invalid ratio for '" + e.key + "' (use num/den or a float)");
  }
}

Engine to_engine(const std::string& v, int line) {
  if (v == "quantum") return Engine::quantum;
  if (v == "classical") return Engine::classical;
  if (line > 0) fail(line, "engine must be 'quantum' or 'classical'");
  throw ConfigError("config: engine must be 'quantum' or 'classical'");
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (const char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

ConfigFile parse_config_text(const std::string& text) {
  ConfigFile file;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = trim(raw);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    if (s.front() == '[') {
      if (s.back() != ']') fail(line, "unterminated section header");
      section = trim(std::string_view(s).substr(1, s.size() - 2));
      if (section.empty()) fail(line, "empty section name");
      file.sections[section];  // a section may legitimately stay empty
      file.section_lines.emplace(section, line);
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) fail(line, "expected 'key = value'");
    if (section.empty()) fail(line, "key outside any [section]");
    ConfigFile::Entry e;
    e.key = trim(std::string_view(s).substr(0, eq));
    e.value = trim(std::string_view(s).substr(eq + 1));
    e.line = line;
    if (e.key.empty()) fail(line, "empty key");
    if (e.value.empty()) fail(line, "empty value for '" + e.key + "'");
    file.sections[section].push_back(std::move(e));
  }
  return file;
}

ConfigFile parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const std::string tok =
        trim(text.substr(start, comma == std::string::npos ? std::string::npos
                                                           : comma - start));
    if (tok.empty()) throw ConfigError("a-grid: empty element in '" + text + "'");
    try {
      std::size_t pos = 0;
      grid.push_back(std::stod(tok, &pos));
      if (pos != tok.size()) throw std::invalid_argument(tok);
    } catch (const ConfigError&) {
      throw;
    } catch (...) {
      throw ConfigError("a-grid: invalid number '" + tok + "'");
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return grid;
}

const std::vector<Preset>& presets() {
  static const std::vector<Preset> table = [] {
    auto row = [](int idx, double f1, double det, double power, double tau,
                  double k, double hb, std::int64_t n, double c) {
      Preset p;
      p.name = "table1_row" + std::to_string(idx);
      p.scaled.kick_strength = k;
      p.scaled.hbar_eff = hb;
      p.scaled.amp_ratio = 0;
      p.scaled.freq_ratio = FreqRatio::from_rational(681, 1000);
      p.scaled.n_kicks = n;
      p.scaled.pulse_frac = 0;  // ideal kicks; tau kept as audit metadata
      p.lab.f1 = f1;
      p.lab.detuning = det;
      p.lab.power = power;
      p.lab.pulse_duration = tau;
      p.lab.temperature = 3e-6;
      p.loc_time_const = c;
      return p;
    };
    return std::vector<Preset>{
        row(1, 30e3, -18.8e9, 95e-3, 0.6e-6, 6.8, 3.46, 35, 3.6),
        row(2, 36e3, -15.6e9, 95e-3, 0.6e-6, 6.8, 2.88, 50, 3.6),
        row(3, 54e3, -10.5e9, 95e-3, 0.6e-6, 6.8, 1.92, 113, 3.6),
        row(4, 72e3, -7.9e9, 95e-3, 0.6e-6, 6.8, 1.44, 200, 3.6),
        row(5, 30e3, -21.3e9, 62e-3, 0.7e-6, 4.5, 3.46, 18, 4.2),
        row(6, 30e3, -21.3e9, 87e-3, 0.7e-6, 6.3, 3.46, 35, 4.2),
        row(7, 30e3, -21.3e9, 123e-3, 0.7e-6, 8.9, 3.46, 70, 4.2),
    };
  }();
  return table;
}

const Preset& find_preset(const std::string& name) {
  for (const Preset& p : presets())
    if (p.name == name) return p;
  std::string known;
  for (const Preset& p : presets()) {
    if (!known.empty()) known += ", ";
    known += p.name;
  }
  throw ConfigError("config: unknown preset '" + name + "' (known: " + known +
                    ")");
}

RunSpec resolve_config(const ConfigFile& file, const Overrides& overrides) {
  for (const auto& [name, entries] : file.sections) {
    (void)entries;
    if (name != "run" && name != "scaled" && name != "lab" &&
        name != "ensemble" && name != "analysis") {
      const auto it = file.section_lines.find(name);
      fail(it == file.section_lines.end() ? 0 : it->second,
           "unknown section [" + name + "]");
    }
  }

  RunSpec spec;
  bool seed_set = false;
  std::uint64_t seed = 0;
  std::string preset_name;
  bool init_sigma_set = false;

  if (file.has("run")) {
    for (const auto& e : file.sections.at("run")) {
      if (e.key == "engine")
        spec.engine = to_engine(e.value, e.line);
      else if (e.key == "seed") {
        seed = to_u64(e);
        seed_set = true;
      } else if (e.key == "threads")
        spec.ens.threads = static_cast<int>(to_int(e));
      else if (e.key == "out")
        spec.out_dir = e.value;
      else if (e.key == "preset")
        preset_name = e.value;
      else
        fail(e.line, "unknown key '" + e.key + "' in [run]");
    }
  }
  if (overrides.preset) preset_name = *overrides.preset;

  const bool has_lab = file.has("lab");
  const bool has_scaled = file.has("scaled");
  if (has_lab && (has_scaled || !preset_name.empty()))
    throw ConfigError(
        "config: [lab] cannot be combined with [scaled] or a preset");
  if (!has_lab && !has_scaled && preset_name.empty())
    throw ConfigError(
        "config: no physics parameters; provide [scaled], [lab], or a preset");

  if (!preset_name.empty()) {
    const Preset& pr = find_preset(preset_name);
    spec.params = pr.scaled;
    spec.lab = pr.lab;
    spec.preset = pr.name;
  }

  if (has_lab) {
    LabParams lab;
    std::optional<double> amp_ratio;
    std::optional<FreqRatio> ratio;
    std::optional<std::int64_t> n_kicks;
    for (const auto& e : file.sections.at("lab")) {
      if (e.key == "f1")
        lab.f1 = to_double(e);
      else if (e.key == "detuning")
        lab.detuning = to_double(e);
      else if (e.key == "power")
        lab.power = to_double(e);
      else if (e.key == "pulse_duration")
        lab.pulse_duration = to_double(e);
      else if (e.key == "rabi_sq")
        lab.rabi_sq = to_double(e);
      else if (e.key == "temperature")
        lab.temperature = to_double(e);
      else if (e.key == "atom_mass")
        lab.atom_mass = to_double(e);
      else if (e.key == "wavenumber")
        lab.wavenumber = to_double(e);
      else if (e.key == "amp_ratio")  // dimensionless schedule knobs are
        amp_ratio = to_double(e);     // accepted lab-side as well
      else if (e.key == "freq_ratio")
        ratio = to_ratio(e);
      else if (e.key == "n_kicks")
        n_kicks = to_int(e);
      else
        fail(e.line, "unknown key '" + e.key + "' in [lab]");
    }
    lab.validate();
    if (!lab.rabi_sq)
      throw ConfigError(
          "config: [lab] requires rabi_sq to derive the kick strength (the "
          "laser power alone does not determine it)");
    if (!n_kicks) throw ConfigError("config: [lab] requires n_kicks");
    spec.lab = lab;
    spec.params.hbar_eff = hbar_eff(lab);
    spec.params.kick_strength = kick_strength(lab);
    spec.params.pulse_frac = lab.pulse_duration * lab.f1;
    spec.params.amp_ratio = amp_ratio.value_or(0);
    if (ratio) spec.params.freq_ratio = *ratio;
    spec.params.n_kicks = *n_kicks;
  }

  if (has_scaled) {
    for (const auto& e : file.sections.at("scaled")) {
      if (e.key == "kick_strength")
        spec.params.kick_strength = to_double(e);
      else if (e.key == "hbar_eff")
        spec.params.hbar_eff = to_double(e);
      else if (e.key == "amp_ratio")
        spec.params.amp_ratio = to_double(e);
      else if (e.key == "freq_ratio")
        spec.params.freq_ratio = to_ratio(e);
      else if (e.key == "n_kicks")
        spec.params.n_kicks = to_int(e);
      else if (e.key == "pulse_frac")
        spec.params.pulse_frac = to_double(e);
      else
        fail(e.line, "unknown key '" + e.key + "' in [scaled]");
    }
  }

  if (file.has("ensemble")) {
    for (const auto& e : file.sections.at("ensemble")) {
      if (e.key == "n_traj")
        spec.ens.n_traj = to_int(e);
      else if (e.key == "init_sigma") {
        spec.ens.init_sigma = to_double(e);
        init_sigma_set = true;
      } else if (e.key == "detect_halfwidth")
        spec.ens.detect_halfwidth = to_double(e);
      else if (e.key == "beam_model") {
        if (e.value == "off")
          spec.ens.beam_model = BeamModel::off;
        else if (e.value == "gaussian")
          spec.ens.beam_model = BeamModel::gaussian;
        else
          fail(e.line, "beam_model must be 'off' or 'gaussian'");
      } else if (e.key == "cloud_to_waist")
        spec.ens.cloud_to_waist = to_double(e);
      else if (e.key == "se_prob")
        spec.ens.se_prob = to_double(e);
      else if (e.key == "n_max")
        spec.ens.n_max = static_cast<int>(to_int(e));
      else if (e.key == "substeps")
        spec.ens.substeps = static_cast<int>(to_int(e));
      else if (e.key == "bootstrap")
        spec.ens.bootstrap_resamples = static_cast<int>(to_int(e));
      else
        fail(e.line, "unknown key '" + e.key + "' in [ensemble]");
    }
  }

  if (file.has("analysis")) {
    for (const auto& e : file.sections.at("analysis")) {
      if (e.key == "a_grid")
        spec.analysis.a_grid = parse_grid(e.value);
      else if (e.key == "tolerance")
        spec.analysis.tolerance = to_double(e);
      else if (e.key == "core_exclusion")
        spec.analysis.core_exclusion = static_cast<int>(to_int(e));
      else
        fail(e.line, "unknown key '" + e.key + "' in [analysis]");
    }
  }

  if (overrides.engine) spec.engine = to_engine(*overrides.engine, 0);
  if (overrides.seed) {
    seed = *overrides.seed;
    seed_set = true;
  }
  if (overrides.threads) spec.ens.threads = *overrides.threads;
  if (overrides.a_grid) spec.analysis.a_grid = *overrides.a_grid;
  if (overrides.tolerance) spec.analysis.tolerance = *overrides.tolerance;
  if (overrides.amp_ratio) spec.params.amp_ratio = *overrides.amp_ratio;
  if (overrides.n_traj) spec.ens.n_traj = *overrides.n_traj;
  if (overrides.out_dir) spec.out_dir = *overrides.out_dir;

  if (!seed_set)
    throw ConfigError(
        "config: an explicit seed is required ([run] seed or --seed); there "
        "is no silent time-based seeding");
  spec.ens.seed = seed;

  // Lab-side runs default the thermal spread from the cloud temperature.
  if (!init_sigma_set && spec.lab && spec.lab->temperature > 0)
    spec.ens.init_sigma = thermal_sigma(*spec.lab);

  spec.params.validate();
  spec.ens.validate();
  if (!(spec.analysis.tolerance > 0))
    throw ConfigError("config: analysis tolerance must be > 0");
  if (spec.analysis.core_exclusion < 0)
    throw ConfigError("config: core_exclusion must be >= 0");
  return spec;
}

std::string canonical_text(const RunSpec& spec) {
  std::string s;
  s += "[run]\n";
  s += "engine = ";
  s += spec.engine == Engine::quantum ? "quantum" : "classical";
  s += "\nseed = " + std::to_string(spec.ens.seed) + "\n";
  if (!spec.preset.empty()) s += "preset = " + spec.preset + "\n";
  s += "\n[scaled]\n";
  s += "kick_strength = " + fmt_g17(spec.params.kick_strength) + "\n";
  s += "hbar_eff = " + fmt_g17(spec.params.hbar_eff) + "\n";
  s += "amp_ratio = " + fmt_g17(spec.params.amp_ratio) + "\n";
  if (spec.params.freq_ratio.exact())
    s += "freq_ratio = " + std::to_string(spec.params.freq_ratio.num()) + "/" +
         std::to_string(spec.params.freq_ratio.den()) + "\n";
  else
    s += "freq_ratio = " + fmt_g17(spec.params.freq_ratio.value()) + "\n";
  s += "n_kicks = " + std::to_string(spec.params.n_kicks) + "\n";
  s += "pulse_frac = " + fmt_g17(spec.params.pulse_frac) + "\n";
  s += "\n[ensemble]\n";
  s += "n_traj = " + std::to_string(spec.ens.n_traj) + "\n";
  s += "init_sigma = " + fmt_g17(spec.ens.init_sigma) + "\n";
  s += "detect_halfwidth = " + fmt_g17(spec.ens.detect_halfwidth) + "\n";
  s += "beam_model = ";
  s += spec.ens.beam_model == BeamModel::off ? "off" : "gaussian";
  s += "\ncloud_to_waist = " + fmt_g17(spec.ens.cloud_to_waist) + "\n";
  s += "se_prob = " + fmt_g17(spec.ens.se_prob) + "\n";
  s += "n_max = " + std::to_string(spec.ens.n_max) + "\n";
  s += "substeps = " + std::to_string(spec.ens.substeps) + "\n";
  s += "bootstrap = " + std::to_string(spec.ens.bootstrap_resamples) + "\n";
  s += "\n[analysis]\n";
  if (!spec.analysis.a_grid.empty()) {
    s += "a_grid = ";
    for (std::size_t i = 0; i < spec.analysis.a_grid.size(); ++i) {
      if (i) s += ",";
      s += fmt_g17(spec.analysis.a_grid[i]);
    }
    s += "\n";
  }
  s += "tolerance = " + fmt_g17(spec.analysis.tolerance) + "\n";
  s += "core_exclusion = " + std::to_string(spec.analysis.core_exclusion) +
       "\n";
  return s;
}

std::uint64_t config_hash(const RunSpec& spec) {
  return fnv1a(canonical_text(spec));
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace qkr
