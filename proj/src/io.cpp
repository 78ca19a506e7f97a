#include "qkr/io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "qkr/errors.hpp"

namespace qkr {

namespace {

using nlohmann::json;

std::string version_line(std::string_view schema) {
  std::string s = "# ";
  s += schema;
  s += " v";
  s += kArtifactVersion;
  s += "\n";
  return s;
}

json params_json(const RunSpec& spec) {
  json j;
  j["kick_strength"] = spec.params.kick_strength;
  j["hbar_eff"] = spec.params.hbar_eff;
  j["amp_ratio"] = spec.params.amp_ratio;
  if (spec.params.freq_ratio.exact())
    j["freq_ratio"] = std::to_string(spec.params.freq_ratio.num()) + "/" +
                      std::to_string(spec.params.freq_ratio.den());
  else
    j["freq_ratio"] = spec.params.freq_ratio.value();
  j["n_kicks"] = spec.params.n_kicks;
  j["pulse_frac"] = spec.params.pulse_frac;
  j["atilde"] = scaled_amplitude(spec.params);
  return j;
}

}  // namespace

std::string embedded_config_block(const RunSpec& spec) {
  std::string block = "# config-hash: " + hash_hex(config_hash(spec)) + "\n";
  block += "# begin-config\n";
  std::istringstream in(canonical_text(spec));
  std::string line;
  while (std::getline(in, line))
    block += line.empty() ? "#\n" : "# " + line + "\n";
  block += "# end-config\n";
  if (!spec.preset.empty()) block += "# preset: " + spec.preset + "\n";
  if (spec.lab) {
    block += "# lab audit: f1 = " + fmt_g17(spec.lab->f1) +
             ", detuning = " + fmt_g17(spec.lab->detuning) +
             ", power = " + fmt_g17(spec.lab->power) +
             ", pulse_duration = " + fmt_g17(spec.lab->pulse_duration) +
             ", temperature = " + fmt_g17(spec.lab->temperature) + "\n";
  }
  return block;
}

std::string extract_embedded_config(const std::string& file_text) {
  std::istringstream in(file_text);
  std::string line, out;
  bool inside = false, found = false;
  while (std::getline(in, line)) {
    if (line == "# begin-config") {
      inside = true;
      found = true;
      continue;
    }
    if (line == "# end-config") break;
    if (!inside) continue;
    if (line.rfind("# ", 0) == 0)
      out += line.substr(2) + "\n";
    else if (line == "#")
      out += "\n";
    else
      throw Error("io: malformed embedded config line: " + line);
  }
  if (!found) throw Error("io: no embedded config block found");
  return out;
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("io: cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw Error("io: failed writing '" + path.string() + "'");
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io: cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_histogram_csv(const std::filesystem::path& path,
                         const RunResult& result, const RunSpec& spec) {
  std::string s = version_line("qkr-hist-1");
  s += embedded_config_block(spec);
  s += "# n_traj = " + std::to_string(result.hist.n_traj) + "\n";
  s += "# pi0 = " + fmt_g17(result.pi0) + "\n";
  s += "# p2 = " + fmt_g17(result.p2) + "\n";
  s += "n,prob\n";
  for (std::size_t i = 0; i < result.hist.bins.size(); ++i) {
    s += std::to_string(result.hist.n_min + static_cast<std::int64_t>(i));
    s += ",";
    s += fmt_g17(result.hist.bins[i]);
    s += "\n";
  }
  write_text_file(path, s);
}

void write_summary_json(const std::filesystem::path& path,
                        const RunResult& result, const RunSpec& spec) {
  json j;
  j["schema"] = "qkr-summary-1";
  j["version"] = std::string(kArtifactVersion);
  j["config_hash"] = hash_hex(config_hash(spec));
  j["config"] = canonical_text(spec);
  j["engine"] = spec.engine == Engine::quantum ? "quantum" : "classical";
  j["seed"] = spec.ens.seed;
  if (!spec.preset.empty()) j["preset"] = spec.preset;
  j["n_traj"] = spec.ens.n_traj;
  j["pi0"] = result.pi0;
  j["pi0_err"] = result.pi0_err;
  j["p2"] = result.p2;
  j["p2_series"] = result.p2_series;
  j["se_events"] = result.se_events;
  j["params"] = params_json(spec);
  write_text_file(path, j.dump(2) + "\n");
}

void write_schedule_csv(const std::filesystem::path& path,
                        const KickTimeline& timeline, const RunSpec& spec) {
  std::string s = version_line("qkr-schedule-1");
  s += embedded_config_block(spec);
  s += "time,amplitude,tag\n";
  for (const KickEvent& e : timeline.events) {
    s += fmt_g17(e.time);
    s += ",";
    s += fmt_g17(e.amplitude);
    s += ",";
    s += to_string(e.tag);
    s += "\n";
  }
  write_text_file(path, s);
}

void write_snapshot_csv(const std::filesystem::path& path,
                        const QuantumState& state) {
  std::string s = version_line("qkr-snapshot-1");
  s += "# time = " + fmt_g17(state.time()) + "\n";
  s += "# beta = " + fmt_g17(state.beta()) + "\n";
  s += "n,re,im\n";
  const int half = state.length() / 2;
  for (int n = -half; n < half; ++n) {
    const std::complex<double> a = state.amp(n);
    s += std::to_string(n);
    s += ",";
    s += fmt_g17(a.real());
    s += ",";
    s += fmt_g17(a.imag());
    s += "\n";
  }
  write_text_file(path, s);
}

void write_sweep_csv(const std::filesystem::path& path, const SweepCurve& curve,
                     const RunSpec& spec) {
  std::string s = version_line("qkr-sweep-1");
  s += embedded_config_block(spec);
  s += "# normalization = " + fmt_g17(curve.normalization) + "\n";
  s += "a,atilde,pi0,pi0_err\n";
  for (const SweepPoint& pt : curve.points) {
    s += fmt_g17(pt.a);
    s += ",";
    s += fmt_g17(pt.atilde);
    s += ",";
    s += fmt_g17(pt.pi0);
    s += ",";
    s += fmt_g17(pt.pi0_err);
    s += "\n";
  }
  write_text_file(path, s);
}

namespace {

double parse_csv_double(const std::string& tok, const std::string& path) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (...) {
    throw Error("io: bad numeric field '" + tok + "' in " + path);
  }
}

}  // namespace

SweepCurve read_sweep_csv(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("# qkr-sweep-1 ", 0) != 0)
    throw Error("io: '" + path.string() +
                "' is not a qkr-sweep-1 file (incompatible schema)");

  const RunSpec spec =
      resolve_config(parse_config_text(extract_embedded_config(text)), {});
  SweepCurve curve;
  curve.params = spec.params;
  curve.params.amp_ratio = 0;

  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string key = "# normalization = ";
      if (line.rfind(key, 0) == 0)
        curve.normalization = parse_csv_double(line.substr(key.size()),
                                               path.string());
      continue;
    }
    if (!header_seen) {
      if (line != "a,atilde,pi0,pi0_err")
        throw Error("io: unexpected column header in " + path.string());
      header_seen = true;
      continue;
    }
    SweepPoint pt;
    std::istringstream row(line);
    std::string tok;
    double* fields[4] = {&pt.a, &pt.atilde, &pt.pi0, &pt.pi0_err};
    for (double* f : fields) {
      if (!std::getline(row, tok, ','))
        throw Error("io: short row in " + path.string());
      *f = parse_csv_double(tok, path.string());
    }
    curve.points.push_back(pt);
  }
  if (curve.points.empty())
    throw Error("io: no data rows in " + path.string());
  return curve;
}

void write_collapse_csv(const std::filesystem::path& path,
                        const CollapseReport& report,
                        const std::vector<std::string>& inputs) {
  std::string s = version_line("qkr-collapse-1");
  for (const std::string& name : inputs) s += "# input: " + name + "\n";
  s += "# tolerance = " + fmt_g17(report.tolerance) + "\n";
  s += "# spread_a = " + fmt_g17(report.spread_a) + "\n";
  s += "# spread_atilde = " + fmt_g17(report.spread_atilde) + "\n";
  s += std::string("# collapsed = ") + (report.collapsed ? "true" : "false") +
       "\n";
  s += "axis,x";
  for (std::size_t c = 0; c < report.a_values.size(); ++c)
    s += ",curve" + std::to_string(c);
  s += "\n";
  auto emit = [&s](const char* axis, const std::vector<double>& grid,
                   const std::vector<std::vector<double>>& values) {
    for (std::size_t g = 0; g < grid.size(); ++g) {
      s += axis;
      s += ",";
      s += fmt_g17(grid[g]);
      for (const auto& curve : values) {
        s += ",";
        s += fmt_g17(curve[g]);
      }
      s += "\n";
    }
  };
  emit("a", report.a_grid, report.a_values);
  emit("atilde", report.atilde_grid, report.atilde_values);
  write_text_file(path, s);
}

void write_verdict_json(const std::filesystem::path& path,
                        const CollapseReport& report,
                        const std::vector<std::string>& inputs) {
  json j;
  j["schema"] = "qkr-collapse-verdict-1";
  j["version"] = std::string(kArtifactVersion);
  j["collapsed"] = report.collapsed;
  j["tolerance"] = report.tolerance;
  j["spread_a"] = report.spread_a;
  j["spread_atilde"] = report.spread_atilde;
  j["inputs"] = inputs;
  write_text_file(path, j.dump(2) + "\n");
}

void write_point_json(const std::filesystem::path& path,
                      const PointRecord& rec) {
  json j;
  j["schema"] = "qkr-point-1";
  j["config_hash"] = rec.config_hash;
  j["a"] = rec.a;
  j["atilde"] = rec.atilde;
  j["pi0_raw"] = rec.pi0_raw;
  j["pi0_err_raw"] = rec.pi0_err_raw;
  write_text_file(path, j.dump(2) + "\n");
}

PointRecord read_point_json(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw Error("io: cannot parse '" + path.string() + "': " + e.what());
  }
  if (!j.contains("schema") || j["schema"] != "qkr-point-1")
    throw Error("io: '" + path.string() + "' is not a qkr-point-1 file");
  PointRecord rec;
  rec.config_hash = j.at("config_hash").get<std::string>();
  rec.a = j.at("a").get<double>();
  rec.atilde = j.at("atilde").get<double>();
  rec.pi0_raw = j.at("pi0_raw").get<double>();
  rec.pi0_err_raw = j.at("pi0_err_raw").get<double>();
  return rec;
}

}  // namespace qkr
