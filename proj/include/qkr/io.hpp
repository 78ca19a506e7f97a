#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "qkr/analysis.hpp"
#include "qkr/config.hpp"
#include "qkr/qprop.hpp"
#include "qkr/schedule.hpp"

namespace qkr {

// Comment block embedded at the top of every output file:
//   # begin-config
//   # <canonical config, line by line>
//   # end-config
// extract_embedded_config inverts the prefixing exactly, so a run can be
// reproduced from any of its outputs.
std::string embedded_config_block(const RunSpec& spec);
std::string extract_embedded_config(const std::string& file_text);

void write_text_file(const std::filesystem::path& path,
                     const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

void write_histogram_csv(const std::filesystem::path& path,
                         const RunResult& result, const RunSpec& spec);
void write_summary_json(const std::filesystem::path& path,
                        const RunResult& result, const RunSpec& spec);
void write_schedule_csv(const std::filesystem::path& path,
                        const KickTimeline& timeline, const RunSpec& spec);
void write_snapshot_csv(const std::filesystem::path& path,
                        const QuantumState& state);

void write_sweep_csv(const std::filesystem::path& path, const SweepCurve& curve,
                     const RunSpec& spec);
// Restores curve points and (via the embedded config) the parameter
// snapshot. Rejects files with a different schema line.
SweepCurve read_sweep_csv(const std::filesystem::path& path);

void write_collapse_csv(const std::filesystem::path& path,
                        const CollapseReport& report,
                        const std::vector<std::string>& inputs);
void write_verdict_json(const std::filesystem::path& path,
                        const CollapseReport& report,
                        const std::vector<std::string>& inputs);

// Per-point cache records for resumable sweeps. Raw (unnormalized) pi0 is
// stored; normalization happens when the curve is assembled, so a resumed
// sweep is byte-identical to an uninterrupted one.
struct PointRecord {
  std::string config_hash;
  double a = 0;
  double atilde = 0;
  double pi0_raw = 0;
  double pi0_err_raw = 0;
};
void write_point_json(const std::filesystem::path& path,
                      const PointRecord& rec);
PointRecord read_point_json(const std::filesystem::path& path);

}  // namespace qkr
