#ifndef COMP_IO_HPP
#define COMP_IO_HPP

#include <string>
#include <vector>

#include "comp/config.hpp"
#include "comp/engine.hpp"
#include "comp/metrics.hpp"

namespace comp::io {

// Deterministic text renderings (17 significant digits for reals; NaN prints
// as "nan" in CSV and null in JSON).
std::string trace_csv(const metrics::MetricsReport& rep);
std::string aggregate_csv(const metrics::MetricsReport& rep);
std::string metrics_json(const metrics::MetricsReport& rep);

// Writes the requested formats into out_dir; returns the file names written.
// formats is a subset of {"csv", "json"}.
std::vector<std::string> emit_metrics(const metrics::MetricsReport& rep,
                                      const std::string& out_dir,
                                      const std::vector<std::string>& formats);

uint64_t file_checksum_fnv64(const std::string& path);

struct RunManifest {
  std::string preset;
  std::string out_dir;
  std::vector<int> seeds;
  std::string config_text;  // normalized scenario the run used
  std::vector<std::pair<std::string, uint64_t>> files;  // name -> FNV-1a64
};

std::string manifest_json(const RunManifest& m);

// Known presets: fig3a, fig3b, fig3c, fig3d, table2.
bool is_preset(const std::string& name);
std::vector<std::string> preset_names();

// Fills preset-specific scenario defaults for keys the user did not set.
void apply_preset_defaults(ParsedConfig& parsed, const std::string& name);

// Default sweep grids.
std::vector<double> fig3a_capacities_gbps();
std::vector<int> fig3b_intervals();
std::vector<double> fig3c_offsets_hz();

// Runs the named experiment, writes plot-ready per-curve files plus
// manifest.json under out_dir, and returns the manifest.
RunManifest run_preset(const std::string& name, const ParsedConfig& parsed,
                       const std::string& out_dir, const std::vector<int>& seeds);

// Single simulation: trace/aggregate/JSON outputs plus manifest.json.
RunManifest run_single(const ParsedConfig& parsed, const std::string& out_dir);

}  // namespace comp::io

#endif
