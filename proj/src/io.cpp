#include "comp/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

namespace comp::io {

namespace {

using nlohmann::json;

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json jnum(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

json jvec(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(jnum(x));
  return a;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write output file: " + path);
  out << content;
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string two_column_csv(const std::string& header,
                           const std::vector<std::vector<double>>& cols) {
  std::string out = header + "\n";
  size_t rows = cols.empty() ? 0 : cols[0].size();
  for (size_t r = 0; r < rows; ++r) {
    for (size_t c = 0; c < cols.size(); ++c) {
      if (c) out += ",";
      out += fmt(cols[c][r]);
    }
    out += "\n";
  }
  return out;
}

}  // namespace

std::string trace_csv(const metrics::MetricsReport& rep) {
  std::string out =
      "slot,user,served,mode,sinr_db,rate_bps,served_bits,queue_bits,buffer_s,"
      "stall_count,download_ratio,kqi_loss,latency_ms\n";
  for (int t = 0; t < rep.n_slots; ++t)
    for (int u = 0; u < rep.n_users; ++u) {
      size_t i = rep.idx(t, u);
      out += std::to_string(t) + "," + std::to_string(u) + ",";
      out += std::to_string(static_cast<int>(rep.served[i])) + ",";
      out += std::to_string(static_cast<int>(rep.slot_mode[t])) + ",";
      out += fmt(rep.sinr_db[i]) + "," + fmt(rep.rate_bps[i]) + ",";
      out += fmt(rep.served_bits[i]) + "," + fmt(rep.queue_bits[i]) + ",";
      out += fmt(rep.buffer_s[i]) + "," + std::to_string(rep.stall_count[i]) + ",";
      out += fmt(rep.download_ratio[i]) + "," + fmt(rep.kqi_loss[i]) + ",";
      out += fmt(rep.latency_ms[i]) + "\n";
    }
  return out;
}

std::string aggregate_csv(const metrics::MetricsReport& rep) {
  std::string out = "user,throughput_bps,download_ratio,pearson,stall_count\n";
  for (int u = 0; u < rep.n_users; ++u) {
    const auto& a = rep.agg;
    if (a.user_throughput_bps.empty()) break;
    out += std::to_string(u) + "," + fmt(a.user_throughput_bps[u]) + ",";
    out += fmt(a.user_download_ratio[u]) + "," + fmt(a.user_pearson[u]) + ",";
    out += std::to_string(a.user_stall_count[u]) + "\n";
  }
  return out;
}

std::string metrics_json(const metrics::MetricsReport& rep) {
  json j;
  j["n_users"] = rep.n_users;
  j["n_slots"] = rep.n_slots;
  j["slot_duration_s"] = rep.slot_duration_s;
  j["traces"]["served"] = rep.served;
  j["traces"]["sinr_db"] = jvec(rep.sinr_db);
  j["traces"]["rate_bps"] = jvec(rep.rate_bps);
  j["traces"]["served_bits"] = jvec(rep.served_bits);
  j["traces"]["queue_bits"] = jvec(rep.queue_bits);
  j["traces"]["buffer_s"] = jvec(rep.buffer_s);
  j["traces"]["stall_count"] = rep.stall_count;
  j["traces"]["download_ratio"] = jvec(rep.download_ratio);
  j["traces"]["kqi_loss"] = jvec(rep.kqi_loss);
  j["traces"]["latency_ms"] = jvec(rep.latency_ms);
  j["traces"]["slot_mode"] = rep.slot_mode;
  const auto& a = rep.agg;
  j["aggregates"]["user_throughput_bps"] = jvec(a.user_throughput_bps);
  j["aggregates"]["user_download_ratio"] = jvec(a.user_download_ratio);
  j["aggregates"]["user_pearson"] = jvec(a.user_pearson);
  j["aggregates"]["user_stall_count"] = a.user_stall_count;
  j["aggregates"]["cell_edge_throughput_bps"] = jnum(a.cell_edge_throughput_bps);
  j["aggregates"]["mean_latency_ms"] = jnum(a.mean_latency_ms);
  j["aggregates"]["mean_served_sinr_db"] = jnum(a.mean_served_sinr_db);
  j["aggregates"]["mean_kqi_loss"] = jnum(a.mean_kqi_loss);
  j["aggregates"]["mean_backlog_bits"] = jnum(a.mean_backlog_bits);
  return j.dump(2) + "\n";
}

std::vector<std::string> emit_metrics(const metrics::MetricsReport& rep,
                                      const std::string& out_dir,
                                      const std::vector<std::string>& formats) {
  std::filesystem::create_directories(out_dir);
  std::vector<std::string> files;
  for (const auto& f : formats) {
    if (f == "csv") {
      write_file(out_dir + "/trace.csv", trace_csv(rep));
      write_file(out_dir + "/aggregate.csv", aggregate_csv(rep));
      files.push_back("trace.csv");
      files.push_back("aggregate.csv");
    } else if (f == "json") {
      write_file(out_dir + "/metrics.json", metrics_json(rep));
      files.push_back("metrics.json");
    } else {
      throw ConfigError("unknown metrics format: " + f);
    }
  }
  return files;
}

uint64_t file_checksum_fnv64(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read file for checksum: " + path);
  uint64_t h = 0xcbf29ce484222325ULL;
  char buf[4096];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
    if (!in) break;
  }
  return h;
}

std::string manifest_json(const RunManifest& m) {
  json j;
  j["preset"] = m.preset;
  j["out_dir"] = m.out_dir;
  j["seeds"] = m.seeds;
  j["config"] = m.config_text;
  json files = json::array();
  for (const auto& [name, sum] : m.files) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(sum));
    files.push_back({{"name", name}, {"fnv64", buf}});
  }
  j["files"] = files;
  return j.dump(2) + "\n";
}

std::vector<std::string> preset_names() {
  return {"fig3a", "fig3b", "fig3c", "fig3d", "table2"};
}

bool is_preset(const std::string& name) {
  auto names = preset_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

std::vector<double> fig3a_capacities_gbps() {
  // Low points sized so the 4-user I/Q exchange fits 1..6 bits; the bus is
  // fully provisioned from the 80 Gb/s knee onward.
  return {0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 80.0, 240.0};
}

std::vector<int> fig3b_intervals() { return {1, 2, 4, 8, 16, 32}; }

std::vector<double> fig3c_offsets_hz() {
  // Includes the GPS-accuracy endpoints 70 Hz (20 ppb) and 262.5 Hz (75 ppb).
  return {0.0, 35.0, 70.0, 140.0, 200.0, 262.5};
}

namespace {

void set_if_unset(ParsedConfig& p, const std::string& key, const std::string& value) {
  if (p.set_keys.count(key)) return;
  apply_override(p, key + " = " + value);
}

}  // namespace

void apply_preset_defaults(ParsedConfig& p, const std::string& name) {
  if (name == "fig3a") {
    // group size equals the user count so the cell-edge metric reflects the
    // link (quantization noise) rather than scheduling shares
    set_if_unset(p, "users.count", "4");
    set_if_unset(p, "traffic.mode", "saturate");
    set_if_unset(p, "sim.n_slots", "500");
    set_if_unset(p, "channel.feedback_interval_slots", "1");
    set_if_unset(p, "scheduler.type", "kpi");
  } else if (name == "fig3b") {
    set_if_unset(p, "users.count", "4");
    set_if_unset(p, "traffic.mode", "saturate");
    set_if_unset(p, "sim.n_slots", "600");
    set_if_unset(p, "scheduler.type", "kpi");
    set_if_unset(p, "scheduler.mode_policy", "jt");
  } else if (name == "fig3c") {
    set_if_unset(p, "users.count", "4");
    set_if_unset(p, "traffic.mode", "saturate");
    set_if_unset(p, "sim.n_slots", "400");
    set_if_unset(p, "scheduler.type", "kpi");
    // 15 kHz-class spacing makes the 70..262.5 Hz offsets visible.
    set_if_unset(p, "radio.subcarrier_interval_hz", "15e3");
  } else if (name == "fig3d") {
    set_if_unset(p, "users.count", "20");
    set_if_unset(p, "traffic.mode", "video");
    set_if_unset(p, "sim.n_slots", "10000");
    set_if_unset(p, "scheduler.type", "kpi");
    set_if_unset(p, "radio.active_subcarriers", "600");
    set_if_unset(p, "radio.subcarrier_interval_hz", "15e3");
    set_if_unset(p, "cluster.bs_spacing_m", "600");
    set_if_unset(p, "phy.max_group", "2");
    set_if_unset(p, "video.duration_s", "5");
  } else if (name == "table2") {
    // wide cells and two-stream groups: enough contention that scheduling
    // policy decides who stalls
    set_if_unset(p, "users.count", "5");
    set_if_unset(p, "traffic.mode", "video");
    set_if_unset(p, "sim.n_slots", "20000");
    set_if_unset(p, "radio.active_subcarriers", "600");
    set_if_unset(p, "radio.subcarrier_interval_hz", "15e3");
    set_if_unset(p, "cluster.bs_spacing_m", "600");
    set_if_unset(p, "phy.max_group", "2");
    set_if_unset(p, "video.default_quality", "2");
    set_if_unset(p, "video.rebuffer_s", "0.5");
    set_if_unset(p, "video.duration_s", "1");
  } else {
    throw ConfigError("unknown preset: " + name);
  }
}

RunManifest run_preset(const std::string& name, const ParsedConfig& parsed,
                       const std::string& out_dir, const std::vector<int>& seeds) {
  if (!is_preset(name)) throw ConfigError("unknown preset: " + name);
  ParsedConfig p = parsed;
  apply_preset_defaults(p, name);
  const ScenarioConfig& cfg = p.config;
  std::filesystem::create_directories(out_dir);

  RunManifest m;
  m.preset = name;
  m.out_dir = out_dir;
  m.seeds = seeds;
  m.config_text = serialize_config(cfg);
  std::vector<std::string> written;

  if (name == "fig3a") {
    auto sw = engine::sweep_backhaul(cfg, fig3a_capacities_gbps(), seeds);
    write_file(out_dir + "/fig3a.csv",
               two_column_csv("capacity_gbps,jt_cell_edge_bps,cscb_cell_edge_bps",
                              {sw.capacities_gbps, sw.jt_cell_edge_bps,
                               sw.cscb_cell_edge_bps}));
    written.push_back("fig3a.csv");
  } else if (name == "fig3b") {
    auto sw = engine::sweep_feedback(cfg, fig3b_intervals(), seeds);
    std::vector<double> iv(sw.intervals.begin(), sw.intervals.end());
    write_file(out_dir + "/fig3b.csv",
               two_column_csv("interval_slots,static_cell_edge_bps,mobile_cell_edge_bps",
                              {iv, sw.static_mean_bps, sw.mobile_mean_bps}));
    written.push_back("fig3b.csv");
  } else if (name == "fig3c") {
    auto sw = engine::sweep_offset(cfg, fig3c_offsets_hz(), seeds);
    write_file(out_dir + "/fig3c.csv",
               two_column_csv("offset_hz,jt_mean_sinr_db,cscb_mean_sinr_db",
                              {sw.offsets_hz, sw.jt_mean_sinr_db,
                               sw.cscb_mean_sinr_db}));
    written.push_back("fig3c.csv");
  } else if (name == "fig3d") {
    // Engagement diversity under the conventional KPI-driven scheduler.
    std::vector<std::vector<double>> per_user(cfg.users.count);
    for (int seed : seeds) {
      ScenarioConfig c = cfg;
      c.sim.seed = seed;
      auto rep = engine::run(c);
      for (int u = 0; u < cfg.users.count; ++u)
        if (!std::isnan(rep.agg.user_pearson[u]))
          per_user[u].push_back(rep.agg.user_pearson[u]);
    }
    std::vector<double> users(cfg.users.count), rho(cfg.users.count);
    for (int u = 0; u < cfg.users.count; ++u) {
      users[u] = u;
      rho[u] = median(per_user[u]);
    }
    write_file(out_dir + "/fig3d.csv",
               two_column_csv("user,pearson", {users, rho}));
    written.push_back("fig3d.csv");
  } else if (name == "table2") {
    auto cmp = engine::compare_schedulers(cfg, seeds);
    int n = cfg.users.count;
    std::vector<double> users(n), kpi_rho(n), kqi_rho(n), kpi_st(n), kqi_st(n);
    for (int u = 0; u < n; ++u) {
      users[u] = u;
      std::vector<double> a, b, c, d;
      for (size_t s = 0; s < seeds.size(); ++s) {
        if (!std::isnan(cmp.kpi_pearson[s][u])) a.push_back(cmp.kpi_pearson[s][u]);
        if (!std::isnan(cmp.kqi_pearson[s][u])) b.push_back(cmp.kqi_pearson[s][u]);
        c.push_back(cmp.kpi_stalls[s][u]);
        d.push_back(cmp.kqi_stalls[s][u]);
      }
      kpi_rho[u] = median(a);
      kqi_rho[u] = median(b);
      kpi_st[u] = median(c);
      kqi_st[u] = median(d);
    }
    write_file(out_dir + "/table2.csv",
               two_column_csv(
                   "user,kpi_pearson,kqi_pearson,kpi_stalls,kqi_stalls",
                   {users, kpi_rho, kqi_rho, kpi_st, kqi_st}));
    written.push_back("table2.csv");
  }

  for (const auto& f : written)
    m.files.emplace_back(f, file_checksum_fnv64(out_dir + "/" + f));
  write_file(out_dir + "/manifest.json", manifest_json(m));
  return m;
}

RunManifest run_single(const ParsedConfig& parsed, const std::string& out_dir) {
  const ScenarioConfig& cfg = parsed.config;
  auto rep = engine::run(cfg);
  auto files = emit_metrics(rep, out_dir, {"csv", "json"});
  RunManifest m;
  m.preset = "";
  m.out_dir = out_dir;
  m.seeds = {cfg.sim.seed};
  m.config_text = serialize_config(cfg);
  for (const auto& f : files)
    m.files.emplace_back(f, file_checksum_fnv64(out_dir + "/" + f));
  write_file(out_dir + "/manifest.json", manifest_json(m));
  return m;
}

}  // namespace comp::io
