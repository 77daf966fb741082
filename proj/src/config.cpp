#include "comp/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <variant>

#include "comp/common.hpp"

namespace comp {

namespace {

using FieldPtr = std::variant<int*, double*, bool*, std::string*,
                              std::vector<double>*, std::vector<std::string>*>;

struct FieldRef {
  std::string key;
  FieldPtr ptr;
};

// Single source of truth for key names <-> struct members. Order here is the
// canonical serialization order.
std::vector<FieldRef> field_table(ScenarioConfig& c) {
  return {
      {"sim.seed", &c.sim.seed},
      {"sim.n_slots", &c.sim.n_slots},
      {"sim.slot_duration_s", &c.sim.slot_duration_s},
      {"cluster.n_bs", &c.cluster.n_bs},
      {"cluster.rx_antennas", &c.cluster.rx_antennas},
      {"cluster.tx_antennas", &c.cluster.tx_antennas},
      {"cluster.bs_spacing_m", &c.cluster.bs_spacing_m},
      {"cluster.tx_power_dbm", &c.cluster.tx_power_dbm},
      {"radio.carrier_hz", &c.radio.carrier_hz},
      {"radio.sampling_hz", &c.radio.sampling_hz},
      {"radio.active_subcarriers", &c.radio.active_subcarriers},
      {"radio.subcarrier_interval_hz", &c.radio.subcarrier_interval_hz},
      {"radio.fdd", &c.radio.fdd},
      {"radio.noise_figure_db", &c.radio.noise_figure_db},
      {"users.count", &c.users.count},
      {"users.area_radius_m", &c.users.area_radius_m},
      {"users.positions", &c.users.positions},
      {"users.priorities", &c.users.priorities},
      {"channel.doppler_hz", &c.channel.doppler_hz},
      {"channel.doppler_static_hz", &c.channel.doppler_static_hz},
      {"channel.doppler_mobile_hz", &c.channel.doppler_mobile_hz},
      {"channel.pathloss_exponent", &c.channel.pathloss_exponent},
      {"channel.ref_loss_db", &c.channel.ref_loss_db},
      {"channel.ref_distance_m", &c.channel.ref_distance_m},
      {"channel.csi_quant_bits", &c.channel.csi_quant_bits},
      {"channel.feedback_interval_slots", &c.channel.feedback_interval_slots},
      {"channel.adaptive_feedback", &c.channel.adaptive_feedback},
      {"channel.interval_min", &c.channel.interval_min},
      {"channel.interval_max", &c.channel.interval_max},
      {"channel.coherence_high", &c.channel.coherence_high},
      {"channel.coherence_low", &c.channel.coherence_low},
      {"channel.clip_sigmas", &c.channel.clip_sigmas},
      {"sync.enabled", &c.sync.enabled},
      {"sync.sigma0_hz", &c.sync.sigma0_hz},
      {"sync.beacon_snr_db", &c.sync.beacon_snr_db},
      {"sync.accuracy_ppb_min", &c.sync.accuracy_ppb_min},
      {"sync.accuracy_ppb_max", &c.sync.accuracy_ppb_max},
      {"sync.fixed_offsets_hz", &c.sync.fixed_offsets_hz},
      {"sync.cp_budget_us", &c.sync.cp_budget_us},
      {"sync.isi_penalty_db", &c.sync.isi_penalty_db},
      {"sync.max_time_offset_us", &c.sync.max_time_offset_us},
      {"backhaul.capacity_gbps", &c.backhaul.capacity_gbps},
      {"backhaul.max_capacity_gbps", &c.backhaul.max_capacity_gbps},
      {"backhaul.latency_ms", &c.backhaul.latency_ms},
      {"backhaul.share_policy", &c.backhaul.share_policy},
      {"backhaul.iq_bits_max", &c.backhaul.iq_bits_max},
      {"phy.mcs_names", &c.phy.mcs_names},
      {"phy.mcs_bits_per_symbol", &c.phy.mcs_bits_per_symbol},
      {"phy.mcs_min_sinr_db", &c.phy.mcs_min_sinr_db},
      {"phy.code_rate", &c.phy.code_rate},
      {"phy.link_margin_db", &c.phy.link_margin_db},
      {"phy.mode_threshold", &c.phy.mode_threshold},
      {"phy.corr_threshold", &c.phy.corr_threshold},
      {"phy.max_group", &c.phy.max_group},
      {"scheduler.type", &c.scheduler.type},
      {"scheduler.v", &c.scheduler.v},
      {"scheduler.queue_scale", &c.scheduler.queue_scale},
      {"scheduler.mode_policy", &c.scheduler.mode_policy},
      {"video.ladder_bps", &c.video.ladder_bps},
      {"video.default_quality", &c.video.default_quality},
      {"video.rebuffer_s", &c.video.rebuffer_s},
      {"video.duration_s", &c.video.duration_s},
      {"video.kqi_alpha", &c.video.kqi_alpha},
      {"video.kqi_beta", &c.video.kqi_beta},
      {"video.sensitivity_min", &c.video.sensitivity_min},
      {"video.sensitivity_max", &c.video.sensitivity_max},
      {"video.psnr_db", &c.video.psnr_db},
      {"traffic.mode", &c.traffic.mode},
      {"traffic.arrival_bps", &c.traffic.arrival_bps},
  };
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::string fmt_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

bool parse_int(const std::string& s, int& out) {
  const char* b = s.data();
  const char* e = b + s.size();
  auto [p, ec] = std::from_chars(b, e, out);
  return ec == std::errc() && p == e;
}

bool parse_real(const std::string& s, double& out) {
  const char* b = s.data();
  const char* e = b + s.size();
  auto [p, ec] = std::from_chars(b, e, out);
  return ec == std::errc() && p == e;
}

std::vector<std::string> split_list(const std::string& body) {
  std::vector<std::string> items;
  std::string cur;
  for (char ch : body) {
    if (ch == ',') {
      items.push_back(trim(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  std::string last = trim(cur);
  if (!last.empty() || !items.empty()) {
    if (!last.empty()) items.push_back(last);
  }
  return items;
}

[[noreturn]] void fail(int line, const std::string& key, const std::string& what) {
  std::ostringstream os;
  os << "config error";
  if (line > 0) os << " at line " << line;
  if (!key.empty()) os << " (key '" << key << "')";
  os << ": " << what;
  throw ConfigError(os.str());
}

void assign(FieldRef& f, const std::string& value, int line) {
  std::visit(
      [&](auto* ptr) {
        using T = std::remove_pointer_t<decltype(ptr)>;
        if constexpr (std::is_same_v<T, int>) {
          if (!parse_int(value, *ptr)) fail(line, f.key, "expected integer, got '" + value + "'");
        } else if constexpr (std::is_same_v<T, double>) {
          if (!parse_real(value, *ptr)) fail(line, f.key, "expected real, got '" + value + "'");
        } else if constexpr (std::is_same_v<T, bool>) {
          if (value == "true") *ptr = true;
          else if (value == "false") *ptr = false;
          else fail(line, f.key, "expected true/false, got '" + value + "'");
        } else if constexpr (std::is_same_v<T, std::string>) {
          if (value.empty() || value.front() == '[') fail(line, f.key, "expected string token");
          *ptr = value;
        } else if constexpr (std::is_same_v<T, std::vector<double>>) {
          if (value.size() < 2 || value.front() != '[' || value.back() != ']')
            fail(line, f.key, "expected [a, b, ...] list");
          ptr->clear();
          for (const auto& item : split_list(value.substr(1, value.size() - 2))) {
            double v;
            if (!parse_real(item, v)) fail(line, f.key, "list item '" + item + "' is not a real");
            ptr->push_back(v);
          }
        } else if constexpr (std::is_same_v<T, std::vector<std::string>>) {
          if (value.size() < 2 || value.front() != '[' || value.back() != ']')
            fail(line, f.key, "expected [a, b, ...] list");
          ptr->clear();
          for (const auto& item : split_list(value.substr(1, value.size() - 2))) {
            if (item.empty()) fail(line, f.key, "empty list item");
            ptr->push_back(item);
          }
        }
      },
      f.ptr);
}

std::string emit(const FieldRef& f) {
  return std::visit(
      [&](auto* ptr) -> std::string {
        using T = std::remove_pointer_t<decltype(ptr)>;
        if constexpr (std::is_same_v<T, int>) {
          return std::to_string(*ptr);
        } else if constexpr (std::is_same_v<T, double>) {
          return fmt_real(*ptr);
        } else if constexpr (std::is_same_v<T, bool>) {
          return *ptr ? "true" : "false";
        } else if constexpr (std::is_same_v<T, std::string>) {
          return *ptr;
        } else if constexpr (std::is_same_v<T, std::vector<double>>) {
          std::string out = "[";
          for (size_t i = 0; i < ptr->size(); ++i) {
            if (i) out += ", ";
            out += fmt_real((*ptr)[i]);
          }
          return out + "]";
        } else {
          std::string out = "[";
          for (size_t i = 0; i < ptr->size(); ++i) {
            if (i) out += ", ";
            out += (*ptr)[i];
          }
          return out + "]";
        }
      },
      f.ptr);
}

void assign_key(ParsedConfig& parsed, const std::string& key,
                const std::string& value, int line) {
  auto fields = field_table(parsed.config);
  for (auto& f : fields) {
    if (f.key == key) {
      assign(f, value, line);
      parsed.set_keys.insert(key);
      return;
    }
  }
  fail(line, key, "unknown key");
}

}  // namespace

ParsedConfig parse_config(const std::string& text) {
  ParsedConfig parsed;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = raw;
    size_t hash = s.find('#');
    if (hash != std::string::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;
    size_t eq = s.find('=');
    if (eq == std::string::npos) fail(line, "", "expected 'key = value', got '" + trim(raw) + "'");
    std::string key = trim(s.substr(0, eq));
    std::string value = trim(s.substr(eq + 1));
    if (key.empty()) fail(line, "", "missing key before '='");
    assign_key(parsed, key, value, line);
  }
  validate_config(parsed.config);
  return parsed;
}

ParsedConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void apply_override(ParsedConfig& parsed, const std::string& assignment) {
  size_t eq = assignment.find('=');
  if (eq == std::string::npos)
    throw ConfigError("--set expects key=value, got '" + assignment + "'");
  std::string key = trim(assignment.substr(0, eq));
  std::string value = trim(assignment.substr(eq + 1));
  assign_key(parsed, key, value, 0);
  validate_config(parsed.config);
}

std::string serialize_config(const ScenarioConfig& cfg) {
  auto& mutable_cfg = const_cast<ScenarioConfig&>(cfg);
  std::string out;
  for (const auto& f : field_table(mutable_cfg)) {
    out += f.key;
    out += " = ";
    out += emit(f);
    out += "\n";
  }
  return out;
}

void validate_config(const ScenarioConfig& c) {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError("config constraint violated: " + msg);
  };
  require(c.sim.n_slots >= 0, "sim.n_slots must be >= 0");
  require(c.sim.slot_duration_s > 0, "sim.slot_duration_s must be > 0");
  require(c.cluster.n_bs >= 1, "cluster.n_bs must be >= 1");
  require(c.cluster.rx_antennas == 1, "cluster.rx_antennas must be 1 (single-antenna users)");
  require(c.cluster.tx_antennas >= 1, "cluster.tx_antennas must be >= 1");
  require(c.radio.carrier_hz > 0, "radio.carrier_hz must be > 0");
  require(c.radio.sampling_hz > 0, "radio.sampling_hz must be > 0");
  require(c.radio.active_subcarriers >= 1, "radio.active_subcarriers must be >= 1");
  require(c.radio.subcarrier_interval_hz > 0, "radio.subcarrier_interval_hz must be > 0");
  require(c.users.count >= 1, "users.count must be >= 1");
  require(c.users.positions.empty() ||
              c.users.positions.size() == 2 * static_cast<size_t>(c.users.count),
          "users.positions must hold 2*users.count values");
  require(c.users.priorities.empty() ||
              c.users.priorities.size() == static_cast<size_t>(c.users.count),
          "users.priorities must hold users.count values");
  require(c.channel.doppler_hz >= 0, "channel.doppler_hz must be >= 0");
  require(c.channel.csi_quant_bits >= 1, "channel.csi_quant_bits must be >= 1");
  require(c.channel.feedback_interval_slots >= 1,
          "channel.feedback_interval_slots must be >= 1");
  require(c.channel.interval_min >= 1, "channel.interval_min must be >= 1");
  require(c.channel.interval_min <= c.channel.interval_max,
          "channel.interval_min must be <= channel.interval_max");
  require(c.channel.coherence_low < c.channel.coherence_high,
          "channel.coherence_low must be < channel.coherence_high");
  require(c.channel.clip_sigmas > 0, "channel.clip_sigmas must be > 0");
  require(c.sync.accuracy_ppb_min >= 0 &&
              c.sync.accuracy_ppb_min <= c.sync.accuracy_ppb_max,
          "sync.accuracy_ppb range must be ordered and non-negative");
  require(c.sync.fixed_offsets_hz.empty() ||
              c.sync.fixed_offsets_hz.size() == static_cast<size_t>(c.cluster.n_bs),
          "sync.fixed_offsets_hz must hold cluster.n_bs values");
  require(c.sync.max_time_offset_us >= 0 && c.sync.max_time_offset_us < 3.0 + 1e-12,
          "sync.max_time_offset_us must be in [0, 3]");
  require(c.backhaul.capacity_gbps > 0, "backhaul.capacity_gbps must be > 0");
  require(c.backhaul.capacity_gbps <= c.backhaul.max_capacity_gbps,
          "backhaul.capacity_gbps exceeds backhaul.max_capacity_gbps");
  require(c.backhaul.share_policy == "static" || c.backhaul.share_policy == "backlog",
          "backhaul.share_policy must be static|backlog");
  require(c.backhaul.iq_bits_max >= 1 && c.backhaul.iq_bits_max <= 64,
          "backhaul.iq_bits_max must be in [1, 64]");
  require(!c.phy.mcs_bits_per_symbol.empty() &&
              c.phy.mcs_bits_per_symbol.size() == c.phy.mcs_min_sinr_db.size() &&
              c.phy.mcs_bits_per_symbol.size() == c.phy.mcs_names.size(),
          "phy.mcs_* lists must be non-empty and the same length");
  for (size_t i = 1; i < c.phy.mcs_min_sinr_db.size(); ++i) {
    require(c.phy.mcs_min_sinr_db[i] > c.phy.mcs_min_sinr_db[i - 1],
            "phy.mcs_min_sinr_db must be strictly increasing");
    require(c.phy.mcs_bits_per_symbol[i] > c.phy.mcs_bits_per_symbol[i - 1],
            "phy.mcs_bits_per_symbol must be strictly increasing");
  }
  require(c.phy.code_rate > 0 && c.phy.code_rate <= 1, "phy.code_rate must be in (0, 1]");
  require(c.phy.mode_threshold > 0, "phy.mode_threshold must be > 0");
  require(c.phy.corr_threshold > 0 && c.phy.corr_threshold <= 1,
          "phy.corr_threshold must be in (0, 1]");
  require(c.phy.max_group >= 1, "phy.max_group must be >= 1");
  require(c.scheduler.type == "kqi" || c.scheduler.type == "kpi",
          "scheduler.type must be kqi|kpi");
  require(c.scheduler.v >= 0, "scheduler.v must be >= 0");
  require(c.scheduler.queue_scale > 0, "scheduler.queue_scale must be > 0");
  require(c.scheduler.mode_policy == "auto" || c.scheduler.mode_policy == "jt" ||
              c.scheduler.mode_policy == "cscb",
          "scheduler.mode_policy must be auto|jt|cscb");
  require(!c.video.ladder_bps.empty(), "video.ladder_bps must be non-empty");
  for (size_t i = 0; i < c.video.ladder_bps.size(); ++i) {
    require(c.video.ladder_bps[i] > 0, "video.ladder_bps entries must be > 0");
    if (i) require(c.video.ladder_bps[i] > c.video.ladder_bps[i - 1],
                   "video.ladder_bps must be strictly increasing");
  }
  require(c.video.default_quality >= 0 &&
              c.video.default_quality < static_cast<int>(c.video.ladder_bps.size()),
          "video.default_quality must index video.ladder_bps");
  require(c.video.psnr_db.size() == c.video.ladder_bps.size(),
          "video.psnr_db must match video.ladder_bps length");
  require(c.video.rebuffer_s >= 0, "video.rebuffer_s must be >= 0");
  require(c.video.duration_s > 0, "video.duration_s must be > 0");
  require(c.video.sensitivity_min >= 0 && c.video.sensitivity_max <= 1 &&
              c.video.sensitivity_min <= c.video.sensitivity_max,
          "video.sensitivity range must be within [0, 1] and ordered");
  require(c.traffic.mode == "video" || c.traffic.mode == "saturate",
          "traffic.mode must be video|saturate");
  require(c.traffic.arrival_bps.empty() ||
              c.traffic.arrival_bps.size() == static_cast<size_t>(c.users.count),
          "traffic.arrival_bps must hold users.count values");
  for (double a : c.traffic.arrival_bps)
    require(a > 0, "traffic.arrival_bps entries must be > 0");
}

double ScenarioConfig::noise_watt() const {
  const double kT = 4.0e-21;  // W/Hz at 290 K
  double band = symbol_rate_hz();
  return kT * band * db_to_pow(radio.noise_figure_db);
}

double ScenarioConfig::tx_power_watt() const {
  return dbm_to_watt(cluster.tx_power_dbm);
}

double ScenarioConfig::area_radius_m() const {
  if (users.area_radius_m > 0) return users.area_radius_m;
  return cluster.bs_spacing_m / std::sqrt(3.0);  // circumradius of the triangle
}

std::vector<std::pair<double, double>> ScenarioConfig::bs_positions() const {
  std::vector<std::pair<double, double>> pos;
  if (cluster.n_bs == 1) {
    pos.emplace_back(0.0, 0.0);
    return pos;
  }
  double r = cluster.bs_spacing_m / (2.0 * std::sin(M_PI / cluster.n_bs));
  for (int b = 0; b < cluster.n_bs; ++b) {
    double th = M_PI / 2.0 + 2.0 * M_PI * b / cluster.n_bs;
    pos.emplace_back(r * std::cos(th), r * std::sin(th));
  }
  return pos;
}

std::vector<std::pair<double, double>> ScenarioConfig::user_positions() const {
  std::vector<std::pair<double, double>> pos;
  if (!users.positions.empty()) {
    for (int u = 0; u < users.count; ++u)
      pos.emplace_back(users.positions[2 * u], users.positions[2 * u + 1]);
    return pos;
  }
  Rng rng(Rng::derive(static_cast<uint64_t>(sim.seed), "placement"));
  double radius = area_radius_m();
  for (int u = 0; u < users.count; ++u) {
    double r = radius * std::sqrt(rng.uniform01());
    double th = 2.0 * M_PI * rng.uniform01();
    pos.emplace_back(r * std::cos(th), r * std::sin(th));
  }
  return pos;
}

std::vector<std::vector<double>> ScenarioConfig::pathloss_db() const {
  auto bss = bs_positions();
  auto uss = user_positions();
  std::vector<std::vector<double>> pl(users.count, std::vector<double>(cluster.n_bs));
  for (int u = 0; u < users.count; ++u) {
    for (int b = 0; b < cluster.n_bs; ++b) {
      double dx = uss[u].first - bss[b].first;
      double dy = uss[u].second - bss[b].second;
      double d = std::max(std::sqrt(dx * dx + dy * dy), channel.ref_distance_m);
      pl[u][b] = channel.ref_loss_db +
                 10.0 * channel.pathloss_exponent * std::log10(d / channel.ref_distance_m);
    }
  }
  return pl;
}

std::vector<double> ScenarioConfig::user_priorities() const {
  if (!users.priorities.empty()) return users.priorities;
  return std::vector<double>(users.count, 1.0);
}

}  // namespace comp
