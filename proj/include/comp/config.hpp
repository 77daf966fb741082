#ifndef COMP_CONFIG_HPP
#define COMP_CONFIG_HPP

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "comp/common.hpp"

namespace comp {

// Scenario parameters. Defaults mirror the field-trial setup: 3 four-antenna
// BSs, single-antenna users, 3.5 GHz carrier, 30.725 MHz sampling, 1200
// active subcarriers at 312.5 kHz, 20 dBm transmit power, 2PSK/4QAM/16QAM
// with rate-1/2 coding, FDD, and a 240 Gb/s shared backhaul bus.
struct ScenarioConfig {
  struct Sim {
    int seed = 1;
    int n_slots = 1000;
    double slot_duration_s = 1e-3;
  } sim;

  struct Cluster {
    int n_bs = 3;
    int rx_antennas = 1;
    int tx_antennas = 4;
    double bs_spacing_m = 60.0;
    double tx_power_dbm = 20.0;
  } cluster;

  struct Radio {
    double carrier_hz = 3.5e9;
    double sampling_hz = 30.725e6;
    int active_subcarriers = 1200;
    double subcarrier_interval_hz = 312.5e3;
    bool fdd = true;
    double noise_figure_db = 7.0;
  } radio;

  struct Users {
    int count = 5;
    double area_radius_m = 0.0;          // 0 = auto (cluster circumradius)
    std::vector<double> positions;       // flat [x0,y0,x1,y1,...]; empty = random
    std::vector<double> priorities;      // empty = all 1.0
  } users;

  struct Channel {
    double doppler_hz = 5.0;
    double doppler_static_hz = 5.0;
    double doppler_mobile_hz = 50.0;
    double pathloss_exponent = 3.0;
    double ref_loss_db = 43.3;           // free space at 1 m, 3.5 GHz
    double ref_distance_m = 1.0;
    int csi_quant_bits = 8;
    int feedback_interval_slots = 8;
    bool adaptive_feedback = false;
    int interval_min = 1;
    int interval_max = 32;
    double coherence_high = 0.95;
    double coherence_low = 0.80;
    double clip_sigmas = 4.0;
  } channel;

  struct Sync {
    bool enabled = true;
    double sigma0_hz = 5.0;              // estimator std at 0 dB beacon SNR
    double beacon_snr_db = 20.0;
    double accuracy_ppb_min = 20.0;
    double accuracy_ppb_max = 75.0;
    std::vector<double> fixed_offsets_hz;  // per BS; empty = random draw
    double cp_budget_us = 4.7;
    double isi_penalty_db = -10.0;
    double max_time_offset_us = 3.0;
  } sync;

  struct Backhaul {
    double capacity_gbps = 240.0;
    double max_capacity_gbps = 240.0;    // physical bus limit
    double latency_ms = 0.25;
    std::string share_policy = "backlog";  // static | backlog
    int iq_bits_max = 16;
  } backhaul;

  struct Phy {
    std::vector<std::string> mcs_names = {"2PSK-1/2", "4QAM-1/2", "16QAM-1/2"};
    std::vector<double> mcs_bits_per_symbol = {1.0, 2.0, 4.0};
    std::vector<double> mcs_min_sinr_db = {3.0, 7.7712125471966244,
                                           14.76091259055681};
    double code_rate = 0.5;
    double link_margin_db = 1.0;
    double mode_threshold = 0.5;
    double corr_threshold = 0.7;
    int max_group = 4;
  } phy;

  struct Scheduler {
    std::string type = "kqi";            // kqi | kpi
    double v = 100.0;
    double queue_scale = 1e-6;           // queue bits -> Mbit in the objective
    std::string mode_policy = "auto";    // auto | jt | cscb
  } scheduler;

  struct Video {
    std::vector<double> ladder_bps = {1e6, 2.5e6, 5e6, 8e6};
    int default_quality = 3;
    double rebuffer_s = 2.0;
    double duration_s = 30.0;
    double kqi_alpha = 1.0;
    double kqi_beta = 0.25;
    double sensitivity_min = 0.2;
    double sensitivity_max = 1.0;
    std::vector<double> psnr_db = {30.0, 35.0, 40.0, 45.0};
  } video;

  struct Traffic {
    std::string mode = "video";          // video | saturate
    std::vector<double> arrival_bps;     // per user; empty = ladder-rate arrivals
  } traffic;

  // derived quantities
  int total_tx_antennas() const { return cluster.n_bs * cluster.tx_antennas; }
  double symbol_rate_hz() const {
    return radio.active_subcarriers * radio.subcarrier_interval_hz;
  }
  double noise_watt() const;             // thermal noise over the active band
  double tx_power_watt() const;
  double area_radius_m() const;
  std::vector<std::pair<double, double>> bs_positions() const;
  std::vector<std::pair<double, double>> user_positions() const;
  // pathloss_db[u][b]
  std::vector<std::vector<double>> pathloss_db() const;
  std::vector<double> user_priorities() const;
};

// Parse result carries which keys were explicitly assigned, so presets can
// fill defaults without clobbering user choices.
struct ParsedConfig {
  ScenarioConfig config;
  std::set<std::string> set_keys;
};

// Canonical dotted-key text format, one `key = value` per line, `#` comments.
// Values: int, real, bool, bare string, or [a, b, c] lists.
ParsedConfig parse_config(const std::string& text);
ParsedConfig parse_config_file(const std::string& path);

// Applies a single `key=value` assignment (the CLI --set flag).
void apply_override(ParsedConfig& parsed, const std::string& assignment);

// Emits the full config in canonical key order; reals use 17 significant
// digits so that serialize/parse round-trips are bit-exact.
std::string serialize_config(const ScenarioConfig& cfg);

// Constraint checks; throws ConfigError naming the offending key.
void validate_config(const ScenarioConfig& cfg);

}  // namespace comp

#endif
