#ifndef COMP_METRICS_HPP
#define COMP_METRICS_HPP

#include <cstdint>
#include <vector>

namespace comp::metrics {

// Aggregates are pure functions of the traces (see aggregate_from_traces) so
// they can be recomputed and cross-checked.
struct Aggregates {
  std::vector<double> user_throughput_bps;
  std::vector<double> user_download_ratio;  // mean per-slot ratio
  std::vector<double> user_pearson;         // NaN when undefined
  std::vector<int> user_stall_count;        // final cumulative
  double cell_edge_throughput_bps = 0.0;    // 5th-percentile user throughput
  double mean_latency_ms = 0.0;             // over served user-slots
  double mean_served_sinr_db = 0.0;         // over served user-slots
  double mean_kqi_loss = 0.0;               // time-average of sum_u I_u(t)
  double mean_backlog_bits = 0.0;           // time-average of sum_u Q_u(t)
};

// Per-slot, per-user traces (flattened [slot * n_users + user]) plus the
// aggregates derived from them.
struct MetricsReport {
  int n_users = 0;
  int n_slots = 0;
  double slot_duration_s = 1e-3;
  std::vector<uint8_t> served;
  std::vector<double> sinr_db;     // NaN when not served
  std::vector<double> rate_bps;
  std::vector<double> served_bits;
  std::vector<double> queue_bits;  // end of slot
  std::vector<double> buffer_s;
  std::vector<int> stall_count;    // cumulative per user
  std::vector<double> download_ratio;
  std::vector<double> kqi_loss;
  std::vector<double> latency_ms;  // NaN when not served
  std::vector<uint8_t> slot_mode;  // per slot: 0 = JT, 1 = CS/CB, 2 = idle
  Aggregates agg;

  size_t idx(int slot, int user) const {
    return static_cast<size_t>(slot) * n_users + user;
  }
  void resize(int users, int slots);
};

Aggregates aggregate_from_traces(const MetricsReport& r);

// Nearest-rank percentile (pct in [0, 100]) of a copy of v.
double percentile_nearest_rank(std::vector<double> v, double pct);

}  // namespace comp::metrics

#endif
