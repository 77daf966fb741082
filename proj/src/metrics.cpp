#include "comp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "comp/kqi.hpp"

namespace comp::metrics {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

void MetricsReport::resize(int users, int slots) {
  n_users = users;
  n_slots = slots;
  size_t n = static_cast<size_t>(users) * slots;
  served.assign(n, 0);
  sinr_db.assign(n, kNaN);
  rate_bps.assign(n, 0.0);
  served_bits.assign(n, 0.0);
  queue_bits.assign(n, 0.0);
  buffer_s.assign(n, 0.0);
  stall_count.assign(n, 0);
  download_ratio.assign(n, 0.0);
  kqi_loss.assign(n, 0.0);
  latency_ms.assign(n, kNaN);
  slot_mode.assign(slots, 2);
}

double percentile_nearest_rank(std::vector<double> v, double pct) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  size_t rank = static_cast<size_t>(std::ceil(pct / 100.0 * v.size()));
  rank = std::clamp<size_t>(rank, 1, v.size());
  return v[rank - 1];
}

Aggregates aggregate_from_traces(const MetricsReport& r) {
  Aggregates a;
  a.user_throughput_bps.assign(r.n_users, 0.0);
  a.user_download_ratio.assign(r.n_users, 0.0);
  a.user_pearson.assign(r.n_users, kNaN);
  a.user_stall_count.assign(r.n_users, 0);
  if (r.n_slots == 0 || r.n_users == 0) return a;

  double horizon_s = r.n_slots * r.slot_duration_s;
  double lat_sum = 0.0, sinr_sum = 0.0;
  long lat_n = 0, sinr_n = 0;
  double loss_sum = 0.0, backlog_sum = 0.0;

  for (int u = 0; u < r.n_users; ++u) {
    double bits = 0.0, ratio_sum = 0.0;
    std::vector<double> ratio_series(r.n_slots), tput_series(r.n_slots);
    for (int t = 0; t < r.n_slots; ++t) {
      size_t i = r.idx(t, u);
      bits += r.served_bits[i];
      ratio_sum += r.download_ratio[i];
      ratio_series[t] = r.download_ratio[i];
      tput_series[t] = r.served_bits[i] / r.slot_duration_s;
      if (r.served[i]) {
        if (!std::isnan(r.latency_ms[i])) {
          lat_sum += r.latency_ms[i];
          ++lat_n;
        }
        if (!std::isnan(r.sinr_db[i])) {
          sinr_sum += r.sinr_db[i];
          ++sinr_n;
        }
      }
    }
    a.user_throughput_bps[u] = bits / horizon_s;
    a.user_download_ratio[u] = ratio_sum / r.n_slots;
    a.user_stall_count[u] = r.stall_count[r.idx(r.n_slots - 1, u)];
    try {
      a.user_pearson[u] = kqi::pearson(ratio_series, tput_series);
    } catch (const UndefinedCorrelationError&) {
      // stays NaN
    }
  }
  for (int t = 0; t < r.n_slots; ++t) {
    double loss = 0.0, backlog = 0.0;
    for (int u = 0; u < r.n_users; ++u) {
      loss += r.kqi_loss[r.idx(t, u)];
      backlog += r.queue_bits[r.idx(t, u)];
    }
    loss_sum += loss;
    backlog_sum += backlog;
  }
  a.cell_edge_throughput_bps = percentile_nearest_rank(a.user_throughput_bps, 5.0);
  a.mean_latency_ms = lat_n ? lat_sum / lat_n : 0.0;
  a.mean_served_sinr_db = sinr_n ? sinr_sum / sinr_n : 0.0;
  a.mean_kqi_loss = loss_sum / r.n_slots;
  a.mean_backlog_bits = backlog_sum / r.n_slots;
  return a;
}

}  // namespace comp::metrics
