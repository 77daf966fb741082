#include "comp/backhaul.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace comp::backhaul {

BackhaulBudget uniform_budget(double capacity_gbps, double latency_ms, int n_bs) {
  BackhaulBudget b;
  b.capacity_gbps = capacity_gbps;
  b.latency_ms = latency_ms;
  b.per_bs_share.assign(n_bs, 1.0 / n_bs);
  return b;
}

double csi_rate_gbps(const JtLoad& load) {
  double interval_s = load.feedback_interval_slots * load.slot_duration_s;
  if (interval_s <= 0) return 0.0;
  return load.csi_bits_per_interval / interval_s / 1e9;
}

double jt_required_gbps(const JtLoad& load, int iq_bits) {
  double iq = static_cast<double>(load.n_users) * load.sample_rate_hz * 2.0 *
              static_cast<double>(iq_bits);
  return iq / 1e9 + csi_rate_gbps(load);
}

double cscb_required_gbps(const JtLoad& load) { return csi_rate_gbps(load); }

int fit_iq_bits(const BackhaulBudget& budget, const JtLoad& load, int iq_bits_max) {
  for (int bits = iq_bits_max; bits >= 1; --bits)
    if (jt_required_gbps(load, bits) <= budget.capacity_gbps) return bits;
  return 0;
}

double backhaul_latency_contribution_ms(const BackhaulBudget& budget, double bytes) {
  if (bytes < 0) throw DegenerateInputError("backhaul latency: bytes must be >= 0");
  double bits_per_ms = budget.capacity_gbps * 1e6;
  return budget.latency_ms + bytes * 8.0 / bits_per_ms;
}

BackhaulBudget share_budget(const BackhaulBudget& budget, int bs) {
  BackhaulBudget out = budget;
  out.capacity_gbps = budget.capacity_gbps * budget.per_bs_share[bs];
  out.per_bs_share = {1.0};
  return out;
}

BackhaulBudget rebalance_shares(const BackhaulBudget& budget,
                                const std::vector<double>& per_bs_backlog_bits,
                                const std::string& policy) {
  if (policy == "static") return budget;
  BackhaulBudget out = budget;
  // Half the bus stays uniformly arbitrated (JT distributes every user's I/Q
  // through every BS, so nobody may starve); the other half follows backlog.
  const size_t n = per_bs_backlog_bits.size();
  const double eps = 1.0;  // bits
  double total = 0.0;
  for (double q : per_bs_backlog_bits) total += q + eps;
  for (size_t b = 0; b < n; ++b)
    out.per_bs_share[b] =
        0.5 / n + 0.5 * (per_bs_backlog_bits[b] + eps) / total;
  return out;
}

double iq_quant_relative_power(int iq_bits) {
  if (iq_bits < 1) throw DegenerateInputError("iq_quant_relative_power: bits must be >= 1");
  return (16.0 / 3.0) * std::exp2(-2.0 * iq_bits);
}

}  // namespace comp::backhaul
