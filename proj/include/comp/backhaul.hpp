#ifndef COMP_BACKHAUL_HPP
#define COMP_BACKHAUL_HPP

#include <string>
#include <vector>

#include "comp/common.hpp"

namespace comp::backhaul {

// Shared-bus backhaul budget for the cluster. per_bs_share are arbitration
// weights (sum to 1) used for latency accounting and ability scoring; JT
// feasibility is checked against the aggregate.
struct BackhaulBudget {
  double capacity_gbps = 240.0;
  double latency_ms = 0.25;
  std::vector<double> per_bs_share;
};

BackhaulBudget uniform_budget(double capacity_gbps, double latency_ms, int n_bs);

// Traffic the cluster must push over the bus for JT: raw I/Q for every
// attached user plus the CSI exchange.
struct JtLoad {
  int n_users = 0;
  double sample_rate_hz = 30.725e6;
  double csi_bits_per_interval = 0.0;  // total across users
  int feedback_interval_slots = 1;
  double slot_duration_s = 1e-3;
};

double csi_rate_gbps(const JtLoad& load);

// n_users * sample_rate * 2 * iq_bits + CSI rate, in Gb/s.
double jt_required_gbps(const JtLoad& load, int iq_bits);

// CS/CB exchanges CSI only.
double cscb_required_gbps(const JtLoad& load);

// Largest iq_bits in [1, iq_bits_max] whose JT requirement fits the
// aggregate capacity; 0 means JT is infeasible even at 1 bit.
int fit_iq_bits(const BackhaulBudget& budget, const JtLoad& load, int iq_bits_max = 16);

// Propagation latency plus serialization at the given capacity.
double backhaul_latency_contribution_ms(const BackhaulBudget& budget, double bytes);

// Budget as seen by one BS: its arbitration share of the bus.
BackhaulBudget share_budget(const BackhaulBudget& budget, int bs);

// Queue-aware share reweighting (policy "backlog"); "static" returns the
// budget unchanged.
BackhaulBudget rebalance_shares(const BackhaulBudget& budget,
                                const std::vector<double>& per_bs_backlog_bits,
                                const std::string& policy);

// Relative power of transmit-side I/Q quantization noise for a 4-sigma
// clipped mid-rise quantizer: step^2/12 over signal power = (16/3) * 4^-bits.
double iq_quant_relative_power(int iq_bits);

}  // namespace comp::backhaul

#endif
