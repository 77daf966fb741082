#ifndef COMP_SCHEDULER_HPP
#define COMP_SCHEDULER_HPP

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "comp/backhaul.hpp"
#include "comp/kqi.hpp"
#include "comp/phy.hpp"

namespace comp::scheduler {

// Lyapunov data queue for one user.
struct UserQueue {
  double q_bits = 0.0;
  double arrival_bps = 0.0;
  double priority = 1.0;
};

// Q(t+1) = max(Q - served, 0) + arrivals, per user.
std::vector<UserQueue> update_queues(const std::vector<UserQueue>& queues,
                                     const std::vector<double>& served_bits,
                                     const std::vector<double>& arrival_bits);

struct CooperativeAbility {
  std::vector<double> backhaul_share_gbps;
  int n_antennas = 4;
  double tx_power_dbm = 20.0;
  double score = 0.0;  // min per-BS provisioning vs. the full-precision JT need
};

CooperativeAbility evaluate_ability(const backhaul::BackhaulBudget& budget,
                                    const backhaul::JtLoad& load, int n_antennas,
                                    double tx_power_dbm, int iq_bits_max = 16);

// JT when the cluster is provisioned at or above the threshold share of the
// full-precision JT requirement (closed bound), CS/CB otherwise.
phy::TxMode select_mode(const CooperativeAbility& ability, double threshold);

// Greedy grouping: candidates sorted by priority * backlog, admitted while
// pairwise channel-direction correlation stays below the threshold.
std::vector<int> group_users(const Eigen::MatrixXcd& reported_rows,
                             const std::vector<UserQueue>& queues,
                             const std::vector<int>& eligible, int max_group,
                             double corr_threshold);

// The greedy group plus its single-user-swap neighborhood (canonicalized,
// deduplicated, lexicographically ordered).
std::vector<std::vector<int>> candidate_groups(const Eigen::MatrixXcd& reported_rows,
                                               const std::vector<UserQueue>& queues,
                                               const std::vector<int>& eligible,
                                               int max_group, double corr_threshold);

// Everything a per-slot decision depends on.
struct SlotContext {
  Eigen::MatrixXcd reported_rows;  // n_users x total antennas, pathloss applied
  std::vector<UserQueue> queues;
  const std::vector<kqi::VideoSession>* sessions = nullptr;  // required for kqi
  CooperativeAbility ability;
  phy::McsTable mcs;
  phy::AntennaLayout layout;
  std::vector<int> eligible;    // user ids the backhaul can carry
  std::vector<int> anchor_bs;   // strongest BS per user
  double symbol_rate_hz = 375e6;
  double noise_w = 1e-12;
  double p_max_w = 0.1;
  double iq_quant_rel = 0.0;    // transmit quantization noise / signal power (JT)
  // Link adaptation model: the controller knows the CSI age statistics and
  // quantizer, so prediction discounts the coherent signal by rho^2 and
  // books the mismatch power as interference.
  std::vector<double> csi_rho;        // per user, Gauss-Markov a^age; empty = fresh
  Eigen::MatrixXd entry_var;          // n_users x n_bs true per-entry channel power
  double csi_quant_var = 0.0;         // per complex entry, on unit fading
  double link_margin_db = 0.0;        // backoff applied at MCS selection
  double v = 0.0;
  double queue_scale = 1e-6;
  std::vector<double> ladder_bps;
  double kqi_alpha = 1.0;
  double kqi_beta = 0.25;
  double slot_duration_s = 1e-3;
  double rebuffer_s = 2.0;
  int max_group = 4;
  double corr_threshold = 0.7;
  double mode_threshold = 0.5;
  std::string mode_policy = "auto";  // auto | jt | cscb
};

struct ClusterPlan {
  phy::TxMode mode = phy::TxMode::jt;
  std::vector<int> group;        // sorted user ids; empty = idle slot
  std::vector<int> serving_bs;   // per member; -1 under JT
  phy::Precoder precoder;
  std::vector<int> mcs;          // per member; -1 = predicted outage
  std::vector<double> predicted_sinr_db;
  std::vector<double> predicted_rate_bps;
  double objective = 0.0;
  bool idle() const { return group.empty(); }
};

// Builds precoder, powers, MCS and the predicted rates for one candidate
// group under the given mode. Returns nullopt when precoding is infeasible.
std::optional<ClusterPlan> evaluate_candidate(const SlotContext& ctx,
                                              const std::vector<int>& group,
                                              phy::TxMode mode);

// Predicted drift-plus-penalty objective sum(Q_u b_u) - V sum(I_u) for a
// finished candidate plan (kqi), or the predicted sum capacity
// sum(symbol_rate * log2(1 + sinr)) in bit/s (kpi) -- continuous so that
// saturated MCS picks do not collapse the argmax into ties.
double kqi_objective(const SlotContext& ctx, const ClusterPlan& plan);
double kpi_objective(const SlotContext& ctx, const ClusterPlan& plan);

// Argmax of the drift-plus-penalty objective over the candidate set; ties go
// to the lexicographically smallest user-id set.
ClusterPlan schedule_slot_kqi(const SlotContext& ctx);

// KPI baseline: same candidates, predicted sum-rate objective with
// water-filling power allocation, KQI-oblivious.
ClusterPlan schedule_slot_kpi(const SlotContext& ctx);

// Reduces a candidate to one user per anchor BS (CS/CB serving discipline),
// keeping the highest priority * backlog user per BS.
std::vector<int> cscb_reduce(const SlotContext& ctx, const std::vector<int>& group);

// DoF / per-BS power / backhaul feasibility; throws on violation.
void validate_plan(const SlotContext& ctx, const ClusterPlan& plan, int iq_bits);

}  // namespace comp::scheduler

#endif
