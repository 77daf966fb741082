#ifndef COMP_ENGINE_HPP
#define COMP_ENGINE_HPP

#include <Eigen/Dense>
#include <vector>

#include "comp/config.hpp"
#include "comp/metrics.hpp"
#include "comp/phy.hpp"

namespace comp::engine {

// Per-slot realizations captured during a run so SINR can be re-evaluated
// offline (the frequency-offset sweep replays the recorded schedule under
// each offset instead of re-running the control loop).
struct RunArtifacts {
  struct Slot {
    Eigen::MatrixXcd true_rows;  // group members x total antennas
    phy::Precoder precoder;
    std::vector<int> anchor_bs;
    std::vector<double> quant_noise_w;
    phy::TxMode mode = phy::TxMode::jt;
  };
  std::vector<Slot> slots;
  double noise_w = 0.0;
  double isi_db = 0.0;
  double subcarrier_spacing_hz = 312.5e3;
};

// One deterministic time-slotted simulation.
metrics::MetricsReport run(const ScenarioConfig& cfg, RunArtifacts* artifacts = nullptr);

// Per-user mean served rate under saturated queues; the load other presets
// express as a fraction of capacity is measured with this.
std::vector<double> measure_service_capacity(const ScenarioConfig& cfg);

struct BackhaulSweep {
  std::vector<double> capacities_gbps;
  std::vector<double> jt_cell_edge_bps;    // mean over seeds
  std::vector<double> cscb_cell_edge_bps;  // mean over seeds
};
BackhaulSweep sweep_backhaul(const ScenarioConfig& cfg,
                             const std::vector<double>& capacities_gbps,
                             const std::vector<int>& seeds);

struct FeedbackSweep {
  std::vector<int> intervals;
  // [interval][seed] cell-edge throughput
  std::vector<std::vector<double>> static_bps;
  std::vector<std::vector<double>> mobile_bps;
  std::vector<double> static_mean_bps;
  std::vector<double> mobile_mean_bps;
};
FeedbackSweep sweep_feedback(const ScenarioConfig& cfg, const std::vector<int>& intervals,
                             const std::vector<int>& seeds);

struct OffsetSweep {
  std::vector<double> offsets_hz;
  std::vector<double> jt_mean_sinr_db;    // over (seed, slot, member)
  std::vector<double> cscb_mean_sinr_db;  // invariant to the offset
};
OffsetSweep sweep_offset(const ScenarioConfig& cfg, const std::vector<double>& offsets_hz,
                         const std::vector<int>& seeds);

struct SchedulerComparison {
  // [seed][user]
  std::vector<std::vector<double>> kqi_pearson, kpi_pearson;
  std::vector<std::vector<int>> kqi_stalls, kpi_stalls;
};
// Runs the KPI/KQI-driven and KPI-driven schedulers over identical seeds,
// channels, and arrivals.
SchedulerComparison compare_schedulers(const ScenarioConfig& cfg,
                                       const std::vector<int>& seeds);

}  // namespace comp::engine

#endif
