#ifndef COMP_SYNC_HPP
#define COMP_SYNC_HPP

#include <vector>

#include "comp/common.hpp"
#include "comp/config.hpp"

namespace comp::sync {

// Per-BS clock state. Frequency offsets are in ppb relative to the nominal
// carrier; after master-slave sync the slaves sit at the master's frequency
// plus a residual estimation error.
struct ClockModel {
  std::vector<double> freq_offset_ppb;
  std::vector<double> time_offset_us;
  double carrier_hz = 3.5e9;
  int master_bs = 0;
};

double offset_hz(double ppb, double carrier_hz);

ClockModel init_clocks(const ScenarioConfig& cfg, Rng& rng);

// Over-the-air master-slave protocol: each slave estimates its offset to the
// master from a beacon and retunes; the estimation error scales as
// sigma0 / sqrt(linear beacon SNR). Throws SyncFailedError when there is no
// beacon (snr = -inf). Time offsets are untouched (timing is reference-signal
// driven and already within the CP budget).
ClockModel master_slave_sync(const ClockModel& clocks, double beacon_snr_db, Rng& rng,
                             double sigma0_hz = 5.0);

struct IciFactors {
  double signal_gain = 1.0;         // sinc^2(delta_f / spacing)
  double interference_power = 0.0;  // 1 - signal_gain
};

IciFactors ici_factors(double delta_f_hz, double subcarrier_spacing_hz);

double max_pairwise_offset_hz(const ClockModel& clocks);
double max_pairwise_time_offset_us(const ClockModel& clocks);

// 0 when the worst pairwise timing error fits in the cyclic prefix,
// otherwise the configured flat penalty (dB, negative).
double isi_penalty_db(double max_pairwise_us, double cp_budget_us, double penalty_db);

}  // namespace comp::sync

#endif
