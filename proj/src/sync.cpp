#include "comp/sync.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace comp::sync {

double offset_hz(double ppb, double carrier_hz) {
  if (carrier_hz <= 0) throw DegenerateInputError("offset_hz: carrier must be > 0");
  // product first: 1e9 is exact in binary, 1e-9 is not
  return ppb * carrier_hz / 1e9;
}

ClockModel init_clocks(const ScenarioConfig& cfg, Rng& rng) {
  ClockModel m;
  m.carrier_hz = cfg.radio.carrier_hz;
  m.master_bs = 0;
  int n = cfg.cluster.n_bs;
  m.freq_offset_ppb.resize(n);
  m.time_offset_us.resize(n);
  if (!cfg.sync.fixed_offsets_hz.empty()) {
    for (int b = 0; b < n; ++b) {
      m.freq_offset_ppb[b] = cfg.sync.fixed_offsets_hz[b] / cfg.radio.carrier_hz * 1e9;
      m.time_offset_us[b] = 0.0;
    }
    return m;
  }
  for (int b = 0; b < n; ++b) {
    double mag = rng.uniform(cfg.sync.accuracy_ppb_min, cfg.sync.accuracy_ppb_max);
    double sign = rng.uniform01() < 0.5 ? -1.0 : 1.0;
    m.freq_offset_ppb[b] = sign * mag;
    m.time_offset_us[b] =
        rng.uniform(-cfg.sync.max_time_offset_us, cfg.sync.max_time_offset_us);
  }
  return m;
}

ClockModel master_slave_sync(const ClockModel& clocks, double beacon_snr_db, Rng& rng,
                             double sigma0_hz) {
  if (std::isinf(beacon_snr_db) && beacon_snr_db < 0)
    throw SyncFailedError("master_slave_sync: no beacon (snr = -inf)");
  ClockModel out = clocks;
  int n = static_cast<int>(clocks.freq_offset_ppb.size());
  if (n <= 1) return out;
  double sigma_est_hz =
      std::isinf(beacon_snr_db) ? 0.0 : sigma0_hz / std::sqrt(db_to_pow(beacon_snr_db));
  double master_ppb = clocks.freq_offset_ppb[clocks.master_bs];
  for (int b = 0; b < n; ++b) {
    if (b == clocks.master_bs) continue;
    double residual_hz = sigma_est_hz > 0 ? rng.normal(0.0, sigma_est_hz) : 0.0;
    out.freq_offset_ppb[b] = master_ppb + residual_hz / clocks.carrier_hz * 1e9;
  }
  return out;
}

IciFactors ici_factors(double delta_f_hz, double subcarrier_spacing_hz) {
  if (subcarrier_spacing_hz <= 0)
    throw DegenerateInputError("ici_factors: spacing must be > 0");
  double d = std::abs(delta_f_hz) / subcarrier_spacing_hz;
  double s;
  if (d == 0.0) {
    s = 1.0;
  } else if (d == std::round(d)) {
    s = 0.0;  // sinc hits an exact zero at integer offsets
  } else {
    s = std::sin(M_PI * d) / (M_PI * d);
  }
  IciFactors f;
  f.signal_gain = s * s;
  f.interference_power = 1.0 - f.signal_gain;
  return f;
}

double max_pairwise_offset_hz(const ClockModel& clocks) {
  double worst = 0.0;
  int n = static_cast<int>(clocks.freq_offset_ppb.size());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      double d = std::abs(offset_hz(clocks.freq_offset_ppb[i], clocks.carrier_hz) -
                          offset_hz(clocks.freq_offset_ppb[j], clocks.carrier_hz));
      worst = std::max(worst, d);
    }
  return worst;
}

double max_pairwise_time_offset_us(const ClockModel& clocks) {
  double worst = 0.0;
  int n = static_cast<int>(clocks.time_offset_us.size());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      worst = std::max(worst, std::abs(clocks.time_offset_us[i] - clocks.time_offset_us[j]));
  return worst;
}

double isi_penalty_db(double max_pairwise_us, double cp_budget_us, double penalty_db) {
  return std::abs(max_pairwise_us) <= cp_budget_us ? 0.0 : penalty_db;
}

}  // namespace comp::sync
