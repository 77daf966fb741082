#ifndef COMP_PHY_HPP
#define COMP_PHY_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "comp/common.hpp"
#include "comp/sync.hpp"

namespace comp::phy {

struct AntennaLayout {
  int n_bs = 3;
  int n_tx = 4;
  int total() const { return n_bs * n_tx; }
};

enum class TxMode { jt, cscb };

// Beamforming directions and per-stream powers over the stacked coordinated
// antenna space. Columns of w are unit norm; CS/CB columns are zero outside
// the serving BS's antenna block.
struct Precoder {
  TxMode mode = TxMode::jt;
  Eigen::MatrixXcd w;            // total() x n_streams, unit columns
  std::vector<double> power_w;   // per stream
};

// Zero-forcing directions from the stacked reported rows (one row per user).
// Returns unit-norm columns of H^H (H H^H)^-1. Throws PrecodingError when the
// stacked matrix is row-rank deficient at the given relative tolerance.
Eigen::MatrixXcd jt_precoder(const Eigen::MatrixXcd& h_rows, double rank_tol = 1e-9);

// Null-steering beamformer for one serving BS: projects the matched filter
// onto the null space of the victim rows. victims may be empty. Throws
// PrecodingError (insufficient_dof) when victims >= n_tx, and
// (rank_deficient) when the serving channel lies inside the victim span.
Eigen::VectorXcd cscb_beamformer(const Eigen::RowVectorXcd& serving,
                                 const Eigen::MatrixXcd& victims, double tol = 1e-9);

// Transmit power drawn from one BS's antenna block by the precoder.
double bs_tx_power(const Precoder& pc, const AntennaLayout& layout, int bs);

// Uniformly downscales all stream powers so every BS meets p_max; uniform
// scaling keeps the ZF/null directions intact. Returns the scale applied.
double enforce_per_bs_power(Precoder& pc, const AntennaLayout& layout, double p_max_w);

// Water-filling over effective gains: p_i = max(mu - 1/g_i, 0) with
// sum(p) = total_power. Zero gains get zero power; all-zero gains throw.
std::vector<double> water_filling(const std::vector<double>& gains, double total_power);

struct McsEntry {
  double min_sinr_db = 0.0;
  double bits_per_symbol = 1.0;
  std::string name;
};

struct McsTable {
  std::vector<McsEntry> entries;  // thresholds strictly increasing
  double code_rate = 0.5;
};

McsTable shannon_gap_mcs(const std::vector<double>& bits_per_symbol,
                         const std::vector<std::string>& names, double code_rate,
                         double gap_db = 3.0);

struct RatePick {
  int mcs = -1;          // -1 = outage
  double rate_bps = 0.0;
};

// Highest entry whose threshold is <= sinr (closed lower bound); rate is
// bits/symbol * code rate * symbol budget.
RatePick rate_from_sinr(double sinr_db, const McsTable& table, double symbol_rate_hz);

struct SinrInputs {
  Eigen::MatrixXcd true_rows;       // n_streams x total(): true stacked channels
  const Precoder* precoder = nullptr;
  AntennaLayout layout;
  sync::IciFactors ici;             // applied for JT only
  std::vector<double> quant_noise_w;  // per stream, receiver-side I/Q quant noise
  double noise_w = 1e-12;
  std::vector<int> anchor_bs;       // per stream; cross-BS power excludes it
};

// True per-stream SINR in dB under inter-stream interference, ICI leakage of
// cross-BS signal power, quantization noise, and thermal noise. CS/CB skips
// the ICI terms entirely.
std::vector<double> compute_sinr(const SinrInputs& in);

}  // namespace comp::phy

#endif
