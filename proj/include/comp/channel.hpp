#ifndef COMP_CHANNEL_HPP
#define COMP_CHANNEL_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "comp/common.hpp"
#include "comp/config.hpp"

namespace comp::channel {

// True small-scale fading per (user, BS) plus long-term pathloss. h entries
// are unit-variance CN(0,1); pathloss is applied when stacking.
struct ChannelState {
  int slot = -1;
  double doppler_hz = 0.0;
  std::vector<std::vector<Eigen::MatrixXcd>> h;  // [user][bs], n_rx x n_tx
  std::vector<std::vector<double>> pathloss_db;  // [user][bs]

  // Row vector of the user's fading across all coordinated BS antennas,
  // optionally scaled by 10^(-PL/20) per BS. Requires n_rx == 1.
  Eigen::RowVectorXcd stacked_row(int user, bool apply_pathloss) const;
};

// Quantized, aged channel knowledge as reported to the controller.
struct CsiReport {
  int user = 0;
  int ri = 1;
  uint32_t pmi = 0;
  int cqi = 0;
  std::vector<Eigen::MatrixXcd> h_hat;  // per BS
  int quant_bits = 8;
  int age_slots = 0;
  int feedback_interval_slots = 1;

  Eigen::RowVectorXcd stacked_row(const std::vector<double>& pathloss_db_row,
                                  bool apply_pathloss) const;
};

// Lag-1 Gauss-Markov coefficient a = J0(2*pi*fd*T).
double gauss_markov_a(double doppler_hz, double slot_duration_s);

// Per-component clip range of the CSI quantizer: clip_sigmas * std of one
// real component of a CN(0,1) entry.
double quant_clip_range(double clip_sigmas);

// Mid-rise uniform quantization of one real component over [-c, c].
double quantize_component(double x, double clip, int bits, uint32_t* code = nullptr);

// Model variance of the CSI quantization error per complex entry (two
// components at step^2/12 each), on unit-variance fading.
double csi_error_variance(int quant_bits, double clip_sigmas);

// Rayleigh block fading with first-order Gauss-Markov correlation across
// slots. step() yields consecutive slots; the draw order is fixed so a given
// (config, seed) always produces the same sequence.
class ChannelGenerator {
 public:
  ChannelGenerator(const ScenarioConfig& cfg, uint64_t seed);
  const ChannelState& step();
  const ChannelState& state() const { return state_; }

 private:
  int n_users_, n_bs_, n_rx_, n_tx_;
  double a_;
  Rng rng_;
  ChannelState state_;
};

// One-shot generation of the state at a given slot (replays the recursion
// from slot 0; intended for tests and small probes).
ChannelState generate_channel(const ScenarioConfig& cfg, uint64_t seed, int slot);

CsiReport quantize_csi(const ChannelState& truth, int quant_bits, int user,
                       double clip_sigmas = 4.0);

// Normalized real part of the inner product between the two stacked channel
// snapshots of one user; 1 = unchanged, -1 = sign-flipped.
double estimate_coherence(const ChannelState& h_t, const ChannelState& h_s, int user);

// Doubling/halving rule on the feedback interval driven by coherence.
int adapt_feedback_interval(double coherence, int current_interval, int min_interval,
                            int max_interval, double high_threshold = 0.95,
                            double low_threshold = 0.80);

}  // namespace comp::channel

#endif
