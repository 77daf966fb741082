#include "comp/channel.hpp"

#include <algorithm>
#include <cmath>

namespace comp::channel {

Eigen::RowVectorXcd ChannelState::stacked_row(int user, bool apply_pathloss) const {
  int n_bs = static_cast<int>(h[user].size());
  int n_tx = static_cast<int>(h[user][0].cols());
  Eigen::RowVectorXcd row(n_bs * n_tx);
  for (int b = 0; b < n_bs; ++b) {
    double scale = apply_pathloss ? std::pow(10.0, -pathloss_db[user][b] / 20.0) : 1.0;
    for (int a = 0; a < n_tx; ++a) row(b * n_tx + a) = scale * h[user][b](0, a);
  }
  return row;
}

Eigen::RowVectorXcd CsiReport::stacked_row(const std::vector<double>& pathloss_db_row,
                                           bool apply_pathloss) const {
  int n_bs = static_cast<int>(h_hat.size());
  int n_tx = static_cast<int>(h_hat[0].cols());
  Eigen::RowVectorXcd row(n_bs * n_tx);
  for (int b = 0; b < n_bs; ++b) {
    double scale = apply_pathloss ? std::pow(10.0, -pathloss_db_row[b] / 20.0) : 1.0;
    for (int a = 0; a < n_tx; ++a) row(b * n_tx + a) = scale * h_hat[b](0, a);
  }
  return row;
}

double gauss_markov_a(double doppler_hz, double slot_duration_s) {
  if (doppler_hz <= 0.0) return 1.0;
  return std::cyl_bessel_j(0.0, 2.0 * M_PI * doppler_hz * slot_duration_s);
}

double quant_clip_range(double clip_sigmas) {
  return clip_sigmas * std::sqrt(0.5);  // per-component std of CN(0,1)
}

double csi_error_variance(int quant_bits, double clip_sigmas) {
  double step = 2.0 * quant_clip_range(clip_sigmas) / std::exp2(quant_bits);
  return 2.0 * step * step / 12.0;
}

double quantize_component(double x, double clip, int bits, uint32_t* code) {
  const uint64_t levels = 1ULL << bits;
  const double step = 2.0 * clip / static_cast<double>(levels);
  double clipped = std::clamp(x, -clip, clip);
  auto idx = static_cast<int64_t>(std::floor((clipped + clip) / step));
  idx = std::clamp<int64_t>(idx, 0, static_cast<int64_t>(levels) - 1);
  if (code) *code = static_cast<uint32_t>(idx);
  return -clip + (static_cast<double>(idx) + 0.5) * step;
}

ChannelGenerator::ChannelGenerator(const ScenarioConfig& cfg, uint64_t seed)
    : n_users_(cfg.users.count),
      n_bs_(cfg.cluster.n_bs),
      n_rx_(cfg.cluster.rx_antennas),
      n_tx_(cfg.cluster.tx_antennas),
      a_(gauss_markov_a(cfg.channel.doppler_hz, cfg.sim.slot_duration_s)),
      rng_(Rng::derive(seed, "channel")) {
  state_.doppler_hz = cfg.channel.doppler_hz;
  state_.h.assign(n_users_, std::vector<Eigen::MatrixXcd>(
                                n_bs_, Eigen::MatrixXcd::Zero(n_rx_, n_tx_)));
  state_.pathloss_db = cfg.pathloss_db();
}

const ChannelState& ChannelGenerator::step() {
  const bool first = state_.slot < 0;
  const double keep = first ? 0.0 : a_;
  const double innov = first ? 1.0 : std::sqrt(std::max(0.0, 1.0 - a_ * a_));
  for (int u = 0; u < n_users_; ++u)
    for (int b = 0; b < n_bs_; ++b)
      for (int i = 0; i < n_rx_; ++i)
        for (int j = 0; j < n_tx_; ++j) {
          std::complex<double> z = rng_.cnormal();
          state_.h[u][b](i, j) = keep * state_.h[u][b](i, j) + innov * z;
        }
  ++state_.slot;
  return state_;
}

ChannelState generate_channel(const ScenarioConfig& cfg, uint64_t seed, int slot) {
  if (slot < 0) throw DegenerateInputError("generate_channel: slot must be >= 0");
  validate_config(cfg);
  ChannelGenerator gen(cfg, seed);
  for (int t = 0; t <= slot; ++t) gen.step();
  return gen.state();
}

CsiReport quantize_csi(const ChannelState& truth, int quant_bits, int user,
                       double clip_sigmas) {
  if (quant_bits < 1) throw DegenerateInputError("quantize_csi: quant_bits must be >= 1");
  const double clip = quant_clip_range(clip_sigmas);
  CsiReport rep;
  rep.user = user;
  rep.quant_bits = quant_bits;
  rep.age_slots = 0;

  uint64_t hash = 0xcbf29ce484222325ULL;
  double frob2 = 0.0;
  int n_bs = static_cast<int>(truth.h[user].size());
  rep.h_hat.resize(n_bs);
  for (int b = 0; b < n_bs; ++b) {
    const auto& m = truth.h[user][b];
    Eigen::MatrixXcd q(m.rows(), m.cols());
    for (int i = 0; i < m.rows(); ++i)
      for (int j = 0; j < m.cols(); ++j) {
        uint32_t cre = 0, cim = 0;
        double re = quantize_component(m(i, j).real(), clip, quant_bits, &cre);
        double im = quantize_component(m(i, j).imag(), clip, quant_bits, &cim);
        q(i, j) = {re, im};
        frob2 += re * re + im * im;
        hash = (hash ^ cre) * 0x100000001b3ULL;
        hash = (hash ^ cim) * 0x100000001b3ULL;
      }
    rep.h_hat[b] = std::move(q);
  }

  // RI: numerical rank of the stacked report. Single-antenna users give 1
  // unless the whole report quantized to zero.
  int n_tx = static_cast<int>(rep.h_hat[0].cols());
  int n_rx = static_cast<int>(rep.h_hat[0].rows());
  Eigen::MatrixXcd stacked(n_rx, n_bs * n_tx);
  for (int b = 0; b < n_bs; ++b)
    stacked.block(0, b * n_tx, n_rx, n_tx) = rep.h_hat[b];
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(stacked);
  double smax = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
  int rank = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > 1e-9 * std::max(smax, 1e-300)) ++rank;
  rep.ri = std::max(1, rank);

  // PMI stands in for a codebook index: hash of the quantizer codes.
  rep.pmi = static_cast<uint32_t>(hash & 0xffff);

  // CQI: coarse monotone hint from mean per-antenna reported power.
  double mean_pw = frob2 / static_cast<double>(n_bs * n_tx * n_rx);
  rep.cqi = std::clamp(static_cast<int>(std::lround(5.0 * std::log2(1.0 + mean_pw))), 0, 15);
  return rep;
}

double estimate_coherence(const ChannelState& h_t, const ChannelState& h_s, int user) {
  std::complex<double> inner(0.0, 0.0);
  double nt = 0.0, ns = 0.0;
  int n_bs = static_cast<int>(h_t.h[user].size());
  for (int b = 0; b < n_bs; ++b) {
    const auto& a = h_t.h[user][b];
    const auto& c = h_s.h[user][b];
    if (a.rows() != c.rows() || a.cols() != c.cols())
      throw DegenerateInputError("estimate_coherence: dimension mismatch");
    for (int i = 0; i < a.rows(); ++i)
      for (int j = 0; j < a.cols(); ++j) {
        inner += std::conj(a(i, j)) * c(i, j);
        nt += std::norm(a(i, j));
        ns += std::norm(c(i, j));
      }
  }
  if (nt <= 0.0 || ns <= 0.0)
    throw DegenerateInputError("estimate_coherence: zero-norm channel");
  return inner.real() / (std::sqrt(nt) * std::sqrt(ns));
}

int adapt_feedback_interval(double coherence, int current_interval, int min_interval,
                            int max_interval, double high_threshold,
                            double low_threshold) {
  if (coherence >= high_threshold)
    return std::min(current_interval * 2, max_interval);
  if (coherence <= low_threshold)
    return std::max(current_interval / 2, min_interval);
  return current_interval;
}

}  // namespace comp::channel
