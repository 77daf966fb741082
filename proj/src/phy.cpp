#include "comp/phy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace comp::phy {

Eigen::MatrixXcd jt_precoder(const Eigen::MatrixXcd& h_rows, double rank_tol) {
  const auto k = h_rows.rows();
  const auto n = h_rows.cols();
  if (k == 0) throw DegenerateInputError("jt_precoder: empty group");
  if (k > n)
    throw PrecodingError(PrecodingError::Reason::insufficient_dof,
                         "jt_precoder: more streams than antennas");
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(h_rows);
  const auto& sv = svd.singularValues();
  if (sv(sv.size() - 1) <= rank_tol * sv(0))
    throw PrecodingError(PrecodingError::Reason::rank_deficient,
                         "jt_precoder: stacked channel is rank deficient");
  Eigen::MatrixXcd gram = h_rows * h_rows.adjoint();
  Eigen::MatrixXcd w = h_rows.adjoint() *
                       gram.partialPivLu().solve(Eigen::MatrixXcd::Identity(k, k));
  for (Eigen::Index c = 0; c < w.cols(); ++c) w.col(c).normalize();
  return w;
}

Eigen::VectorXcd cscb_beamformer(const Eigen::RowVectorXcd& serving,
                                 const Eigen::MatrixXcd& victims, double tol) {
  const auto n_tx = serving.cols();
  if (victims.rows() >= n_tx)
    throw PrecodingError(PrecodingError::Reason::insufficient_dof,
                         "cscb_beamformer: victims exhaust the beamforming DoF");
  Eigen::VectorXcd w = serving.adjoint();
  double base = w.norm();
  if (base <= 0)
    throw DegenerateInputError("cscb_beamformer: zero serving channel");
  if (victims.rows() > 0) {
    // Orthonormal basis of the victim row space; project the matched filter
    // onto its orthogonal complement.
    Eigen::MatrixXcd vt = victims.adjoint();  // n_tx x m
    Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(vt);
    Eigen::MatrixXcd q = qr.householderQ() *
                         Eigen::MatrixXcd::Identity(n_tx, qr.rank());
    w -= q * (q.adjoint() * w);
  }
  if (w.norm() <= tol * base)
    throw PrecodingError(PrecodingError::Reason::rank_deficient,
                         "cscb_beamformer: serving channel lies in the victim span");
  w.normalize();
  return w;
}

double bs_tx_power(const Precoder& pc, const AntennaLayout& layout, int bs) {
  double p = 0.0;
  for (Eigen::Index c = 0; c < pc.w.cols(); ++c)
    p += pc.power_w[c] * pc.w.col(c).segment(bs * layout.n_tx, layout.n_tx).squaredNorm();
  return p;
}

double enforce_per_bs_power(Precoder& pc, const AntennaLayout& layout, double p_max_w) {
  double worst = 0.0;
  for (int b = 0; b < layout.n_bs; ++b)
    worst = std::max(worst, bs_tx_power(pc, layout, b) / p_max_w);
  if (worst <= 1.0) return 1.0;
  double scale = 1.0 / worst;
  for (double& p : pc.power_w) p *= scale;
  return scale;
}

std::vector<double> water_filling(const std::vector<double>& gains, double total_power) {
  if (total_power <= 0)
    throw DegenerateInputError("water_filling: total_power must be > 0");
  double max_inv = 0.0;
  bool any = false;
  for (double g : gains) {
    if (g < 0) throw DegenerateInputError("water_filling: negative gain");
    if (g > 0) {
      any = true;
      max_inv = std::max(max_inv, 1.0 / g);
    }
  }
  if (!any) throw DegenerateInputError("water_filling: all gains are zero");

  auto fill = [&](double mu) {
    double s = 0.0;
    for (double g : gains)
      if (g > 0) s += std::max(mu - 1.0 / g, 0.0);
    return s;
  };
  double lo = 0.0, hi = total_power + max_inv;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (fill(mid) < total_power)
      lo = mid;
    else
      hi = mid;
  }
  double mu = 0.5 * (lo + hi);
  std::vector<double> p(gains.size(), 0.0);
  for (size_t i = 0; i < gains.size(); ++i)
    if (gains[i] > 0) p[i] = std::max(mu - 1.0 / gains[i], 0.0);
  return p;
}

McsTable shannon_gap_mcs(const std::vector<double>& bits_per_symbol,
                         const std::vector<std::string>& names, double code_rate,
                         double gap_db) {
  McsTable t;
  t.code_rate = code_rate;
  for (size_t i = 0; i < bits_per_symbol.size(); ++i) {
    McsEntry e;
    e.bits_per_symbol = bits_per_symbol[i];
    e.name = i < names.size() ? names[i] : "mcs" + std::to_string(i);
    e.min_sinr_db = pow_to_db(std::exp2(bits_per_symbol[i]) - 1.0) + gap_db;
    t.entries.push_back(e);
  }
  return t;
}

RatePick rate_from_sinr(double sinr_db, const McsTable& table, double symbol_rate_hz) {
  RatePick pick;
  for (int i = 0; i < static_cast<int>(table.entries.size()); ++i)
    if (sinr_db >= table.entries[i].min_sinr_db) pick.mcs = i;
  if (pick.mcs >= 0)
    pick.rate_bps =
        table.entries[pick.mcs].bits_per_symbol * table.code_rate * symbol_rate_hz;
  return pick;
}

std::vector<double> compute_sinr(const SinrInputs& in) {
  const auto& pc = *in.precoder;
  const int n = static_cast<int>(in.true_rows.rows());
  const int n_tx = in.layout.n_tx;
  const bool jt = pc.mode == TxMode::jt;

  // Cross-gain matrix: a(u, v) = true channel of u through beam of v.
  Eigen::MatrixXcd cross = in.true_rows * pc.w;

  std::vector<double> out(n);
  for (int u = 0; u < n; ++u) {
    double signal = std::norm(cross(u, u)) * pc.power_w[u];
    double inter = 0.0;
    for (int v = 0; v < n; ++v)
      if (v != u) inter += std::norm(cross(u, v)) * pc.power_w[v];

    double num = signal;
    double den = inter + in.noise_w;
    if (!in.quant_noise_w.empty()) den += in.quant_noise_w[u];
    if (jt) {
      num *= in.ici.signal_gain;
      if (in.ici.interference_power > 0.0) {
        // Received power arriving from every BS other than the user's
        // anchor, across all streams, smeared by the carrier offset.
        double cross_bs = 0.0;
        for (int v = 0; v < n; ++v)
          for (int b = 0; b < in.layout.n_bs; ++b) {
            if (b == in.anchor_bs[u]) continue;
            std::complex<double> amp =
                in.true_rows.row(u).segment(b * n_tx, n_tx) *
                pc.w.col(v).segment(b * n_tx, n_tx);
            cross_bs += std::norm(amp) * pc.power_w[v];
          }
        den += in.ici.interference_power * cross_bs;
      }
    }
    out[u] = pow_to_db(num / den);
  }
  return out;
}

}  // namespace comp::phy
