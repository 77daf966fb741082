#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "comp/phy.hpp"

using namespace comp;
using namespace comp::phy;

namespace {

Eigen::MatrixXcd random_rows(Rng& rng, int k, int n) {
  Eigen::MatrixXcd m(k, n);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = rng.cnormal();
  return m;
}

// Plain-loop SINR evaluation, independent of compute_sinr's structure.
std::vector<double> sinr_oracle(const Eigen::MatrixXcd& rows, const Precoder& pc,
                                const AntennaLayout& lay, const sync::IciFactors& ici,
                                const std::vector<double>& quant, double noise,
                                const std::vector<int>& anchors) {
  int k = rows.rows();
  std::vector<double> out(k);
  for (int u = 0; u < k; ++u) {
    auto dot = [&](int v, int b0, int b1) {
      std::complex<double> s{0, 0};
      for (int b = b0; b < b1; ++b)
        for (int a = 0; a < lay.n_tx; ++a)
          s += rows(u, b * lay.n_tx + a) * pc.w(b * lay.n_tx + a, v);
      return s;
    };
    double sig = std::norm(dot(u, 0, lay.n_bs)) * pc.power_w[u];
    double inter = 0;
    for (int v = 0; v < k; ++v)
      if (v != u) inter += std::norm(dot(v, 0, lay.n_bs)) * pc.power_w[v];
    double sx = 0;
    for (int v = 0; v < k; ++v)
      for (int b = 0; b < lay.n_bs; ++b)
        if (b != anchors[u]) sx += std::norm(dot(v, b, b + 1)) * pc.power_w[v];
    double num = sig, den = inter + quant[u] + noise;
    if (pc.mode == TxMode::jt) {
      num *= ici.signal_gain;
      den += ici.interference_power * sx;
    }
    out[u] = 10.0 * std::log10(num / den);
  }
  return out;
}

// Objective for the water-filling oracle.
double sum_log_rate(const std::vector<double>& g, const std::vector<double>& p) {
  double s = 0;
  for (size_t i = 0; i < g.size(); ++i) s += std::log(1.0 + g[i] * p[i]);
  return s;
}

// Independent maximizer: pairwise budget exchanges on a refining grid.
// Coordinate ascent over pairs converges to the global optimum for this
// separable concave objective.
std::vector<double> water_filling_grid_oracle(const std::vector<double>& g, double P) {
  size_t n = g.size();
  std::vector<double> p(n, P / n);
  for (double step = P / 16.0; step > 1e-7 * P; step /= 4.0) {
    for (int pass = 0; pass < 60; ++pass) {
      bool moved = false;
      for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) {
          if (i == j) continue;
          if (p[j] < step) continue;
          std::vector<double> q = p;
          q[i] += step;
          q[j] -= step;
          if (sum_log_rate(g, q) > sum_log_rate(g, p)) {
            p = q;
            moved = true;
          }
        }
      if (!moved) break;
    }
  }
  return p;
}

}  // namespace

TEST_CASE("JT zero-forcing directions") {
  Rng rng(1);

  SUBCASE("single user reduces to the matched filter") {
    Eigen::MatrixXcd h = random_rows(rng, 1, 4);
    auto w = jt_precoder(h);
    CHECK(w.cols() == 1);
    CHECK(std::abs(w.col(0).norm() - 1.0) < 1e-12);
    CHECK(std::abs((h * w)(0, 0)) == doctest::Approx(h.row(0).norm()).epsilon(1e-9));
  }

  SUBCASE("orthogonal users give zero cross terms and matched-filter columns") {
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(2, 4);
    h(0, 0) = {1.0, 0.5};
    h(1, 2) = {0.0, 2.0};
    auto w = jt_precoder(h);
    auto cross = h * w;
    CHECK(std::abs(cross(0, 1)) < 1e-12);
    CHECK(std::abs(cross(1, 0)) < 1e-12);
  }

  SUBCASE("random groups are interference-free under perfect CSI") {
    for (int trial = 0; trial < 50; ++trial) {
      int k = 2 + trial % 3;
      Eigen::MatrixXcd h = random_rows(rng, k, 8);  // 2 BS x 4 antennas
      auto w = jt_precoder(h);
      auto cross = h * w;
      for (int u = 0; u < k; ++u) {
        for (int v = 0; v < k; ++v)
          if (u != v)
            CHECK(std::abs(cross(u, v)) <
                  1e-9 * std::abs(cross(u, u)) + 1e-12);
        CHECK(std::abs(w.col(u).norm() - 1.0) < 1e-12);
      }
    }
  }

  SUBCASE("rank-deficient stacks are rejected") {
    Eigen::MatrixXcd h = random_rows(rng, 2, 4);
    h.row(1) = h.row(0);
    CHECK_THROWS_AS(jt_precoder(h), PrecodingError);
    try {
      jt_precoder(h);
    } catch (const PrecodingError& e) {
      CHECK(e.reason == PrecodingError::Reason::rank_deficient);
    }
    Eigen::MatrixXcd tall = random_rows(rng, 5, 4);
    CHECK_THROWS_AS(jt_precoder(tall), PrecodingError);
  }
}

TEST_CASE("CS/CB null steering") {
  Rng rng(2);
  Eigen::RowVectorXcd h = random_rows(rng, 1, 4).row(0);

  SUBCASE("no victims -> matched filter") {
    Eigen::MatrixXcd none(0, 4);
    auto w = cscb_beamformer(h, none);
    Eigen::VectorXcd mf = h.adjoint();
    mf.normalize();
    CHECK((w - mf).norm() < 1e-12);
  }

  SUBCASE("an orthogonal victim leaves the beam unchanged") {
    Eigen::RowVectorXcd serving = Eigen::RowVectorXcd::Zero(4);
    serving(0) = {1.0, 1.0};
    Eigen::MatrixXcd victim = Eigen::MatrixXcd::Zero(1, 4);
    victim(0, 2) = {0.5, -1.0};
    auto w = cscb_beamformer(serving, victim);
    Eigen::VectorXcd mf = serving.adjoint();
    mf.normalize();
    CHECK((w - mf).norm() < 1e-12);
  }

  SUBCASE("random victims are nulled") {
    for (int trial = 0; trial < 50; ++trial) {
      int m = 1 + trial % 3;
      Eigen::RowVectorXcd serving = random_rows(rng, 1, 4).row(0);
      Eigen::MatrixXcd victims = random_rows(rng, m, 4);
      auto w = cscb_beamformer(serving, victims);
      for (int v = 0; v < m; ++v)
        CHECK(std::abs((victims.row(v) * w)(0, 0)) < 1e-9);
      CHECK(std::abs(w.norm() - 1.0) < 1e-12);
    }
  }

  SUBCASE("DoF exhaustion and degenerate serving channels are rejected") {
    Eigen::MatrixXcd victims = random_rows(rng, 4, 4);
    CHECK_THROWS_AS(cscb_beamformer(h, victims), PrecodingError);

    // serving channel inside the victim span
    Eigen::MatrixXcd v2 = random_rows(rng, 2, 4);
    Eigen::RowVectorXcd inside = v2.row(0) * 0.3 + v2.row(1) * 0.7;
    CHECK_THROWS_AS(cscb_beamformer(inside, v2), PrecodingError);
  }
}

TEST_CASE("per-BS power constraint enforcement") {
  Rng rng(3);
  AntennaLayout lay{3, 4};
  for (int trial = 0; trial < 30; ++trial) {
    int k = 1 + trial % 4;
    Precoder pc;
    pc.mode = TxMode::jt;
    pc.w = jt_precoder(random_rows(rng, k, lay.total()));
    pc.power_w.assign(k, rng.uniform(0.01, 2.0));
    std::vector<double> before = pc.power_w;
    double scale = enforce_per_bs_power(pc, lay, 0.1);
    for (int b = 0; b < lay.n_bs; ++b)
      CHECK(bs_tx_power(pc, lay, b) <= 0.1 * (1.0 + 1e-9));
    for (int i = 0; i < k; ++i)
      CHECK(pc.power_w[i] == doctest::Approx(before[i] * scale).epsilon(1e-12));
  }
}

TEST_CASE("water-filling") {
  SUBCASE("symmetric gains split evenly") {
    auto p = water_filling({1.0, 1.0}, 2.0);
    CHECK(p[0] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(p[1] == doctest::Approx(1.0).epsilon(1e-9));
  }

  SUBCASE("zero-gain channels are excluded") {
    auto p = water_filling({0.7, 0.0}, 3.0);
    CHECK(p[0] == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(p[1] == 0.0);
  }

  SUBCASE("all-zero gains are degenerate") {
    CHECK_THROWS_AS(water_filling({0.0, 0.0}, 1.0), DegenerateInputError);
    CHECK_THROWS_AS(water_filling({1.0}, 0.0), DegenerateInputError);
  }

  SUBCASE("matches the grid-search oracle") {
    auto p = water_filling({1.0, 0.25}, 1.0);
    auto q = water_filling_grid_oracle({1.0, 0.25}, 1.0);
    CHECK(std::abs(p[0] - q[0]) < 1e-4);
    CHECK(std::abs(p[1] - q[1]) < 1e-4);
  }

  SUBCASE("sum, positivity, and dominance over equal split") {
    Rng rng(4);
    for (int trial = 0; trial < 50; ++trial) {
      int n = 2 + trial % 5;
      std::vector<double> g(n);
      for (auto& x : g) x = rng.uniform01() < 0.15 ? 0.0 : rng.uniform(0.05, 20.0);
      bool any = false;
      for (double x : g) any |= x > 0;
      if (!any) g[0] = 1.0;
      double P = rng.uniform(0.5, 4.0);
      auto p = water_filling(g, P);
      double sum = 0;
      for (double x : p) {
        CHECK(x >= 0.0);
        sum += x;
      }
      CHECK(std::abs(sum - P) <= 1e-9 * P);
      std::vector<double> eq(n, P / n);
      CHECK(sum_log_rate(g, p) >= sum_log_rate(g, eq) - 1e-12);
    }
  }
}

TEST_CASE("MCS table and rate mapping") {
  auto table = shannon_gap_mcs({1.0, 2.0, 4.0}, {"2PSK-1/2", "4QAM-1/2", "16QAM-1/2"},
                               0.5, 3.0);
  // thresholds pinned: 10*log10(2^b - 1) + 3
  CHECK(table.entries[0].min_sinr_db == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(table.entries[1].min_sinr_db ==
        doctest::Approx(7.7712125471966244).epsilon(1e-12));
  CHECK(table.entries[2].min_sinr_db ==
        doctest::Approx(14.76091259055681).epsilon(1e-12));

  const double sym = 375e6;
  CHECK(rate_from_sinr(-std::numeric_limits<double>::infinity(), table, sym).rate_bps ==
        0.0);
  CHECK(rate_from_sinr(-100.0, table, sym).mcs == -1);

  auto top = rate_from_sinr(30.0, table, sym);
  CHECK(top.mcs == 2);
  CHECK(top.rate_bps == doctest::Approx(2.0 * sym));  // 2 effective bits/symbol

  // closed lower bound at the threshold
  auto edge = rate_from_sinr(table.entries[1].min_sinr_db, table, sym);
  CHECK(edge.mcs == 1);

  SUBCASE("monotone in SINR") {
    Rng rng(5);
    for (int i = 0; i < 200; ++i) {
      double a = rng.uniform(-20.0, 40.0), b = rng.uniform(-20.0, 40.0);
      if (a > b) std::swap(a, b);
      CHECK(rate_from_sinr(a, table, sym).rate_bps <=
            rate_from_sinr(b, table, sym).rate_bps);
    }
  }
}

TEST_CASE("SINR computation") {
  Rng rng(6);
  AntennaLayout lay{3, 4};
  auto table = shannon_gap_mcs({1, 2, 4}, {}, 0.5);

  SUBCASE("perfect-CSI ZF leaves interference below 1e-9 of signal") {
    Eigen::MatrixXcd rows = random_rows(rng, 3, lay.total());
    Precoder pc;
    pc.mode = TxMode::jt;
    pc.w = jt_precoder(rows);
    pc.power_w.assign(3, 0.05);
    SinrInputs in;
    in.true_rows = rows;
    in.precoder = &pc;
    in.layout = lay;
    in.noise_w = 1e-9;
    in.quant_noise_w.assign(3, 0.0);
    in.anchor_bs.assign(3, 0);
    auto sinr = compute_sinr(in);
    auto cross = rows * pc.w;
    for (int u = 0; u < 3; ++u) {
      double expect = std::norm(cross(u, u)) * 0.05 / 1e-9;
      CHECK(sinr[u] == doctest::Approx(10 * std::log10(expect)).epsilon(1e-9));
    }
  }

  SUBCASE("an offset equal to the spacing destroys the JT signal") {
    Eigen::MatrixXcd rows = random_rows(rng, 2, lay.total());
    Precoder pc;
    pc.mode = TxMode::jt;
    pc.w = jt_precoder(rows);
    pc.power_w.assign(2, 0.05);
    SinrInputs in;
    in.true_rows = rows;
    in.precoder = &pc;
    in.layout = lay;
    in.noise_w = 1e-9;
    in.quant_noise_w.assign(2, 0.0);
    in.anchor_bs.assign(2, 0);
    in.ici = sync::ici_factors(15e3, 15e3);
    auto sinr = compute_sinr(in);
    CHECK(std::isinf(sinr[0]));
    CHECK(sinr[0] < 0);
  }

  SUBCASE("matches an independent evaluation of the formula") {
    for (int trial = 0; trial < 20; ++trial) {
      int k = 2 + trial % 3;
      Eigen::MatrixXcd truth = random_rows(rng, k, lay.total());
      // 4-bit reported channels: perturbed truth stands in for quantization
      Eigen::MatrixXcd rep = truth + 0.05 * random_rows(rng, k, lay.total());
      Precoder pc;
      pc.mode = TxMode::jt;
      pc.w = jt_precoder(rep);
      pc.power_w.assign(k, 0.03);
      std::vector<double> quant(k);
      for (int u = 0; u < k; ++u) quant[u] = 1e-4 * (1 + u);
      std::vector<int> anchors(k);
      for (int u = 0; u < k; ++u) anchors[u] = u % lay.n_bs;
      SinrInputs in;
      in.true_rows = truth;
      in.precoder = &pc;
      in.layout = lay;
      in.noise_w = 3e-4;
      in.quant_noise_w = quant;
      in.anchor_bs = anchors;
      in.ici = sync::ici_factors(140.0, 15e3);
      auto got = compute_sinr(in);
      auto want = sinr_oracle(truth, pc, lay, in.ici, quant, in.noise_w, anchors);
      for (int u = 0; u < k; ++u)
        CHECK(got[u] == doctest::Approx(want[u]).epsilon(1e-12));
    }
  }

  SUBCASE("JT SINR is monotone non-increasing in the offset; CS/CB ignores it") {
    Eigen::MatrixXcd rows = random_rows(rng, 2, lay.total());
    Precoder jt;
    jt.mode = TxMode::jt;
    jt.w = jt_precoder(rows);
    jt.power_w.assign(2, 0.05);
    SinrInputs in;
    in.true_rows = rows;
    in.precoder = &jt;
    in.layout = lay;
    in.noise_w = 1e-9;
    in.quant_noise_w.assign(2, 0.0);
    in.anchor_bs = {0, 1};
    double prev = 1e9;
    for (double off : {0.0, 35.0, 70.0, 140.0, 262.5}) {
      in.ici = sync::ici_factors(off, 15e3);
      auto s = compute_sinr(in);
      CHECK(s[0] <= prev + 1e-12);
      prev = s[0];
    }

    Precoder cs = jt;
    cs.mode = TxMode::cscb;
    in.precoder = &cs;
    in.ici = sync::ici_factors(0.0, 15e3);
    auto base = compute_sinr(in);
    in.ici = sync::ici_factors(262.5, 15e3);
    auto shifted = compute_sinr(in);
    CHECK(base[0] == shifted[0]);  // bit-equal
    CHECK(base[1] == shifted[1]);
  }
}
