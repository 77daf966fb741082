#include <doctest.h>

#include <cmath>

#include "comp/backhaul.hpp"
#include "comp/common.hpp"

using namespace comp;
using namespace comp::backhaul;

namespace {
JtLoad load_of(int n_users, double csi_bits = 0.0, int interval = 1) {
  JtLoad l;
  l.n_users = n_users;
  l.sample_rate_hz = 30.725e6;
  l.csi_bits_per_interval = csi_bits;
  l.feedback_interval_slots = interval;
  l.slot_duration_s = 1e-3;
  return l;
}
}  // namespace

TEST_CASE("JT backhaul requirement arithmetic") {
  // one 16-bit I/Q stream at the testbed sampling rate
  CHECK(jt_required_gbps(load_of(1), 16) ==
        doctest::Approx(2.0 * 16 * 30.725e6 / 1e9).epsilon(1e-12));

  // zero users leave only the CSI exchange
  auto l = load_of(0, 1920.0, 8);
  CHECK(jt_required_gbps(l, 16) == doctest::Approx(csi_rate_gbps(l)).epsilon(1e-12));
  CHECK(csi_rate_gbps(l) == doctest::Approx(1920.0 / (8 * 1e-3) / 1e9).epsilon(1e-12));

  // the I/Q term is linear in the user count
  double csi = 500.0;
  double one = jt_required_gbps(load_of(1, csi), 12) - csi_rate_gbps(load_of(1, csi));
  double two = jt_required_gbps(load_of(2, csi), 12) - csi_rate_gbps(load_of(2, csi));
  CHECK(two == doctest::Approx(2.0 * one).epsilon(1e-12));
}

TEST_CASE("CS/CB consumes CSI only, independent of payload users") {
  auto a = load_of(1, 960.0);
  auto b = load_of(50, 960.0);
  CHECK(cscb_required_gbps(a) == cscb_required_gbps(b));
}

TEST_CASE("I/Q bit fitting") {
  auto budget = uniform_budget(240.0, 0.25, 3);
  CHECK(fit_iq_bits(budget, load_of(4), 16) == 16);

  budget.capacity_gbps = 0.001;
  CHECK(fit_iq_bits(budget, load_of(4), 16) == 0);  // JT infeasible

  // capacity placed exactly at the 8-bit requirement selects 8 bits
  auto l = load_of(4, 768.0);
  budget.capacity_gbps = jt_required_gbps(l, 8);
  CHECK(fit_iq_bits(budget, l, 16) == 8);

  SUBCASE("monotone non-decreasing in capacity") {
    auto l2 = load_of(7, 1234.0);
    int prev = 0;
    for (double cap = 0.05; cap < 10.0; cap *= 1.35) {
      BackhaulBudget b = uniform_budget(cap, 0.25, 3);
      int bits = fit_iq_bits(b, l2, 16);
      CHECK(bits >= prev);
      prev = bits;
    }
  }
}

TEST_CASE("latency contribution") {
  auto budget = uniform_budget(1.0, 1.0, 1);
  CHECK(backhaul_latency_contribution_ms(budget, 0.0) == 1.0);
  CHECK(backhaul_latency_contribution_ms(budget, 1e6) == doctest::Approx(9.0));
  budget.capacity_gbps = 1e12;
  CHECK(backhaul_latency_contribution_ms(budget, 1e6) ==
        doctest::Approx(1.0).epsilon(1e-6));
  CHECK_THROWS_AS(backhaul_latency_contribution_ms(budget, -1.0), DegenerateInputError);
}

TEST_CASE("share arbitration") {
  auto budget = uniform_budget(120.0, 0.5, 3);

  SUBCASE("static policy is the identity") {
    auto same = rebalance_shares(budget, {10.0, 0.0, 1e9}, "static");
    CHECK(same.per_bs_share == budget.per_bs_share);
  }

  SUBCASE("backlog policy shifts share toward the loaded BS, sums to one") {
    auto reb = rebalance_shares(budget, {3e6, 1e6, 0.0}, "backlog");
    double sum = 0;
    for (double s : reb.per_bs_share) sum += s;
    CHECK(std::abs(sum - 1.0) <= 1e-9);
    CHECK(reb.per_bs_share[0] > reb.per_bs_share[1]);
    CHECK(reb.per_bs_share[1] > reb.per_bs_share[2]);
    // uniform floor: nobody starves below half the fair share
    for (double s : reb.per_bs_share) CHECK(s >= 0.5 / 3 - 1e-12);
  }

  SUBCASE("per-BS slice of the bus") {
    auto one = share_budget(budget, 1);
    CHECK(one.capacity_gbps == doctest::Approx(40.0));
  }
}

TEST_CASE("transmit-side quantization noise model") {
  CHECK(iq_quant_relative_power(1) == doctest::Approx(16.0 / 3.0 / 4.0));
  CHECK(iq_quant_relative_power(16) == doctest::Approx((16.0 / 3.0) * std::exp2(-32.0)));
  double prev = 1e9;
  for (int b = 1; b <= 16; ++b) {
    CHECK(iq_quant_relative_power(b) < prev);
    prev = iq_quant_relative_power(b);
  }
  CHECK_THROWS_AS(iq_quant_relative_power(0), DegenerateInputError);
}
