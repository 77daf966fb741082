#include "comp/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace comp::scheduler {

namespace {

double sort_key(const UserQueue& q) { return q.priority * q.q_bits; }

// Deterministic candidate ordering: by descending key, user id breaking ties.
std::vector<int> ranked_users(const std::vector<UserQueue>& queues,
                              const std::vector<int>& eligible) {
  std::vector<int> order = eligible;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    double ka = sort_key(queues[a]), kb = sort_key(queues[b]);
    if (ka != kb) return ka > kb;
    return a < b;
  });
  return order;
}

double direction_corr(const Eigen::RowVectorXcd& a, const Eigen::RowVectorXcd& b) {
  double na = a.norm(), nb = b.norm();
  if (na <= 0 || nb <= 0) return 1.0;  // degenerate rows never co-scheduled
  return std::abs((a * b.adjoint())(0, 0)) / (na * nb);
}

}  // namespace

std::vector<UserQueue> update_queues(const std::vector<UserQueue>& queues,
                                     const std::vector<double>& served_bits,
                                     const std::vector<double>& arrival_bits) {
  std::vector<UserQueue> out = queues;
  for (size_t u = 0; u < queues.size(); ++u) {
    if (served_bits[u] < 0 || arrival_bits[u] < 0)
      throw DegenerateInputError("update_queues: negative served/arrivals");
    out[u].q_bits = std::max(queues[u].q_bits - served_bits[u], 0.0) + arrival_bits[u];
  }
  return out;
}

CooperativeAbility evaluate_ability(const backhaul::BackhaulBudget& budget,
                                    const backhaul::JtLoad& load, int n_antennas,
                                    double tx_power_dbm, int iq_bits_max) {
  CooperativeAbility a;
  a.n_antennas = n_antennas;
  a.tx_power_dbm = tx_power_dbm;
  int n_bs = static_cast<int>(budget.per_bs_share.size());
  double need = backhaul::jt_required_gbps(load, iq_bits_max);
  double worst = std::numeric_limits<double>::infinity();
  for (int b = 0; b < n_bs; ++b) {
    double share_gbps = budget.per_bs_share[b] * budget.capacity_gbps;
    a.backhaul_share_gbps.push_back(share_gbps);
    // share * n_bs: a uniformly shared bus scores capacity / requirement
    worst = std::min(worst, need > 0 ? share_gbps * n_bs / need : 0.0);
  }
  a.score = n_bs > 0 ? worst : 0.0;
  return a;
}

phy::TxMode select_mode(const CooperativeAbility& ability, double threshold) {
  return ability.score >= threshold ? phy::TxMode::jt : phy::TxMode::cscb;
}

std::vector<int> group_users(const Eigen::MatrixXcd& reported_rows,
                             const std::vector<UserQueue>& queues,
                             const std::vector<int>& eligible, int max_group,
                             double corr_threshold) {
  std::vector<int> admitted;
  for (int u : ranked_users(queues, eligible)) {
    if (static_cast<int>(admitted.size()) >= max_group) break;
    if (reported_rows.row(u).norm() <= 0) continue;
    bool ok = true;
    for (int v : admitted)
      if (direction_corr(reported_rows.row(u), reported_rows.row(v)) >= corr_threshold) {
        ok = false;
        break;
      }
    if (ok) admitted.push_back(u);
  }
  std::sort(admitted.begin(), admitted.end());
  return admitted;
}

std::vector<std::vector<int>> candidate_groups(const Eigen::MatrixXcd& reported_rows,
                                               const std::vector<UserQueue>& queues,
                                               const std::vector<int>& eligible,
                                               int max_group, double corr_threshold) {
  std::vector<int> base =
      group_users(reported_rows, queues, eligible, max_group, corr_threshold);
  std::set<std::vector<int>> uniq;
  if (!base.empty()) uniq.insert(base);
  std::set<int> in_base(base.begin(), base.end());
  for (int out : base) {
    for (int in : eligible) {
      if (in_base.count(in)) continue;
      if (reported_rows.row(in).norm() <= 0) continue;
      std::vector<int> g;
      for (int u : base)
        if (u != out) g.push_back(u);
      g.push_back(in);
      std::sort(g.begin(), g.end());
      uniq.insert(g);
    }
  }
  return {uniq.begin(), uniq.end()};
}

std::vector<int> cscb_reduce(const SlotContext& ctx, const std::vector<int>& group) {
  std::vector<int> order = ranked_users(ctx.queues, group);
  std::set<int> used_bs;
  std::vector<int> kept;
  for (int u : order) {
    int b = ctx.anchor_bs[u];
    if (used_bs.count(b)) continue;
    used_bs.insert(b);
    kept.push_back(u);
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

std::optional<ClusterPlan> evaluate_candidate(const SlotContext& ctx,
                                              const std::vector<int>& group_in,
                                              phy::TxMode mode) {
  ClusterPlan plan;
  plan.mode = mode;
  plan.group = mode == phy::TxMode::cscb ? cscb_reduce(ctx, group_in) : group_in;
  const int k = static_cast<int>(plan.group.size());
  if (k == 0) return std::nullopt;
  const int total = ctx.layout.total();
  const int n_tx = ctx.layout.n_tx;

  plan.precoder.mode = mode;
  plan.precoder.w = Eigen::MatrixXcd::Zero(total, k);
  plan.precoder.power_w.assign(k, 0.0);
  plan.serving_bs.assign(k, -1);

  std::vector<double> noise(k, ctx.noise_w);  // predicted per-stream noise floor

  try {
    if (mode == phy::TxMode::jt) {
      Eigen::MatrixXcd h(k, total);
      for (int i = 0; i < k; ++i) h.row(i) = ctx.reported_rows.row(plan.group[i]);
      plan.precoder.w = phy::jt_precoder(h);
      // Transmit-side I/Q quantization noise, assuming every BS at full power.
      for (int i = 0; i < k; ++i) {
        double q = 0.0;
        for (int b = 0; b < ctx.layout.n_bs; ++b)
          q += ctx.iq_quant_rel * (ctx.p_max_w / n_tx) *
               ctx.reported_rows.row(plan.group[i]).segment(b * n_tx, n_tx).squaredNorm();
        noise[i] += q;
      }
      std::vector<double> gains(k);
      Eigen::MatrixXcd cross = h * plan.precoder.w;
      for (int i = 0; i < k; ++i) gains[i] = std::norm(cross(i, i)) / noise[i];
      plan.precoder.power_w =
          phy::water_filling(gains, ctx.layout.n_bs * ctx.p_max_w);
      phy::enforce_per_bs_power(plan.precoder, ctx.layout, ctx.p_max_w);
    } else {
      for (int i = 0; i < k; ++i) {
        int u = plan.group[i];
        int b = ctx.anchor_bs[u];
        plan.serving_bs[i] = b;
        Eigen::RowVectorXcd serving =
            ctx.reported_rows.row(u).segment(b * n_tx, n_tx);
        Eigen::MatrixXcd victims(k - 1, n_tx);
        int r = 0;
        for (int j = 0; j < k; ++j)
          if (j != i)
            victims.row(r++) =
                ctx.reported_rows.row(plan.group[j]).segment(b * n_tx, n_tx);
        Eigen::VectorXcd w = phy::cscb_beamformer(serving, victims);
        plan.precoder.w.col(i).segment(b * n_tx, n_tx) = w;
        plan.precoder.power_w[i] = ctx.p_max_w;  // one stream per serving BS
      }
    }
  } catch (const PrecodingError&) {
    return std::nullopt;
  } catch (const DegenerateInputError&) {
    return std::nullopt;
  }

  // Predicted SINR from the reported channels. The coherent part decays as
  // rho^2 with CSI age; aging plus quantization mismatch is booked as
  // interference spread over the beam directions. ICI is unknown to the
  // controller (residual offsets are not fed back), so prediction omits it.
  Eigen::MatrixXcd rep(k, total);
  for (int i = 0; i < k; ++i) rep.row(i) = ctx.reported_rows.row(plan.group[i]);
  Eigen::MatrixXcd cross = rep * plan.precoder.w;
  plan.mcs.assign(k, -1);
  plan.predicted_sinr_db.assign(k, 0.0);
  plan.predicted_rate_bps.assign(k, 0.0);
  const bool have_model = ctx.entry_var.size() > 0;
  for (int i = 0; i < k; ++i) {
    int u = plan.group[i];
    double rho = ctx.csi_rho.empty() ? 1.0 : ctx.csi_rho[u];
    double rho2 = rho * rho;
    double mismatch = 0.0;
    if (have_model) {
      double errvar = (1.0 - rho2) + ctx.csi_quant_var;
      for (int j = 0; j < k; ++j) {
        double spread = 0.0;
        for (int b = 0; b < ctx.layout.n_bs; ++b)
          spread += ctx.entry_var(u, b) *
                    plan.precoder.w.col(j).segment(b * n_tx, n_tx).squaredNorm();
        mismatch += errvar * spread * plan.precoder.power_w[j];
      }
    }
    double sig = rho2 * std::norm(cross(i, i)) * plan.precoder.power_w[i];
    double inter = 0.0;
    for (int j = 0; j < k; ++j)
      if (j != i) inter += rho2 * std::norm(cross(i, j)) * plan.precoder.power_w[j];
    double sinr_db = pow_to_db(sig / (inter + mismatch + noise[i]));
    auto pick = phy::rate_from_sinr(sinr_db - ctx.link_margin_db, ctx.mcs,
                                    ctx.symbol_rate_hz);
    plan.predicted_sinr_db[i] = sinr_db;
    plan.mcs[i] = pick.mcs;
    plan.predicted_rate_bps[i] = pick.rate_bps;
  }
  return plan;
}

namespace {

// Predicted service for one plan: min(rate * T, Q) per scheduled user.
std::vector<double> predicted_served_bits(const SlotContext& ctx,
                                          const ClusterPlan& plan) {
  std::vector<double> served(ctx.queues.size(), 0.0);
  for (size_t i = 0; i < plan.group.size(); ++i) {
    int u = plan.group[i];
    served[u] =
        std::min(plan.predicted_rate_bps[i] * ctx.slot_duration_s, ctx.queues[u].q_bits);
  }
  return served;
}

}  // namespace

double kqi_objective(const SlotContext& ctx, const ClusterPlan& plan) {
  const auto& sessions = *ctx.sessions;
  auto served = predicted_served_bits(ctx, plan);
  double obj = 0.0;
  int n_levels = static_cast<int>(ctx.ladder_bps.size());
  for (size_t u = 0; u < ctx.queues.size(); ++u) {
    const auto& sess = sessions[u];
    // b_u: playback seconds the delivered bits sustain.
    double b = served[u] / ctx.ladder_bps[sess.quality_level];
    obj += ctx.queue_scale * ctx.queues[u].q_bits * b;
    auto step = kqi::step_playback(sess, served[u], ctx.slot_duration_s,
                                   ctx.ladder_bps, ctx.rebuffer_s);
    obj -= ctx.v * kqi::kqi_loss(sess, step.stalled, sess.quality_level, n_levels,
                                 ctx.kqi_alpha, ctx.kqi_beta);
  }
  return obj;
}

double kpi_objective(const SlotContext& ctx, const ClusterPlan& plan) {
  double sum = 0.0;
  for (double s_db : plan.predicted_sinr_db)
    sum += ctx.symbol_rate_hz * std::log2(1.0 + db_to_pow(s_db));
  return sum;
}

namespace {

ClusterPlan schedule_slot(const SlotContext& ctx, bool kqi_driven) {
  phy::TxMode mode;
  if (ctx.mode_policy == "jt")
    mode = phy::TxMode::jt;
  else if (ctx.mode_policy == "cscb")
    mode = phy::TxMode::cscb;
  else
    mode = select_mode(ctx.ability, ctx.mode_threshold);

  ClusterPlan best;
  best.mode = mode;
  // Precoding infeasibility shrinks the group and retries.
  for (int size = ctx.max_group; size >= 1; --size) {
    auto groups = candidate_groups(ctx.reported_rows, ctx.queues, ctx.eligible, size,
                                   ctx.corr_threshold);
    bool have = false;
    double best_obj = 0.0;
    for (const auto& g : groups) {
      auto plan = evaluate_candidate(ctx, g, mode);
      if (!plan) continue;
      double obj = kqi_driven ? kqi_objective(ctx, *plan) : kpi_objective(ctx, *plan);
      plan->objective = obj;
      // Candidates arrive in lexicographic group order, so keeping the first
      // maximum implements the smallest-id-set tie break.
      if (!have || obj > best_obj) {
        have = true;
        best_obj = obj;
        best = std::move(*plan);
      }
    }
    if (have) return best;
  }
  return best;  // empty group = idle slot when nothing was feasible
}

}  // namespace

ClusterPlan schedule_slot_kqi(const SlotContext& ctx) {
  if (ctx.v < 0) throw DegenerateInputError("schedule_slot_kqi: V must be >= 0");
  if (!ctx.sessions)
    throw DegenerateInputError("schedule_slot_kqi: sessions required");
  return schedule_slot(ctx, true);
}

ClusterPlan schedule_slot_kpi(const SlotContext& ctx) { return schedule_slot(ctx, false); }

void validate_plan(const SlotContext& ctx, const ClusterPlan& plan, int iq_bits) {
  if (plan.idle()) return;
  const int k = static_cast<int>(plan.group.size());
  if (k > ctx.layout.total())
    throw DegenerateInputError("plan: group exceeds spatial DoF");
  if (plan.mode == phy::TxMode::jt && iq_bits < 1)
    throw DegenerateInputError("plan: JT scheduled without backhaul I/Q budget");
  if (plan.mode == phy::TxMode::cscb) {
    std::set<int> bs(plan.serving_bs.begin(), plan.serving_bs.end());
    if (static_cast<int>(bs.size()) != k)
      throw DegenerateInputError("plan: CS/CB requires distinct serving BSs");
  }
  for (int b = 0; b < ctx.layout.n_bs; ++b) {
    double p = phy::bs_tx_power(plan.precoder, ctx.layout, b);
    if (p > ctx.p_max_w * (1.0 + 1e-9))
      throw DegenerateInputError("plan: per-BS power constraint violated");
  }
}

}  // namespace comp::scheduler
