#include "comp/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "comp/backhaul.hpp"
#include "comp/channel.hpp"
#include "comp/kqi.hpp"
#include "comp/scheduler.hpp"
#include "comp/sync.hpp"

namespace comp::engine {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct CsiUserState {
  channel::CsiReport report;
  Eigen::RowVectorXcd raw_row_at_report;  // fading only, for coherence
  Eigen::RowVectorXcd reported_row;       // pathloss applied, for scheduling
  int last_report_slot = -1;
  int interval = 1;
};

kqi::VideoSession fresh_session(const ScenarioConfig& cfg, double sensitivity) {
  kqi::VideoSession s;
  s.quality_level = cfg.video.default_quality;
  s.file_size_bits = cfg.video.duration_s * cfg.video.ladder_bps[s.quality_level];
  s.engagement_sensitivity = sensitivity;
  return s;
}

// Strongest-mean-channel users first; used when the backhaul cannot carry
// I/Q for everyone and attached users must be dropped.
std::vector<int> strongest_users(const std::vector<std::vector<double>>& pl, int k) {
  std::vector<int> ids(pl.size());
  for (size_t u = 0; u < pl.size(); ++u) ids[u] = static_cast<int>(u);
  std::stable_sort(ids.begin(), ids.end(), [&](int a, int b) {
    double ga = 0, gb = 0;
    for (double d : pl[a]) ga += std::pow(10.0, -d / 10.0);
    for (double d : pl[b]) gb += std::pow(10.0, -d / 10.0);
    if (ga != gb) return ga > gb;
    return a < b;
  });
  ids.resize(std::min<size_t>(ids.size(), k));
  std::sort(ids.begin(), ids.end());
  return ids;
}

double top_mcs_rate_bps(const phy::McsTable& t, double symbol_rate_hz) {
  return t.entries.back().bits_per_symbol * t.code_rate * symbol_rate_hz;
}

}  // namespace

metrics::MetricsReport run(const ScenarioConfig& cfg, RunArtifacts* artifacts) {
  validate_config(cfg);
  const int n_users = cfg.users.count;
  const int n_bs = cfg.cluster.n_bs;
  const int n_tx = cfg.cluster.tx_antennas;
  const phy::AntennaLayout layout{n_bs, n_tx};
  const double slot_s = cfg.sim.slot_duration_s;
  const double noise_w = cfg.noise_watt();
  const double p_max_w = cfg.tx_power_watt();
  const double sym_rate = cfg.symbol_rate_hz();
  const auto pl = cfg.pathloss_db();
  const auto priorities = cfg.user_priorities();

  phy::McsTable mcs;
  mcs.code_rate = cfg.phy.code_rate;
  for (size_t i = 0; i < cfg.phy.mcs_bits_per_symbol.size(); ++i)
    mcs.entries.push_back({cfg.phy.mcs_min_sinr_db[i], cfg.phy.mcs_bits_per_symbol[i],
                           cfg.phy.mcs_names[i]});

  std::vector<int> anchors(n_users, 0);
  for (int u = 0; u < n_users; ++u)
    anchors[u] = static_cast<int>(std::min_element(pl[u].begin(), pl[u].end()) -
                                  pl[u].begin());

  // Clocks: fixed offsets bypass both the draw and the sync protocol.
  Rng clock_rng(Rng::derive(cfg.sim.seed, "clock"));
  sync::ClockModel clocks = sync::init_clocks(cfg, clock_rng);
  if (cfg.sync.enabled && cfg.sync.fixed_offsets_hz.empty() && n_bs > 1)
    clocks = sync::master_slave_sync(clocks, cfg.sync.beacon_snr_db, clock_rng,
                                     cfg.sync.sigma0_hz);
  const double delta_f = sync::max_pairwise_offset_hz(clocks);
  const sync::IciFactors ici =
      sync::ici_factors(delta_f, cfg.radio.subcarrier_interval_hz);
  // Receivers center the FFT window across the cluster, so the residual
  // misalignment is half the worst pairwise spread.
  const double isi_db =
      sync::isi_penalty_db(0.5 * sync::max_pairwise_time_offset_us(clocks),
                           cfg.sync.cp_budget_us, cfg.sync.isi_penalty_db);

  backhaul::BackhaulBudget budget = backhaul::uniform_budget(
      cfg.backhaul.capacity_gbps, cfg.backhaul.latency_ms, n_bs);

  // Sessions + queues
  Rng sens_rng(Rng::derive(cfg.sim.seed, "sensitivity"));
  std::vector<kqi::VideoSession> sessions;
  std::vector<scheduler::UserQueue> queues(n_users);
  const bool saturate = cfg.traffic.mode == "saturate";
  const double saturate_bps = 10.0 * top_mcs_rate_bps(mcs, sym_rate);
  for (int u = 0; u < n_users; ++u) {
    double sens = sens_rng.uniform(cfg.video.sensitivity_min, cfg.video.sensitivity_max);
    sessions.push_back(fresh_session(cfg, sens));
    queues[u].priority = priorities[u];
    if (saturate)
      queues[u].arrival_bps = saturate_bps;
    else if (!cfg.traffic.arrival_bps.empty())
      queues[u].arrival_bps = cfg.traffic.arrival_bps[u];
    else
      queues[u].arrival_bps = cfg.video.ladder_bps[sessions[u].quality_level];
    queues[u].q_bits = queues[u].arrival_bps * slot_s;  // one slot of backlog
  }

  channel::ChannelGenerator chan(cfg, cfg.sim.seed);
  std::vector<CsiUserState> csi(n_users);
  for (auto& c : csi) c.interval = cfg.channel.feedback_interval_slots;

  metrics::MetricsReport rep;
  rep.slot_duration_s = slot_s;
  rep.resize(n_users, cfg.sim.n_slots);
  if (artifacts) {
    artifacts->slots.clear();
    artifacts->noise_w = noise_w;
    artifacts->isi_db = isi_db;
    artifacts->subcarrier_spacing_hz = cfg.radio.subcarrier_interval_hz;
  }

  std::vector<int> total_stalls(n_users, 0);
  const double csi_bits_per_report =
      2.0 * cfg.channel.csi_quant_bits * n_tx * cfg.cluster.rx_antennas * n_bs;
  const double csi_quant_var =
      channel::csi_error_variance(cfg.channel.csi_quant_bits, cfg.channel.clip_sigmas);
  const double gm_a =
      channel::gauss_markov_a(cfg.channel.doppler_hz, cfg.sim.slot_duration_s);
  Eigen::MatrixXd entry_var(n_users, n_bs);
  for (int u = 0; u < n_users; ++u)
    for (int b = 0; b < n_bs; ++b) entry_var(u, b) = std::pow(10.0, -pl[u][b] / 10.0);

  for (int t = 0; t < cfg.sim.n_slots; ++t) {
    const auto& state = chan.step();

    // CSI refresh / aging
    for (int u = 0; u < n_users; ++u) {
      auto& c = csi[u];
      bool due = c.last_report_slot < 0 || t - c.last_report_slot >= c.interval;
      if (due) {
        Eigen::RowVectorXcd raw = state.stacked_row(u, false);
        if (cfg.channel.adaptive_feedback && c.last_report_slot >= 0 &&
            c.raw_row_at_report.size() > 0 && c.raw_row_at_report.norm() > 0 &&
            raw.norm() > 0) {
          std::complex<double> inner = (c.raw_row_at_report.conjugate().array() *
                                        raw.array()).sum();
          double coh = inner.real() / (c.raw_row_at_report.norm() * raw.norm());
          c.interval = channel::adapt_feedback_interval(
              coh, c.interval, cfg.channel.interval_min, cfg.channel.interval_max,
              cfg.channel.coherence_high, cfg.channel.coherence_low);
        }
        c.report = channel::quantize_csi(state, cfg.channel.csi_quant_bits, u,
                                         cfg.channel.clip_sigmas);
        c.report.feedback_interval_slots = c.interval;
        c.raw_row_at_report = raw;
        c.reported_row = c.report.stacked_row(pl[u], true);
        c.last_report_slot = t;
      } else {
        c.report.age_slots = t - c.last_report_slot;
      }
    }

    Eigen::MatrixXcd reported_rows(n_users, layout.total());
    Eigen::MatrixXcd true_rows(n_users, layout.total());
    for (int u = 0; u < n_users; ++u) {
      reported_rows.row(u) = csi[u].reported_row;
      true_rows.row(u) = state.stacked_row(u, true);
    }

    // Backhaul: shares, JT quantization fit, cooperative ability
    std::vector<double> bs_backlog(n_bs, 0.0);
    for (int u = 0; u < n_users; ++u) bs_backlog[anchors[u]] += queues[u].q_bits;
    budget = backhaul::rebalance_shares(budget, bs_backlog, cfg.backhaul.share_policy);

    backhaul::JtLoad load;
    load.n_users = n_users;
    load.sample_rate_hz = cfg.radio.sampling_hz;
    load.slot_duration_s = slot_s;
    load.feedback_interval_slots = 1;
    double csi_per_slot = 0.0;
    for (int u = 0; u < n_users; ++u) csi_per_slot += csi_bits_per_report / csi[u].interval;
    load.csi_bits_per_interval = csi_per_slot;

    int iq_bits = backhaul::fit_iq_bits(budget, load, cfg.backhaul.iq_bits_max);
    auto ability = scheduler::evaluate_ability(budget, load, n_tx,
                                               cfg.cluster.tx_power_dbm,
                                               cfg.backhaul.iq_bits_max);

    scheduler::SlotContext ctx;
    ctx.reported_rows = reported_rows;
    ctx.queues = queues;
    ctx.sessions = &sessions;
    ctx.ability = ability;
    ctx.mcs = mcs;
    ctx.layout = layout;
    ctx.anchor_bs = anchors;
    ctx.symbol_rate_hz = sym_rate;
    ctx.noise_w = noise_w;
    ctx.p_max_w = p_max_w;
    ctx.v = cfg.scheduler.v;
    ctx.queue_scale = cfg.scheduler.queue_scale;
    ctx.ladder_bps = cfg.video.ladder_bps;
    ctx.kqi_alpha = cfg.video.kqi_alpha;
    ctx.kqi_beta = cfg.video.kqi_beta;
    ctx.slot_duration_s = slot_s;
    ctx.rebuffer_s = cfg.video.rebuffer_s;
    ctx.max_group = cfg.phy.max_group;
    ctx.corr_threshold = cfg.phy.corr_threshold;
    ctx.mode_threshold = cfg.phy.mode_threshold;
    ctx.mode_policy = cfg.scheduler.mode_policy;
    ctx.link_margin_db = cfg.phy.link_margin_db;
    ctx.csi_quant_var = csi_quant_var;
    ctx.entry_var = entry_var;
    ctx.csi_rho.resize(n_users);
    for (int u = 0; u < n_users; ++u)
      ctx.csi_rho[u] = std::pow(std::abs(gm_a), csi[u].report.age_slots);

    // Resolve the transmission mode up front so the backhaul fallback can be
    // applied to the candidate set.
    phy::TxMode mode;
    if (cfg.scheduler.mode_policy == "jt")
      mode = phy::TxMode::jt;
    else if (cfg.scheduler.mode_policy == "cscb")
      mode = phy::TxMode::cscb;
    else
      mode = scheduler::select_mode(ability, cfg.phy.mode_threshold);

    bool idle_forced = false;
    ctx.eligible.resize(n_users);
    for (int u = 0; u < n_users; ++u) ctx.eligible[u] = u;
    if (mode == phy::TxMode::jt && iq_bits == 0) {
      if (cfg.scheduler.mode_policy == "auto") {
        mode = phy::TxMode::cscb;
      } else {
        // Forced JT under a starved bus: shed attached users until the
        // 1-bit exchange fits; nobody attached means an idle slot.
        int k = n_users;
        while (k > 0) {
          backhaul::JtLoad l2 = load;
          l2.n_users = k;
          l2.csi_bits_per_interval = csi_per_slot * k / n_users;
          if (backhaul::jt_required_gbps(l2, 1) <= budget.capacity_gbps) break;
          --k;
        }
        if (k == 0) {
          idle_forced = true;
        } else {
          ctx.eligible = strongest_users(pl, k);
          backhaul::JtLoad shed = load;
          shed.n_users = k;
          shed.csi_bits_per_interval = csi_per_slot * k / n_users;
          iq_bits = backhaul::fit_iq_bits(budget, shed, cfg.backhaul.iq_bits_max);
        }
      }
    }
    ctx.mode_policy = mode == phy::TxMode::jt ? "jt" : "cscb";
    ctx.iq_quant_rel = mode == phy::TxMode::jt && iq_bits >= 1
                           ? backhaul::iq_quant_relative_power(iq_bits)
                           : 0.0;

    scheduler::ClusterPlan plan;
    if (!idle_forced)
      plan = cfg.scheduler.type == "kqi" ? scheduler::schedule_slot_kqi(ctx)
                                         : scheduler::schedule_slot_kpi(ctx);

    // Realized PHY outcome from the true channels
    const int k = static_cast<int>(plan.group.size());
    std::vector<double> served_bits(n_users, 0.0);
    std::vector<double> realized_rate(n_users, 0.0);
    std::vector<double> realized_sinr(n_users, kNaN);
    std::vector<double> realized_latency(n_users, kNaN);
    if (k > 0) {
      phy::SinrInputs si;
      si.true_rows.resize(k, layout.total());
      for (int i = 0; i < k; ++i) si.true_rows.row(i) = true_rows.row(plan.group[i]);
      si.precoder = &plan.precoder;
      si.layout = layout;
      si.noise_w = noise_w;
      si.anchor_bs.resize(k);
      for (int i = 0; i < k; ++i) si.anchor_bs[i] = anchors[plan.group[i]];
      si.quant_noise_w.assign(k, 0.0);
      if (plan.mode == phy::TxMode::jt) {
        si.ici = ici;
        std::vector<double> bs_power(n_bs, 0.0);
        for (int b = 0; b < n_bs; ++b)
          bs_power[b] = phy::bs_tx_power(plan.precoder, layout, b);
        for (int i = 0; i < k; ++i) {
          double q = 0.0;
          for (int b = 0; b < n_bs; ++b)
            q += ctx.iq_quant_rel * (bs_power[b] / n_tx) *
                 si.true_rows.row(i).segment(b * n_tx, n_tx).squaredNorm();
          si.quant_noise_w[i] = q;
        }
      }
      auto sinr = phy::compute_sinr(si);
      if (artifacts) {
        RunArtifacts::Slot s;
        s.true_rows = si.true_rows;
        s.precoder = plan.precoder;
        s.anchor_bs = si.anchor_bs;
        s.quant_noise_w = si.quant_noise_w;
        s.mode = plan.mode;
        artifacts->slots.push_back(std::move(s));
      }
      for (int i = 0; i < k; ++i) {
        int u = plan.group[i];
        double s_db = sinr[i] + (plan.mode == phy::TxMode::jt ? isi_db : 0.0);
        realized_sinr[u] = s_db;
        int m = plan.mcs[i];
        double rate = 0.0;
        if (m >= 0 && s_db >= mcs.entries[m].min_sinr_db)
          rate = mcs.entries[m].bits_per_symbol * mcs.code_rate * sym_rate;
        realized_rate[u] = rate;
        served_bits[u] = std::min(rate * slot_s, queues[u].q_bits);
        double bytes = served_bits[u] / 8.0;
        realized_latency[u] =
            plan.mode == phy::TxMode::jt
                ? backhaul::backhaul_latency_contribution_ms(budget, bytes)
                : backhaul::backhaul_latency_contribution_ms(
                      backhaul::share_budget(budget, plan.serving_bs[i]), bytes);
      }
    }

    // Video playback + KQI loss
    std::vector<double> arrivals(n_users, 0.0);
    for (int u = 0; u < n_users; ++u) {
      auto out = kqi::step_playback(sessions[u], served_bits[u], slot_s,
                                    cfg.video.ladder_bps, cfg.video.rebuffer_s);
      if (out.stalled) ++total_stalls[u];
      double loss =
          kqi::kqi_loss(sessions[u], out.stalled, sessions[u].quality_level,
                        static_cast<int>(cfg.video.ladder_bps.size()),
                        cfg.video.kqi_alpha, cfg.video.kqi_beta);
      sessions[u] = out.session;
      if (sessions[u].done) {
        double sens = sessions[u].engagement_sensitivity;
        sessions[u] = fresh_session(cfg, sens);
      }
      arrivals[u] = queues[u].arrival_bps * slot_s;

      size_t i = rep.idx(t, u);
      rep.kqi_loss[i] = loss;
      rep.buffer_s[i] = sessions[u].buffer_s;
      rep.download_ratio[i] = kqi::download_ratio(sessions[u]);
      rep.stall_count[i] = total_stalls[u];
    }
    queues = scheduler::update_queues(queues, served_bits, arrivals);

    for (int u = 0; u < n_users; ++u) {
      size_t i = rep.idx(t, u);
      rep.queue_bits[i] = queues[u].q_bits;
      rep.rate_bps[i] = realized_rate[u];
      rep.served_bits[i] = served_bits[u];
      rep.sinr_db[i] = realized_sinr[u];
      rep.latency_ms[i] = realized_latency[u];
      rep.served[i] = std::isnan(realized_sinr[u]) ? 0 : 1;
    }
    rep.slot_mode[t] = plan.idle() ? 2 : (plan.mode == phy::TxMode::jt ? 0 : 1);
  }

  rep.agg = metrics::aggregate_from_traces(rep);
  return rep;
}

std::vector<double> measure_service_capacity(const ScenarioConfig& cfg) {
  ScenarioConfig probe = cfg;
  probe.traffic.mode = "saturate";
  auto rep = run(probe);
  return rep.agg.user_throughput_bps;
}

BackhaulSweep sweep_backhaul(const ScenarioConfig& cfg,
                             const std::vector<double>& capacities_gbps,
                             const std::vector<int>& seeds) {
  BackhaulSweep out;
  out.capacities_gbps = capacities_gbps;
  for (double cap : capacities_gbps) {
    double jt_sum = 0.0, cscb_sum = 0.0;
    for (int seed : seeds) {
      ScenarioConfig c = cfg;
      c.backhaul.capacity_gbps = cap;
      c.sim.seed = seed;
      c.scheduler.mode_policy = "jt";
      jt_sum += run(c).agg.cell_edge_throughput_bps;
      c.scheduler.mode_policy = "cscb";
      cscb_sum += run(c).agg.cell_edge_throughput_bps;
    }
    out.jt_cell_edge_bps.push_back(jt_sum / seeds.size());
    out.cscb_cell_edge_bps.push_back(cscb_sum / seeds.size());
  }
  return out;
}

FeedbackSweep sweep_feedback(const ScenarioConfig& cfg, const std::vector<int>& intervals,
                             const std::vector<int>& seeds) {
  FeedbackSweep out;
  out.intervals = intervals;
  for (int interval : intervals) {
    std::vector<double> st, mo;
    for (int seed : seeds) {
      ScenarioConfig c = cfg;
      c.channel.feedback_interval_slots = interval;
      c.channel.adaptive_feedback = false;
      c.sim.seed = seed;
      c.channel.doppler_hz = cfg.channel.doppler_static_hz;
      st.push_back(run(c).agg.cell_edge_throughput_bps);
      c.channel.doppler_hz = cfg.channel.doppler_mobile_hz;
      mo.push_back(run(c).agg.cell_edge_throughput_bps);
    }
    auto mean = [](const std::vector<double>& v) {
      double s = 0;
      for (double x : v) s += x;
      return s / v.size();
    };
    out.static_mean_bps.push_back(mean(st));
    out.mobile_mean_bps.push_back(mean(mo));
    out.static_bps.push_back(std::move(st));
    out.mobile_bps.push_back(std::move(mo));
  }
  return out;
}

OffsetSweep sweep_offset(const ScenarioConfig& cfg, const std::vector<double>& offsets_hz,
                         const std::vector<int>& seeds) {
  OffsetSweep out;
  out.offsets_hz = offsets_hz;
  out.jt_mean_sinr_db.assign(offsets_hz.size(), 0.0);
  out.cscb_mean_sinr_db.assign(offsets_hz.size(), 0.0);

  // The control loop runs once per (mode, seed) with perfect frequency sync;
  // each offset then re-evaluates the recorded slots, which keeps the
  // schedule fixed while the impairment varies.
  std::vector<long> jt_n(offsets_hz.size(), 0), cscb_n(offsets_hz.size(), 0);
  for (int seed : seeds) {
    for (auto mode : {phy::TxMode::jt, phy::TxMode::cscb}) {
      ScenarioConfig c = cfg;
      c.sim.seed = seed;
      c.sync.enabled = false;
      c.sync.fixed_offsets_hz.assign(cfg.cluster.n_bs, 0.0);
      c.scheduler.mode_policy = mode == phy::TxMode::jt ? "jt" : "cscb";
      RunArtifacts art;
      run(c, &art);
      for (size_t oi = 0; oi < offsets_hz.size(); ++oi) {
        sync::IciFactors f = sync::ici_factors(offsets_hz[oi], art.subcarrier_spacing_hz);
        for (const auto& slot : art.slots) {
          phy::SinrInputs si;
          si.true_rows = slot.true_rows;
          si.precoder = &slot.precoder;
          si.layout = {cfg.cluster.n_bs, cfg.cluster.tx_antennas};
          si.noise_w = art.noise_w;
          si.anchor_bs = slot.anchor_bs;
          si.quant_noise_w = slot.quant_noise_w;
          if (slot.mode == phy::TxMode::jt) si.ici = f;
          auto sinr = phy::compute_sinr(si);
          for (double s : sinr) {
            if (slot.mode == phy::TxMode::jt) {
              out.jt_mean_sinr_db[oi] += s + art.isi_db;
              ++jt_n[oi];
            } else {
              out.cscb_mean_sinr_db[oi] += s;
              ++cscb_n[oi];
            }
          }
        }
      }
    }
  }
  for (size_t oi = 0; oi < offsets_hz.size(); ++oi) {
    if (jt_n[oi]) out.jt_mean_sinr_db[oi] /= jt_n[oi];
    if (cscb_n[oi]) out.cscb_mean_sinr_db[oi] /= cscb_n[oi];
  }
  return out;
}

SchedulerComparison compare_schedulers(const ScenarioConfig& cfg,
                                       const std::vector<int>& seeds) {
  SchedulerComparison out;
  for (int seed : seeds) {
    ScenarioConfig c = cfg;
    c.sim.seed = seed;
    c.scheduler.type = "kqi";
    auto kqi_rep = run(c);
    c.scheduler.type = "kpi";
    auto kpi_rep = run(c);
    out.kqi_pearson.push_back(kqi_rep.agg.user_pearson);
    out.kpi_pearson.push_back(kpi_rep.agg.user_pearson);
    out.kqi_stalls.push_back(kqi_rep.agg.user_stall_count);
    out.kpi_stalls.push_back(kpi_rep.agg.user_stall_count);
  }
  return out;
}

}  // namespace comp::engine
