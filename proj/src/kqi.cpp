#include "comp/kqi.hpp"

#include <algorithm>
#include <cmath>

namespace comp::kqi {

namespace {
constexpr double kBufferEps = 1e-12;  // seconds; drain-to-zero tolerance
}

double VideoSession::download_ratio() const { return kqi::download_ratio(*this); }

double download_ratio(const VideoSession& s) {
  if (s.file_size_bits <= 0)
    throw DegenerateInputError("download_ratio: file size must be > 0");
  return s.downloaded_bits / s.file_size_bits;
}

double pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size())
    throw DegenerateInputError("pearson: series lengths differ");
  size_t n = xs.size();
  if (n < 2) throw UndefinedCorrelationError("pearson: need at least two samples");
  double mx = 0, my = 0;
  for (size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (size_t i = 0; i < n; ++i) {
    double dx = xs[i] - mx;
    double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0)
    throw UndefinedCorrelationError("pearson: constant series");
  return sxy / (std::sqrt(sxx) * std::sqrt(syy));
}

double pearson(const EngagementRecord& rec) {
  return pearson(rec.ratio, rec.throughput_bps);
}

StepOutcome step_playback(const VideoSession& s, double delivered_bits,
                          double slot_duration_s, const std::vector<double>& ladder_bps,
                          double rebuffer_threshold_s) {
  if (delivered_bits < 0)
    throw DegenerateInputError("step_playback: delivered_bits must be >= 0");
  StepOutcome out;
  out.session = s;
  VideoSession& v = out.session;
  if (v.done) return out;

  double rate = ladder_bps[v.quality_level];
  double accepted = std::min(delivered_bits, v.file_size_bits - v.downloaded_bits);
  v.downloaded_bits += accepted;
  v.buffer_s += accepted / rate;
  out.accepted_bits = accepted;

  if (v.playing) {
    double drain = std::min(slot_duration_s, v.buffer_s);
    v.buffer_s -= drain;
    v.played_s += drain;
    if (v.buffer_s <= kBufferEps) {
      v.buffer_s = 0.0;
      v.playing = false;
      if (v.downloaded_bits < v.file_size_bits) {
        v.stall_count += 1;
        out.stalled = true;
      } else {
        v.done = true;  // played everything there is
      }
    }
  }
  // Resume at the rebuffer threshold, or as soon as the rest of the file is
  // fully buffered (short tails can never reach the threshold).
  bool tail_complete = v.downloaded_bits >= v.file_size_bits && v.buffer_s > 0;
  if (!v.playing && !v.done && (v.buffer_s >= rebuffer_threshold_s || tail_complete))
    v.playing = true;
  return out;
}

double kqi_loss(const VideoSession& s, bool stalled, int quality_level, int n_levels,
                double alpha, double beta) {
  double gap = 0.0;
  int top = n_levels - 1;
  if (top > 0)
    gap = static_cast<double>(top - quality_level) / static_cast<double>(top);
  return s.engagement_sensitivity * (alpha * (stalled ? 1.0 : 0.0) + beta * gap);
}

}  // namespace comp::kqi
