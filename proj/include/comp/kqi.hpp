#ifndef COMP_KQI_HPP
#define COMP_KQI_HPP

#include <vector>

#include "comp/common.hpp"

namespace comp::kqi {

// One video download/playback session. Playback starts once the buffer
// reaches the rebuffer threshold, drains in real time while playing, and a
// stall is the buffer hitting empty with content still outstanding.
struct VideoSession {
  double file_size_bits = 0.0;   // S
  double downloaded_bits = 0.0;  // D <= S
  double buffer_s = 0.0;
  bool playing = false;
  int stall_count = 0;
  int quality_level = 0;  // index into the bitrate ladder
  double engagement_sensitivity = 1.0;
  double played_s = 0.0;
  bool done = false;  // fully downloaded and fully played out

  double download_ratio() const;
};

// Per-slot (download ratio, throughput) samples for one user.
struct EngagementRecord {
  std::vector<double> ratio;
  std::vector<double> throughput_bps;
  void add(double r, double c) {
    ratio.push_back(r);
    throughput_bps.push_back(c);
  }
  size_t size() const { return ratio.size(); }
};

double download_ratio(const VideoSession& s);

// Sample Pearson correlation; throws UndefinedCorrelationError for fewer
// than two samples or a constant series.
double pearson(const std::vector<double>& xs, const std::vector<double>& ys);
double pearson(const EngagementRecord& rec);

struct StepOutcome {
  VideoSession session;
  bool stalled = false;          // a stall event happened in this slot
  double accepted_bits = 0.0;    // delivered bits counted toward D
};

// Advances one slot: credit delivered bits to the buffer (capped at the file
// size), drain if playing, count a stall when the buffer empties with data
// still missing, and resume once the rebuffer threshold is met.
StepOutcome step_playback(const VideoSession& s, double delivered_bits,
                          double slot_duration_s, const std::vector<double>& ladder_bps,
                          double rebuffer_threshold_s = 2.0);

// KQI loss for one slot: sensitivity * (alpha*[stalled] + beta*quality gap).
double kqi_loss(const VideoSession& s, bool stalled, int quality_level, int n_levels,
                double alpha = 1.0, double beta = 0.25);

}  // namespace comp::kqi

#endif
