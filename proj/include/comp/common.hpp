#ifndef COMP_COMMON_HPP
#define COMP_COMMON_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace comp {

// ---------------------------------------------------------------------------
// Errors

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegenerateInputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UndefinedCorrelationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SyncFailedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PrecodingError : std::runtime_error {
  enum class Reason { rank_deficient, insufficient_dof };
  PrecodingError(Reason r, const std::string& msg)
      : std::runtime_error(msg), reason(r) {}
  Reason reason;
};

// ---------------------------------------------------------------------------
// Unit helpers

inline double db_to_pow(double db) { return std::pow(10.0, db / 10.0); }
inline double pow_to_db(double p) { return 10.0 * std::log10(p); }
inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

// ---------------------------------------------------------------------------
// Deterministic RNG.
//
// mt19937_64 with hand-rolled uniform/normal transforms so that streams are
// bit-stable across standard libraries (std::normal_distribution is
// implementation-defined). Substreams are derived by hashing a tag into the
// base seed, which keeps e.g. channel draws independent of clock draws.

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline uint64_t fnv1a64(std::string_view s, uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(splitmix64(seed)) {}

  static uint64_t derive(uint64_t seed, std::string_view tag) {
    return splitmix64(seed ^ fnv1a64(tag));
  }

  uint64_t bits() { return eng_(); }

  // uniform on [0, 1)
  double uniform01() { return static_cast<double>(bits() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // standard normal via Box-Muller
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 1.0 - uniform01();  // (0, 1]
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double th = 2.0 * M_PI * u2;
    spare_ = r * std::sin(th);
    have_spare_ = true;
    return r * std::cos(th);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  // CN(0,1): unit-variance circularly symmetric complex Gaussian
  std::complex<double> cnormal() {
    const double s = std::sqrt(0.5);
    double re = normal() * s;
    double im = normal() * s;
    return {re, im};
  }

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace comp

#endif
