#pragma once

#include <cmath>
#include <cstdint>

namespace stablesde {

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Deterministic per-replica random stream (xoshiro256++ core).
///
/// Streams are identified by (root_seed, stream_id). The same pair always
/// reproduces the same sequence bit for bit; different stream ids under one
/// root seed are decorrelated through splitmix64 seeding. A stream must not
/// be shared across threads; derive one substream per replica instead.
class RngStream {
 public:
  RngStream(std::uint64_t root_seed, std::uint64_t stream_id)
      : root_seed_(root_seed), stream_id_(stream_id), spare_valid_(false) {
    std::uint64_t sm = root_seed ^ (0x6a09e667f3bcc909ULL + stream_id * 0x9e3779b97f4a7c15ULL);
    for (auto& w : s_) w = splitmix64_next(sm);
  }

  std::uint64_t root_seed() const { return root_seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  /// A statistically independent stream derived from this stream's identity.
  RngStream substream(std::uint64_t k) const {
    std::uint64_t sm = stream_id_ ^ (k * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL);
    return RngStream(root_seed_, splitmix64_next(sm));
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform in the open interval, clamped 1e-12 away from {0,1} so that
  /// log() and the CMS trigonometric formulas cannot overflow.
  double uniform01() {
    double u = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    if (u < 1e-12) u = 1e-12;
    if (u > 1.0 - 1e-12) u = 1.0 - 1e-12;
    return u;
  }

  /// Unit-rate exponential.
  double exponential() { return -std::log(uniform01()); }

  /// Standard normal via Box-Muller; the spare is cached.
  double gaussian() {
    if (spare_valid_) {
      spare_valid_ = false;
      return spare_;
    }
    double r = std::sqrt(-2.0 * std::log(uniform01()));
    double phi = 2.0 * M_PI * uniform01();
    spare_ = r * std::sin(phi);
    spare_valid_ = true;
    return r * std::cos(phi);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t root_seed_;
  std::uint64_t stream_id_;
  std::uint64_t s_[4];
  double spare_ = 0.0;
  bool spare_valid_;
};

}  // namespace stablesde
