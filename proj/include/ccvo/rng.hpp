#pragma once

#include <cmath>
#include <cstdint>

#include "ccvo/types.hpp"

namespace ccvo {

// Counter-based random streams. One root seed is split into independent
// substreams keyed by (trial, agent, channel), so adding agents or trials
// never perturbs the draws of existing streams. Sampling is pure integer
// and IEEE double arithmetic, reproducible across platforms.

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}
}  // namespace detail

inline std::uint64_t derive_stream_key(std::uint64_t root_seed, std::uint64_t trial,
                                       std::uint64_t agent, std::uint64_t channel) {
  std::uint64_t s = root_seed;
  std::uint64_t k = detail::splitmix64(s);
  s ^= trial + 0x1000000000000001ULL;
  k ^= detail::splitmix64(s);
  s ^= agent + 0x2000000000000003ULL;
  k ^= detail::splitmix64(s);
  s ^= channel + 0x3000000000000005ULL;
  k ^= detail::splitmix64(s);
  return k;
}

class RngStream {
 public:
  explicit RngStream(std::uint64_t key) : state_(key) {}

  std::uint64_t next_u64() { return detail::splitmix64(state_); }

  /// Uniform draw in the half-open interval (0, 1].
  double uniform() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  /// Pair of independent standard normal draws (Box-Muller).
  Vec2 gaussian_pair() {
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    return Vec2(r * std::cos(theta), r * std::sin(theta));
  }

  Vec4 gaussian4() {
    const Vec2 a = gaussian_pair();
    const Vec2 b = gaussian_pair();
    return Vec4(a.x(), a.y(), b.x(), b.y());
  }

 private:
  std::uint64_t state_;
};

}  // namespace ccvo
