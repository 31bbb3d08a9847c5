#ifndef WSGD_RNG_HPP
#define WSGD_RNG_HPP

#include <cmath>
#include <cstdint>

#include "wsgd/types.hpp"

namespace wsgd {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace detail

/// xoshiro256++ keyed by (master_seed, stream_id) through splitmix64.
///
/// The engine only uses 64-bit integer arithmetic and explicit double
/// conversions, so a stream replays bit-identically on any platform and
/// distinct stream ids give statistically independent sequences. One stream
/// belongs to one replication; never share an instance across threads.
class StreamRng {
 public:
  explicit StreamRng(SeedSpec spec) : StreamRng(spec.master_seed, spec.stream_id) {}

  StreamRng(std::uint64_t master_seed, std::uint64_t stream_id) {
    std::uint64_t key = master_seed ^ (stream_id * 0xd1b54a32d192ed03ULL + 0x8cb92ba72f3d8dd7ULL);
    for (auto& word : s_) word = detail::splitmix64(key);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = detail::rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = detail::rotl(s_[3], 45);
    return result;
  }

  /// Uniform on the open interval (0, 1); safe under log and quantile maps.
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return uniform() < p; }

  double exponential() { return -std::log(uniform()); }

  /// Standard normal by the polar (Marsaglia) method; pairs are cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double factor = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * factor;
    has_spare_ = true;
    return u * factor;
  }

  VecX normal_vec(int n) {
    VecX out(n);
    for (int i = 0; i < n; ++i) out[i] = normal();
    return out;
  }

 private:
  std::uint64_t s_[4];
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace wsgd

#endif  // WSGD_RNG_HPP
