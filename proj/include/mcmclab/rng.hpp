#pragma once

#include <cstdint>
#include <cmath>

#include <Eigen/Core>

namespace mcmclab {

// splitmix64 finalizer; the workhorse behind stream derivation and the
// counter-based generator below.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ull;

constexpr std::uint64_t hash_absorb(std::uint64_t h, std::uint64_t v) {
  h ^= mix64(v + kGoldenGamma * (h | 1ull));
  return mix64(h + kGoldenGamma);
}

// Stream id from (base seed, chain index, purpose tag). Distinct tuples give
// statistically independent streams.
constexpr std::uint64_t derive_stream_id(std::uint64_t base_seed,
                                         std::uint64_t chain_index,
                                         std::uint64_t purpose_tag) {
  return hash_absorb(hash_absorb(mix64(base_seed + kGoldenGamma), chain_index),
                     purpose_tag);
}

// Purpose tags keep noise consumed by different pipeline stages on disjoint
// streams even when chain indices collide.
namespace purpose {
inline constexpr std::uint64_t chain = 1;
inline constexpr std::uint64_t momentum = 2;
inline constexpr std::uint64_t init = 3;
inline constexpr std::uint64_t bootstrap = 4;
inline constexpr std::uint64_t directions = 5;
inline constexpr std::uint64_t smoothing = 6;
inline constexpr std::uint64_t coupling = 7;
inline constexpr std::uint64_t reference = 8;
inline constexpr std::uint64_t quantity = 9;
}  // namespace purpose

/// Counter-based reproducible generator. The n-th raw output is a pure
/// function of (key, n), so replay and splitting are exact; copying the
/// object snapshots the position.
class RngStream {
 public:
  RngStream() : RngStream(0, 0) {}
  RngStream(std::uint64_t base_seed, std::uint64_t stream_id)
      : key_(hash_absorb(mix64(base_seed + kGoldenGamma), stream_id)) {}

  std::uint64_t base_key() const { return key_; }

  std::uint64_t next_u64() { return mix64(key_ + (++counter_) * kGoldenGamma); }

  // strictly inside (0,1)
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double exponential() { return -std::log(uniform()); }

  // Box-Muller with one cached draw; avoids std::normal_distribution, whose
  // algorithm is implementation-defined and would break replay guarantees.
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  Eigen::VectorXd gaussian_vector(Eigen::Index d) {
    Eigen::VectorXd g(d);
    for (Eigen::Index i = 0; i < d; ++i) g[i] = gaussian();
    return g;
  }

  void fill_gaussian(Eigen::VectorXd& g) {
    for (Eigen::Index i = 0; i < g.size(); ++i) g[i] = gaussian();
  }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace mcmclab
