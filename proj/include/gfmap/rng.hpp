// Seeded, hierarchical random streams.
//
// Every stochastic routine in this library takes an RngStream. A stream is
// identified by a 64-bit key; child streams are derived by mixing the parent
// key with an integer label (replica index, tree index, child ordinal, ...).
// Because derivation depends only on (master seed, label path), results are
// reproducible regardless of scheduling: parallel and serial runs that hand
// out the same labels produce identical output.
#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>

namespace gfmap {

// splitmix64 finalizer; good avalanche, cheap, and stable across platforms.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t combine_keys(std::uint64_t key, std::uint64_t label) {
  return mix64(key ^ (0x2545f4914f6cdd1dULL + label * 0x9e3779b97f4a7c15ULL));
}

class RngStream {
 public:
  explicit RngStream(std::uint64_t key) : key_(key), gen_(mix64(key)) {}

  RngStream(std::uint64_t master, std::initializer_list<std::uint64_t> labels)
      : RngStream(master) {
    for (auto l : labels) *this = child(l);
  }

  // Independent stream keyed by (this stream's key, label). Does not consume
  // randomness from this stream.
  [[nodiscard]] RngStream child(std::uint64_t label) const {
    return RngStream(combine_keys(key_, label));
  }

  std::uint64_t key() const { return key_; }

  double uniform() {
    return std::uniform_real_distribution<double>(0.0, 1.0)(gen_);
  }

  // Exponential with the given rate; +inf when the rate is zero.
  double exponential(double rate) {
    if (rate <= 0.0) return std::numeric_limits<double>::infinity();
    return std::exponential_distribution<double>(rate)(gen_);
  }

  double normal(double mean = 0.0, double sd = 1.0) {
    return std::normal_distribution<double>(mean, sd)(gen_);
  }

  // Index drawn proportionally to the nonnegative weights; total must be > 0.
  template <class Vec>
  std::size_t categorical(const Vec& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    double u = uniform() * total;
    double acc = 0.0;
    std::size_t last = 0;
    for (std::size_t k = 0; k < static_cast<std::size_t>(weights.size()); ++k) {
      acc += weights[k];
      last = k;
      if (u <= acc) return k;
    }
    return last;
  }

  std::mt19937_64& engine() { return gen_; }

 private:
  std::uint64_t key_;
  std::mt19937_64 gen_;
};

}  // namespace gfmap
