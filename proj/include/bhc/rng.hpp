#pragma once

#include <cstdint>

namespace bhc {

// SplitMix64 generator. Chosen over std:: engines because every draw is
// specified bit-for-bit, so dumps are reproducible across platforms and
// standard library versions. Streams are derived by split(), which hashes
// the construction seed with a stream index; splitting does not consume
// parent state, so replicas keyed by index get stable seeds in any order.
class Rng {
 public:
  explicit Rng(uint64_t seed) : seed_(seed), state_(seed) {}

  uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  // uniform double in [0, 1), 53 random bits
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // uniform integer in [0, n), n >= 1; Lemire multiply-shift
  uint64_t next_below(uint64_t n) {
    return static_cast<uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  bool next_bernoulli(double p) { return next_double() < p; }

  // derived stream, a pure function of (construction seed, stream index)
  Rng split(uint64_t stream) const {
    return Rng(mix(seed_ ^ mix(stream + 0x517cc1b727220a95ULL)));
  }

  uint64_t seed() const { return seed_; }

 private:
  static uint64_t mix(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  uint64_t seed_;
  uint64_t state_;
};

}  // namespace bhc
