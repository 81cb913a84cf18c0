#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace sepmin {

// SplitMix64 finalizer. Bijective on 64-bit words; used as the mixing stage
// of the counter-based streams below.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

enum class StreamKind : std::uint64_t {
  coupling = 0x11,    // noise on the coupling oracle
  individual = 0x22,  // noise on the individual-gradient oracle
  generator = 0x33,   // problem construction (matrices, offsets, z0)
};

// Counter-based stream: every draw is a pure function of
// (master_seed, seed_index, kind, call_index, lane). Draw #j therefore never
// depends on evaluation order or history, which is what makes traces
// bit-reproducible across refactors of the evaluation loop.
class NoiseStream {
 public:
  NoiseStream() : key_(0) {}
  NoiseStream(std::uint64_t master_seed, std::uint64_t seed_index, StreamKind kind)
      : key_(mix64(mix64(mix64(master_seed) ^ seed_index) ^
                   static_cast<std::uint64_t>(kind))) {}

  std::uint64_t bits(std::uint64_t call_index, std::uint64_t lane) const {
    return mix64(mix64(key_ ^ call_index) ^ lane);
  }

  // Uniform in (0,1]; the open lower end keeps log() finite in normal().
  double uniform(std::uint64_t call_index, std::uint64_t lane) const {
    return static_cast<double>((bits(call_index, lane) >> 11) + 1) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller on lanes (2*lane, 2*lane+1).
  double normal(std::uint64_t call_index, std::uint64_t lane) const {
    const double u1 = uniform(call_index, 2 * lane);
    const double u2 = uniform(call_index, 2 * lane + 1);
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi_v<double> * u2);
  }

  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_;
};

// Sequential adapter over a NoiseStream for construction-time sampling where
// a draw order exists naturally (matrix entries, offsets).
class SeqRng {
 public:
  explicit SeqRng(NoiseStream stream) : stream_(stream) {}
  SeqRng(std::uint64_t master_seed, std::uint64_t seed_index, StreamKind kind)
      : stream_(master_seed, seed_index, kind) {}

  double normal() { return stream_.normal(0, lane_++); }
  double uniform() { return stream_.uniform(0, 1 + ((lane_++) << 1)); }

 private:
  NoiseStream stream_;
  std::uint64_t lane_ = 0;
};

}  // namespace sepmin
