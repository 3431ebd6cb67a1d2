#pragma once

#include <cmath>
#include <cstdint>

namespace sgdlab {

// SplitMix64 finalizer (Steele/Lea/Flood; Vigna's fixed-increment variant).
inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// All draws for one (seed, replica, step) triple. The state is derived by
// hashing the triple, then advanced in SplitMix64 counter mode, so any draw
// is a pure function of (seed, replica, step, draw index). Replicas and
// steps can therefore be evaluated in any order, on any thread, with
// identical results.
class StepRng {
 public:
  StepRng(std::uint64_t seed, std::uint64_t replica, std::uint64_t step)
      : state_(derive(seed, replica, step)) {}

  std::uint64_t next_u64() {
    state_ += kGolden;
    return mix64(state_);
  }

  // Uniform on [0, 1), 53 random bits.
  double next_uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double next_sign() { return (next_u64() & 1u) ? 1.0 : -1.0; }

  // Standard normal via Box-Muller; the spare keeps draw order deterministic.
  double next_gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - next_uniform01();  // (0, 1]
    const double u2 = next_uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

 private:
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t replica, std::uint64_t step) {
    std::uint64_t h = mix64(seed ^ 0x5851f42d4c957f2dULL);
    h = mix64(h ^ (replica + kGolden));
    h = mix64(h ^ (step + 0xd1342543de82ef95ULL));
    return h;
  }

  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Stream factory for one replica of an experiment.
class ReplicaRng {
 public:
  ReplicaRng(std::uint64_t seed, std::uint64_t replica) : seed_(seed), replica_(replica) {}

  StepRng at_step(std::uint64_t t) const { return StepRng(seed_, replica_, t); }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t replica() const { return replica_; }

 private:
  std::uint64_t seed_;
  std::uint64_t replica_;
};

}  // namespace sgdlab
