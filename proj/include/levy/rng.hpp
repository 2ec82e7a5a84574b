#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace levy {

// Seeds are derived, never shared: a child seed is the SplitMix64 finaliser
// folded over (root, key_1, ..., key_k). Streams keyed by distinct paths are
// independent for practical purposes, and a particle's stream depends only on
// its own path, so runs with different N share their common particles.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> path);

// Purpose tags used as the last key of a derivation path.
enum StreamTag : std::uint64_t {
  kTagInitial = 0x11,
  kTagJumps = 0x22,
  kTagGauss = 0x33,
  kTagOracle = 0x44,
  kTagBootstrap = 0x55,
  kTagMisc = 0x66,
};

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // Uniform on the open interval (0,1).
  double uniform() {
    double u;
    do {
      u = unif_(eng_);
    } while (u <= 0.0);
    return u;
  }
  double normal() { return norm_(eng_); }
  double exponential() { return expo_(eng_); }
  std::uint64_t poisson(double mean);
  std::uint64_t index(std::uint64_t n) {
    return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(eng_);
  }
  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
  std::uniform_real_distribution<double> unif_{0.0, 1.0};
  std::normal_distribution<double> norm_{0.0, 1.0};
  std::exponential_distribution<double> expo_{1.0};
};

}  // namespace levy
