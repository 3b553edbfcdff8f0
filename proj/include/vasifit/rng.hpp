#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace vasifit {

// splitmix64 finalizer, used to derive well-separated substream seeds.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Substream seed for (master, replication, component). Replication-level
// parallelism stays deterministic because the derivation depends only on
// the indices, never on scheduling.
inline std::uint64_t substream_seed(std::uint64_t master, std::uint64_t rep,
                                    std::uint64_t component) {
  return mix64(mix64(master) ^ mix64(rep * 0xd1342543de82ef95ULL) ^
               mix64(component * 0xa0761d6478bd642fULL));
}

// mt19937_64 with portable draw routines. std::normal_distribution is
// implementation-defined, so Gaussian and Poisson draws are generated
// here to keep outputs bit-identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in (0, 1); never returns exactly 0.
  double uniform() {
    const std::uint64_t bits = engine_() >> 11;  // 53 bits
    return (static_cast<double>(bits) + 0.5) * (1.0 / 9007199254740992.0);
  }

  // Standard normal by Box-Muller; the spare draw is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u = uniform();
    const double v = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u));
    const double angle = 6.283185307179586476925286766559 * v;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  // Poisson count by inversion of the exponential-gap representation.
  std::uint64_t poisson(double mean) {
    const double limit = std::exp(-mean);
    std::uint64_t count = 0;
    double prod = uniform();
    while (prod > limit) {
      ++count;
      prod *= uniform();
    }
    return count;
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace vasifit
