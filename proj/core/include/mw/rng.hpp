#ifndef MW_RNG_HPP
#define MW_RNG_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

namespace mw {

// Counter-based generator (Philox4x32-10). Every draw is addressed by
// (seed, stream, counter), so ensemble members and lattice sites get
// reproducible values no matter how work is scheduled across threads.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::array<std::uint32_t, 4> block(std::uint64_t counter, std::uint64_t stream = 0) const {
    std::uint32_t k0 = static_cast<std::uint32_t>(seed_);
    std::uint32_t k1 = static_cast<std::uint32_t>(seed_ >> 32);
    std::array<std::uint32_t, 4> x = {
        static_cast<std::uint32_t>(counter), static_cast<std::uint32_t>(counter >> 32),
        static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = 0xD2511F53ull * x[0];
      const std::uint64_t p1 = 0xCD9E8D57ull * x[2];
      const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
      const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
      x = {hi1 ^ x[1] ^ k0, lo1, hi0 ^ x[3] ^ k1, lo0};
      k0 += 0x9E3779B9u;
      k1 += 0xBB67AE85u;
    }
    return x;
  }

  // Uniform in (0,1), slot selects one of the four words of the block.
  double uniform(std::uint64_t counter, std::uint64_t stream = 0, int slot = 0) const {
    const auto b = block(counter, stream);
    return (static_cast<double>(b[static_cast<std::size_t>(slot & 3)]) + 0.5) * 0x1p-32;
  }

  // Two independent N(0,1) draws per counter via Box-Muller.
  std::pair<double, double> gaussian_pair(std::uint64_t counter, std::uint64_t stream = 0) const {
    const auto b = block(counter, stream);
    const double u1 = (static_cast<double>(b[0]) + 0.5) * 0x1p-32;
    const double u2 = (static_cast<double>(b[1]) + 0.5) * 0x1p-32;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(t), r * std::sin(t)};
  }

  double gaussian(std::uint64_t counter, std::uint64_t stream = 0) const {
    return gaussian_pair(counter, stream).first;
  }

 private:
  std::uint64_t seed_;
};

}  // namespace mw

#endif
