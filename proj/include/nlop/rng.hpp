#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace nlop {

// deterministic uniform generator; the same seed yields the same stream on
// every platform (mt19937_64 output mapped through a fixed 53-bit ladder)
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  std::uint64_t raw() { return eng_(); }

 private:
  std::mt19937_64 eng_;
};

constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace nlop
