#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <initializer_list>

namespace rmprod {

// splitmix64 finalizer: a cheap, well-mixed 64-bit permutation.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Fold several identifiers (seed, path id, step id, ...) into one key.
// Pure function of its arguments, so every consumer that asks for the
// same identifiers gets the same stream regardless of scheduling.
inline std::uint64_t derive_key(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = 0x8f1bbcdcbfa53e0bull;
  for (std::uint64_t p : parts) h = mix64(h ^ p);
  return h;
}

// Counter-based generator: splitmix64 advanced from a derived key.
// Construction is O(1), which lets us key a fresh stream per
// (seed, path, step) and stay reproducible under any work order.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : state_(mix64(key ^ 0xd1b54a32d192ed03ull)) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // uniform on (0,1]; never returns 0 so log() is safe
  double next_unit() {
    return (next_u64() >> 11) * (1.0 / 9007199254740992.0) + (0.5 / 9007199254740992.0);
  }

  // standard normal via Box-Muller, pairs cached
  double next_normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = next_unit();
    double u2 = next_unit();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  // complex standard normal: E|z|^2 = 1, E(z^2) = 0
  std::complex<double> next_cnormal() {
    const double s = 0.70710678118654752440;
    return {s * next_normal(), s * next_normal()};
  }

  // Rademacher +-1
  double next_sign() { return (next_u64() & 1u) ? 1.0 : -1.0; }

  // uniform on [-sqrt(3), sqrt(3)] (unit variance)
  double next_uniform_unitvar() {
    const double s = 1.7320508075688772935;
    return s * (2.0 * next_unit() - 1.0);
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace rmprod
