#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace kfc {

// splitmix64 finalizer; used to derive independent substream seeds so that
// (seed, restart), (seed, rep), (seed, "train"/"test") streams never collide.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::initializer_list<std::uint64_t> tags) {
  std::uint64_t h = 0x8f1bbcdcbfa53e0bULL;
  for (auto t : tags) h = mix64(h ^ t);
  return h;
}

// Deterministic sampling layer over mt19937_64. The distribution inversions
// are written out here instead of using <random>'s distribution objects,
// whose output sequences are implementation-defined.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // [0, 1)
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // (0, 1); both endpoints excluded so log() stays finite
  double uniform_open() {
    return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
  }

  // integer in [0, n)
  std::uint64_t below(std::uint64_t n) {
    // multiply-shift with rejection to kill modulo bias
    std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      std::uint64_t r = gen_();
      __uint128_t m = static_cast<__uint128_t>(r) * n;
      if (static_cast<std::uint64_t>(m) >= threshold)
        return static_cast<std::uint64_t>(m >> 64);
    }
  }

  double normal(double mean, double sd) {
    if (have_spare_) {
      have_spare_ = false;
      return mean + sd * spare_;
    }
    // Marsaglia polar
    double u, v, s;
    do {
      u = 2.0 * uniform_open() - 1.0;
      v = 2.0 * uniform_open() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    have_spare_ = true;
    return mean + sd * u * f;
  }

  // rate parameterization: mean 1/lambda
  double exponential(double lambda) {
    return -std::log(uniform_open()) / lambda;
  }

  // support {1, 2, ...}, mean 1/p
  double geometric(double p) {
    double k = std::ceil(std::log(uniform_open()) / std::log1p(-p));
    return k < 1.0 ? 1.0 : k;
  }

  // Knuth's product-of-uniforms method; fine for the moderate rates used here
  double poisson(double lambda) {
    double limit = std::exp(-lambda);
    double prod = 1.0;
    double k = 0.0;
    do {
      k += 1.0;
      prod *= uniform_open();
    } while (prod > limit);
    return k - 1.0;
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i)
      std::swap(v[i - 1], v[below(i)]);
  }

private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

} // namespace kfc
