#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>

#include "subadapt/linalg.hpp"

namespace subadapt {

/// SplitMix64 finalizer; a strong 64-bit mixing function.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derives a stream key from a master seed and coordinates such as
/// (run, agent, iteration). Pure function of its inputs.
inline std::uint64_t stream_key(std::uint64_t master, std::initializer_list<std::uint64_t> coords) {
  std::uint64_t h = mix64(master);
  for (std::uint64_t c : coords) h = mix64(h ^ mix64(c + 0x632be59bd9b4e019ULL));
  return h;
}

/// Counter-based generator: the state is the key plus a counter, so a stream
/// is reproducible from its coordinates alone.
class CounterRng {
 public:
  using result_type = std::uint64_t;
  explicit CounterRng(std::uint64_t key) : key_(key) {}
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return mix64(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Circularly-symmetric complex Gaussian: real and imaginary parts independent,
/// each with variance var / 2.
class ComplexGaussian {
 public:
  explicit ComplexGaussian(std::uint64_t key) : rng_(key) {}

  cplx operator()(double var = 1.0) {
    const double s = std::sqrt(var * 0.5);
    const double re = normal_(rng_);
    const double im = normal_(rng_);
    return {s * re, s * im};
  }

  CVector vector(Index n, double var = 1.0) {
    CVector v(n);
    for (Index i = 0; i < n; ++i) v(i) = (*this)(var);
    return v;
  }

  double real() { return normal_(rng_); }
  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_); }

 private:
  CounterRng rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace subadapt
