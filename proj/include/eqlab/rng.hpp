#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace eqlab {

// Counter-based splitmix64 generator. The whole state is (seed, counter), so
// streams can be forked cheaply and a state embedded in a game is trivially
// copyable and replayable.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0, std::uint64_t counter = 0)
      : seed_(seed), counter_(counter) {}

  std::uint64_t next_u64() {
    std::uint64_t z = seed_ + (++counter_) * 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n).
  int uniform_int(int n) {
    return static_cast<int>((static_cast<unsigned __int128>(next_u64()) *
                             static_cast<unsigned __int128>(n)) >> 64);
  }

  double normal() {
    // Box-Muller; one value per call keeps the stream position predictable.
    double u1 = 0.0;
    while (u1 <= 0.0) u1 = uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  // Marsaglia-Tsang, with the alpha < 1 boost.
  double gamma(double alpha) {
    if (alpha < 1.0) {
      double u = 0.0;
      while (u <= 0.0) u = uniform();
      return gamma(alpha + 1.0) * std::pow(u, 1.0 / alpha);
    }
    const double d = alpha - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  // Symmetric Dirichlet(alpha) over n components.
  std::vector<double> dirichlet(double alpha, int n) {
    std::vector<double> g(n);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      g[i] = gamma(alpha);
      sum += g[i];
    }
    if (sum <= 0.0) {  // all-zero draw is possible for tiny alpha at double precision
      for (auto& v : g) v = 1.0 / n;
      return g;
    }
    for (auto& v : g) v /= sum;
    return g;
  }

  // Derives an independent stream; used so parallel games never share a stream.
  Rng fork(std::uint64_t stream) const {
    std::uint64_t z = seed_ ^ (0x9e3779b97f4a7c15ULL + stream * 0xda942042e4dd58b5ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return Rng(z ^ (z >> 31));
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_;
};

}  // namespace eqlab
