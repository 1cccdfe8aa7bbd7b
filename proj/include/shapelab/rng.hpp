#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "shapelab/common.hpp"

namespace shapelab {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministic sub-stream derivation: seed xor-folded with up to three task
// indices. Every Monte-Carlo loop derives one stream per task so results do
// not depend on scheduling order.
inline std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t a,
                                   std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t s = splitmix64(seed ^ 0x632be59bd9b4e019ULL);
  s = splitmix64(s ^ a);
  s = splitmix64(s ^ b);
  return splitmix64(s ^ c);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(splitmix64(seed)) {}

  std::uint64_t next_u64() { return eng_(); }

  // Uniform on [0,1).
  double uniform() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  // Box-Muller; stateless on purpose so call sequences are easy to reason
  // about when deriving sub-streams.
  double normal() {
    double u1 = uniform(), u2 = uniform();
    while (u1 <= 0) u1 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  int uniform_int(int n) {  // 0..n-1
    return static_cast<int>(eng_() % static_cast<std::uint64_t>(n));
  }

  Vector normal_vec(int d) {
    Vector v(d);
    for (int i = 0; i < d; ++i) v[i] = normal();
    return v;
  }

  // Uniform on the unit sphere boundary.
  Vector unit_vec(int d) {
    Vector v = normal_vec(d);
    double nrm = v.norm();
    while (nrm < 1e-300) {
      v = normal_vec(d);
      nrm = v.norm();
    }
    return v / nrm;
  }

  // Uniform in the ball of radius r.
  Vector ball_point(int d, double r = 1.0) {
    Vector u = unit_vec(d);
    double t = std::pow(uniform(), 1.0 / d);
    return (r * t) * u;
  }

  long binomial(long n, double p) {
    if (p <= 0 || n <= 0) return 0;
    if (p >= 1) return n;
    std::binomial_distribution<long> dist(n, p);
    return dist(eng_);
  }

  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
};

}  // namespace shapelab
