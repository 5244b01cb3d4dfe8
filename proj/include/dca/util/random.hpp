#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace dca::util {

// Seeded generator whose derived draws are defined here rather than by the
// standard library's distributions, so sequences are identical everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform in (0, 1).
  double uniform_open() {
    double u;
    do u = uniform();
    while (u == 0.0);
    return u;
  }

  std::size_t below(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)); }

  bool bernoulli(double p) { return uniform() < p; }

  // Symmetric Dirichlet(1): normalized unit exponentials.
  std::vector<double> dirichlet_ones(std::size_t k) {
    std::vector<double> out(k);
    double total = 0.0;
    for (auto& x : out) {
      x = -std::log(uniform_open());
      total += x;
    }
    for (auto& x : out) x /= total;
    return out;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace dca::util
