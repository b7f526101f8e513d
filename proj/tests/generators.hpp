#pragma once

// Small seeded generators for the property tests.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace gen {

class Source {
 public:
  explicit Source(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  /// Coefficients for gen::trig.
  std::vector<double> trig_coefficients(int modes, double amplitude) {
    std::vector<double> c(2 * modes);
    for (double& x : c) x = uniform(-amplitude, amplitude);
    return c;
  }

 private:
  std::mt19937_64 rng_;
};

inline double trig(const std::vector<double>& c, double r, double length) {
  double v = 0.0;
  const int modes = static_cast<int>(c.size() / 2);
  for (int k = 1; k <= modes; ++k) {
    const double s = k * std::numbers::pi * r / length;
    v += c[2 * k - 2] * std::cos(s) + c[2 * k - 1] * std::sin(s);
  }
  return v;
}

}  // namespace gen
