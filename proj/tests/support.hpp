#pragma once
// Random fixtures for property tests. Fixed seeds keep every run identical.

#include <cmath>
#include <random>
#include <vector>

#include "wentropy/measure.hpp"

namespace testsupport {

using Rng = std::mt19937_64;

inline std::vector<double> simplex(Rng& rng, std::size_t n) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> v(n);
  double s = 0.0;
  for (auto& x : v) s += (x = e(rng));
  for (auto& x : v) x /= s;
  return v;
}

inline std::vector<double> log_uniform(Rng& rng, std::size_t n, double lo = 0.1,
                                       double hi = 10.0) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  std::vector<double> v(n);
  for (auto& x : v) x = std::exp(u(rng));
  return v;
}

inline wentropy::Density random_density(Rng& rng, const wentropy::ProductSpace& s) {
  return wentropy::Density(s, simplex(rng, s.size()));
}

inline wentropy::WeightFunction random_weight(Rng& rng, const wentropy::ProductSpace& s) {
  return wentropy::WeightFunction(s, log_uniform(rng, s.size()));
}

inline wentropy::ProductSpace counting_product(std::vector<std::size_t> sizes) {
  std::vector<wentropy::SpacePtr> axes;
  for (auto n : sizes) axes.push_back(wentropy::counting_space(n));
  return wentropy::ProductSpace(axes);
}

}  // namespace testsupport
