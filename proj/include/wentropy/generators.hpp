#pragma once
// Random instances for the soundness sweep. Densities are Dirichlet(1, ..., 1)
// on counting spaces with 2..max_support points per axis; weights are
// log-uniform in [phi_lo, phi_hi]. Each registered checker knows how to draw
// one instance from a CounterRng and how to evaluate it.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "wentropy/fisher.hpp"
#include "wentropy/measure.hpp"
#include "wentropy/rng.hpp"
#include "wentropy/verdict.hpp"

namespace wentropy {

struct GenOptions {
  std::size_t max_support = 4;
  double phi_lo = 0.1;
  double phi_hi = 10.0;
};

ProductSpace random_counting_space(CounterRng& rng, std::size_t axes, const GenOptions& o);
Density dirichlet_density(CounterRng& rng, const ProductSpace& s);
WeightFunction log_uniform_weight(CounterRng& rng, const ProductSpace& s, const GenOptions& o);
// Rows are Dirichlet(1, ..., 1) on the output space (counting measure).
StochasticKernel random_kernel(CounterRng& rng, const SpacePtr& in, const SpacePtr& out);

// Inputs of one draw. Which slots are used depends on the checker.
struct Instance {
  std::uint64_t draw = 0;
  std::vector<Density> densities;
  std::vector<WeightFunction> weights;
  std::vector<StochasticKernel> kernels;
  std::vector<double> scalars;
  std::shared_ptr<const ParametricFamily> family;
};

struct Checker {
  std::string name;
  std::function<Instance(CounterRng&, const GenOptions&)> draw;
  std::function<Verdict(const Instance&)> evaluate;
};

// All sweep checkers in a fixed order.
const std::vector<Checker>& registered_checkers();
// Throws std::invalid_argument for an unknown name.
const Checker& find_checker(const std::string& name);

}  // namespace wentropy
