#pragma once
// Measure spaces, densities, weight functions and kernels.
//
// A MeasureSpace is one factor: a finite list of points (each a vector of
// coordinates) with reference masses nu. Discrete spaces carry arbitrary
// masses (counting measure by default); grid spaces are 1-D uniform grids
// with trapezoid weights. A ProductSpace is the tensor product of factors,
// stored row-major with the last axis fastest. Densities, weight functions
// and joints all live on a ProductSpace; a joint is just a density with
// more than one axis.

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "wentropy/numerics.hpp"

namespace wentropy {

inline constexpr double kTolNorm = 1e-8;

enum class SpaceKind { Discrete, Grid };

class MeasureSpace {
 public:
  // points holds size*dim coordinates, point i at [i*dim, (i+1)*dim).
  MeasureSpace(SpaceKind kind, std::size_t dim, std::vector<double> points,
               std::vector<double> nu);

  SpaceKind kind() const { return kind_; }
  std::size_t size() const { return nu_.size(); }
  std::size_t dim() const { return dim_; }
  std::span<const double> point(std::size_t i) const {
    return {points_.data() + i * dim_, dim_};
  }
  const std::vector<double>& points() const { return points_; }
  const std::vector<double>& nu() const { return nu_; }
  double total_mass() const;
  bool is_counting() const;
  // Grid spacing; zero for discrete spaces.
  double spacing() const { return spacing_; }

 private:
  SpaceKind kind_;
  std::size_t dim_;
  std::vector<double> points_;
  std::vector<double> nu_;
  double spacing_ = 0.0;
};

using SpacePtr = std::shared_ptr<const MeasureSpace>;

// Discrete space with 1-D points; empty nu means counting measure.
SpacePtr discrete_space(std::vector<double> points, std::vector<double> nu = {});
// Discrete space with points 1..n under counting measure.
SpacePtr counting_space(std::size_t n);
// Discrete space with vector-valued points (dim coordinates each).
SpacePtr discrete_space_nd(std::size_t dim, std::vector<double> points,
                           std::vector<double> nu = {});
// Uniform 1-D grid on [lo, hi] with n points and trapezoid weights.
SpacePtr grid_space(double lo, double hi, std::size_t n);

bool same_space(const MeasureSpace& a, const MeasureSpace& b);

class ProductSpace {
 public:
  ProductSpace() = default;
  explicit ProductSpace(std::vector<SpacePtr> axes);
  ProductSpace(SpacePtr single);  // NOLINT: implicit on purpose

  std::size_t arity() const { return axes_.size(); }
  std::size_t size() const { return size_; }
  const SpacePtr& axis(std::size_t k) const { return axes_[k]; }
  const std::vector<SpacePtr>& axes() const { return axes_; }
  const std::vector<std::size_t>& shape() const { return shape_; }
  const std::vector<std::size_t>& strides() const { return strides_; }
  // Product reference mass at each flat index.
  const std::vector<double>& nu() const { return nu_; }
  // Total coordinate dimension of a point (sum of factor dims).
  std::size_t point_dim() const { return point_dim_; }
  // Concatenated coordinates of the point at a flat index.
  void point(std::size_t flat, std::span<double> out) const;
  std::vector<double> point(std::size_t flat) const;
  std::size_t axis_index(std::size_t flat, std::size_t k) const {
    return (flat / strides_[k]) % shape_[k];
  }
  ProductSpace sub(const std::vector<std::size_t>& keep) const;
  // For every flat index, the flat index of its projection onto `keep`.
  std::vector<std::size_t> projection(const std::vector<std::size_t>& keep) const;
  bool all_grid() const;

 private:
  std::vector<SpacePtr> axes_;
  std::vector<std::size_t> shape_;
  std::vector<std::size_t> strides_;
  std::vector<double> nu_;
  std::size_t size_ = 0;
  std::size_t point_dim_ = 0;
};

bool same_space(const ProductSpace& a, const ProductSpace& b);

// Nonnegative finite values on a product space. Used for densities (and
// joints) and for weight functions.
struct Field {
  ProductSpace space;
  std::vector<double> values;

  Field() = default;
  Field(ProductSpace s, std::vector<double> v);
  std::size_t size() const { return values.size(); }
  std::size_t arity() const { return space.arity(); }
};

struct Density : Field {
  using Field::Field;
  double mass() const;
  bool normalized(double tol = kTolNorm) const;
};

using JointDensity = Density;

struct WeightFunction : Field {
  using Field::Field;
  static WeightFunction constant(const ProductSpace& s, double c = 1.0);
};

// Markov kernel Pi(u, x) with sum_x Pi(u, x) nu(x) = 1 for each u.
struct StochasticKernel {
  SpacePtr in;
  SpacePtr out;
  std::vector<double> values;  // |in| x |out|, row-major

  StochasticKernel(SpacePtr in, SpacePtr out, std::vector<double> values);
  double operator()(std::size_t u, std::size_t x) const { return values[u * out->size() + x]; }
};

// Sum of h(x) nu(x); throws on a non-finite integrand where nu > 0.
double integrate(std::span<const double> h, const ProductSpace& space);
double integrate(std::span<const double> h, std::span<const double> nu);

// Marginal density on the kept axes (in the given order, which must be
// increasing).
Density marginalize(const Density& joint, const std::vector<std::size_t>& keep);

struct Conditional {
  // f(x) / f_given(x_given) on the full product space; 0 where the
  // conditioning marginal vanishes.
  std::vector<double> values;
  Density given_marginal;
  std::vector<std::size_t> zero_marginal;  // flat indices in the given sub-space
};
Conditional condition(const Density& joint, const std::vector<std::size_t>& given);

Density apply_kernel(const Density& f, const StochasticKernel& k);

// Tensor grid centred at `mean` covering +-half_width standard deviations on
// each axis. points == 0 picks the per-dimension default.
ProductSpace make_gaussian_grid(const Matrix& cov, double half_width = 8.0,
                                std::size_t points = 0, std::span<const double> mean = {});
std::size_t default_grid_points(std::size_t d);

// N(mean, cov) density evaluated on a product space whose points have
// dimension cov.rows().
Density gaussian_density(const ProductSpace& space, const Matrix& cov,
                         std::span<const double> mean = {});

// Weight given as a function of the point coordinates.
using PointWeight = std::function<double(std::span<const double>)>;
WeightFunction tabulate_weight(const ProductSpace& space, const PointWeight& fn);
// Indicator of x[axis] >= threshold taking the value 1/2 on the threshold
// itself, which keeps trapezoid sums second-order accurate across the jump.
PointWeight step_weight(double threshold, std::size_t axis = 0);

// Independent-axes product density f1 x f2 x ... on the joint's space.
std::vector<double> product_of_marginals(const Density& joint);

}  // namespace wentropy
