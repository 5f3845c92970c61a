#pragma once
// Maximum weighted entropy results: the Gaussian maximizer and its
// determinant corollaries (Hadamard, Ky Fan), the general maximizer under
// two linear constraints, the Gibbsian form, named discrete/continuous
// maximizers and subadditivity over n axes.

#include <string>

#include "wentropy/measure.hpp"
#include "wentropy/verdict.hpp"

namespace wentropy {

struct GaussianWe {
  double value = 0.0;     // closed form from alpha and Phi
  double direct = 0.0;    // grid quadrature of -phi f log f
  double residual = 0.0;  // |value - direct|
  double alpha = 0.0;     // integral of phi f
  Matrix phi_moment;      // integral of phi f x^T x
};

// Weighted entropy of N(0, C) on the default Gaussian grid for C.
GaussianWe gaussian_we(const Matrix& cov, const PointWeight& phi);
// Same on a caller-supplied grid.
GaussianWe gaussian_we(const Matrix& cov, const ProductSpace& grid, const WeightFunction& phi);

// f on a grid versus N(0, C) on the same grid.
Verdict check_gaussian_max(const Density& f, const Matrix& cov, const WeightFunction& phi);

// Weighted Hadamard inequality for N(0, C) on its default grid. The
// conclusion margin is twice the weighted subadditivity gap.
Verdict check_hadamard(const Matrix& cov, const PointWeight& phi);

// sigma(C) - lambda1 sigma(C1) - lambda2 sigma(C2) >= 0 with C the mixture of
// covariances. All three densities share one grid sized by the largest
// per-axis variance.
Verdict check_ky_fan(const Matrix& c1, const Matrix& c2, double lambda1, const PointWeight& phi);

// Maximizer f* under integral phi (f - f*) >= 0 and
// integral phi (f - f*) log f* >= 0.
Verdict check_max_we_direct(const Density& f, const Density& f_star, const WeightFunction& phi);

// f* = exp(-b beta) / Z with Z = integral exp(-b beta).
struct GibbsianSpec {
  std::vector<double> beta;  // beta(x) on the space of f
  double b = 0.0;
  double z = 0.0;
  double c = 0.0;
};
Density gibbsian_density(const ProductSpace& space, const GibbsianSpec& spec);
Verdict check_max_we_gibbsian(const Density& f, const GibbsianSpec& spec,
                              const WeightFunction& phi);

enum class NamedFamily { Exponential, Geometric, Poisson };
struct NamedMaximizer {
  NamedFamily family = NamedFamily::Exponential;
  double param = 1.0;  // rate lambda, success probability p, or mean lambda
};
NamedFamily parse_named_family(const std::string& name);
// Support used for the family: [0, L] trapezoid grid for the exponential,
// {0, ..., N} with tail mass below 1e-12 for the discrete families.
ProductSpace named_family_space(const NamedMaximizer& m);
Density named_family_density(const NamedMaximizer& m, const ProductSpace& space);
Verdict check_named_maximizer(const Density& f, const NamedMaximizer& m,
                              const WeightFunction& phi);

// sum_i h_psi_i(X_i) - h_phi(X) >= 0 under integral phi (f - prod f_i) >= 0.
Verdict check_multi_subadditivity(const JointDensity& j, const WeightFunction& phi);

}  // namespace wentropy
