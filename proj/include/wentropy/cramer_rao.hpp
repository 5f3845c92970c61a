#pragma once
// Weighted Cramer-Rao inequalities (versions I and II) and the two weighted
// Kullback lower bounds on the calibrated and plain relative weighted
// entropies.

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "wentropy/fisher.hpp"
#include "wentropy/measure.hpp"
#include "wentropy/numerics.hpp"
#include "wentropy/verdict.hpp"

namespace wentropy {

// Interchange residuals above this flag the context.
inline constexpr double kInterchangeTol = 1e-4;

// Statistic x -> T(x), s entries.
using StatisticFn = std::function<std::vector<double>(std::span<const double> x)>;

struct CRContextI {
  std::size_t s = 0;
  std::size_t m = 0;
  double alpha = 0.0;           // E[phi]
  std::vector<double> eta;      // E[phi T], s entries
  std::vector<double> d_alpha;  // m entries, central differences
  Matrix d_eta;                 // s x m, central differences
  Matrix cov;                   // E[phi (T - eta)^T (T - eta)]
  // Score-side integrals E[phi S] and E[phi T^T S] and their distance to the
  // finite-difference derivatives (max norm).
  std::vector<double> score_d_alpha;
  Matrix score_d_eta;
  double interchange_residual_alpha = 0.0;
  double interchange_residual_eta = 0.0;
  bool interchange_suspect = false;
  bool degenerate = false;  // phi f vanishes on the support
};

CRContextI build_cr_context_I(const ParametricFamily& fam, const WeightFunction& phi,
                              const StatisticFn& t, std::span<const double> theta);

// C >= A J^-1 A^T with A = d_eta - eta^T d_alpha; the margin is the smallest
// eigenvalue of the difference. Singular J (smallest eigenvalue <= 1e-10)
// is inapplicable.
Verdict check_wcr_I(const CRContextI& ctx, const FisherMatrix& j);

struct CRContextII {
  std::size_t n = 0;
  std::size_t m = 0;
  double alpha = 0.0;
  std::vector<double> d_alpha;  // m
  std::vector<double> e_theta;  // E[phi X], n
  Matrix d_e;                   // n x m
  Matrix c_tilde;               // E[phi X^T X] / alpha - e^T e
  std::vector<double> mu_phi;   // e / alpha
  Matrix d_mu;                  // n x m
  Matrix v_bar;                 // E[phi X^T X] / alpha - mu^T mu
};

CRContextII build_cr_context_II(const ParametricFamily& fam, const WeightFunction& phi,
                                std::span<const double> theta);

enum class CR2Form {
  AsStated,    // J >= de^T C~^-1 de + alpha^-1 da^T da
  Normalized,  // J >= alpha dmu^T V^-1 dmu + alpha^-1 da^T da
};
CR2Form parse_cr2_form(const std::string& s);

// Both right-hand sides are evaluated; the selected one gives the conclusion
// margin and the other is reported as a diagnostic. The uniform ratio
// condition is recorded as an assumption tag, not checked.
Verdict check_wcr_II(const ParametricFamily& fam, const WeightFunction& phi,
                     std::span<const double> theta, CR2Form form = CR2Form::AsStated);

// e_phi(f), alpha(f), alpha(g) and the moment functional M_g evaluated in
// log space with max-subtraction.
struct KullbackContext {
  std::size_t n = 0;
  std::vector<double> e_phi_f;
  double alpha_f = 0.0;
  double alpha_g = 0.0;
  std::vector<double> x;       // support points with phi g > 0, n each
  std::vector<double> log_w;   // log(phi g nu) at those points

  double log_mg(std::span<const double> zeta) const;
  // Gradient of log M_g: the mean of x under phi g exp(x zeta) / M_g.
  std::vector<double> grad_log_mg(std::span<const double> zeta) const;
  // alpha(f) - M_g(zeta); nonnegative on the feasible set.
  double feasible_check(std::span<const double> zeta) const;
};

KullbackContext make_kullback_context(const Density& f, const Density& g,
                                      const WeightFunction& phi);

struct KullbackBound {
  double bound = 0.0;
  std::vector<double> argmax_zeta;
  double foc_residual = 0.0;
  bool clipped = false;     // the search box was active at the optimum
  bool unbounded = false;   // bound is +inf, certified by a receding direction
  bool infeasible = false;  // empty feasible set, bound is -inf
};

struct KullbackOptions {
  double box = 20.0;  // search box [-box, box]^n
};

// sup over zeta of e_phi(f) zeta^T / alpha(f) + log alpha(g) - log M_g(zeta).
// The foc residual is |e_phi(f) / alpha(f) - grad log M_g(zeta*)|.
KullbackBound kullback_bound_1(const Density& f, const Density& g, const WeightFunction& phi,
                               const KullbackOptions& opts = {});

// sup of e_phi(f) zeta^T over {zeta : alpha(f) - M_g(zeta) >= 0}. The set is
// a sublevel set of a convex function. Boundary points are found by
// bisection along rays from the minimizer of M_g; for n >= 2 the ray
// direction is optimized by an angular scan followed by golden-section
// refinement. Every returned zeta is feasible.
KullbackBound kullback_bound_2(const Density& f, const Density& g, const WeightFunction& phi,
                               const KullbackOptions& opts = {});

// Verdicts for the two bounds: conclusion margin K^w - bound (resp.
// D^w - bound), with the bound, argmax and foc residual as diagnostics.
Verdict check_kullback_1(const Density& f, const Density& g, const WeightFunction& phi);
Verdict check_kullback_2(const Density& f, const Density& g, const WeightFunction& phi);

}  // namespace wentropy
