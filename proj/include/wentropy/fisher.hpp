#pragma once
// Weighted Fisher information for parametric families on a fixed support:
// scores, the weighted Fisher matrix, joint/marginal/conditional forms with
// the correction term S_theta, reparametrization, the spatial (shift)
// information matrix and the additive shift model.

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "wentropy/measure.hpp"
#include "wentropy/numerics.hpp"
#include "wentropy/verdict.hpp"

namespace wentropy {

using FamilyDensityFn =
    std::function<double(std::span<const double> theta, std::span<const double> x)>;
// Writes d/dtheta log f_theta(x) into out (size m).
using FamilyScoreFn = std::function<void(std::span<const double> theta,
                                         std::span<const double> x, std::span<double> out)>;

struct ParametricFamily {
  std::string name;
  std::size_t param_dim = 1;
  ProductSpace support;  // fixed, independent of theta
  FamilyDensityFn density;
  FamilyScoreFn score;  // empty: central differences of log f
  std::size_t x_axes = 0;  // for joint families: leading axes that form X
};

// Registered families.
// N(theta, sigma2) on a +-12 sd grid around 0 (4097 points).
ParametricFamily gaussian_location_family(double sigma2 = 1.0);
// N(theta, C), theta in R^d, on a +-10 sd tensor grid.
ParametricFamily gaussian_location_d_family(const Matrix& cov);
// Poisson(theta) on {0, ..., N} with tail below 1e-12 for every mean up to lambda_max.
ParametricFamily poisson_family(double lambda_max);
// theta exp(-theta x) on [0, 40 / rate_min] (8193 points).
ParametricFamily exponential_rate_family(double rate_min);
// (1 + a cos(2 pi (k - theta) / K)) / K on {0, ..., K-1}.
ParametricFamily discrete_shift_family(std::size_t k, double a);
// f_theta(x) proportional to exp(theta . t(x)) on a discrete product space;
// features holds |support| rows of m entries.
ParametricFamily softmax_family(ProductSpace support, std::size_t m, std::vector<double> features);

double family_density(const ParametricFamily& fam, std::span<const double> theta,
                      std::span<const double> x);
// Score with the positivity indicator: zero where f_theta(x) = 0. Central
// differences use h = 1e-5 (1 + |theta_i|) when no closed form is given.
std::vector<double> score(const ParametricFamily& fam, std::span<const double> theta,
                          std::span<const double> x);
// Central-difference score regardless of a closed form (for consistency checks).
std::vector<double> score_fd(const ParametricFamily& fam, std::span<const double> theta,
                             std::span<const double> x);
// f_theta on the support.
Density family_density_on_support(const ParametricFamily& fam, std::span<const double> theta);

struct FisherMatrix {
  Matrix entries;
  double weight_mass = 0.0;   // integral of phi f_theta
  std::size_t masked = 0;     // points skipped by a positivity indicator
};

FisherMatrix weighted_fisher(const ParametricFamily& fam, const WeightFunction& phi,
                             std::span<const double> theta);

struct JointFisher {
  Matrix joint;        // J_phi(X, Y)
  Matrix marginal;     // J_psi(X)
  Matrix conditional;  // J_phi(Y | X)
  Matrix s_theta;
  std::vector<double> b;  // B_theta(x), |X| rows of m entries
  WeightFunction psi;     // E[phi(x, Y) | X = x] on the X sub-space
};

// fam.x_axes leading axes of the support form X, the rest Y. The positivity
// indicator in S_theta is applied to the joint density.
JointFisher joint_and_conditional_fisher(const ParametricFamily& fam, const WeightFunction& phi,
                                         std::span<const double> theta);

// Identity J(X,Y) = J_psi(X) + J(Y|X) + S_theta. The conclusion margin is the
// max-norm residual; it holds when the residual is at most kTolFisher.
Verdict check_chain_rule(const ParametricFamily& fam, const WeightFunction& phi,
                         std::span<const double> theta);
// J(X,Y) - J_psi(X) - S_theta >= 0 by smallest eigenvalue.
Verdict check_data_refinement(const ParametricFamily& fam, const WeightFunction& phi,
                              std::span<const double> theta);

// Weight on pairs (x, y = g(x)).
using PairWeight = std::function<double(std::span<const double> x, double y)>;
using PointMap = std::function<double(std::span<const double> x)>;

// J_rho_in(X) >= J_rho_out(g(X)) with rho_in(x) = phi(x, g(x)) and
// rho_out(y) = sum over the fibre of phi(x, y) f(x | y). Requires S_theta
// for the pair (g(X), X) to vanish; otherwise inapplicable, with the margin
// including S_theta reported as a diagnostic.
Verdict check_dp_fisher(const ParametricFamily& fam, const PairWeight& phi, const PointMap& g,
                        std::span<const double> theta);

struct ReparamResult {
  Matrix conjugated;  // (d eta / d theta)^T J(eta) (d eta / d theta)
  Matrix direct;      // J computed for the composed family theta -> f_eta(theta)
  Matrix jacobian;    // m' x m
  double residual = 0.0;
  bool singular_jacobian = false;
};
ReparamResult reparametrized_fisher(const ParametricFamily& fam, const WeightFunction& phi,
                                    const VectorFn& eta, std::span<const double> theta);

// L_phi(X) = integral phi / f grad f^T grad f on a tensor grid. Gradients use
// fourth-order central differences; the two outermost rows on every axis are
// excluded from the integral. Interior points with f = 0 and phi > 0 are
// masked and counted.
FisherMatrix spatial_fisher(const Density& f, const WeightFunction& phi);

// X = theta Q + Z with Z a noise density on R^n, observed through Y = X P^T.
struct ShiftModel {
  Matrix q;  // m x n
  Matrix p;  // k x n
  std::function<double(std::span<const double>)> noise;
  Matrix noise_cov;  // sizes the grid
};
ShiftModel gaussian_shift_model(Matrix q, Matrix p, const Matrix& cov);

enum class ShiftMode { Lemma, CorI, CorII, CorIII };
ShiftMode parse_shift_mode(const std::string& s);

// Lemma: identity residuals for J_phi(X) = Q L_phi(X) Q^T and
// J_psi(Y) = Q P^T L_psi(Y) P Q^T as diagnostics, conclusion
// J_phi(X) >= J_psi(Y). Corollary modes shift every coordinate (Q ignored,
// theta in R^n): (i) L_phi(X) >= P^T L_psi(Y) P, (ii) P P^T = I and
// L_psi(Y) <= P L_phi(X) P^T, (iii) L_psi(Y) <= (P L_phi(X)^-1 P^T)^-1.
// All modes need S_theta of the pair (Y, X) to vanish.
Verdict check_shift_model(const ShiftModel& model, const PointWeight& phi,
                          std::span<const double> theta, ShiftMode mode);

}  // namespace wentropy
