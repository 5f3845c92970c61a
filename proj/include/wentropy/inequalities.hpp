#pragma once
// Checkers for the weighted Gibbs, subadditivity, conditioning, data
// processing and Fano inequalities. Each returns a Verdict; none throws on a
// failed hypothesis. Triple joints use axes 0, 1, 2 for X1, X2, X3.

#include <cstddef>

#include "wentropy/measure.hpp"
#include "wentropy/verdict.hpp"

namespace wentropy {

Tolerances tolerances_for(const ProductSpace& s);

Verdict check_gibbs(const Density& f, const Density& g, const WeightFunction& phi);

// Bound h^w <= -log(beta) * integral(phi f) under integral phi (f - beta) >= 0.
Verdict check_uniform_bound(const Density& f, const WeightFunction& phi, double beta);

enum class PairOrTriple { Pair, Triple };

// h^w(X1 | rest) >= 0 under -integral phi f (f_{1|rest} - 1) >= 0.
Verdict check_conditional_nonneg(const JointDensity& j, const WeightFunction& phi,
                                 PairOrTriple form);

// Pair: i^w(X1:X2) >= 0 under integral phi (f - f1 f2) >= 0.
// Triple: the same for (X1, X2) with the weight reduced from the triple.
Verdict check_subadditivity(const JointDensity& j, const WeightFunction& phi, PairOrTriple form);

enum class ConditionalBound {
  JointGivenThird,    // h(X1X2|X3) - h_psi23(X2|X3) >= 0
  JointGivenSecond,   // h(X1X3|X2) - h_psi12(X1|X2) >= 0
  ConditioningReduces // h_psi12(X1|X2) - h(X1|X2X3) >= 0
};
Verdict check_conditional_bound(const JointDensity& j3, const WeightFunction& phi,
                                ConditionalBound variant);

Verdict check_conditional_subadditivity(const JointDensity& j3, const WeightFunction& phi);
Verdict check_strong_subadditivity(const JointDensity& j3, const WeightFunction& phi);

Verdict check_concavity_we(const Density& f1, const Density& f2, double lambda1,
                           const WeightFunction& phi);
Verdict check_convexity_relative_we(const Density& f1, const Density& g1, const Density& f2,
                                    const Density& g2, double lambda1, const WeightFunction& phi);

// D_Psi(f||g) >= D_phi(f Pi || g Pi) with Psi(u) = integral phi(x) Pi(u, x).
// The equality condition (f Pi = f and g Pi = g) is only sufficient.
Verdict check_dp_relative(const Density& f, const Density& g, const WeightFunction& phi_out,
                          const StochasticKernel& pi);

enum class MarkovMode { Conditional, ConditionalDoubling, Mutual };
// Requires X1 - X2 - X3 Markov modulo phi; otherwise the verdict is
// inapplicable. The doubling mode also requires stationarity.
Verdict check_dp_markov(const JointDensity& j3, const WeightFunction& phi, MarkovMode mode);

// lambda1 i(f1 W1) + lambda2 i(f1 W2) - i(f1 (lambda1 W1 + lambda2 W2)) >= 0.
Verdict check_mutual_convex_in_channel(const Density& f1, const StochasticKernel& w1,
                                       const StochasticKernel& w2, double lambda1,
                                       const WeightFunction& phi);
// i((lambda1 fa + lambda2 fb) W) - lambda1 i(fa W) - lambda2 i(fb W) >= 0 for a
// weight depending on the output only.
Verdict check_mutual_concave_in_input(const Density& fa, const Density& fb,
                                      const StochasticKernel& w, double lambda1,
                                      const WeightFunction& phi);

enum class FanoConvention {
  Proof,     // phi_* = integral over the complement of phi f
  AsWritten  // phi_* = integral of phi minus phi(x*) p*
};

struct FanoContext {
  std::size_t x_star = 0;  // index into the space
  FanoConvention convention = FanoConvention::Proof;
};
Verdict check_fano(const Density& f, const WeightFunction& phi, const FanoContext& ctx);

// X2 (axis 1) takes values that are all points of X1 (axis 0). Proof
// convention uses the conditional f(x1|j) in the complement weight;
// AsWritten uses the joint f(x1, j).
Verdict check_generalized_fano(const JointDensity& j, const WeightFunction& phi,
                               FanoConvention convention = FanoConvention::Proof);

}  // namespace wentropy
