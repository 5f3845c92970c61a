#pragma once
// Weighted entropies and divergences. All values are in nats and use the
// 0 log 0 = 0 convention by skipping points where the density vanishes.

#include <optional>
#include <vector>

#include "wentropy/measure.hpp"

namespace wentropy {

// -sum phi f log f nu over {f > 0}.
double weighted_entropy(const Density& f, const WeightFunction& phi);

// sum phi f log(f/g) nu over {f > 0, phi > 0}; +infinity when g vanishes
// there. May be negative.
double weighted_relative_entropy(const Density& f, const Density& g, const WeightFunction& phi);

// alpha(f) = integral of phi f.
double weighted_mass(const Density& f, const WeightFunction& phi);

struct WeDecomposition {
  double weighted_entropy = 0.0;
  double shannon_of_phi_f = 0.0;  // h(phi f)
  double kl_phi_f_to_f = 0.0;     // D(phi f || f)
  double shannon_plus_kl = 0.0;
  // -D(phi f || phi); unavailable when phi vanishes where f > 0.
  std::optional<double> neg_kl_to_phi;
};
WeDecomposition we_decomposition_check(const Density& f, const WeightFunction& phi);

struct ReducedWeight {
  WeightFunction psi;                  // on the sub-space of the kept axes
  std::vector<std::size_t> zero_marginal;  // flat sub-space indices with psi := 0
};
// psi(x_keep) = E[phi | x_keep]; set to 0 where the kept marginal vanishes.
ReducedWeight reduce_weight(const WeightFunction& phi, const JointDensity& joint,
                            const std::vector<std::size_t>& keep);

double joint_we(const JointDensity& j, const WeightFunction& phi);

struct IdentityReport {
  double value = 0.0;           // direct evaluation
  double via_identity = 0.0;    // through the reduced-weight identity
  double residual = 0.0;
};

// -sum phi f log(f / f_given); cross-checked against
// h_phi(joint) - h_psi(given marginal).
IdentityReport conditional_we_report(const JointDensity& j, const WeightFunction& phi,
                                     const std::vector<std::size_t>& given);
double conditional_we(const JointDensity& j, const WeightFunction& phi,
                      const std::vector<std::size_t>& given);

// Weighted mutual information between axis groups a and b of a joint whose
// axes are exactly a followed by b (after marginalizing away the rest and
// reducing phi onto a u b). Cross-checked against h_psi_a + h_psi_b - h.
IdentityReport mutual_we_report(const JointDensity& j, const WeightFunction& phi,
                                const std::vector<std::size_t>& a,
                                const std::vector<std::size_t>& b);
double mutual_we(const JointDensity& j, const WeightFunction& phi);

struct CalibratedResult {
  double value = 0.0;        // D/alpha(f) + log(alpha(g)/alpha(f))
  double alpha_f = 0.0;
  double alpha_g = 0.0;
  double cross_check = 0.0;  // D(phi f / alpha(f) || phi g / alpha(g))
};
CalibratedResult calibrated_relative_we(const Density& f, const Density& g,
                                        const WeightFunction& phi);

// Helpers shared by the checker modules.
void require_same(const Field& a, const Field& b, const char* who);

}  // namespace wentropy
