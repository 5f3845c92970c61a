#include "wentropy/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "wentropy/kernels.hpp"

namespace wentropy {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<std::size_t> all_axes(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

}  // namespace

void require_same(const Field& a, const Field& b, const char* who) {
  if (!same_space(a.space, b.space))
    throw std::invalid_argument(std::string(who) + ": arguments live on different spaces");
}

double weighted_entropy(const Density& f, const WeightFunction& phi) {
  require_same(f, phi, "weighted_entropy");
  const auto& nu = f.space.nu();
  return kernels::reduce_sum(f.size(), [&](std::size_t i) {
    const double p = f.values[i];
    return p > 0.0 ? -phi.values[i] * p * std::log(p) * nu[i] : 0.0;
  });
}

double weighted_mass(const Density& f, const WeightFunction& phi) {
  require_same(f, phi, "weighted_mass");
  const auto& nu = f.space.nu();
  return kernels::reduce_sum(f.size(),
                             [&](std::size_t i) { return phi.values[i] * f.values[i] * nu[i]; });
}

double weighted_relative_entropy(const Density& f, const Density& g, const WeightFunction& phi) {
  require_same(f, g, "weighted_relative_entropy");
  require_same(f, phi, "weighted_relative_entropy");
  const auto& nu = f.space.nu();
  for (std::size_t i = 0; i < f.size(); ++i)
    if (f.values[i] > 0.0 && phi.values[i] > 0.0 && nu[i] > 0.0 && g.values[i] == 0.0)
      return kInf;
  return kernels::reduce_sum(f.size(), [&](std::size_t i) {
    const double p = f.values[i];
    const double w = phi.values[i];
    return (p > 0.0 && w > 0.0) ? w * p * std::log(p / g.values[i]) * nu[i] : 0.0;
  });
}

WeDecomposition we_decomposition_check(const Density& f, const WeightFunction& phi) {
  require_same(f, phi, "we_decomposition_check");
  const auto& nu = f.space.nu();
  const std::size_t n = f.size();
  WeDecomposition d;
  d.weighted_entropy = weighted_entropy(f, phi);
  d.shannon_of_phi_f = kernels::reduce_sum(n, [&](std::size_t i) {
    const double q = phi.values[i] * f.values[i];
    return q > 0.0 ? -q * std::log(q) * nu[i] : 0.0;
  });
  d.kl_phi_f_to_f = kernels::reduce_sum(n, [&](std::size_t i) {
    const double q = phi.values[i] * f.values[i];
    return q > 0.0 ? q * std::log(phi.values[i]) * nu[i] : 0.0;
  });
  d.shannon_plus_kl = d.shannon_of_phi_f + d.kl_phi_f_to_f;
  bool available = true;
  for (std::size_t i = 0; i < n; ++i)
    if (f.values[i] > 0.0 && phi.values[i] == 0.0 && nu[i] > 0.0) available = false;
  if (available) {
    d.neg_kl_to_phi = -kernels::reduce_sum(n, [&](std::size_t i) {
      const double q = phi.values[i] * f.values[i];
      return q > 0.0 ? q * std::log(q / phi.values[i]) * nu[i] : 0.0;
    });
  }
  return d;
}

ReducedWeight reduce_weight(const WeightFunction& phi, const JointDensity& joint,
                            const std::vector<std::size_t>& keep) {
  require_same(phi, joint, "reduce_weight");
  if (keep == all_axes(joint.arity())) return {phi, {}};
  const Density marg = marginalize(joint, keep);
  std::vector<double> pf(joint.size());
  for (std::size_t i = 0; i < joint.size(); ++i) pf[i] = phi.values[i] * joint.values[i];
  const Density num = marginalize(Density(joint.space, std::move(pf)), keep);
  ReducedWeight r;
  std::vector<double> psi(marg.size(), 0.0);
  for (std::size_t j = 0; j < marg.size(); ++j) {
    if (marg.values[j] > 0.0)
      psi[j] = num.values[j] / marg.values[j];
    else
      r.zero_marginal.push_back(j);
  }
  r.psi = WeightFunction(marg.space, std::move(psi));
  return r;
}

double joint_we(const JointDensity& j, const WeightFunction& phi) {
  return weighted_entropy(j, phi);
}

IdentityReport conditional_we_report(const JointDensity& j, const WeightFunction& phi,
                                     const std::vector<std::size_t>& given) {
  require_same(j, phi, "conditional_we");
  if (given.empty() || given.size() >= j.arity())
    throw std::invalid_argument("conditional_we: need a proper nonempty conditioning set");
  const Conditional c = condition(j, given);
  const auto& nu = j.space.nu();
  IdentityReport r;
  r.value = kernels::reduce_sum(j.size(), [&](std::size_t i) {
    const double p = j.values[i];
    return p > 0.0 ? -phi.values[i] * p * std::log(c.values[i]) * nu[i] : 0.0;
  });
  const ReducedWeight psi = reduce_weight(phi, j, given);
  r.via_identity = weighted_entropy(j, phi) - weighted_entropy(c.given_marginal, psi.psi);
  r.residual = std::abs(r.value - r.via_identity);
  return r;
}

double conditional_we(const JointDensity& j, const WeightFunction& phi,
                      const std::vector<std::size_t>& given) {
  return conditional_we_report(j, phi, given).value;
}

IdentityReport mutual_we_report(const JointDensity& j, const WeightFunction& phi,
                                const std::vector<std::size_t>& a,
                                const std::vector<std::size_t>& b) {
  require_same(j, phi, "mutual_we");
  if (a.empty() || b.empty()) throw std::invalid_argument("mutual_we: empty axis group");
  std::vector<std::size_t> keep(a);
  keep.insert(keep.end(), b.begin(), b.end());
  std::sort(keep.begin(), keep.end());
  if (std::adjacent_find(keep.begin(), keep.end()) != keep.end())
    throw std::invalid_argument("mutual_we: axis groups overlap");
  const Density m = marginalize(j, keep);
  const WeightFunction psi = reduce_weight(phi, j, keep).psi;
  auto positions = [&](const std::vector<std::size_t>& g) {
    std::vector<std::size_t> p;
    for (std::size_t x : g)
      p.push_back(static_cast<std::size_t>(std::find(keep.begin(), keep.end(), x) - keep.begin()));
    std::sort(p.begin(), p.end());
    return p;
  };
  const auto pa = positions(a), pb = positions(b);
  const Density ma = marginalize(m, pa), mb = marginalize(m, pb);
  const auto mapa = m.space.projection(pa), mapb = m.space.projection(pb);
  const auto& nu = m.space.nu();
  IdentityReport r;
  r.value = kernels::reduce_sum(m.size(), [&](std::size_t i) {
    const double p = m.values[i];
    const double w = psi.values[i];
    if (!(p > 0.0 && w > 0.0)) return 0.0;
    return w * p * std::log(p / (ma.values[mapa[i]] * mb.values[mapb[i]])) * nu[i];
  });
  const WeightFunction psia = reduce_weight(psi, m, pa).psi;
  const WeightFunction psib = reduce_weight(psi, m, pb).psi;
  r.via_identity = weighted_entropy(ma, psia) + weighted_entropy(mb, psib) -
                   weighted_entropy(m, psi);
  r.residual = std::abs(r.value - r.via_identity);
  return r;
}

double mutual_we(const JointDensity& j, const WeightFunction& phi) {
  if (j.arity() != 2) throw std::invalid_argument("mutual_we: joint must have two axes");
  return mutual_we_report(j, phi, {0}, {1}).value;
}

CalibratedResult calibrated_relative_we(const Density& f, const Density& g,
                                        const WeightFunction& phi) {
  CalibratedResult r;
  r.alpha_f = weighted_mass(f, phi);
  r.alpha_g = weighted_mass(g, phi);
  if (!(r.alpha_f > 0.0)) throw std::domain_error("calibrated_relative_we: alpha(f) is zero");
  const double d = weighted_relative_entropy(f, g, phi);
  if (std::isinf(d) || r.alpha_g == 0.0) {
    r.value = r.cross_check = kInf;
    return r;
  }
  r.value = d / r.alpha_f + std::log(r.alpha_g / r.alpha_f);
  const auto& nu = f.space.nu();
  r.cross_check = kernels::reduce_sum(f.size(), [&](std::size_t i) {
    const double ft = phi.values[i] * f.values[i] / r.alpha_f;
    if (!(ft > 0.0)) return 0.0;
    const double gt = phi.values[i] * g.values[i] / r.alpha_g;
    return ft * std::log(ft / gt) * nu[i];
  });
  return r;
}

}  // namespace wentropy
