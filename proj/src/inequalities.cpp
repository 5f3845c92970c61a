#include "wentropy/inequalities.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "wentropy/functionals.hpp"
#include "wentropy/kernels.hpp"

namespace wentropy {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Verdict start(const char* id, const ProductSpace& s) {
  Verdict v;
  v.theorem_id = id;
  v.tol = tolerances_for(s);
  return v;
}

void require_arity(const Field& j, std::size_t n, const char* who) {
  if (j.arity() != n)
    throw std::invalid_argument(std::string(who) + ": expected a joint with " +
                                std::to_string(n) + " axes");
}

// integral of phi * (a - b)
double weighted_gap(const WeightFunction& phi, std::span<const double> a,
                    std::span<const double> b) {
  const auto& nu = phi.space.nu();
  return kernels::reduce_sum(a.size(),
                             [&](std::size_t i) { return phi.values[i] * (a[i] - b[i]) * nu[i]; });
}

// max |phi (a - b)| over points where mask > 0 (all points when mask empty).
double pointwise_gap(const WeightFunction& phi, std::span<const double> a,
                     std::span<const double> b, std::span<const double> mask = {}) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!mask.empty() && !(mask[i] > 0.0)) continue;
    m = std::max(m, std::abs(phi.values[i] * (a[i] - b[i])));
  }
  return m;
}

// Lift a marginal on `keep` back to the full joint space.
std::vector<double> lift(const Density& joint, const Density& marg,
                         const std::vector<std::size_t>& keep) {
  const auto map = joint.space.projection(keep);
  std::vector<double> out(joint.size());
  for (std::size_t i = 0; i < joint.size(); ++i) out[i] = marg.values[map[i]];
  return out;
}

// f_{ik} f_{jk} / f_k: the product that makes the two outer variables
// conditionally independent given axis `middle` of a triple.
std::vector<double> markov_product(const JointDensity& j3, std::size_t middle) {
  std::vector<std::size_t> a, b;
  for (std::size_t k = 0; k < 3; ++k) {
    if (k == middle) continue;
    if (a.empty())
      a = {std::min(k, middle), std::max(k, middle)};
    else
      b = {std::min(k, middle), std::max(k, middle)};
  }
  const auto fa = lift(j3, marginalize(j3, a), a);
  const auto fb = lift(j3, marginalize(j3, b), b);
  const auto fm = lift(j3, marginalize(j3, {middle}), {middle});
  std::vector<double> q(j3.size(), 0.0);
  for (std::size_t i = 0; i < j3.size(); ++i)
    if (fm[i] > 0.0) q[i] = fa[i] * fb[i] / fm[i];
  return q;
}

// -integral phi f (c - 1): the hypothesis form for conditional nonnegativity.
double cond_hypothesis(const Density& j, const WeightFunction& phi, std::span<const double> c) {
  const auto& nu = j.space.nu();
  return -kernels::reduce_sum(j.size(), [&](std::size_t i) {
    return phi.values[i] * j.values[i] * (c[i] - 1.0) * nu[i];
  });
}

double cond_pointwise(const Density& j, const WeightFunction& phi, std::span<const double> c) {
  double m = 0.0;
  for (std::size_t i = 0; i < j.size(); ++i)
    if (j.values[i] > 0.0) m = std::max(m, std::abs(phi.values[i] * (c[i] - 1.0)));
  return m;
}

struct PairView {
  Density joint;
  WeightFunction psi;
};

PairView pair_of(const JointDensity& j3, const WeightFunction& phi,
                 const std::vector<std::size_t>& keep) {
  return {marginalize(j3, keep), reduce_weight(phi, j3, keep).psi};
}

// Conditional weighted entropy of an axis pair given one of its two axes.
double pair_conditional(const JointDensity& j3, const WeightFunction& phi,
                        const std::vector<std::size_t>& keep, std::size_t given_pos) {
  const PairView p = pair_of(j3, phi, keep);
  return conditional_we(p.joint, p.psi, {given_pos});
}

double reduced_entropy(const JointDensity& j, const WeightFunction& phi,
                       const std::vector<std::size_t>& keep) {
  const PairView p = pair_of(j, phi, keep);
  return weighted_entropy(p.joint, p.psi);
}

void check_lambda(double lambda1) {
  if (!(lambda1 >= 0.0 && lambda1 <= 1.0))
    throw std::invalid_argument("mixture weight must lie in [0, 1]");
}

}  // namespace

Tolerances tolerances_for(const ProductSpace& s) {
  for (const auto& a : s.axes())
    if (a->kind() == SpaceKind::Grid) return Tolerances::grid();
  return Tolerances::discrete();
}

Verdict check_gibbs(const Density& f, const Density& g, const WeightFunction& phi) {
  require_same(f, g, "check_gibbs");
  require_same(f, phi, "check_gibbs");
  Verdict v = start("gibbs", f.space);
  v.hypothesis_margin = weighted_gap(phi, f.values, g.values);
  v.conclusion_margin = weighted_relative_entropy(f, g, phi);
  double pt = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (f.values[i] > 0.0)
      pt = std::max(pt, std::abs(phi.values[i] * (g.values[i] / f.values[i] - 1.0)));
  finalize(v, pt <= v.tol.pt);
  return v;
}

Verdict check_uniform_bound(const Density& f, const WeightFunction& phi, double beta) {
  require_same(f, phi, "check_uniform_bound");
  if (!(beta > 0.0) || !std::isfinite(beta))
    throw std::invalid_argument("check_uniform_bound: beta must be positive");
  bool unit_masses = f.space.arity() == 1 && f.space.axis(0)->is_counting();
  if (unit_masses && beta > 1.0)
    throw std::invalid_argument("check_uniform_bound: beta > 1 on a counting space");
  Verdict v = start("uniform_bound", f.space);
  const std::vector<double> b(f.size(), beta);
  v.hypothesis_margin = weighted_gap(phi, f.values, b);
  v.conclusion_margin = -std::log(beta) * weighted_mass(f, phi) - weighted_entropy(f, phi);
  finalize(v, pointwise_gap(phi, f.values, b, f.values) <= v.tol.pt);
  return v;
}

Verdict check_conditional_nonneg(const JointDensity& j, const WeightFunction& phi,
                                 PairOrTriple form) {
  require_same(j, phi, "check_conditional_nonneg");
  const bool pair = form == PairOrTriple::Pair;
  require_arity(j, pair ? 2 : 3, "check_conditional_nonneg");
  Verdict v = start(pair ? "conditional_nonneg_pair" : "conditional_nonneg_triple", j.space);
  const std::vector<std::size_t> given = pair ? std::vector<std::size_t>{1}
                                              : std::vector<std::size_t>{1, 2};
  const Conditional c = condition(j, given);
  v.hypothesis_margin = cond_hypothesis(j, phi, c.values);
  const IdentityReport r = conditional_we_report(j, phi, given);
  v.conclusion_margin = r.value;
  v.note("identity_residual", r.residual);
  finalize(v, cond_pointwise(j, phi, c.values) <= v.tol.pt);
  return v;
}

Verdict check_subadditivity(const JointDensity& j, const WeightFunction& phi, PairOrTriple form) {
  require_same(j, phi, "check_subadditivity");
  if (form == PairOrTriple::Pair) {
    require_arity(j, 2, "check_subadditivity");
    Verdict v = start("subadditivity_pair", j.space);
    const auto q = product_of_marginals(j);
    v.hypothesis_margin = weighted_gap(phi, j.values, q);
    const IdentityReport r = mutual_we_report(j, phi, {0}, {1});
    v.conclusion_margin = r.value;
    v.note("identity_residual", r.residual);
    double pt = 0.0;
    for (std::size_t i = 0; i < j.size(); ++i)
      if (j.values[i] > 0.0) pt = std::max(pt, std::abs(phi.values[i] * (1.0 - q[i] / j.values[i])));
    finalize(v, pt <= v.tol.pt);
    return v;
  }
  require_arity(j, 3, "check_subadditivity");
  Verdict v = start("subadditivity_triple", j.space);
  const Density f12 = marginalize(j, {0, 1});
  const auto l12 = lift(j, f12, {0, 1});
  const auto l1 = lift(j, marginalize(j, {0}), {0});
  const auto l2 = lift(j, marginalize(j, {1}), {1});
  const auto& nu = j.space.nu();
  v.hypothesis_margin = kernels::reduce_sum(j.size(), [&](std::size_t i) {
    if (!(l12[i] > 0.0)) return 0.0;
    const double c3 = j.values[i] / l12[i];
    return phi.values[i] * (l12[i] - l1[i] * l2[i]) * c3 * nu[i];
  });
  const PairView p = pair_of(j, phi, {0, 1});
  const double h1 = reduced_entropy(j, phi, {0});
  const double h1g2 = conditional_we(p.joint, p.psi, {1});
  v.conclusion_margin = h1 - h1g2;
  const auto q = product_of_marginals(p.joint);
  double pt = 0.0;
  for (std::size_t i = 0; i < p.joint.size(); ++i)
    if (p.joint.values[i] > 0.0)
      pt = std::max(pt, std::abs(p.psi.values[i] * (1.0 - q[i] / p.joint.values[i])));
  finalize(v, pt <= v.tol.pt);
  return v;
}

Verdict check_conditional_bound(const JointDensity& j3, const WeightFunction& phi,
                                ConditionalBound variant) {
  require_same(j3, phi, "check_conditional_bound");
  require_arity(j3, 3, "check_conditional_bound");
  switch (variant) {
    case ConditionalBound::JointGivenThird: {
      Verdict v = start("conditional_bound_joint_given_third", j3.space);
      const Conditional c = condition(j3, {1, 2});
      v.hypothesis_margin = cond_hypothesis(j3, phi, c.values);
      v.conclusion_margin = conditional_we(j3, phi, {2}) - pair_conditional(j3, phi, {1, 2}, 1);
      finalize(v, cond_pointwise(j3, phi, c.values) <= v.tol.pt);
      return v;
    }
    case ConditionalBound::JointGivenSecond: {
      Verdict v = start("conditional_bound_joint_given_second", j3.space);
      const Conditional c = condition(j3, {0, 1});
      v.hypothesis_margin = cond_hypothesis(j3, phi, c.values);
      v.conclusion_margin = conditional_we(j3, phi, {1}) - pair_conditional(j3, phi, {0, 1}, 1);
      finalize(v, cond_pointwise(j3, phi, c.values) <= v.tol.pt);
      return v;
    }
    case ConditionalBound::ConditioningReduces: {
      Verdict v = start("conditional_bound_conditioning_reduces", j3.space);
      const auto q = markov_product(j3, 1);
      v.hypothesis_margin = weighted_gap(phi, j3.values, q);
      v.conclusion_margin =
          pair_conditional(j3, phi, {0, 1}, 1) - conditional_we(j3, phi, {1, 2});
      double pt = 0.0;
      for (std::size_t i = 0; i < j3.size(); ++i)
        if (j3.values[i] > 0.0)
          pt = std::max(pt, std::abs(phi.values[i] * (1.0 - q[i] / j3.values[i])));
      finalize(v, pt <= v.tol.pt);
      return v;
    }
  }
  throw std::invalid_argument("check_conditional_bound: unknown variant");
}

Verdict check_conditional_subadditivity(const JointDensity& j3, const WeightFunction& phi) {
  require_same(j3, phi, "check_conditional_subadditivity");
  require_arity(j3, 3, "check_conditional_subadditivity");
  Verdict v = start("conditional_subadditivity", j3.space);
  const auto q = markov_product(j3, 1);
  v.hypothesis_margin = weighted_gap(phi, j3.values, q);
  v.conclusion_margin = pair_conditional(j3, phi, {0, 1}, 1) +
                        pair_conditional(j3, phi, {1, 2}, 0) - conditional_we(j3, phi, {1});
  finalize(v, pointwise_gap(phi, j3.values, q) <= v.tol.pt);
  return v;
}

Verdict check_strong_subadditivity(const JointDensity& j3, const WeightFunction& phi) {
  require_same(j3, phi, "check_strong_subadditivity");
  require_arity(j3, 3, "check_strong_subadditivity");
  Verdict v = start("strong_subadditivity", j3.space);
  const auto q = markov_product(j3, 1);
  v.hypothesis_margin = weighted_gap(phi, j3.values, q);
  v.conclusion_margin = reduced_entropy(j3, phi, {0, 1}) + reduced_entropy(j3, phi, {1, 2}) -
                        weighted_entropy(j3, phi) - reduced_entropy(j3, phi, {1});
  finalize(v, pointwise_gap(phi, j3.values, q) <= v.tol.pt);
  return v;
}

Verdict check_concavity_we(const Density& f1, const Density& f2, double lambda1,
                           const WeightFunction& phi) {
  require_same(f1, f2, "check_concavity_we");
  require_same(f1, phi, "check_concavity_we");
  check_lambda(lambda1);
  const double lambda2 = 1.0 - lambda1;
  Verdict v = start("concavity_we", f1.space);
  std::vector<double> mix(f1.size());
  for (std::size_t i = 0; i < mix.size(); ++i)
    mix[i] = lambda1 * f1.values[i] + lambda2 * f2.values[i];
  const Density m(f1.space, mix);
  v.hypothesis_margin = 0.0;
  v.conclusion_margin = weighted_entropy(m, phi) - lambda1 * weighted_entropy(f1, phi) -
                        lambda2 * weighted_entropy(f2, phi);
  const bool eq = lambda1 * lambda2 == 0.0 ||
                  pointwise_gap(phi, f1.values, f2.values, mix) <= v.tol.pt;
  finalize(v, eq);
  return v;
}

Verdict check_convexity_relative_we(const Density& f1, const Density& g1, const Density& f2,
                                    const Density& g2, double lambda1,
                                    const WeightFunction& phi) {
  for (const Field* x : {static_cast<const Field*>(&g1), static_cast<const Field*>(&f2),
                         static_cast<const Field*>(&g2), static_cast<const Field*>(&phi)})
    require_same(f1, *x, "check_convexity_relative_we");
  check_lambda(lambda1);
  const double lambda2 = 1.0 - lambda1;
  Verdict v = start("convexity_relative_we", f1.space);
  std::vector<double> fm(f1.size()), gm(f1.size());
  for (std::size_t i = 0; i < fm.size(); ++i) {
    fm[i] = lambda1 * f1.values[i] + lambda2 * f2.values[i];
    gm[i] = lambda1 * g1.values[i] + lambda2 * g2.values[i];
  }
  auto leg = [&](double lambda, const Density& f, const Density& g) {
    return lambda == 0.0 ? 0.0 : lambda * weighted_relative_entropy(f, g, phi);
  };
  const double avg = leg(lambda1, f1, g1) + leg(lambda2, f2, g2);
  const double mixed = weighted_relative_entropy(Density(f1.space, fm), Density(f1.space, gm), phi);
  v.hypothesis_margin = 0.0;
  if (std::isinf(avg))
    v.conclusion_margin = kInf;
  else if (std::isinf(mixed))
    v.conclusion_margin = -kInf;
  else
    v.conclusion_margin = avg - mixed;
  const bool eq = lambda1 * lambda2 == 0.0 ||
                  (pointwise_gap(phi, f1.values, f2.values) <= v.tol.pt &&
                   pointwise_gap(phi, g1.values, g2.values) <= v.tol.pt);
  finalize(v, eq);
  return v;
}

Verdict check_dp_relative(const Density& f, const Density& g, const WeightFunction& phi_out,
                          const StochasticKernel& pi) {
  require_same(f, g, "check_dp_relative");
  if (phi_out.arity() != 1 || !same_space(*phi_out.space.axis(0), *pi.out))
    throw std::invalid_argument("check_dp_relative: weight must live on the kernel output");
  Verdict v = start("dp_relative", f.space);
  v.assumption_tags.push_back("equality_condition_sufficient_only");
  std::vector<double> psi(pi.in->size(), 0.0);
  const auto& nu_out = pi.out->nu();
  for (std::size_t u = 0; u < psi.size(); ++u)
    for (std::size_t x = 0; x < pi.out->size(); ++x)
      psi[u] += phi_out.values[x] * pi(u, x) * nu_out[x];
  const WeightFunction Psi(f.space, psi);
  const Density fp = apply_kernel(f, pi), gp = apply_kernel(g, pi);
  const double lhs = weighted_relative_entropy(f, g, Psi);
  const double rhs = weighted_relative_entropy(fp, gp, phi_out);
  v.note("lhs", lhs);
  v.note("rhs", rhs);
  v.hypothesis_margin = 0.0;
  if (std::isinf(lhs))
    v.conclusion_margin = kInf;
  else if (std::isinf(rhs))
    v.conclusion_margin = -kInf;
  else
    v.conclusion_margin = lhs - rhs;
  bool eq = false;
  if (same_space(*pi.in, *pi.out)) {
    double d = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i)
      d = std::max({d, std::abs(fp.values[i] - f.values[i]), std::abs(gp.values[i] - g.values[i])});
    eq = d <= v.tol.pt;
  }
  finalize(v, eq);
  return v;
}

Verdict check_dp_markov(const JointDensity& j3, const WeightFunction& phi, MarkovMode mode) {
  require_same(j3, phi, "check_dp_markov");
  require_arity(j3, 3, "check_dp_markov");
  const char* id = mode == MarkovMode::Conditional           ? "dp_markov_conditional"
                   : mode == MarkovMode::ConditionalDoubling ? "dp_markov_doubling"
                                                             : "dp_markov_mutual";
  Verdict v = start(id, j3.space);
  const double markov_gap = pointwise_gap(phi, j3.values, markov_product(j3, 1));
  v.note("markov_residual", markov_gap);
  if (markov_gap > v.tol.pt) {
    Verdict u = make_inapplicable(id, "not Markov X1 - X2 - X3 modulo phi", v.tol);
    u.diagnostics = v.diagnostics;
    return u;
  }
  switch (mode) {
    case MarkovMode::Conditional: {
      const auto q = markov_product(j3, 0);
      v.hypothesis_margin = weighted_gap(phi, j3.values, q);
      v.conclusion_margin =
          pair_conditional(j3, phi, {0, 2}, 0) - pair_conditional(j3, phi, {1, 2}, 0);
      finalize(v, pointwise_gap(phi, j3.values, q) <= v.tol.pt);
      return v;
    }
    case MarkovMode::ConditionalDoubling: {
      const double h32 = pair_conditional(j3, phi, {1, 2}, 0);
      const double h21 = pair_conditional(j3, phi, {0, 1}, 0);
      v.note("stationarity_residual", std::abs(h32 - h21));
      if (std::abs(h32 - h21) > v.tol.eq) {
        Verdict u = make_inapplicable(id, "chain is not stationary", v.tol);
        u.diagnostics = v.diagnostics;
        return u;
      }
      const auto q = markov_product(j3, 0);
      const Conditional c2 = condition(j3, {0, 2});
      const double m_first = weighted_gap(phi, j3.values, q);
      const double m_second = cond_hypothesis(j3, phi, c2.values);
      v.note("first_hypothesis_margin", m_first);
      v.note("second_hypothesis_margin", m_second);
      v.hypothesis_margin = std::min(m_first, m_second);
      v.conclusion_margin = 2.0 * h32 - pair_conditional(j3, phi, {0, 2}, 0);
      finalize(v, pointwise_gap(phi, j3.values, q) <= v.tol.pt &&
                      cond_pointwise(j3, phi, c2.values) <= v.tol.pt);
      return v;
    }
    case MarkovMode::Mutual: {
      const auto q = markov_product(j3, 2);
      v.hypothesis_margin = weighted_gap(phi, j3.values, q);
      v.conclusion_margin = mutual_we_report(j3, phi, {0}, {1}).value -
                            mutual_we_report(j3, phi, {0}, {2}).value;
      finalize(v, pointwise_gap(phi, j3.values, q) <= v.tol.pt);
      return v;
    }
  }
  throw std::invalid_argument("check_dp_markov: unknown mode");
}

namespace {

JointDensity joint_from_channel(const Density& f1, const StochasticKernel& w) {
  if (f1.arity() != 1 || !same_space(*f1.space.axis(0), *w.in))
    throw std::invalid_argument("channel input does not match the input density");
  ProductSpace s({w.in, w.out});
  std::vector<double> vals(s.size());
  const std::size_t ny = w.out->size();
  for (std::size_t x = 0; x < w.in->size(); ++x)
    for (std::size_t y = 0; y < ny; ++y) vals[x * ny + y] = f1.values[x] * w(x, y);
  return JointDensity(s, std::move(vals));
}

StochasticKernel mix_channels(const StochasticKernel& a, const StochasticKernel& b,
                              double lambda1) {
  if (!same_space(*a.in, *b.in) || !same_space(*a.out, *b.out))
    throw std::invalid_argument("channels act between different spaces");
  std::vector<double> vals(a.values.size());
  for (std::size_t i = 0; i < vals.size(); ++i)
    vals[i] = lambda1 * a.values[i] + (1.0 - lambda1) * b.values[i];
  return StochasticKernel(a.in, a.out, std::move(vals));
}

}  // namespace

Verdict check_mutual_convex_in_channel(const Density& f1, const StochasticKernel& w1,
                                       const StochasticKernel& w2, double lambda1,
                                       const WeightFunction& phi) {
  check_lambda(lambda1);
  const double lambda2 = 1.0 - lambda1;
  const JointDensity j1 = joint_from_channel(f1, w1), j2 = joint_from_channel(f1, w2);
  const JointDensity jm = joint_from_channel(f1, mix_channels(w1, w2, lambda1));
  require_same(j1, phi, "check_mutual_convex_in_channel");
  Verdict v = start("mutual_convex_in_channel", j1.space);
  v.hypothesis_margin = 0.0;
  v.conclusion_margin =
      lambda1 * mutual_we(j1, phi) + lambda2 * mutual_we(j2, phi) - mutual_we(jm, phi);
  const bool eq = lambda1 * lambda2 == 0.0 ||
                  pointwise_gap(phi, j1.values, j2.values) <= v.tol.pt;
  finalize(v, eq);
  return v;
}

Verdict check_mutual_concave_in_input(const Density& fa, const Density& fb,
                                      const StochasticKernel& w, double lambda1,
                                      const WeightFunction& phi) {
  require_same(fa, fb, "check_mutual_concave_in_input");
  check_lambda(lambda1);
  const double lambda2 = 1.0 - lambda1;
  std::vector<double> mix(fa.size());
  for (std::size_t i = 0; i < mix.size(); ++i)
    mix[i] = lambda1 * fa.values[i] + lambda2 * fb.values[i];
  const JointDensity ja = joint_from_channel(fa, w), jb = joint_from_channel(fb, w);
  const JointDensity jm = joint_from_channel(Density(fa.space, mix), w);
  require_same(ja, phi, "check_mutual_concave_in_input");
  const std::size_t ny = w.out->size();
  for (std::size_t x = 1; x < w.in->size(); ++x)
    for (std::size_t y = 0; y < ny; ++y) {
      const double a = phi.values[y], b = phi.values[x * ny + y];
      if (std::abs(a - b) > 1e-12 * (1.0 + std::abs(a)))
        throw std::invalid_argument(
            "check_mutual_concave_in_input: weight must depend on the output only");
    }
  Verdict v = start("mutual_concave_in_input", ja.space);
  v.hypothesis_margin = 0.0;
  v.conclusion_margin =
      mutual_we(jm, phi) - lambda1 * mutual_we(ja, phi) - lambda2 * mutual_we(jb, phi);
  double d = 0.0;
  for (std::size_t i = 0; i < fa.size(); ++i) d = std::max(d, std::abs(fa.values[i] - fb.values[i]));
  finalize(v, lambda1 * lambda2 == 0.0 || d <= v.tol.pt);
  return v;
}

Verdict check_fano(const Density& f, const WeightFunction& phi, const FanoContext& ctx) {
  require_same(f, phi, "check_fano");
  if (f.arity() != 1) throw std::invalid_argument("check_fano: density must have one axis");
  const auto& nu = f.space.nu();
  const std::size_t n = f.size(), xs = ctx.x_star;
  if (xs >= n) throw std::invalid_argument("check_fano: x* out of range");
  const double p_star = f.values[xs] * nu[xs];
  if (!(p_star < 1.0)) throw std::invalid_argument("check_fano: p* must be below 1");
  const double nu_rest = f.space.axis(0)->total_mass() - nu[xs];
  if (!(nu_rest > 0.0)) throw std::invalid_argument("check_fano: complement has zero mass");
  Verdict v = start("fano", f.space);
  const double level = (1.0 - p_star) / nu_rest;
  double hyp = 0.0, rest_mass = 0.0, phi_total = 0.0, pt = 0.0;
  for (std::size_t x = 0; x < n; ++x) {
    phi_total += phi.values[x] * nu[x];
    if (x == xs) continue;
    hyp += phi.values[x] * (f.values[x] - level) * nu[x];
    rest_mass += phi.values[x] * f.values[x] * nu[x];
    if (f.values[x] > 0.0) pt = std::max(pt, std::abs(phi.values[x] * (f.values[x] - level)));
  }
  const double phi_star = ctx.convention == FanoConvention::Proof
                              ? rest_mass
                              : phi_total - phi.values[xs] * p_star;
  const double fx = f.values[xs];
  const double point_term = fx > 0.0 ? -phi.values[xs] * fx * std::log(fx) * nu[xs] : 0.0;
  const double bound = point_term + phi_star * std::log(nu_rest / (1.0 - p_star));
  v.hypothesis_margin = hyp;
  v.conclusion_margin = bound - weighted_entropy(f, phi);
  v.note("bound", bound);
  v.note("phi_star", phi_star);
  if (ctx.convention == FanoConvention::AsWritten) v.assumption_tags.push_back("as_written");
  finalize(v, pt <= v.tol.pt);
  return v;
}

Verdict check_generalized_fano(const JointDensity& j, const WeightFunction& phi,
                               FanoConvention convention) {
  require_same(j, phi, "check_generalized_fano");
  require_arity(j, 2, "check_generalized_fano");
  const MeasureSpace& s1 = *j.space.axis(0);
  const MeasureSpace& s2 = *j.space.axis(1);
  if (s1.dim() != 1 || s2.dim() != 1)
    throw std::invalid_argument("check_generalized_fano: axes must be 1-D");
  const std::size_t n1 = s1.size(), n2 = s2.size();
  // match[jj] = index in X1 of the point equal to the jj-th value of X2
  std::vector<std::size_t> match(n2);
  for (std::size_t jj = 0; jj < n2; ++jj) {
    std::size_t k = 0;
    while (k < n1 && s1.point(k)[0] != s2.point(jj)[0]) ++k;
    if (k == n1)
      throw std::invalid_argument("check_generalized_fano: X2 takes a value outside X1");
    match[jj] = k;
  }
  Verdict v = start("generalized_fano", j.space);
  const Density f2 = marginalize(j, {1});
  const auto& nu1 = s1.nu();
  const double total1 = s1.total_mass();
  double hyp = kInf, bound = 0.0, pt = 0.0;
  for (std::size_t jj = 0; jj < n2; ++jj) {
    const double m = f2.values[jj];
    if (!(m > 0.0)) continue;
    const std::size_t xj = match[jj];
    auto cond = [&](std::size_t x) { return j.values[x * n2 + jj] / m; };
    const double p_hit = cond(xj) * nu1[xj];
    const double eps = 1.0 - p_hit;
    const double nu_rest = total1 - nu1[xj];
    double h = 0.0, phi_star = 0.0;
    for (std::size_t x = 0; x < n1; ++x) {
      if (x == xj) continue;
      const double w = phi.values[x * n2 + jj];
      const double c = cond(x);
      h += w * (c - eps / nu_rest) * nu1[x];
      phi_star += w * (convention == FanoConvention::Proof ? c : j.values[x * n2 + jj]) * nu1[x];
      if (c > 0.0) pt = std::max(pt, std::abs(w * (c - eps / nu_rest)));
    }
    hyp = std::min(hyp, h);
    const double c_hit = cond(xj);
    double term = c_hit > 0.0 ? -phi.values[xj * n2 + jj] * c_hit * std::log(c_hit) * nu1[xj] : 0.0;
    if (phi_star > 0.0) term += phi_star * std::log(nu_rest / eps);
    bound += m * s2.nu()[jj] * term;
  }
  if (std::isinf(hyp)) hyp = 0.0;
  v.hypothesis_margin = hyp;
  v.conclusion_margin = bound - conditional_we(j, phi, {1});
  v.note("bound", bound);
  if (convention == FanoConvention::AsWritten) v.assumption_tags.push_back("as_written");
  finalize(v, pt <= v.tol.pt);
  return v;
}

}  // namespace wentropy
