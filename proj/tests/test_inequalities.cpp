#include <cmath>

#include "doctest.h"
#include "support.hpp"
#include "wentropy/functionals.hpp"
#include "wentropy/inequalities.hpp"

using namespace wentropy;
using testsupport::counting_product;
using testsupport::Rng;

namespace {

struct FixA {
  ProductSpace s{counting_space(2)};
  Density f{s, {0.25, 0.75}};
  Density g{s, {0.5, 0.5}};
  WeightFunction phi{s, {2.0, 1.0}};
  WeightFunction one = WeightFunction::constant(s);
};

Density pair_fixture() { return Density(counting_product({2, 2}), {0.4, 0.1, 0.1, 0.4}); }

// X1 - X2 - X3 chain f1(x1) P(x1, x2) Q(x2, x3).
Density random_chain(Rng& rng, std::size_t n1, std::size_t n2, std::size_t n3) {
  const auto p1 = testsupport::simplex(rng, n1);
  std::vector<std::vector<double>> a(n1), b(n2);
  for (auto& r : a) r = testsupport::simplex(rng, n2);
  for (auto& r : b) r = testsupport::simplex(rng, n3);
  std::vector<double> v(n1 * n2 * n3);
  for (std::size_t i = 0; i < n1; ++i)
    for (std::size_t j = 0; j < n2; ++j)
      for (std::size_t k = 0; k < n3; ++k) v[(i * n2 + j) * n3 + k] = p1[i] * a[i][j] * b[j][k];
  return Density(counting_product({n1, n2, n3}), v);
}

std::size_t count_holding(const std::vector<Verdict>& vs) {
  std::size_t n = 0;
  for (const auto& v : vs) n += v.hypothesis_holds && !v.inapplicable;
  return n;
}

void require_sound(const std::vector<Verdict>& vs) {
  for (const auto& v : vs) {
    INFO(v.theorem_id << " hyp=" << v.hypothesis_margin << " concl=" << v.conclusion_margin);
    CHECK_FALSE(v.violation());
  }
}

}  // namespace

TEST_CASE("Gibbs checker on the two-point fixture") {
  FixA a;
  const Verdict v = check_gibbs(a.f, a.g, a.phi);
  CHECK(v.hypothesis_margin == doctest::Approx(-0.25));
  CHECK_FALSE(v.hypothesis_holds);
  CHECK(v.conclusion_margin == doctest::Approx(-0.042475).epsilon(1e-5));
  CHECK_FALSE(v.violation());
  const Verdict u = check_gibbs(a.f, a.g, a.one);
  CHECK(u.hypothesis_margin == doctest::Approx(0.0));
  CHECK(u.hypothesis_holds);
  CHECK(u.conclusion_margin == doctest::Approx(0.130812).epsilon(1e-5));
  const Verdict e = check_gibbs(a.f, a.f, a.phi);
  CHECK(e.equality_detected);
}

TEST_CASE("uniform bound on the two-point fixture") {
  FixA a;
  const Verdict v = check_uniform_bound(a.f, a.phi, 1.0 / 3.0);
  CHECK(v.hypothesis_margin == doctest::Approx(0.25));
  const double oracle = std::log(3.0) * 1.25 - weighted_entropy(a.f, a.phi);
  CHECK(oracle == doctest::Approx(0.464357).epsilon(1e-5));
  CHECK(v.conclusion_margin == doctest::Approx(oracle).epsilon(1e-12));
  CHECK_THROWS_AS(check_uniform_bound(a.f, a.phi, 2.0), std::invalid_argument);
  const Density u(a.s, {0.5, 0.5});
  CHECK(check_uniform_bound(u, a.phi, 0.5).equality_detected);
}

TEST_CASE("conditional nonnegativity and subadditivity on the pair fixture") {
  const Density j = pair_fixture();
  const WeightFunction one = WeightFunction::constant(j.space);
  const Verdict c = check_conditional_nonneg(j, one, PairOrTriple::Pair);
  CHECK(c.hypothesis_margin == doctest::Approx(1.0 - (0.64 + 0.04)));
  CHECK(c.conclusion_margin == doctest::Approx(0.500403).epsilon(1e-5));
  const Verdict s = check_subadditivity(j, one, PairOrTriple::Pair);
  CHECK(std::abs(s.hypothesis_margin) < 1e-15);
  CHECK(s.hypothesis_holds);
  CHECK(s.conclusion_margin == doctest::Approx(0.192745).epsilon(1e-5));
  const Density ind(j.space, {0.25, 0.25, 0.25, 0.25});
  CHECK(check_subadditivity(ind, one, PairOrTriple::Pair).equality_detected);
}

TEST_CASE("Fano bound on the uniform four-point law") {
  const ProductSpace s(counting_space(4));
  const Density f(s, {0.25, 0.25, 0.25, 0.25});
  const WeightFunction one = WeightFunction::constant(s);
  const Verdict v = check_fano(f, one, {0, FanoConvention::Proof});
  CHECK(v.diagnostic("bound") == doctest::Approx(std::log(4.0)).epsilon(1e-12));
  CHECK(std::abs(v.conclusion_margin) < 1e-12);
  CHECK(v.equality_detected);
  const Verdict w = check_fano(f, one, {0, FanoConvention::AsWritten});
  const double oracle = -0.25 * std::log(0.25) + 3.75 * std::log(4.0);
  CHECK(oracle == doctest::Approx(5.545177).epsilon(1e-6));
  CHECK(w.diagnostic("bound") == doctest::Approx(oracle).epsilon(1e-12));
  const Density g(s, {0.7, 0.1, 0.1, 0.1});
  const Verdict e = check_fano(g, one, {0, FanoConvention::Proof});
  CHECK(std::abs(e.hypothesis_margin) < 1e-12);
  CHECK(e.equality_detected);
  const Density h(s, {1.0, 0.0, 0.0, 0.0});
  CHECK_THROWS_AS(check_fano(h, one, {0, FanoConvention::Proof}), std::invalid_argument);
}

TEST_CASE("generalized Fano on the pair fixture") {
  const Density j = pair_fixture();
  const WeightFunction one = WeightFunction::constant(j.space);
  const Verdict v = check_generalized_fano(j, one);
  const double oracle = -(0.8 * std::log(0.8)) + 0.2 * std::log(1.0 / 0.2);
  CHECK(oracle == doctest::Approx(0.500403).epsilon(1e-6));
  CHECK(v.diagnostic("bound") == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(std::abs(v.conclusion_margin) < 1e-12);
  CHECK(v.hypothesis_holds);
  CHECK(v.equality_detected);
  // The joint-density reading of the complement weight undercounts it.
  const Verdict w = check_generalized_fano(j, one, FanoConvention::AsWritten);
  CHECK(w.hypothesis_holds);
  CHECK(w.violation());
  const Density diag(j.space, {0.5, 0.0, 0.0, 0.5});
  const Verdict d = check_generalized_fano(diag, one);
  CHECK(std::abs(d.diagnostic("bound")) < 1e-15);
  CHECK(d.equality_detected);
}

TEST_CASE("data processing for divergences") {
  FixA a;
  const SpacePtr u = a.s.axis(0);
  const StochasticKernel id(u, u, {1, 0, 0, 1});
  const Verdict e = check_dp_relative(a.f, a.g, a.phi, id);
  CHECK(std::abs(e.conclusion_margin) < 1e-15);
  CHECK(e.equality_detected);
  const StochasticKernel flat(u, u, {0.5, 0.5, 0.5, 0.5});
  const Verdict v = check_dp_relative(a.f, a.g, a.one, flat);
  CHECK(v.diagnostic("rhs") == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(v.diagnostic("lhs") == doctest::Approx(0.130812).epsilon(1e-5));
}

TEST_CASE("concavity and convexity at the mixture endpoints") {
  FixA a;
  for (double lam : {0.0, 1.0}) {
    CHECK(check_concavity_we(a.f, a.g, lam, a.phi).equality_detected);
    CHECK(check_convexity_relative_we(a.f, a.g, a.g, a.f, lam, a.phi).equality_detected);
  }
  CHECK_THROWS_AS(check_concavity_we(a.f, a.g, 1.5, a.phi), std::invalid_argument);
}

TEST_CASE("Markov checkers reject non-Markov triples") {
  Rng rng(1);
  const ProductSpace s = counting_product({2, 2, 2});
  const Density j = testsupport::random_density(rng, s);
  const Verdict v = check_dp_markov(j, WeightFunction::constant(s), MarkovMode::Mutual);
  CHECK(v.inapplicable);
  CHECK_FALSE(v.violation());
}

TEST_CASE("mutual concavity requires an output-only weight") {
  Rng rng(2);
  const SpacePtr x = counting_space(2), y = counting_space(3);
  const Density fa(ProductSpace(x), {0.3, 0.7}), fb(ProductSpace(x), {0.6, 0.4});
  std::vector<double> w;
  for (int r = 0; r < 2; ++r)
    for (double p : testsupport::simplex(rng, 3)) w.push_back(p);
  const StochasticKernel ch(x, y, w);
  const ProductSpace xy({x, y});
  CHECK_THROWS_AS(check_mutual_concave_in_input(fa, fb, ch, 0.5, testsupport::random_weight(rng, xy)),
                  std::invalid_argument);
  const WeightFunction out_only(xy, {1, 2, 3, 1, 2, 3});
  CHECK_FALSE(check_mutual_concave_in_input(fa, fb, ch, 0.5, out_only).violation());
}

TEST_CASE("pair and triple checkers never violate on random inputs") {
  Rng rng(2024);
  std::vector<Verdict> vs;
  for (int t = 0; t < 400; ++t) {
    const std::size_t n1 = 2 + rng() % 3, n2 = 2 + rng() % 3, n3 = 2 + rng() % 2;
    const ProductSpace s1(counting_space(n1));
    const Density f = testsupport::random_density(rng, s1), g = testsupport::random_density(rng, s1);
    const WeightFunction p1 = testsupport::random_weight(rng, s1);
    vs.push_back(check_gibbs(f, g, p1));
    vs.push_back(check_uniform_bound(f, p1, 1.0 / static_cast<double>(n1 + rng() % 3)));
    vs.push_back(check_concavity_we(f, g, 0.3, p1));
    vs.push_back(check_convexity_relative_we(f, g, g, testsupport::random_density(rng, s1), 0.6, p1));
    vs.push_back(check_fano(f, p1, {rng() % n1, FanoConvention::Proof}));
    const ProductSpace s2 = counting_product({n1, n2});
    const Density j2 = testsupport::random_density(rng, s2);
    const WeightFunction p2 = testsupport::random_weight(rng, s2);
    vs.push_back(check_conditional_nonneg(j2, p2, PairOrTriple::Pair));
    vs.push_back(check_subadditivity(j2, p2, PairOrTriple::Pair));
    const ProductSpace s3 = counting_product({n1, n2, n3});
    const Density j3 = testsupport::random_density(rng, s3);
    const WeightFunction p3 = testsupport::random_weight(rng, s3);
    vs.push_back(check_conditional_nonneg(j3, p3, PairOrTriple::Triple));
    vs.push_back(check_subadditivity(j3, p3, PairOrTriple::Triple));
    for (auto var : {ConditionalBound::JointGivenThird, ConditionalBound::JointGivenSecond,
                     ConditionalBound::ConditioningReduces})
      vs.push_back(check_conditional_bound(j3, p3, var));
    vs.push_back(check_conditional_subadditivity(j3, p3));
    vs.push_back(check_strong_subadditivity(j3, p3));
    const Density chain = random_chain(rng, n1, n2, n3);
    for (auto m : {MarkovMode::Conditional, MarkovMode::ConditionalDoubling, MarkovMode::Mutual})
      vs.push_back(check_dp_markov(chain, p3, m));
    const ProductSpace sq = counting_product({n1, n1});
    vs.push_back(check_generalized_fano(testsupport::random_density(rng, sq),
                                        testsupport::random_weight(rng, sq)));
  }
  require_sound(vs);
  CHECK(count_holding(vs) > vs.size() / 4);
}
