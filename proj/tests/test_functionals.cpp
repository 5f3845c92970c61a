#include <cmath>
#include <numbers>

#include "doctest.h"
#include "support.hpp"
#include "wentropy/functionals.hpp"

using namespace wentropy;
using testsupport::counting_product;

namespace {

// Two-point fixture: f = (1/4, 3/4), g = (1/2, 1/2), phi = (2, 1).
struct FixA {
  ProductSpace s{counting_space(2)};
  Density f{s, {0.25, 0.75}};
  Density g{s, {0.5, 0.5}};
  WeightFunction phi{s, {2.0, 1.0}};
  WeightFunction one = WeightFunction::constant(s);
};

}  // namespace

TEST_CASE("weighted entropy of the two-point fixture") {
  FixA a;
  const double oracle = -(2.0 * 0.25 * std::log(0.25) + 1.0 * 0.75 * std::log(0.75));
  CHECK(oracle == doctest::Approx(0.908909).epsilon(1e-6));
  CHECK(weighted_entropy(a.f, a.phi) == doctest::Approx(oracle).epsilon(1e-14));
}

TEST_CASE("zero density points contribute nothing") {
  const ProductSpace s(counting_space(2));
  CHECK(weighted_entropy(Density(s, {0.0, 1.0}), WeightFunction(s, {5.0, 1.0})) == 0.0);
}

TEST_CASE("weighted relative entropy can be negative and diverges when g vanishes") {
  FixA a;
  const double oracle = 2.0 * 0.25 * std::log(0.5) + 0.75 * std::log(1.5);
  CHECK(oracle == doctest::Approx(-0.042475).epsilon(1e-6));
  CHECK(weighted_relative_entropy(a.f, a.g, a.phi) == doctest::Approx(oracle).epsilon(1e-14));
  const double kl = 0.25 * std::log(0.5) + 0.75 * std::log(1.5);
  CHECK(kl == doctest::Approx(0.130812).epsilon(1e-6));
  CHECK(weighted_relative_entropy(a.f, a.g, a.one) == doctest::Approx(kl).epsilon(1e-14));
  const Density g0(a.s, {0.0, 1.0});
  CHECK(std::isinf(weighted_relative_entropy(a.f, g0, a.phi)));
  // phi = 0 where g vanishes removes the divergence
  CHECK(std::isfinite(weighted_relative_entropy(a.f, g0, WeightFunction(a.s, {0.0, 1.0}))));
}

TEST_CASE("calibrated divergence equals the divergence of the tilted densities") {
  FixA a;
  // f~ = (0.4, 0.6), g~ = (2/3, 1/3)
  const double oracle = 0.4 * std::log(0.4 / (2.0 / 3.0)) + 0.6 * std::log(0.6 / (1.0 / 3.0));
  CHECK(oracle == doctest::Approx(0.148342).epsilon(1e-6));
  const CalibratedResult r = calibrated_relative_we(a.f, a.g, a.phi);
  CHECK(r.value == doctest::Approx(oracle).epsilon(1e-13));
  CHECK(r.cross_check == doctest::Approx(oracle).epsilon(1e-13));
  CHECK(r.alpha_f == doctest::Approx(1.25));
  CHECK(r.alpha_g == doctest::Approx(1.5));
}

TEST_CASE("three-leg decomposition") {
  FixA a;
  const WeDecomposition d = we_decomposition_check(a.f, a.phi);
  CHECK(d.shannon_plus_kl == doctest::Approx(d.weighted_entropy).epsilon(1e-14));
  REQUIRE(d.neg_kl_to_phi);
  CHECK(*d.neg_kl_to_phi == doctest::Approx(d.weighted_entropy).epsilon(1e-14));
  const WeDecomposition z = we_decomposition_check(a.f, WeightFunction(a.s, {0.0, 1.0}));
  CHECK_FALSE(z.neg_kl_to_phi);
}

TEST_CASE("decomposition legs agree on random inputs") {
  testsupport::Rng rng(21);
  for (int t = 0; t < 200; ++t) {
    const ProductSpace s(counting_space(2 + t % 7));
    const Density f = testsupport::random_density(rng, s);
    const WeightFunction phi = testsupport::random_weight(rng, s);
    const WeDecomposition d = we_decomposition_check(f, phi);
    CHECK(std::abs(d.shannon_plus_kl - d.weighted_entropy) <= 1e-12);
    CHECK(std::abs(*d.neg_kl_to_phi - d.weighted_entropy) <= 1e-12);
  }
}

TEST_CASE("pair fixture joint, conditional and mutual values") {
  const ProductSpace s = counting_product({2, 2});
  const Density j(s, {0.4, 0.1, 0.1, 0.4});
  const WeightFunction one = WeightFunction::constant(s);
  const double hj = -2 * (0.4 * std::log(0.4) + 0.1 * std::log(0.1));
  const double hc = -(0.8 * std::log(0.8) + 0.2 * std::log(0.2));
  const double mi = std::log(2.0) - hc;
  CHECK(hj == doctest::Approx(1.193550).epsilon(1e-6));
  CHECK(hc == doctest::Approx(0.500403).epsilon(1e-6));
  CHECK(mi == doctest::Approx(0.192745).epsilon(1e-6));
  CHECK(joint_we(j, one) == doctest::Approx(hj).epsilon(1e-14));
  CHECK(conditional_we(j, one, {1}) == doctest::Approx(hc).epsilon(1e-14));
  CHECK(mutual_we(j, one) == doctest::Approx(mi).epsilon(1e-13));
}

TEST_CASE("conditional and mutual identities hold on random joints") {
  testsupport::Rng rng(5);
  for (int t = 0; t < 200; ++t) {
    const ProductSpace s = counting_product({2 + static_cast<std::size_t>(t % 3), 3});
    const Density j = testsupport::random_density(rng, s);
    const WeightFunction phi = testsupport::random_weight(rng, s);
    CHECK(conditional_we_report(j, phi, {1}).residual <= 1e-10);
    CHECK(conditional_we_report(j, phi, {0}).residual <= 1e-10);
    CHECK(mutual_we_report(j, phi, {0}, {1}).residual <= 1e-10);
  }
  for (int t = 0; t < 50; ++t) {
    const ProductSpace s = counting_product({2, 3, 2});
    const Density j = testsupport::random_density(rng, s);
    const WeightFunction phi = testsupport::random_weight(rng, s);
    CHECK(conditional_we_report(j, phi, {1, 2}).residual <= 1e-10);
    CHECK(mutual_we_report(j, phi, {0}, {2}).residual <= 1e-10);
    CHECK(mutual_we_report(j, phi, {0}, {1, 2}).residual <= 1e-10);
  }
}

TEST_CASE("weighted entropy is linear in the weight") {
  testsupport::Rng rng(9);
  const ProductSpace s(counting_space(5));
  for (int t = 0; t < 50; ++t) {
    const Density f = testsupport::random_density(rng, s);
    const WeightFunction a = testsupport::random_weight(rng, s);
    const WeightFunction b = testsupport::random_weight(rng, s);
    std::vector<double> c(s.size());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = 2.0 * a.values[i] + 0.5 * b.values[i];
    const double lhs = weighted_entropy(f, WeightFunction(s, c));
    const double rhs = 2.0 * weighted_entropy(f, a) + 0.5 * weighted_entropy(f, b);
    CHECK(std::abs(lhs - rhs) <= 1e-12);
  }
}

TEST_CASE("calibrated divergence is nonnegative") {
  testsupport::Rng rng(13);
  const ProductSpace s(counting_space(4));
  for (int t = 0; t < 200; ++t) {
    const auto r = calibrated_relative_we(testsupport::random_density(rng, s),
                                          testsupport::random_density(rng, s),
                                          testsupport::random_weight(rng, s));
    CHECK(r.value >= -1e-12);
    CHECK(std::abs(r.value - r.cross_check) <= 1e-10);
  }
}

TEST_CASE("reduced weight is a conditional expectation") {
  const ProductSpace s = counting_product({2, 2});
  const Density j(s, {0.4, 0.1, 0.0, 0.0});
  const WeightFunction phi(s, {1.0, 3.0, 5.0, 7.0});
  const ReducedWeight r = reduce_weight(phi, j, {0});
  CHECK(r.psi.values[0] == doctest::Approx((0.4 * 1.0 + 0.1 * 3.0) / 0.5));
  CHECK(r.psi.values[1] == 0.0);
  REQUIRE(r.zero_marginal.size() == 1);
  CHECK(r.zero_marginal[0] == 1);
}

TEST_CASE("Gaussian weighted entropy on the default grid") {
  const Matrix c(1, 1, {1.0});
  const ProductSpace s = make_gaussian_grid(c);
  const Density f = gaussian_density(s, c);
  const double oracle = 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e);
  CHECK(oracle == doctest::Approx(1.418939).epsilon(1e-6));
  CHECK(weighted_entropy(f, WeightFunction::constant(s)) == doctest::Approx(oracle).epsilon(1e-9));
}
