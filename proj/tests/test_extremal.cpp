#include <cmath>
#include <numbers>

#include "doctest.h"
#include "support.hpp"
#include "wentropy/extremal.hpp"
#include "wentropy/functionals.hpp"
#include "wentropy/inequalities.hpp"

using namespace wentropy;
using testsupport::counting_product;
using testsupport::Rng;

namespace {

const double kTwoPi = 2.0 * std::numbers::pi;
const PointWeight kOne = [](std::span<const double>) { return 1.0; };

double det(const Matrix& c) {
  if (c.rows() == 1) return c(0, 0);
  if (c.rows() == 2) return c(0, 0) * c(1, 1) - c(0, 1) * c(1, 0);
  return c(0, 0) * (c(1, 1) * c(2, 2) - c(1, 2) * c(2, 1)) -
         c(0, 1) * (c(1, 0) * c(2, 2) - c(1, 2) * c(2, 0)) +
         c(0, 2) * (c(1, 0) * c(2, 1) - c(1, 1) * c(2, 0));
}

Matrix rotation2(double t) { return Matrix(2, 2, {std::cos(t), -std::sin(t), std::sin(t), std::cos(t)}); }

// Q diag(e) Q^T with eigenvalues drawn from [0.2, 5].
Matrix random_spd2(Rng& rng) {
  std::uniform_real_distribution<double> ev(0.2, 5.0), ang(0.0, kTwoPi);
  const Matrix q = rotation2(ang(rng));
  const std::vector<double> e{ev(rng), ev(rng)};
  return symmetrize(q * Matrix::diagonal(e) * q.transpose(), 1e-9);
}

double plain_entropy(std::span<const double> p) {
  double h = 0.0;
  for (double x : p)
    if (x > 0.0) h -= x * std::log(x);
  return h;
}

}  // namespace

TEST_CASE("gaussian_we closed form and quadrature") {
  const auto r = gaussian_we(Matrix::identity(1), kOne);
  CHECK(r.value == doctest::Approx(0.5 * std::log(kTwoPi * std::numbers::e)).epsilon(1e-9));
  CHECK(r.value == doctest::Approx(1.418939).epsilon(1e-6));
  CHECK(r.residual < 1e-6);
  CHECK(r.alpha == doctest::Approx(1.0).epsilon(1e-9));

  const auto half = gaussian_we(Matrix::identity(1), step_weight(0.0));
  CHECK(half.alpha == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(half.phi_moment(0, 0) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(half.value == doctest::Approx(0.25 * std::log(kTwoPi) + 0.25).epsilon(1e-9));
  CHECK(half.value == doctest::Approx(0.709470).epsilon(1e-6));
  CHECK(half.residual < 1e-6);

  const auto two = gaussian_we(Matrix::identity(2), kOne);
  CHECK(two.value == doctest::Approx(2.837877).epsilon(1e-6));
  CHECK(two.residual < 1e-6);
  CHECK((two.phi_moment - Matrix::identity(2)).max_abs() < 1e-6);
}

TEST_CASE("gaussian_we matches quadrature for bump weights") {
  Rng rng(31);
  std::uniform_real_distribution<double> u(0.1, 2.0), m(-1.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    const Matrix c = random_spd2(rng);
    const double a = u(rng), b = u(rng), x0 = m(rng), y0 = m(rng), s = u(rng);
    const PointWeight phi = [=](std::span<const double> x) {
      const double dx = x[0] - x0, dy = x[1] - y0;
      return s * std::exp(-(a * dx * dx + b * dy * dy) / 2.0) + 0.1;
    };
    const auto r = gaussian_we(c, phi);
    CHECK(r.residual < 1e-6);
    CHECK(std::abs(r.phi_moment(0, 1) - r.phi_moment(1, 0)) < 1e-12);
  }
}

TEST_CASE("gaussian maximizer") {
  const Matrix c = Matrix::identity(1);
  const ProductSpace grid = make_gaussian_grid(c);
  const auto one = WeightFunction::constant(grid);

  SUBCASE("equality at the Gaussian") {
    const auto v = check_gaussian_max(gaussian_density(grid, c), c, one);
    CHECK(v.hypothesis_holds);
    CHECK(v.equality_detected);
  }
  SUBCASE("narrower Gaussian") {
    const Density f = gaussian_density(grid, Matrix::identity(1) * 0.5);
    const auto v = check_gaussian_max(f, c, one);
    CHECK(v.hypothesis_holds);
    CHECK(v.diagnostic("moment_condition") == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(v.conclusion_margin == doctest::Approx(0.5 * std::log(2.0)).epsilon(1e-8));
    CHECK(v.conclusion_holds);
  }
  SUBCASE("truncated Laplace fails the mass condition") {
    const double b = 1.0 / std::sqrt(2.0);
    std::vector<double> lap(grid.size());
    for (std::size_t i = 0; i < lap.size(); ++i)
      lap[i] = std::exp(-std::abs(grid.point(i)[0]) / b) / (2.0 * b);
    const auto v = check_gaussian_max(Density(grid, lap), c, one);
    // Tail mass exp(-8 sqrt 2) is lost outside +-8.
    CHECK(v.diagnostic("mass_condition") == doctest::Approx(-std::exp(-8.0 * std::sqrt(2.0))).epsilon(1e-2));
    CHECK_FALSE(v.hypothesis_holds);
    const double oracle = 0.5 * std::log(kTwoPi * std::numbers::e) - 1.0 - std::log(2.0 * b);
    CHECK(v.conclusion_margin == doctest::Approx(oracle).epsilon(1e-3));
  }
}

TEST_CASE("hadamard examples") {
  const auto v5 = check_hadamard(Matrix(2, 2, {1.0, 0.5, 0.5, 1.0}), kOne);
  CHECK(v5.conclusion_margin == doctest::Approx(std::log(1.0 / 0.75)).epsilon(1e-9));
  CHECK(v5.conclusion_margin == doctest::Approx(0.287682).epsilon(1e-6));
  CHECK(v5.diagnostic("subadditivity_gap") == doctest::Approx(v5.conclusion_margin / 2).epsilon(1e-6));
  CHECK(v5.hypothesis_holds);
  CHECK_FALSE(v5.equality_detected);

  const auto v9 = check_hadamard(Matrix(2, 2, {1.0, 0.9, 0.9, 1.0}), kOne);
  CHECK(v9.conclusion_margin == doctest::Approx(1.660731).epsilon(1e-6));

  const auto vd = check_hadamard(Matrix::diagonal(std::vector<double>{0.5, 2.0, 1.5}), kOne);
  CHECK(std::abs(vd.conclusion_margin) < 1e-6);
  CHECK(vd.equality_detected);
}

TEST_CASE("ky fan examples") {
  const Matrix c1 = Matrix::identity(1), c3 = Matrix::identity(1) * 3.0;
  const auto v = check_ky_fan(c1, c3, 0.5, kOne);
  CHECK(v.conclusion_margin == doctest::Approx(0.5 * (std::log(2.0) - 0.5 * std::log(3.0))).epsilon(1e-9));
  CHECK(v.conclusion_margin == doctest::Approx(0.071920).epsilon(1e-6));
  CHECK(v.hypothesis_holds);
  CHECK(std::abs(v.diagnostic("mass_condition")) < 1e-9);
  CHECK(std::abs(v.diagnostic("moment_condition")) < 1e-9);

  CHECK(check_ky_fan(c3, c3, 0.3, kOne).equality_detected);
  CHECK(check_ky_fan(c1, c3, 0.0, kOne).equality_detected);
  CHECK_THROWS_AS(check_ky_fan(c1, c3, 1.5, kOne), std::invalid_argument);
}

TEST_CASE("unit weight collapse over random covariances") {
  Rng rng(7);
  std::uniform_real_distribution<double> lam(0.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    const Matrix c1 = random_spd2(rng), c2 = random_spd2(rng);
    const double l = lam(rng);
    const Matrix c = l * c1 + (1.0 - l) * c2;
    const auto kf = check_ky_fan(c1, c2, l, kOne);
    const double expect =
        0.5 * (std::log(det(c)) - l * std::log(det(c1)) - (1.0 - l) * std::log(det(c2)));
    CHECK(kf.conclusion_margin == doctest::Approx(expect).epsilon(1e-6));
    CHECK(kf.hypothesis_holds);
    CHECK(kf.conclusion_holds);

    const auto hd = check_hadamard(c1, kOne);
    CHECK(hd.conclusion_margin == doctest::Approx(std::log(c1(0, 0) * c1(1, 1) / det(c1))).epsilon(1e-6));
    CHECK(hd.conclusion_holds);
  }
}

TEST_CASE("margins under orthogonal conjugation") {
  Rng rng(8);
  const Matrix c1 = random_spd2(rng), c2 = random_spd2(rng);
  const Matrix q = rotation2(0.7);
  const auto a = check_ky_fan(c1, c2, 0.4, kOne);
  const auto b = check_ky_fan(q * c1 * q.transpose(), q * c2 * q.transpose(), 0.4, kOne);
  CHECK(a.conclusion_margin == doctest::Approx(b.conclusion_margin).epsilon(1e-6));

  // Hadamard depends on the diagonal, so only signed permutations preserve it.
  const Matrix p(2, 2, {0.0, 1.0, -1.0, 0.0});
  const auto h1 = check_hadamard(c1, kOne);
  const auto h2 = check_hadamard(p * c1 * p.transpose(), kOne);
  CHECK(h1.conclusion_margin == doctest::Approx(h2.conclusion_margin).epsilon(1e-6));
}

TEST_CASE("maximizer under two linear constraints") {
  const ProductSpace s = counting_space(3);
  const auto one = WeightFunction::constant(s);
  const Density u(s, {1.0 / 3, 1.0 / 3, 1.0 / 3});
  const Density f(s, {0.5, 0.3, 0.2});
  const auto v = check_max_we_direct(f, u, one);
  CHECK(v.hypothesis_holds);
  const double expect = std::log(3.0) - plain_entropy(f.values);
  CHECK(v.conclusion_margin == doctest::Approx(expect).epsilon(1e-12));
  CHECK(v.conclusion_margin == doctest::Approx(0.068959).epsilon(1e-6));
  CHECK(check_max_we_direct(u, u, one).equality_detected);

  // f* vanishing where f does not makes the log condition fail.
  const Density z(s, {0.5, 0.5, 0.0});
  const auto w = check_max_we_direct(f, z, one);
  CHECK(w.hypothesis_margin == -std::numeric_limits<double>::infinity());
  CHECK_FALSE(w.hypothesis_holds);
}

TEST_CASE("gibbsian maximizer") {
  const ProductSpace s = ProductSpace(discrete_space({0.0, 1.0, 2.0}));
  const auto one = WeightFunction::constant(s);
  GibbsianSpec g;
  g.beta = {0.0, 1.0, 2.0};
  g.b = 0.5;
  g.z = 1.0 + std::exp(-0.5) + std::exp(-1.0);
  g.c = (std::exp(-0.5) + 2.0 * std::exp(-1.0)) / g.z;
  const Density fs = gibbsian_density(s, g);

  const auto eq = check_max_we_gibbsian(fs, g, one);
  CHECK(eq.equality_detected);
  CHECK(weighted_entropy(fs, one) == doctest::Approx(std::log(g.z) + g.b * g.c).epsilon(1e-12));

  SUBCASE("rejection-sampled densities") {
    Rng rng(5);
    int accepted = 0;
    for (int t = 0; t < 20000 && accepted < 200; ++t) {
      // One free coordinate on the line sum f = 1, sum f x = c.
      std::uniform_real_distribution<double> u(0.0, 1.0);
      const double f2 = u(rng) * g.c / 2.0;
      const double f1 = g.c - 2.0 * f2;
      const double f0 = 1.0 - f1 - f2;
      if (f0 < 0.0 || f1 < 0.0) continue;
      const auto v = check_max_we_gibbsian(Density(s, {f0, f1, f2}), g, one);
      if (!v.hypothesis_holds) continue;
      ++accepted;
      CHECK(v.conclusion_holds);
    }
    CHECK(accepted == 200);
  }

  SUBCASE("sub-normalized f needs the mass condition") {
    // Meets the moment and partition conditions but carries mass 0.86.
    const Density f(s, {0.37, 0.3, (g.c - 0.3) / 2.0});
    const auto v = check_max_we_gibbsian(f, g, one);
    CHECK(v.diagnostic("moment_condition") > -1e-12);
    CHECK(v.diagnostic("partition_condition") > 0.0);
    CHECK(v.diagnostic("mass_condition") < 0.0);
    CHECK(v.conclusion_margin < -0.02);
    CHECK_FALSE(v.hypothesis_holds);
    CHECK_FALSE(v.violation());
  }

  SUBCASE("inconsistent spec") {
    GibbsianSpec bad = g;
    bad.z *= 1.01;
    CHECK_THROWS_AS(check_max_we_gibbsian(fs, bad, one), std::invalid_argument);
    const auto v = check_max_we_gibbsian(fs, g, WeightFunction::constant(s, 2.0));
    CHECK(v.inapplicable);
  }
}

TEST_CASE("named maximizers") {
  SUBCASE("family density is its own maximizer") {
    for (const NamedMaximizer m : {NamedMaximizer{NamedFamily::Exponential, 1.5},
                                   NamedMaximizer{NamedFamily::Geometric, 0.3},
                                   NamedMaximizer{NamedFamily::Poisson, 2.5}}) {
      const ProductSpace s = named_family_space(m);
      const auto v = check_named_maximizer(named_family_density(m, s), m, WeightFunction::constant(s));
      CHECK(v.equality_detected);
    }
  }
  SUBCASE("truncation") {
    const NamedMaximizer geo{NamedFamily::Geometric, 0.5};
    const ProductSpace s = named_family_space(geo);
    CHECK(std::pow(0.5, static_cast<double>(s.size())) < 1e-12);
    CHECK(std::pow(0.5, static_cast<double>(s.size() - 1)) >= 1e-12);
    const NamedMaximizer po{NamedFamily::Poisson, 1.0};
    const auto v = check_named_maximizer(named_family_density(po, named_family_space(po)), po,
                                         WeightFunction::constant(named_family_space(po)));
    CHECK(v.diagnostic("truncation_tail") < 1e-12);
  }
  SUBCASE("geometric against a short-tailed density") {
    const NamedMaximizer geo{NamedFamily::Geometric, 0.5};
    const ProductSpace s = named_family_space(geo);
    std::vector<double> f(s.size(), 0.0);
    const double head[] = {0.6, 0.2, 0.1, 0.05, 0.05};
    std::copy(std::begin(head), std::end(head), f.begin());
    const auto v = check_named_maximizer(Density(s, f), geo, WeightFunction::constant(s));
    CHECK(v.hypothesis_holds);
    CHECK(v.diagnostic("moment_condition") == doctest::Approx(0.25 * std::log(2.0)).epsilon(1e-9));
    CHECK(v.conclusion_margin == doctest::Approx(2.0 * std::log(2.0) - plain_entropy(f)).epsilon(1e-9));
    CHECK(v.conclusion_holds);
  }
  SUBCASE("poisson with weight 1 + k under mass shifts") {
    const NamedMaximizer po{NamedFamily::Poisson, 1.0};
    const ProductSpace s = named_family_space(po);
    std::vector<double> w(s.size());
    for (std::size_t k = 0; k < w.size(); ++k) w[k] = 1.0 + static_cast<double>(k);
    const WeightFunction phi(s, w);
    const Density g = named_family_density(po, s);
    Rng rng(11);
    std::uniform_int_distribution<std::size_t> idx(0, 6);
    std::uniform_real_distribution<double> eps(0.0, 0.2);
    int held = 0;
    for (int t = 0; t < 2000; ++t) {
      auto f = g.values;
      const std::size_t a = idx(rng), b = idx(rng);
      const double e = std::min(eps(rng), f[a]);
      f[a] -= e;
      f[b] += e;
      const auto v = check_named_maximizer(Density(s, f), po, phi);
      held += v.hypothesis_holds;
      CHECK_FALSE(v.violation());
    }
    CHECK(held > 0);
  }
  SUBCASE("exponential against other rates") {
    const NamedMaximizer ex{NamedFamily::Exponential, 1.0};
    const ProductSpace s = named_family_space(ex);
    const auto one = WeightFunction::constant(s);
    for (double rate : {0.8, 1.0, 1.3, 2.0, 4.0}) {
      const auto v = check_named_maximizer(named_family_density({NamedFamily::Exponential, rate}, s), ex, one);
      CHECK_FALSE(v.violation());
      if (rate > 1.0) {
        CHECK(v.hypothesis_holds);
        CHECK(v.conclusion_margin == doctest::Approx(std::log(rate)).epsilon(1e-4));
      }
    }
  }
  SUBCASE("parameter range") {
    CHECK_THROWS_AS(named_family_space({NamedFamily::Geometric, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(named_family_space({NamedFamily::Poisson, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(parse_named_family("gamma"), std::invalid_argument);
  }
}

TEST_CASE("multi-subadditivity") {
  Rng rng(13);
  SUBCASE("independent product") {
    const auto a = testsupport::simplex(rng, 2), b = testsupport::simplex(rng, 3),
               c = testsupport::simplex(rng, 2);
    std::vector<double> v;
    for (double x : a)
      for (double y : b)
        for (double z : c) v.push_back(x * y * z);
    const ProductSpace s = counting_product({2, 3, 2});
    const auto r = check_multi_subadditivity(Density(s, v), testsupport::random_weight(rng, s));
    CHECK(r.equality_detected);
  }
  SUBCASE("two axes agree with the pair checker") {
    const ProductSpace s = counting_product({3, 4});
    for (int t = 0; t < 50; ++t) {
      const auto j = testsupport::random_density(rng, s);
      const auto phi = testsupport::random_weight(rng, s);
      const auto m = check_multi_subadditivity(j, phi);
      const auto p = check_subadditivity(j, phi, PairOrTriple::Pair);
      CHECK(m.conclusion_margin == doctest::Approx(p.conclusion_margin).epsilon(1e-12));
      CHECK(m.hypothesis_margin == doctest::Approx(p.hypothesis_margin).epsilon(1e-12));
    }
  }
  SUBCASE("unit weight reduces to classical subadditivity") {
    const ProductSpace s = counting_product({2, 2, 2});
    const auto one = WeightFunction::constant(s);
    for (int t = 0; t < 200; ++t) {
      const auto j = testsupport::random_density(rng, s);
      const auto v = check_multi_subadditivity(j, one);
      CHECK(v.hypothesis_holds);
      CHECK(v.conclusion_margin >= -1e-12);
      CHECK(v.diagnostic("divergence_form") == doctest::Approx(v.conclusion_margin).epsilon(1e-9));
    }
  }
  SUBCASE("hypothesis implies conclusion for random weights") {
    const ProductSpace s = counting_product({2, 3, 2});
    for (int t = 0; t < 400; ++t) {
      const auto v = check_multi_subadditivity(testsupport::random_density(rng, s),
                                               testsupport::random_weight(rng, s));
      CHECK_FALSE(v.violation());
    }
  }
}
