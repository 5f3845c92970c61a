#include <cmath>
#include <numbers>

#include <omp.h>

#include "doctest.h"
#include "support.hpp"
#include "wentropy/kernels.hpp"
#include "wentropy/measure.hpp"

using namespace wentropy;

TEST_CASE("trapezoid grid integrates a standard normal to one") {
  const ProductSpace s = make_gaussian_grid(Matrix(1, 1, {1.0}));
  const Density f = gaussian_density(s, Matrix(1, 1, {1.0}));
  CHECK(f.mass() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.size() == 4097);
  const Matrix c(2, 2, {2.0, 0.6, 0.6, 1.0});
  const ProductSpace s2 = make_gaussian_grid(c);
  CHECK(gaussian_density(s2, c).mass() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("grid construction preconditions") {
  const Matrix c(1, 1, {1.0});
  CHECK_THROWS_AS(make_gaussian_grid(c, 8.0, 100), std::invalid_argument);
  CHECK_THROWS_AS(make_gaussian_grid(c, 8.0, 31), std::invalid_argument);
  CHECK_THROWS_AS(make_gaussian_grid(c, 5.0), std::invalid_argument);
  CHECK_THROWS_AS(make_gaussian_grid(Matrix::identity(4)), std::invalid_argument);
  CHECK_THROWS_AS(make_gaussian_grid(Matrix(2, 2, {1, 2, 2, 1})), std::invalid_argument);
}

TEST_CASE("marginalize and condition a 2x2 joint") {
  const ProductSpace s = testsupport::counting_product({2, 2});
  const Density j(s, {0.4, 0.1, 0.1, 0.4});
  const Density m0 = marginalize(j, {0});
  CHECK(m0.values[0] == doctest::Approx(0.5));
  CHECK(m0.values[1] == doctest::Approx(0.5));
  const Conditional c = condition(j, {1});
  CHECK(c.values[0] == doctest::Approx(0.8));
  CHECK(c.values[2] == doctest::Approx(0.2));
  CHECK(c.zero_marginal.empty());
  CHECK_THROWS_AS(marginalize(j, {1, 0}), std::invalid_argument);
}

TEST_CASE("conditioning on a zero marginal flags the point") {
  const ProductSpace s = testsupport::counting_product({2, 2});
  const Density j(s, {0.5, 0.0, 0.5, 0.0});
  const Conditional c = condition(j, {1});
  REQUIRE(c.zero_marginal.size() == 1);
  CHECK(c.zero_marginal[0] == 1);
  CHECK(c.values[1] == 0.0);
  CHECK(c.values[3] == 0.0);
}

TEST_CASE("marginals respect non-unit reference masses") {
  const SpacePtr a = discrete_space({0, 1}, {0.5, 2.0});
  const SpacePtr b = discrete_space({0, 1, 2}, {1.0, 0.25, 4.0});
  const ProductSpace s({a, b});
  testsupport::Rng rng(3);
  std::vector<double> v = testsupport::log_uniform(rng, s.size());
  const Density j(s, v);
  const Density m = marginalize(j, {0});
  for (std::size_t x = 0; x < 2; ++x) {
    double oracle = 0.0;
    for (std::size_t y = 0; y < 3; ++y) oracle += v[x * 3 + y] * b->nu()[y];
    CHECK(m.values[x] == doctest::Approx(oracle).epsilon(1e-14));
  }
  CHECK(m.mass() == doctest::Approx(j.mass()).epsilon(1e-14));
}

TEST_CASE("kernel application and row validation") {
  const SpacePtr u = counting_space(2);
  const StochasticKernel k(u, u, {0.5, 0.5, 0.5, 0.5});
  const Density f(ProductSpace(u), {0.25, 0.75});
  const Density g = apply_kernel(f, k);
  CHECK(g.values[0] == doctest::Approx(0.5));
  CHECK_THROWS_AS(StochasticKernel(u, u, {0.5, 0.4, 0.5, 0.5}), std::invalid_argument);
}

TEST_CASE("field validation rejects negative and non-finite values") {
  const ProductSpace s(counting_space(2));
  CHECK_THROWS_AS(Density(s, {0.5, -0.1}), std::invalid_argument);
  CHECK_THROWS_AS(Density(s, {0.5, NAN}), std::invalid_argument);
  CHECK_THROWS_AS(Density(s, {0.5}), std::invalid_argument);
}

TEST_CASE("blocked parallel reduction matches the serial reference") {
  const std::size_t n = 300000;
  auto term = [](std::size_t i) { return std::sin(0.001 * static_cast<double>(i)) + 1e-3; };
  const double ser = kernels::serial::reduce_sum(n, term);
  omp_set_num_threads(1);
  const double one = kernels::reduce_sum(n, term);
  omp_set_num_threads(4);
  const double four = kernels::reduce_sum(n, term);
  omp_set_num_threads(omp_get_num_procs());
  CHECK(one == four);
  CHECK(one == doctest::Approx(ser).epsilon(1e-12));
  auto vterm = [](std::size_t i, double* out) {
    out[0] += static_cast<double>(i % 7);
    out[1] += 1.0;
  };
  const auto pv = kernels::reduce_sum_vec(n, 2, vterm);
  const auto sv = kernels::serial::reduce_sum_vec(n, 2, vterm);
  CHECK(pv == sv);
}
