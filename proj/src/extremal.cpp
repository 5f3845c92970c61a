#include "wentropy/extremal.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "wentropy/functionals.hpp"
#include "wentropy/inequalities.hpp"
#include "wentropy/kernels.hpp"

namespace wentropy {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// integral of w(x) x^T x over the space, for point dimension <= 3.
Matrix second_moment(const ProductSpace& s, std::span<const double> w) {
  const std::size_t d = s.point_dim();
  if (d > 3) throw std::invalid_argument("second_moment: dimension above 3");
  const auto& nu = s.nu();
  const auto v = kernels::reduce_sum_vec(s.size(), d * d, [&](std::size_t i, double* out) {
    std::array<double, 3> x{};
    s.point(i, std::span<double>(x.data(), d));
    const double c = w[i] * nu[i];
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b) out[a * d + b] += c * x[a] * x[b];
  });
  return Matrix(d, d, v);
}

std::vector<double> times(const WeightFunction& phi, std::span<const double> f) {
  std::vector<double> out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = phi.values[i] * f[i];
  return out;
}

std::vector<double> difference(std::span<const double> a, std::span<const double> b) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

double log_norm_const(const Matrix& cov) {
  auto ch = spd_factor(symmetrize(cov));
  if (!ch) throw std::invalid_argument("covariance is not positive definite");
  return static_cast<double>(cov.rows()) * std::log(2.0 * std::numbers::pi) + ch->logdet;
}

double trace_of_product(const Matrix& a, const Matrix& b) {
  double t = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) t += a(i, k) * b(k, i);
  return t;
}

double max_weighted_gap(const WeightFunction& phi, std::span<const double> a,
                        std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(phi.values[i] * (a[i] - b[i])));
  return m;
}

Verdict start(const char* id, const ProductSpace& s) {
  Verdict v;
  v.theorem_id = id;
  v.tol = tolerances_for(s);
  return v;
}

}  // namespace

GaussianWe gaussian_we(const Matrix& cov, const ProductSpace& grid, const WeightFunction& phi) {
  if (!same_space(grid, phi.space)) throw std::invalid_argument("gaussian_we: weight not on grid");
  const Density f = gaussian_density(grid, cov);
  GaussianWe r;
  r.alpha = weighted_mass(f, phi);
  r.phi_moment = second_moment(grid, times(phi, f.values));
  const Matrix inv = spd_inverse(cov);
  r.value = 0.5 * log_norm_const(cov) * r.alpha + 0.5 * trace_of_product(inv, r.phi_moment);
  r.direct = weighted_entropy(f, phi);
  r.residual = std::abs(r.value - r.direct);
  return r;
}

GaussianWe gaussian_we(const Matrix& cov, const PointWeight& phi) {
  const ProductSpace grid = make_gaussian_grid(cov);
  return gaussian_we(cov, grid, tabulate_weight(grid, phi));
}

Verdict check_gaussian_max(const Density& f, const Matrix& cov, const WeightFunction& phi) {
  require_same(f, phi, "check_gaussian_max");
  const Density fn = gaussian_density(f.space, cov);
  Verdict v = start("gaussian_max", f.space);
  const auto diff = difference(f.values, fn.values);
  const double mass_gap = integrate(times(phi, diff), f.space);
  const Matrix dphi = second_moment(f.space, times(phi, diff));
  const double second = -(log_norm_const(cov) * mass_gap + trace_of_product(spd_inverse(cov), dphi));
  v.note("mass_condition", mass_gap);
  v.note("moment_condition", second);
  v.hypothesis_margin = std::min(mass_gap, second);
  v.conclusion_margin = weighted_entropy(fn, phi) - weighted_entropy(f, phi);
  finalize(v, max_weighted_gap(phi, f.values, fn.values) <= v.tol.pt);
  return v;
}

Verdict check_hadamard(const Matrix& cov, const PointWeight& phi_fn) {
  const std::size_t d = cov.rows();
  const ProductSpace grid = make_gaussian_grid(cov);
  const WeightFunction phi = tabulate_weight(grid, phi_fn);
  const Density f = gaussian_density(grid, cov);
  const auto q = product_of_marginals(f);
  Verdict v = start("hadamard", grid);
  v.hypothesis_margin = integrate(times(phi, difference(f.values, q)), grid);
  const double alpha = weighted_mass(f, phi);
  const Matrix m = second_moment(grid, times(phi, f.values));
  double log_diag = 0.0, diag_terms = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    log_diag += std::log(2.0 * std::numbers::pi * cov(i, i));
    diag_terms += m(i, i) / cov(i, i);
  }
  v.conclusion_margin = alpha * log_diag + diag_terms - alpha * log_norm_const(cov) -
                        trace_of_product(spd_inverse(cov), m);
  double sub = -weighted_entropy(f, phi);
  for (std::size_t i = 0; i < d; ++i) {
    const ReducedWeight r = reduce_weight(phi, f, {i});
    sub += weighted_entropy(marginalize(f, {i}), r.psi);
  }
  v.note("subadditivity_gap", sub);
  finalize(v, max_weighted_gap(phi, f.values, q) <= v.tol.pt);
  return v;
}

Verdict check_ky_fan(const Matrix& c1, const Matrix& c2, double lambda1, const PointWeight& phi_fn) {
  if (!(lambda1 >= 0.0 && lambda1 <= 1.0))
    throw std::invalid_argument("check_ky_fan: lambda must lie in [0, 1]");
  const double lambda2 = 1.0 - lambda1;
  const Matrix c = lambda1 * c1 + lambda2 * c2;
  const std::size_t d = c.rows();
  std::vector<double> widest(d);
  for (std::size_t i = 0; i < d; ++i) widest[i] = std::max({c(i, i), c1(i, i), c2(i, i)});
  const ProductSpace grid = make_gaussian_grid(Matrix::diagonal(widest));
  const WeightFunction phi = tabulate_weight(grid, phi_fn);
  const Density f1 = gaussian_density(grid, c1), f2 = gaussian_density(grid, c2);
  const Density fc = gaussian_density(grid, c);
  std::vector<double> gap(grid.size());
  for (std::size_t i = 0; i < gap.size(); ++i)
    gap[i] = lambda1 * f1.values[i] + lambda2 * f2.values[i] - fc.values[i];
  Verdict v = start("ky_fan", grid);
  const double mass_gap = integrate(times(phi, gap), grid);
  const Matrix psi = second_moment(grid, times(phi, gap));
  const Matrix inv = spd_inverse(c);
  const double moment = -(log_norm_const(c) * mass_gap + trace_of_product(inv, psi));
  v.note("mass_condition", mass_gap);
  v.note("moment_condition", moment);
  v.note("moment_condition_half_trace", -(log_norm_const(c) * mass_gap + 0.5 * trace_of_product(inv, psi)));
  v.hypothesis_margin = std::min(mass_gap, moment);
  const double s = gaussian_we(c, grid, phi).value;
  const double s1 = gaussian_we(c1, grid, phi).value;
  const double s2 = gaussian_we(c2, grid, phi).value;
  v.conclusion_margin = s - lambda1 * s1 - lambda2 * s2;
  const bool eq = lambda1 * lambda2 == 0.0 || (c1 - c2).max_abs() <= 1e-12;
  finalize(v, eq);
  return v;
}

Verdict check_max_we_direct(const Density& f, const Density& f_star, const WeightFunction& phi) {
  require_same(f, f_star, "check_max_we_direct");
  require_same(f, phi, "check_max_we_direct");
  Verdict v = start("max_we_direct", f.space);
  const auto& nu = f.space.nu();
  const double c1 = integrate(times(phi, difference(f.values, f_star.values)), f.space);
  double c2 = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double w = phi.values[i] * (f.values[i] - f_star.values[i]) * nu[i];
    if (w == 0.0) continue;
    if (f_star.values[i] == 0.0) {
      c2 = -kInf;
      break;
    }
    c2 += w * std::log(f_star.values[i]);
  }
  v.note("mass_condition", c1);
  v.note("log_condition", c2);
  v.hypothesis_margin = std::min(c1, c2);
  v.conclusion_margin = weighted_entropy(f_star, phi) - weighted_entropy(f, phi);
  finalize(v, max_weighted_gap(phi, f.values, f_star.values) <= v.tol.pt);
  return v;
}

Density gibbsian_density(const ProductSpace& space, const GibbsianSpec& spec) {
  if (spec.beta.size() != space.size())
    throw std::invalid_argument("gibbsian_density: beta has the wrong size");
  if (!(spec.z > 0.0) || !std::isfinite(spec.z))
    throw std::invalid_argument("gibbsian_density: Z must be positive and finite");
  std::vector<double> unnorm(space.size());
  for (std::size_t i = 0; i < unnorm.size(); ++i) unnorm[i] = std::exp(-spec.b * spec.beta[i]);
  const double z = integrate(unnorm, space);
  if (std::abs(z - spec.z) > 1e-10 * std::max(1.0, z))
    throw std::invalid_argument("gibbsian_density: Z does not match the partition sum");
  for (double& u : unnorm) u /= spec.z;
  return Density(space, std::move(unnorm));
}

Verdict check_max_we_gibbsian(const Density& f, const GibbsianSpec& spec,
                              const WeightFunction& phi) {
  require_same(f, phi, "check_max_we_gibbsian");
  const Density fs = gibbsian_density(f.space, spec);
  Verdict v = start("max_we_gibbsian", f.space);
  const double star_mass = weighted_mass(fs, phi);
  std::vector<double> sb(f.size());
  for (std::size_t i = 0; i < sb.size(); ++i) sb[i] = phi.values[i] * fs.values[i] * spec.beta[i];
  const double star_beta = integrate(sb, f.space);
  v.note("maximizer_weighted_mass", star_mass);
  v.note("maximizer_beta_moment", star_beta);
  if (std::abs(star_mass - 1.0) > v.tol.hyp || std::abs(star_beta - spec.c) > v.tol.hyp) {
    Verdict u = make_inapplicable(v.theorem_id,
                                  "maximizer does not satisfy the weighted normalization", v.tol);
    u.diagnostics = v.diagnostics;
    return u;
  }
  std::vector<double> fb(f.size());
  for (std::size_t i = 0; i < fb.size(); ++i) fb[i] = phi.values[i] * f.values[i] * spec.beta[i];
  const double moment = -std::abs(integrate(fb, f.space) - spec.c);
  const double gap = integrate(times(phi, difference(f.values, fs.values)), f.space);
  const double partition = -std::log(spec.z) * gap;
  v.note("moment_condition", moment);
  v.note("partition_condition", partition);
  v.note("mass_condition", gap);
  v.assumption_tags.push_back("gibbs_mass_condition_added");
  v.hypothesis_margin = std::min({moment, partition, gap});
  v.conclusion_margin = weighted_entropy(fs, phi) - weighted_entropy(f, phi);
  finalize(v, max_weighted_gap(phi, f.values, fs.values) <= v.tol.pt);
  return v;
}

NamedFamily parse_named_family(const std::string& name) {
  if (name == "exponential") return NamedFamily::Exponential;
  if (name == "geometric") return NamedFamily::Geometric;
  if (name == "poisson") return NamedFamily::Poisson;
  throw std::invalid_argument("unknown named family: " + name);
}

ProductSpace named_family_space(const NamedMaximizer& m) {
  const double t = m.param;
  switch (m.family) {
    case NamedFamily::Exponential:
      if (!(t > 0.0)) throw std::invalid_argument("exponential rate must be positive");
      return ProductSpace(grid_space(0.0, 28.0 / t, 4097));
    case NamedFamily::Geometric: {
      if (!(t > 0.0 && t < 1.0)) throw std::invalid_argument("geometric p must lie in (0, 1)");
      std::size_t n = 0;
      while (std::pow(1.0 - t, static_cast<double>(n + 1)) >= 1e-12) ++n;
      std::vector<double> pts(n + 1);
      for (std::size_t i = 0; i <= n; ++i) pts[i] = static_cast<double>(i);
      return ProductSpace(discrete_space(std::move(pts)));
    }
    case NamedFamily::Poisson: {
      if (!(t > 0.0)) throw std::invalid_argument("Poisson mean must be positive");
      double pmf = std::exp(-t), cdf = pmf;
      std::size_t n = 0;
      while (1.0 - cdf >= 1e-12 || static_cast<double>(n) < t) {
        ++n;
        pmf *= t / static_cast<double>(n);
        cdf += pmf;
      }
      std::vector<double> pts(n + 1);
      for (std::size_t i = 0; i <= n; ++i) pts[i] = static_cast<double>(i);
      return ProductSpace(discrete_space(std::move(pts)));
    }
  }
  throw std::invalid_argument("unknown named family");
}

Density named_family_density(const NamedMaximizer& m, const ProductSpace& space) {
  const double t = m.param;
  std::vector<double> v(space.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double x = space.point(i)[0];
    switch (m.family) {
      case NamedFamily::Exponential: v[i] = t * std::exp(-t * x); break;
      case NamedFamily::Geometric: v[i] = t * std::pow(1.0 - t, x); break;
      case NamedFamily::Poisson: v[i] = std::exp(-t + x * std::log(t) - std::lgamma(x + 1.0)); break;
    }
  }
  return Density(space, std::move(v));
}

Verdict check_named_maximizer(const Density& f, const NamedMaximizer& m,
                              const WeightFunction& phi) {
  require_same(f, phi, "check_named_maximizer");
  const Density g = named_family_density(m, f.space);
  const char* id = m.family == NamedFamily::Exponential ? "max_we_exponential"
                   : m.family == NamedFamily::Geometric ? "max_we_geometric"
                                                        : "max_we_poisson";
  Verdict v = start(id, f.space);
  const auto& s = f.space;
  const auto d = times(phi, difference(f.values, g.values));
  std::vector<double> xd(d.size()), lfd(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double x = s.point(i)[0];
    xd[i] = x * d[i];
    lfd[i] = std::lgamma(x + 1.0) * d[i];
  }
  const double mass = integrate(d, s), first = integrate(xd, s);
  const double t = m.param;
  double second = 0.0;
  switch (m.family) {
    case NamedFamily::Exponential: second = std::log(t) * mass - t * first; break;
    case NamedFamily::Geometric: second = std::log(t) * mass + std::log(1.0 - t) * first; break;
    case NamedFamily::Poisson:
      second = std::log(t) * first - t * mass - integrate(lfd, s);
      break;
  }
  v.note("mass_condition", mass);
  v.note("moment_condition", second);
  if (m.family != NamedFamily::Exponential) v.note("truncation_tail", std::max(0.0, 1.0 - g.mass()));
  v.hypothesis_margin = std::min(mass, second);
  v.conclusion_margin = weighted_entropy(g, phi) - weighted_entropy(f, phi);
  finalize(v, max_weighted_gap(phi, f.values, g.values) <= v.tol.pt);
  return v;
}

Verdict check_multi_subadditivity(const JointDensity& j, const WeightFunction& phi) {
  require_same(j, phi, "check_multi_subadditivity");
  if (j.arity() < 2) throw std::invalid_argument("check_multi_subadditivity: need >= 2 axes");
  Verdict v = start("multi_subadditivity", j.space);
  const auto q = product_of_marginals(j);
  v.hypothesis_margin = integrate(times(phi, difference(j.values, q)), j.space);
  double sum = 0.0;
  for (std::size_t i = 0; i < j.arity(); ++i)
    sum += weighted_entropy(marginalize(j, {i}), reduce_weight(phi, j, {i}).psi);
  v.conclusion_margin = sum - weighted_entropy(j, phi);
  const double direct = weighted_relative_entropy(j, Density(j.space, q), phi);
  v.note("divergence_form", direct);
  double pt = 0.0;
  for (std::size_t i = 0; i < j.size(); ++i)
    if (j.values[i] > 0.0) pt = std::max(pt, std::abs(phi.values[i] * (1.0 - q[i] / j.values[i])));
  finalize(v, pt <= v.tol.pt);
  return v;
}

}  // namespace wentropy
