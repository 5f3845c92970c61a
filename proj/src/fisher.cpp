#include "wentropy/fisher.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <numbers>
#include <stdexcept>

#include "wentropy/functionals.hpp"
#include "wentropy/kernels.hpp"

namespace wentropy {

namespace {

constexpr double kFdStep = 1e-5;

struct Tabulated {
  std::vector<double> f;
  std::vector<double> df;  // size * m, d f / d theta
};

Tabulated tabulate(const ParametricFamily& fam, std::span<const double> theta) {
  const ProductSpace& s = fam.support;
  const std::size_t n = s.size(), m = fam.param_dim;
  if (theta.size() != m) throw std::invalid_argument(fam.name + ": theta has the wrong size");
  Tabulated t{std::vector<double>(n), std::vector<double>(n * m)};
  bool bad = false;
#pragma omp parallel for schedule(static) reduction(|| : bad)
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = s.point(i);
    const double f = fam.density(theta, x);
    if (!std::isfinite(f) || f < 0.0) {
      bad = true;
      continue;
    }
    t.f[i] = f;
    if (f == 0.0) continue;
    const auto sc = score(fam, theta, x);
    for (std::size_t a = 0; a < m; ++a) t.df[i * m + a] = f * sc[a];
  }
  if (bad) throw std::invalid_argument(fam.name + ": density not finite and nonnegative");
  for (double v : t.df)
    if (!std::isfinite(v)) throw std::invalid_argument(fam.name + ": non-finite score");
  return t;
}

// Reference mass of the Y axes at each flat index.
std::vector<double> trailing_nu(const ProductSpace& s, std::size_t x_axes) {
  std::vector<double> nu(s.size(), 1.0);
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t k = x_axes; k < s.arity(); ++k) nu[i] *= s.axis(k)->nu()[s.axis_index(i, k)];
  return nu;
}

Matrix outer_sum(std::size_t n, std::size_t m, const std::function<double(std::size_t)>& w,
                 const std::function<const double*(std::size_t)>& vec) {
  const auto v = kernels::reduce_sum_vec(n, m * m, [&](std::size_t i, double* out) {
    const double c = w(i);
    if (c == 0.0) return;
    const double* s = vec(i);
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = 0; b < m; ++b) out[a * m + b] += c * s[a] * s[b];
  });
  return Matrix(m, m, v);
}

Verdict fisher_verdict(const char* id) {
  Verdict v;
  v.theorem_id = id;
  v.tol = Tolerances::fisher();
  return v;
}

double s_theta_threshold(const Matrix& scale) { return 1e-8 * std::max(1.0, scale.max_abs()); }

Matrix gram_schmidt_rows(const Matrix& a, bool& full_rank) {
  Matrix u(a.rows(), a.cols());
  full_rank = true;
  for (std::size_t r = 0; r < a.rows(); ++r) {
    std::vector<double> v(a.cols());
    double n0 = 0.0;
    for (std::size_t c = 0; c < a.cols(); ++c) n0 += (v[c] = a(r, c)) * a(r, c);
    for (std::size_t q = 0; q < r; ++q) {
      double d = 0.0;
      for (std::size_t c = 0; c < a.cols(); ++c) d += v[c] * u(q, c);
      for (std::size_t c = 0; c < a.cols(); ++c) v[c] -= d * u(q, c);
    }
    double nn = 0.0;
    for (double x : v) nn += x * x;
    if (nn <= 1e-20 * std::max(n0, 1e-300)) {
      full_rank = false;
      return u;
    }
    for (std::size_t c = 0; c < a.cols(); ++c) u(r, c) = v[c] / std::sqrt(nn);
  }
  return u;
}

}  // namespace

double family_density(const ParametricFamily& fam, std::span<const double> theta,
                      std::span<const double> x) {
  return fam.density(theta, x);
}

std::vector<double> score_fd(const ParametricFamily& fam, std::span<const double> theta,
                             std::span<const double> x) {
  const std::size_t m = fam.param_dim;
  std::vector<double> out(m, 0.0);
  const double f0 = fam.density(theta, x);
  if (!(f0 > 0.0)) return out;
  std::vector<double> t(theta.begin(), theta.end());
  for (std::size_t a = 0; a < m; ++a) {
    const double h = kFdStep * (1.0 + std::abs(theta[a]));
    t[a] = theta[a] + h;
    const double fp = fam.density(t, x);
    t[a] = theta[a] - h;
    const double fm = fam.density(t, x);
    t[a] = theta[a];
    out[a] = (fp > 0.0 && fm > 0.0) ? (std::log(fp) - std::log(fm)) / (2.0 * h)
                                     : (fp - fm) / (2.0 * h * f0);
  }
  return out;
}

std::vector<double> score(const ParametricFamily& fam, std::span<const double> theta,
                          std::span<const double> x) {
  if (!fam.score) return score_fd(fam, theta, x);
  std::vector<double> out(fam.param_dim, 0.0);
  if (!(fam.density(theta, x) > 0.0)) return out;
  fam.score(theta, x, out);
  return out;
}

Density family_density_on_support(const ParametricFamily& fam, std::span<const double> theta) {
  std::vector<double> v(fam.support.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = fam.density(theta, fam.support.point(i));
  return Density(fam.support, std::move(v));
}

ParametricFamily gaussian_location_family(double sigma2) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("gaussian_location: variance must be positive");
  const double sd = std::sqrt(sigma2);
  ParametricFamily fam;
  fam.name = "gaussian_location";
  fam.support = ProductSpace(grid_space(-12.0 * sd, 12.0 * sd, 4097));
  const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi * sigma2);
  fam.density = [=](std::span<const double> th, std::span<const double> x) {
    const double z = x[0] - th[0];
    return norm * std::exp(-z * z / (2.0 * sigma2));
  };
  fam.score = [=](std::span<const double> th, std::span<const double> x, std::span<double> out) {
    out[0] = (x[0] - th[0]) / sigma2;
  };
  return fam;
}

ParametricFamily gaussian_location_d_family(const Matrix& cov) {
  const auto ch = spd_factor(symmetrize(cov));
  if (!ch) throw std::invalid_argument("gaussian_location_d: covariance is not positive definite");
  const std::size_t d = cov.rows();
  ParametricFamily fam;
  fam.name = "gaussian_location_d";
  fam.param_dim = d;
  fam.support = make_gaussian_grid(cov, 10.0);
  const auto chol = std::make_shared<Cholesky>(*ch);
  const double lognorm = -0.5 * (static_cast<double>(d) * std::log(2.0 * std::numbers::pi) + ch->logdet);
  fam.density = [=](std::span<const double> th, std::span<const double> x) {
    std::vector<double> z(d);
    for (std::size_t i = 0; i < d; ++i) z[i] = x[i] - th[i];
    const auto y = chol->solve(z);
    double q = 0.0;
    for (std::size_t i = 0; i < d; ++i) q += z[i] * y[i];
    return std::exp(lognorm - 0.5 * q);
  };
  fam.score = [=](std::span<const double> th, std::span<const double> x, std::span<double> out) {
    std::vector<double> z(d);
    for (std::size_t i = 0; i < d; ++i) z[i] = x[i] - th[i];
    const auto y = chol->solve(z);
    std::copy(y.begin(), y.end(), out.begin());
  };
  return fam;
}

ParametricFamily poisson_family(double lambda_max) {
  if (!(lambda_max > 0.0)) throw std::invalid_argument("poisson: mean must be positive");
  double pmf = std::exp(-lambda_max), cdf = pmf;
  std::size_t n = 0;
  while (1.0 - cdf >= 1e-12 || static_cast<double>(n) < lambda_max) {
    ++n;
    pmf *= lambda_max / static_cast<double>(n);
    cdf += pmf;
  }
  std::vector<double> pts(n + 1);
  for (std::size_t i = 0; i <= n; ++i) pts[i] = static_cast<double>(i);
  ParametricFamily fam;
  fam.name = "poisson";
  fam.support = ProductSpace(discrete_space(std::move(pts)));
  fam.density = [](std::span<const double> th, std::span<const double> x) {
    if (!(th[0] > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    return std::exp(-th[0] + x[0] * std::log(th[0]) - std::lgamma(x[0] + 1.0));
  };
  fam.score = [](std::span<const double> th, std::span<const double> x, std::span<double> out) {
    out[0] = x[0] / th[0] - 1.0;
  };
  return fam;
}

ParametricFamily exponential_rate_family(double rate_min) {
  if (!(rate_min > 0.0)) throw std::invalid_argument("exponential_rate: rate must be positive");
  ParametricFamily fam;
  fam.name = "exponential_rate";
  fam.support = ProductSpace(grid_space(0.0, 40.0 / rate_min, 8193));
  fam.density = [](std::span<const double> th, std::span<const double> x) {
    if (!(th[0] > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    return th[0] * std::exp(-th[0] * x[0]);
  };
  fam.score = [](std::span<const double> th, std::span<const double> x, std::span<double> out) {
    out[0] = 1.0 / th[0] - x[0];
  };
  return fam;
}

ParametricFamily discrete_shift_family(std::size_t k, double a) {
  if (k < 2) throw std::invalid_argument("discrete_shift: need at least 2 points");
  if (!(std::abs(a) < 1.0)) throw std::invalid_argument("discrete_shift: |a| must be below 1");
  std::vector<double> pts(k);
  for (std::size_t i = 0; i < k; ++i) pts[i] = static_cast<double>(i);
  ParametricFamily fam;
  fam.name = "discrete_shift";
  fam.support = ProductSpace(discrete_space(std::move(pts)));
  const double w = 2.0 * std::numbers::pi / static_cast<double>(k);
  const double kk = static_cast<double>(k);
  fam.density = [=](std::span<const double> th, std::span<const double> x) {
    return (1.0 + a * std::cos(w * (x[0] - th[0]))) / kk;
  };
  fam.score = [=](std::span<const double> th, std::span<const double> x, std::span<double> out) {
    const double u = w * (x[0] - th[0]);
    out[0] = a * w * std::sin(u) / (1.0 + a * std::cos(u));
  };
  return fam;
}

ParametricFamily softmax_family(ProductSpace support, std::size_t m, std::vector<double> features) {
  if (support.size() * m != features.size())
    throw std::invalid_argument("softmax_family: features must have |support| x m entries");
  struct Table {
    ProductSpace s;
    std::size_t m;
    std::vector<double> t;
    std::map<std::vector<double>, std::size_t> index;
    double log_z(std::span<const double> th) const {
      double top = -std::numeric_limits<double>::infinity();
      std::vector<double> e(s.size());
      for (std::size_t i = 0; i < e.size(); ++i) {
        double v = 0.0;
        for (std::size_t a = 0; a < m; ++a) v += th[a] * t[i * m + a];
        top = std::max(top, e[i] = v);
      }
      double sum = 0.0;
      for (std::size_t i = 0; i < e.size(); ++i) sum += s.nu()[i] * std::exp(e[i] - top);
      return top + std::log(sum);
    }
    std::size_t at(std::span<const double> x) const {
      const auto it = index.find(std::vector<double>(x.begin(), x.end()));
      if (it == index.end()) throw std::invalid_argument("softmax_family: point not in support");
      return it->second;
    }
  };
  auto tab = std::make_shared<Table>();
  tab->s = support;
  tab->m = m;
  tab->t = std::move(features);
  for (std::size_t i = 0; i < support.size(); ++i) tab->index.emplace(support.point(i), i);
  ParametricFamily fam;
  fam.name = "softmax";
  fam.param_dim = m;
  fam.support = std::move(support);
  fam.density = [tab](std::span<const double> th, std::span<const double> x) {
    const std::size_t i = tab->at(x);
    double v = 0.0;
    for (std::size_t a = 0; a < tab->m; ++a) v += th[a] * tab->t[i * tab->m + a];
    return std::exp(v - tab->log_z(th));
  };
  fam.score = [tab](std::span<const double> th, std::span<const double> x, std::span<double> out) {
    const std::size_t i = tab->at(x), m = tab->m;
    const double lz = tab->log_z(th);
    std::vector<double> mean(m, 0.0);
    for (std::size_t j = 0; j < tab->s.size(); ++j) {
      double v = 0.0;
      for (std::size_t a = 0; a < m; ++a) v += th[a] * tab->t[j * m + a];
      const double p = std::exp(v - lz) * tab->s.nu()[j];
      for (std::size_t a = 0; a < m; ++a) mean[a] += p * tab->t[j * m + a];
    }
    for (std::size_t a = 0; a < m; ++a) out[a] = tab->t[i * m + a] - mean[a];
  };
  return fam;
}

FisherMatrix weighted_fisher(const ParametricFamily& fam, const WeightFunction& phi,
                             std::span<const double> theta) {
  if (!same_space(fam.support, phi.space))
    throw std::invalid_argument("weighted_fisher: weight not on the family support");
  const Tabulated t = tabulate(fam, theta);
  const std::size_t m = fam.param_dim, n = t.f.size();
  const auto& nu = fam.support.nu();
  std::vector<double> sc(n * m, 0.0);
  FisherMatrix r;
  for (std::size_t i = 0; i < n; ++i) {
    if (t.f[i] == 0.0) {
      r.masked += phi.values[i] > 0.0;
      continue;
    }
    for (std::size_t a = 0; a < m; ++a) sc[i * m + a] = t.df[i * m + a] / t.f[i];
  }
  r.entries = outer_sum(n, m, [&](std::size_t i) { return phi.values[i] * t.f[i] * nu[i]; },
                        [&](std::size_t i) { return sc.data() + i * m; });
  r.weight_mass = kernels::reduce_sum(n, [&](std::size_t i) { return phi.values[i] * t.f[i] * nu[i]; });
  return r;
}

JointFisher joint_and_conditional_fisher(const ParametricFamily& fam, const WeightFunction& phi,
                                         std::span<const double> theta) {
  const ProductSpace& s = fam.support;
  if (!same_space(s, phi.space))
    throw std::invalid_argument("joint_and_conditional_fisher: weight not on the family support");
  const std::size_t kx = fam.x_axes;
  if (kx == 0 || kx >= s.arity())
    throw std::invalid_argument("joint_and_conditional_fisher: x_axes must split the support");
  std::vector<std::size_t> keep(kx);
  for (std::size_t k = 0; k < kx; ++k) keep[k] = k;
  const ProductSpace sx = s.sub(keep);
  const auto proj = s.projection(keep);
  const auto nu_y = trailing_nu(s, kx);
  const auto& nu = s.nu();
  const auto& nu_x = sx.nu();

  const Tabulated t = tabulate(fam, theta);
  const std::size_t m = fam.param_dim, n = s.size(), nx = sx.size();

  std::vector<double> fx(nx, 0.0), dfx(nx * m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    fx[proj[i]] += t.f[i] * nu_y[i];
    for (std::size_t a = 0; a < m; ++a) dfx[proj[i] * m + a] += t.df[i * m + a] * nu_y[i];
  }
  std::vector<double> sx_score(nx * m, 0.0);
  for (std::size_t u = 0; u < nx; ++u)
    if (fx[u] > 0.0)
      for (std::size_t a = 0; a < m; ++a) sx_score[u * m + a] = dfx[u * m + a] / fx[u];

  std::vector<double> sj(n * m, 0.0), sc(n * m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (t.f[i] == 0.0) continue;
    for (std::size_t a = 0; a < m; ++a) {
      sj[i * m + a] = t.df[i * m + a] / t.f[i];
      sc[i * m + a] = sj[i * m + a] - sx_score[proj[i] * m + a];
    }
  }

  JointFisher r;
  const auto w = [&](std::size_t i) { return phi.values[i] * t.f[i] * nu[i]; };
  r.joint = outer_sum(n, m, w, [&](std::size_t i) { return sj.data() + i * m; });
  r.conditional = outer_sum(n, m, w, [&](std::size_t i) { return sc.data() + i * m; });

  std::vector<double> psi(nx, 0.0);
  r.b.assign(nx * m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double c = phi.values[i] * t.f[i] * nu_y[i];
    psi[proj[i]] += c;
    for (std::size_t a = 0; a < m; ++a) r.b[proj[i] * m + a] += c * sc[i * m + a];
  }
  for (std::size_t u = 0; u < nx; ++u) {
    if (fx[u] > 0.0) {
      psi[u] /= fx[u];
      for (std::size_t a = 0; a < m; ++a) r.b[u * m + a] /= fx[u];
    } else {
      psi[u] = 0.0;
    }
  }
  r.psi = WeightFunction(sx, psi);
  r.marginal = outer_sum(nx, m, [&](std::size_t u) { return psi[u] * fx[u] * nu_x[u]; },
                         [&](std::size_t u) { return sx_score.data() + u * m; });
  r.s_theta = Matrix(m, m);
  for (std::size_t u = 0; u < nx; ++u) {
    if (!(fx[u] > 0.0)) continue;
    const double c = fx[u] * nu_x[u];
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = 0; b < m; ++b)
        r.s_theta(a, b) += c * (sx_score[u * m + a] * r.b[u * m + b] +
                                r.b[u * m + a] * sx_score[u * m + b]);
  }
  return r;
}

Verdict check_chain_rule(const ParametricFamily& fam, const WeightFunction& phi,
                         std::span<const double> theta) {
  const JointFisher j = joint_and_conditional_fisher(fam, phi, theta);
  Verdict v = fisher_verdict("chain_rule");
  const double residual = (j.joint - j.marginal - j.conditional - j.s_theta).max_abs();
  v.note("residual", residual);
  v.note("s_theta_norm", j.s_theta.max_abs());
  v.hypothesis_margin = 0.0;
  v.conclusion_margin = -residual;
  finalize(v, true);
  return v;
}

Verdict check_data_refinement(const ParametricFamily& fam, const WeightFunction& phi,
                              std::span<const double> theta) {
  const JointFisher j = joint_and_conditional_fisher(fam, phi, theta);
  Verdict v = fisher_verdict("data_refinement");
  const Matrix diff = j.joint - j.marginal - j.s_theta;
  v.note("conditional_min_eig", min_eig_margin(symmetrize(j.conditional, 1e-8)));
  v.hypothesis_margin = 0.0;
  v.conclusion_margin = min_eig_margin(symmetrize(diff, 1e-8));
  finalize(v, diff.max_abs() <= v.tol.eq);
  return v;
}

Verdict check_dp_fisher(const ParametricFamily& fam, const PairWeight& phi, const PointMap& g,
                        std::span<const double> theta) {
  const ProductSpace& s = fam.support;
  const std::size_t n = s.size(), m = fam.param_dim;
  const Tabulated t = tabulate(fam, theta);
  const auto& nu = s.nu();

  std::vector<double> gy(n), rho_in(n);
  std::map<double, std::size_t> image;
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = s.point(i);
    gy[i] = g(x);
    if (!std::isfinite(gy[i])) throw std::invalid_argument("check_dp_fisher: g is not finite");
    rho_in[i] = phi(x, gy[i]);
    if (!std::isfinite(rho_in[i]) || rho_in[i] < 0.0)
      throw std::invalid_argument("check_dp_fisher: weight must be finite and nonnegative");
    image.emplace(gy[i], 0);
  }
  std::size_t ny = 0;
  for (auto& [y, idx] : image) idx = ny++;
  std::vector<std::size_t> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = image.at(gy[i]);

  std::vector<double> sx(n * m, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    if (t.f[i] > 0.0)
      for (std::size_t a = 0; a < m; ++a) sx[i * m + a] = t.df[i * m + a] / t.f[i];

  std::vector<double> py(ny, 0.0), dpy(ny * m, 0.0), rho_out(ny, 0.0), b(ny * m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    py[out[i]] += t.f[i] * nu[i];
    for (std::size_t a = 0; a < m; ++a) dpy[out[i] * m + a] += t.df[i * m + a] * nu[i];
  }
  std::vector<double> sy(ny * m, 0.0);
  for (std::size_t y = 0; y < ny; ++y)
    if (py[y] > 0.0)
      for (std::size_t a = 0; a < m; ++a) sy[y * m + a] = dpy[y * m + a] / py[y];
  for (std::size_t i = 0; i < n; ++i) {
    if (t.f[i] == 0.0) continue;
    const std::size_t y = out[i];
    const double c = rho_in[i] * t.f[i] * nu[i];
    rho_out[y] += c;
    for (std::size_t a = 0; a < m; ++a) b[y * m + a] += c * (sx[i * m + a] - sy[y * m + a]);
  }
  for (std::size_t y = 0; y < ny; ++y) {
    if (py[y] > 0.0) {
      rho_out[y] /= py[y];
      for (std::size_t a = 0; a < m; ++a) b[y * m + a] /= py[y];
    }
  }

  const Matrix lhs = outer_sum(n, m, [&](std::size_t i) { return rho_in[i] * t.f[i] * nu[i]; },
                               [&](std::size_t i) { return sx.data() + i * m; });
  const Matrix rhs = outer_sum(ny, m, [&](std::size_t y) { return rho_out[y] * py[y]; },
                               [&](std::size_t y) { return sy.data() + y * m; });
  Matrix st(m, m);
  for (std::size_t y = 0; y < ny; ++y)
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t c = 0; c < m; ++c)
        st(a, c) += py[y] * (sy[y * m + a] * b[y * m + c] + b[y * m + a] * sy[y * m + c]);

  Verdict v = fisher_verdict("dp_fisher");
  v.note("s_theta_norm", st.max_abs());
  v.note("corrected_margin", min_eig_margin(symmetrize(lhs - rhs - st, 1e-8)));
  v.note("output_points", static_cast<double>(ny));
  if (st.max_abs() > s_theta_threshold(lhs)) {
    Verdict u = make_inapplicable(v.theorem_id,
                                  "S_theta of the pair (g(X), X) does not vanish; weight varies "
                                  "along fibres of g",
                                  v.tol);
    u.diagnostics = v.diagnostics;
    return u;
  }
  const Matrix diff = lhs - rhs;
  v.hypothesis_margin = 0.0;
  v.conclusion_margin = min_eig_margin(symmetrize(diff, 1e-8));
  finalize(v, diff.max_abs() <= v.tol.eq);
  return v;
}

ReparamResult reparametrized_fisher(const ParametricFamily& fam, const WeightFunction& phi,
                                    const VectorFn& eta, std::span<const double> theta) {
  ReparamResult r;
  const auto e = eta(theta);
  if (e.size() != fam.param_dim)
    throw std::invalid_argument("reparametrized_fisher: eta has the wrong size");
  r.jacobian = finite_diff_jacobian(eta, theta);
  const Matrix j_eta = weighted_fisher(fam, phi, e).entries;
  r.conjugated = r.jacobian.transpose() * j_eta * r.jacobian;

  ParametricFamily composed;
  composed.name = fam.name + "_reparametrized";
  composed.param_dim = theta.size();
  composed.support = fam.support;
  composed.density = [&fam, &eta](std::span<const double> th, std::span<const double> x) {
    const auto ee = eta(th);
    return fam.density(ee, x);
  };
  r.direct = weighted_fisher(composed, phi, theta).entries;
  r.residual = (r.conjugated - r.direct).max_abs();
  const Matrix dtd = r.jacobian.transpose() * r.jacobian;
  r.singular_jacobian = min_eig_margin(symmetrize(dtd, 1e-8)) <= 1e-12 * std::max(1.0, dtd.max_abs());
  return r;
}

FisherMatrix spatial_fisher(const Density& f, const WeightFunction& phi) {
  require_same(f, phi, "spatial_fisher");
  const ProductSpace& s = f.space;
  if (!s.all_grid()) throw std::invalid_argument("spatial_fisher: density must live on a grid");
  const std::size_t d = s.arity(), n = s.size();
  for (std::size_t k = 0; k < d; ++k)
    if (s.shape()[k] < 5) throw std::invalid_argument("spatial_fisher: grid axis too short");
  const auto& nu = s.nu();
  const auto& fv = f.values;
  const auto interior = [&](std::size_t i) {
    for (std::size_t k = 0; k < d; ++k) {
      const std::size_t a = s.axis_index(i, k);
      if (a < 2 || a + 2 >= s.shape()[k]) return false;
    }
    return true;
  };
  FisherMatrix r;
  const auto v = kernels::reduce_sum_vec(n, d * d, [&](std::size_t i, double* out) {
    if (!interior(i) || fv[i] == 0.0 || phi.values[i] == 0.0) return;
    double g[3];
    for (std::size_t k = 0; k < d; ++k) {
      const std::size_t st = s.strides()[k];
      const double h = s.axis(k)->spacing();
      g[k] = (-fv[i + 2 * st] + 8.0 * fv[i + st] - 8.0 * fv[i - st] + fv[i - 2 * st]) / (12.0 * h);
    }
    const double c = phi.values[i] / fv[i] * nu[i];
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b) out[a * d + b] += c * g[a] * g[b];
  });
  if (d > 3) throw std::invalid_argument("spatial_fisher: dimension above 3");
  r.entries = Matrix(d, d, v);
  for (std::size_t i = 0; i < n; ++i) {
    r.weight_mass += phi.values[i] * fv[i] * nu[i];
    if (interior(i) && fv[i] == 0.0 && phi.values[i] > 0.0) ++r.masked;
  }
  return r;
}

ShiftModel gaussian_shift_model(Matrix q, Matrix p, const Matrix& cov) {
  const auto ch = spd_factor(symmetrize(cov));
  if (!ch) throw std::invalid_argument("gaussian_shift_model: covariance is not positive definite");
  const std::size_t n = cov.rows();
  const auto chol = std::make_shared<Cholesky>(*ch);
  const double lognorm = -0.5 * (static_cast<double>(n) * std::log(2.0 * std::numbers::pi) + ch->logdet);
  ShiftModel s;
  s.q = std::move(q);
  s.p = std::move(p);
  s.noise_cov = cov;
  s.noise = [=](std::span<const double> z) {
    std::vector<double> zz(z.begin(), z.end());
    const auto y = chol->solve(zz);
    double qf = 0.0;
    for (std::size_t i = 0; i < n; ++i) qf += zz[i] * y[i];
    return std::exp(lognorm - 0.5 * qf);
  };
  return s;
}

ShiftMode parse_shift_mode(const std::string& s) {
  if (s == "lemma") return ShiftMode::Lemma;
  if (s == "cor_i") return ShiftMode::CorI;
  if (s == "cor_ii") return ShiftMode::CorII;
  if (s == "cor_iii") return ShiftMode::CorIII;
  throw std::invalid_argument("unknown shift-model mode: " + s);
}

Verdict check_shift_model(const ShiftModel& model, const PointWeight& phi,
                          std::span<const double> theta, ShiftMode mode) {
  const char* id = mode == ShiftMode::Lemma   ? "shift_model"
                   : mode == ShiftMode::CorI  ? "shift_model_cor_i"
                   : mode == ShiftMode::CorII ? "shift_model_cor_ii"
                                              : "shift_model_cor_iii";
  const Matrix& p = model.p;
  const std::size_t n = p.cols(), k = p.rows();
  if (n == 0 || n > 3) throw std::invalid_argument("check_shift_model: dimension must be 1..3");
  if (k == 0 || k > n) throw std::invalid_argument("check_shift_model: P must have 1..n rows");
  if (model.noise_cov.rows() != n || model.noise_cov.cols() != n)
    throw std::invalid_argument("check_shift_model: noise covariance has the wrong size");
  const Matrix q = mode == ShiftMode::Lemma ? model.q : Matrix::identity(n);
  if (q.cols() != n || q.rows() == 0)
    throw std::invalid_argument("check_shift_model: Q must be m x n");
  const std::size_t m = q.rows();
  if (theta.size() != m) throw std::invalid_argument("check_shift_model: theta has the wrong size");

  bool full_rank = false;
  const Matrix u = gram_schmidt_rows(p, full_rank);
  if (!full_rank) {
    return make_inapplicable(id, "P does not have full row rank", Tolerances::fisher());
  }
  if (mode == ShiftMode::CorII && (p * p.transpose() - Matrix::identity(k)).max_abs() > 1e-10)
    return make_inapplicable(id, "P does not have orthonormal rows", Tolerances::fisher());

  // M = [P; orthonormal complement of the row space of P].
  Matrix mm(n, n);
  for (std::size_t r = 0; r < k; ++r)
    for (std::size_t c = 0; c < n; ++c) mm(r, c) = p(r, c);
  {
    std::vector<std::vector<double>> basis;
    for (std::size_t r = 0; r < k; ++r) {
      std::vector<double> b(n);
      for (std::size_t c = 0; c < n; ++c) b[c] = u(r, c);
      basis.push_back(std::move(b));
    }
    std::size_t row = k;
    for (std::size_t e = 0; e < n && row < n; ++e) {
      std::vector<double> v(n, 0.0);
      v[e] = 1.0;
      for (const auto& b : basis) {
        double dd = 0.0;
        for (std::size_t c = 0; c < n; ++c) dd += v[c] * b[c];
        for (std::size_t c = 0; c < n; ++c) v[c] -= dd * b[c];
      }
      double nn = 0.0;
      for (double x : v) nn += x * x;
      if (nn < 1e-8) continue;
      for (double& x : v) x /= std::sqrt(nn);
      basis.push_back(v);
      for (std::size_t c = 0; c < n; ++c) mm(row, c) = v[c];
      ++row;
    }
  }
  const Matrix mmt = mm * mm.transpose();
  const auto mch = spd_factor(mmt);
  if (!mch) throw std::logic_error("check_shift_model: singular change of coordinates");
  const Matrix minv = mm.transpose() * mch->inverse();  // M^-1
  const double abs_det = std::exp(0.5 * mch->logdet);

  // W = X M^T; grid centred on the shifted noise.
  std::vector<double> shift_w(n, 0.0);
  for (std::size_t c = 0; c < n; ++c)
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t j = 0; j < n; ++j) shift_w[c] += theta[a] * q(a, j) * mm(c, j);
  const Matrix cov_w = symmetrize(mm * model.noise_cov * mm.transpose(), 1e-8);
  const ProductSpace grid = make_gaussian_grid(cov_w, 8.0, 0, shift_w);

  const auto to_x = [minv, n](std::span<const double> w) {
    std::vector<double> x(n, 0.0);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i) x[j] += w[i] * minv(j, i);
    return x;
  };
  ParametricFamily fam;
  fam.name = "shift_model";
  fam.param_dim = m;
  fam.support = grid;
  fam.x_axes = k;
  const auto noise = model.noise;
  fam.density = [=](std::span<const double> th, std::span<const double> w) {
    auto x = to_x(w);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t a = 0; a < m; ++a) x[j] -= th[a] * q(a, j);
    return noise(x) / abs_det;
  };
  const WeightFunction phi_w =
      tabulate_weight(grid, [&](std::span<const double> w) { return phi(to_x(w)); });

  Verdict v = fisher_verdict(id);
  v.tol.eq = 1e-4;
  v.tol.conclusion = 1e-4;
  v.note("grid_points", static_cast<double>(grid.size()));

  Matrix j_x, j_y, s_theta;
  WeightFunction psi;
  if (k < n) {
    const JointFisher jf = joint_and_conditional_fisher(fam, phi_w, theta);
    j_x = jf.joint;
    j_y = jf.marginal;
    s_theta = jf.s_theta;
    psi = jf.psi;
  } else {
    j_x = weighted_fisher(fam, phi_w, theta).entries;
    j_y = j_x;
    s_theta = Matrix(m, m);
    psi = phi_w;
  }
  const Density fw = family_density_on_support(fam, theta);
  const Matrix l_x = mm.transpose() * spatial_fisher(fw, phi_w).entries * mm;
  std::vector<std::size_t> keep(k);
  for (std::size_t a = 0; a < k; ++a) keep[a] = a;
  const Density fy = k < n ? marginalize(fw, keep) : fw;
  const Matrix l_y = spatial_fisher(fy, psi).entries;

  v.note("residual_j_x", (j_x - q * l_x * q.transpose()).max_abs());
  v.note("residual_j_y", (j_y - q * p.transpose() * l_y * p * q.transpose()).max_abs());
  v.note("s_theta_norm", s_theta.max_abs());

  Matrix diff;
  switch (mode) {
    case ShiftMode::Lemma: diff = j_x - j_y; break;
    case ShiftMode::CorI: diff = j_x - p.transpose() * l_y * p; break;
    case ShiftMode::CorII: diff = p * j_x * p.transpose() - l_y; break;
    case ShiftMode::CorIII: {
      const auto jc = spd_factor(symmetrize(j_x, 1e-8));
      if (!jc || min_eig_margin(symmetrize(j_x, 1e-8)) <= 1e-10) {
        Verdict u2 = make_inapplicable(id, "J_phi(X) is singular", v.tol);
        u2.diagnostics = v.diagnostics;
        return u2;
      }
      const Matrix inner = p * jc->inverse() * p.transpose();
      diff = spd_inverse(symmetrize(inner, 1e-8)) - l_y;
      break;
    }
  }
  if (mode == ShiftMode::Lemma)
    v.note("corrected_margin", min_eig_margin(symmetrize(diff - s_theta, 1e-6)));
  if (s_theta.max_abs() > s_theta_threshold(j_x)) {
    Verdict u2 = make_inapplicable(id, "S_theta of the pair (Y, X) does not vanish", v.tol);
    u2.diagnostics = v.diagnostics;
    return u2;
  }
  v.hypothesis_margin = 0.0;
  v.conclusion_margin = min_eig_margin(symmetrize(diff, 1e-6));
  finalize(v, diff.max_abs() <= v.tol.eq);
  return v;
}

}  // namespace wentropy
