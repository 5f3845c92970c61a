#include "wentropy/cramer_rao.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "wentropy/functionals.hpp"
#include "wentropy/inequalities.hpp"
#include "wentropy/kernels.hpp"

namespace wentropy {

namespace {

constexpr double kFdRel = 1e-5;
constexpr double kSingular = 1e-10;

void require_weight(const ParametricFamily& fam, const WeightFunction& phi, const char* who) {
  if (!same_space(fam.support, phi.space))
    throw std::invalid_argument(std::string(who) + ": weight not on the family support");
}

// [E phi, E phi T_1, ..., E phi T_s] for the statistic tabulated in tv.
std::vector<double> weighted_moments(const ParametricFamily& fam, const WeightFunction& phi,
                                     std::span<const double> theta, std::size_t s,
                                     const std::vector<double>& tv) {
  const ProductSpace& sp = fam.support;
  const auto& nu = sp.nu();
  return kernels::reduce_sum_vec(sp.size(), s + 1, [&](std::size_t i, double* out) {
    const double w = phi.values[i];
    if (w == 0.0) return;
    const double c = w * fam.density(theta, sp.point(i)) * nu[i];
    out[0] += c;
    for (std::size_t k = 0; k < s; ++k) out[k + 1] += c * tv[i * s + k];
  });
}

std::vector<double> tabulate_statistic(const ProductSpace& sp, const StatisticFn& t,
                                       std::size_t& s) {
  s = t(sp.point(0)).size();
  if (s == 0) throw std::invalid_argument("build_cr_context_I: empty statistic");
  std::vector<double> tv(sp.size() * s);
  for (std::size_t i = 0; i < sp.size(); ++i) {
    const auto v = t(sp.point(i));
    if (v.size() != s) throw std::invalid_argument("build_cr_context_I: statistic size varies");
    for (std::size_t k = 0; k < s; ++k) {
      if (!std::isfinite(v[k])) throw std::invalid_argument("build_cr_context_I: non-finite statistic");
      tv[i * s + k] = v[k];
    }
  }
  return tv;
}

// Coordinates of every support point, n per point.
std::vector<double> coordinates(const ProductSpace& sp) {
  const std::size_t n = sp.point_dim();
  std::vector<double> xs(sp.size() * n);
  for (std::size_t i = 0; i < sp.size(); ++i) sp.point(i, {xs.data() + i * n, n});
  return xs;
}

// A^T B^-1 A for B symmetric positive definite (A is p x q, result q x q).
Matrix quadratic_form(const Cholesky& b, const Matrix& a) { return a.transpose() * b.solve(a); }

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

Verdict cr_verdict(const char* id) {
  Verdict v;
  v.theorem_id = id;
  v.tol = Tolerances::fisher();
  return v;
}

}  // namespace

CRContextI build_cr_context_I(const ParametricFamily& fam, const WeightFunction& phi,
                              const StatisticFn& t, std::span<const double> theta) {
  require_weight(fam, phi, "build_cr_context_I");
  const ProductSpace& sp = fam.support;
  const std::size_t m = fam.param_dim;
  if (theta.size() != m) throw std::invalid_argument("build_cr_context_I: theta has the wrong size");
  CRContextI c;
  const auto tv = tabulate_statistic(sp, t, c.s);
  const std::size_t s = c.s;
  c.m = m;

  const auto mom = weighted_moments(fam, phi, theta, s, tv);
  c.alpha = mom[0];
  c.eta.assign(mom.begin() + 1, mom.end());
  c.degenerate = !(c.alpha > 0.0);

  const auto& nu = sp.nu();
  // [E phi S (m), E phi T^T S (s x m), cov (s x s)]
  const auto acc = kernels::reduce_sum_vec(sp.size(), m + s * m + s * s, [&](std::size_t i, double* out) {
    const double w = phi.values[i];
    if (w == 0.0) return;
    const auto x = sp.point(i);
    const double f = fam.density(theta, x);
    if (!(f > 0.0)) return;
    const double c0 = w * f * nu[i];
    const double* ti = tv.data() + i * s;
    const auto sc = score(fam, theta, x);
    for (std::size_t b = 0; b < m; ++b) out[b] += c0 * sc[b];
    for (std::size_t a = 0; a < s; ++a)
      for (std::size_t b = 0; b < m; ++b) out[m + a * m + b] += c0 * ti[a] * sc[b];
    for (std::size_t a = 0; a < s; ++a)
      for (std::size_t b = 0; b < s; ++b)
        out[m + s * m + a * s + b] += c0 * (ti[a] - c.eta[a]) * (ti[b] - c.eta[b]);
  });
  c.score_d_alpha.assign(acc.begin(), acc.begin() + m);
  c.score_d_eta = Matrix(s, m);
  c.cov = Matrix(s, s);
  for (std::size_t a = 0; a < s; ++a) {
    for (std::size_t b = 0; b < m; ++b) c.score_d_eta(a, b) = acc[m + a * m + b];
    for (std::size_t b = 0; b < s; ++b) c.cov(a, b) = acc[m + s * m + a * s + b];
  }

  const Matrix jac = finite_diff_jacobian(
      [&](std::span<const double> th) { return weighted_moments(fam, phi, th, s, tv); }, theta,
      kFdRel);
  c.d_alpha.resize(m);
  c.d_eta = Matrix(s, m);
  for (std::size_t b = 0; b < m; ++b) {
    c.d_alpha[b] = jac(0, b);
    c.interchange_residual_alpha =
        std::max(c.interchange_residual_alpha, std::abs(jac(0, b) - c.score_d_alpha[b]));
    for (std::size_t a = 0; a < s; ++a) {
      c.d_eta(a, b) = jac(a + 1, b);
      c.interchange_residual_eta =
          std::max(c.interchange_residual_eta, std::abs(jac(a + 1, b) - c.score_d_eta(a, b)));
    }
  }
  c.interchange_suspect = std::max(c.interchange_residual_alpha, c.interchange_residual_eta) >
                          kInterchangeTol;
  return c;
}

Verdict check_wcr_I(const CRContextI& ctx, const FisherMatrix& j) {
  const char* id = "wcr_I";
  const std::size_t m = ctx.m, s = ctx.s;
  if (j.entries.rows() != m || !j.entries.square())
    throw std::invalid_argument("check_wcr_I: Fisher matrix has the wrong size");
  if (ctx.degenerate) return make_inapplicable(id, "weight has no mass under f_theta", Tolerances::fisher());
  const Matrix js = symmetrize(j.entries, 1e-8);
  const double jmin = min_eig_margin(js);
  if (!(jmin > kSingular)) {
    Verdict v = make_inapplicable(id, "weighted Fisher matrix is singular", Tolerances::fisher());
    v.note("fisher_min_eig", jmin);
    return v;
  }
  Matrix a = ctx.d_eta;
  for (std::size_t r = 0; r < s; ++r)
    for (std::size_t b = 0; b < m; ++b) a(r, b) -= ctx.eta[r] * ctx.d_alpha[b];
  const auto chol = spd_factor(js);
  if (!chol) return make_inapplicable(id, "weighted Fisher matrix is singular", Tolerances::fisher());
  const Matrix rhs = quadratic_form(*chol, a.transpose());
  Verdict v = cr_verdict(id);
  v.hypothesis_margin = 0.0;
  v.conclusion_margin = min_eig_margin(symmetrize(ctx.cov - rhs, 1e-8));
  v.note("interchange_residual_alpha", ctx.interchange_residual_alpha);
  v.note("interchange_residual_eta", ctx.interchange_residual_eta);
  v.note("fisher_min_eig", jmin);
  if (ctx.interchange_suspect) v.assumption_tags.emplace_back("interchange_suspect");
  finalize(v, true);
  return v;
}

CRContextII build_cr_context_II(const ParametricFamily& fam, const WeightFunction& phi,
                                std::span<const double> theta) {
  require_weight(fam, phi, "build_cr_context_II");
  const ProductSpace& sp = fam.support;
  const std::size_t n = sp.point_dim(), m = fam.param_dim;
  if (theta.size() != m) throw std::invalid_argument("build_cr_context_II: theta has the wrong size");
  const auto xs = coordinates(sp);
  const auto& nu = sp.nu();

  // [alpha, e_1..e_n, second moments row-major]
  auto moments = [&](std::span<const double> th) {
    return kernels::reduce_sum_vec(sp.size(), 1 + n + n * n, [&](std::size_t i, double* out) {
      const double w = phi.values[i];
      if (w == 0.0) return;
      const double* x = xs.data() + i * n;
      const double c = w * fam.density(th, {x, n}) * nu[i];
      out[0] += c;
      for (std::size_t a = 0; a < n; ++a) {
        out[1 + a] += c * x[a];
        for (std::size_t b = 0; b < n; ++b) out[1 + n + a * n + b] += c * x[a] * x[b];
      }
    });
  };
  const auto mom = moments(theta);
  CRContextII c;
  c.n = n;
  c.m = m;
  c.alpha = mom[0];
  if (!(c.alpha > 0.0)) throw std::invalid_argument("build_cr_context_II: weight has no mass");
  c.e_theta.assign(mom.begin() + 1, mom.begin() + 1 + n);
  c.mu_phi.resize(n);
  for (std::size_t a = 0; a < n; ++a) c.mu_phi[a] = c.e_theta[a] / c.alpha;
  c.c_tilde = Matrix(n, n);
  c.v_bar = Matrix(n, n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      const double second = mom[1 + n + a * n + b] / c.alpha;
      c.c_tilde(a, b) = second - c.e_theta[a] * c.e_theta[b];
      c.v_bar(a, b) = second - c.mu_phi[a] * c.mu_phi[b];
    }

  // [alpha, e, mu] as functions of theta.
  const Matrix jac = finite_diff_jacobian(
      [&](std::span<const double> th) {
        const auto mo = moments(th);
        std::vector<double> out(1 + 2 * n);
        out[0] = mo[0];
        for (std::size_t a = 0; a < n; ++a) {
          out[1 + a] = mo[1 + a];
          out[1 + n + a] = mo[1 + a] / mo[0];
        }
        return out;
      },
      theta, kFdRel);
  c.d_alpha.resize(m);
  c.d_e = Matrix(n, m);
  c.d_mu = Matrix(n, m);
  for (std::size_t b = 0; b < m; ++b) {
    c.d_alpha[b] = jac(0, b);
    for (std::size_t a = 0; a < n; ++a) {
      c.d_e(a, b) = jac(1 + a, b);
      c.d_mu(a, b) = jac(1 + n + a, b);
    }
  }
  return c;
}

CR2Form parse_cr2_form(const std::string& s) {
  if (s == "as_stated") return CR2Form::AsStated;
  if (s == "normalized") return CR2Form::Normalized;
  throw std::invalid_argument("unknown Cramer-Rao II form: " + s);
}

Verdict check_wcr_II(const ParametricFamily& fam, const WeightFunction& phi,
                     std::span<const double> theta, CR2Form form) {
  const char* id = form == CR2Form::AsStated ? "wcr_II" : "wcr_II_normalized";
  require_weight(fam, phi, "check_wcr_II");
  const FisherMatrix j = weighted_fisher(fam, phi, theta);
  if (!(j.weight_mass > 0.0))
    return make_inapplicable(id, "weight has no mass under f_theta", Tolerances::fisher());
  const CRContextII c = build_cr_context_II(fam, phi, theta);
  const std::size_t m = c.m;

  Matrix da_outer(m, m);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b) da_outer(a, b) = c.d_alpha[a] * c.d_alpha[b] / c.alpha;

  const Matrix js = symmetrize(j.entries, 1e-8);
  const Matrix ct = symmetrize(c.c_tilde, 1e-8);
  const Matrix vb = symmetrize(c.v_bar, 1e-8);
  const double ct_min = min_eig_margin(ct);
  const double vb_min = min_eig_margin(vb);
  const auto ct_chol = ct_min > kSingular ? spd_factor(ct) : std::nullopt;
  const auto vb_chol = vb_min > kSingular ? spd_factor(vb) : std::nullopt;

  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double stated =
      ct_chol ? min_eig_margin(symmetrize(js - quadratic_form(*ct_chol, c.d_e) - da_outer, 1e-8))
              : nan;
  const double normalized =
      vb_chol ? min_eig_margin(symmetrize(
                    js - c.alpha * quadratic_form(*vb_chol, c.d_mu) - da_outer, 1e-8))
              : nan;

  const bool use_stated = form == CR2Form::AsStated;
  if (use_stated ? !ct_chol : !vb_chol) {
    Verdict v = make_inapplicable(
        id, use_stated ? "C-tilde is not positive definite" : "weighted variance is singular",
        Tolerances::fisher());
    v.note("c_tilde_min_eig", ct_min);
    v.note("v_bar_min_eig", vb_min);
    v.assumption_tags.emplace_back("uniform_ratio_unverified");
    return v;
  }
  Verdict v = cr_verdict(id);
  v.hypothesis_margin = 0.0;
  v.conclusion_margin = use_stated ? stated : normalized;
  v.note(use_stated ? "normalized_margin" : "stated_margin", use_stated ? normalized : stated);
  v.note("c_tilde_min_eig", ct_min);
  v.note("v_bar_min_eig", vb_min);
  v.note("alpha", c.alpha);
  v.assumption_tags.emplace_back("uniform_ratio_unverified");
  finalize(v, true);
  return v;
}

double KullbackContext::log_mg(std::span<const double> zeta) const {
  const std::size_t k = log_w.size();
  std::vector<double> z(k);
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < k; ++i) {
    double dot = 0.0;
    for (std::size_t a = 0; a < n; ++a) dot += x[i * n + a] * zeta[a];
    z[i] = log_w[i] + dot;
    mx = std::max(mx, z[i]);
  }
  double s = 0.0;
  for (double v : z) s += std::exp(v - mx);
  return mx + std::log(s);
}

std::vector<double> KullbackContext::grad_log_mg(std::span<const double> zeta) const {
  const std::size_t k = log_w.size();
  std::vector<double> z(k);
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < k; ++i) {
    double dot = 0.0;
    for (std::size_t a = 0; a < n; ++a) dot += x[i * n + a] * zeta[a];
    z[i] = log_w[i] + dot;
    mx = std::max(mx, z[i]);
  }
  double s = 0.0;
  std::vector<double> g(n, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    const double w = std::exp(z[i] - mx);
    s += w;
    for (std::size_t a = 0; a < n; ++a) g[a] += w * x[i * n + a];
  }
  for (double& v : g) v /= s;
  return g;
}

double KullbackContext::feasible_check(std::span<const double> zeta) const {
  return alpha_f - std::exp(log_mg(zeta));
}

KullbackContext make_kullback_context(const Density& f, const Density& g,
                                      const WeightFunction& phi) {
  require_same(f, g, "kullback bound");
  require_same(f, phi, "kullback bound");
  const ProductSpace& sp = f.space;
  KullbackContext c;
  c.n = sp.point_dim();
  const auto& nu = sp.nu();
  std::vector<double> pt(c.n);
  c.e_phi_f.assign(c.n, 0.0);
  for (std::size_t i = 0; i < sp.size(); ++i) {
    const double w = phi.values[i] * nu[i];
    if (w == 0.0) continue;
    sp.point(i, pt);
    const double wf = w * f.values[i];
    c.alpha_f += wf;
    for (std::size_t a = 0; a < c.n; ++a) c.e_phi_f[a] += wf * pt[a];
    const double wg = w * g.values[i];
    if (wg > 0.0) {
      c.alpha_g += wg;
      c.x.insert(c.x.end(), pt.begin(), pt.end());
      c.log_w.push_back(std::log(wg));
    }
  }
  if (!(c.alpha_f > 0.0) || !(c.alpha_g > 0.0))
    throw std::invalid_argument("kullback bound: phi f and phi g need positive mass");
  return c;
}

KullbackBound kullback_bound_1(const Density& f, const Density& g, const WeightFunction& phi,
                               const KullbackOptions& opts) {
  const KullbackContext c = make_kullback_context(f, g, phi);
  const std::size_t n = c.n;
  std::vector<double> mu(n);
  for (std::size_t a = 0; a < n; ++a) mu[a] = c.e_phi_f[a] / c.alpha_f;
  const double log_ag = std::log(c.alpha_g);

  const ScalarFn obj = [&](std::span<const double> z) {
    double dot = 0.0;
    for (std::size_t a = 0; a < n; ++a) dot += mu[a] * z[a];
    return dot + log_ag - c.log_mg(z);
  };
  const VectorFn grad = [&](std::span<const double> z) {
    auto gm = c.grad_log_mg(z);
    for (std::size_t a = 0; a < n; ++a) gm[a] = mu[a] - gm[a];
    return gm;
  };
  std::vector<std::vector<double>> starts{std::vector<double>(n, 0.0)};
  for (std::size_t a = 0; a < n; ++a)
    for (double sgn : {1.0, -1.0}) {
      std::vector<double> z(n, 0.0);
      z[a] = sgn;
      starts.push_back(z);
    }
  const Box box{std::vector<double>(n, -opts.box), std::vector<double>(n, opts.box)};
  const MaximizeResult r = maximize_concave(obj, &grad, starts, box);

  KullbackBound out;
  out.argmax_zeta = r.argmax;
  out.bound = r.value;
  out.foc_residual = norm2(grad(r.argmax));
  out.clipped = r.at_boundary;
  return out;
}

namespace {

// Largest t in [0, t_max] with zeta0 + t u feasible, assuming zeta0 is.
double boundary_along(const KullbackContext& c, std::span<const double> zeta0,
                      std::span<const double> u, double t_max, bool& clipped) {
  std::vector<double> z(c.n);
  auto feasible = [&](double t) {
    for (std::size_t a = 0; a < c.n; ++a) z[a] = zeta0[a] + t * u[a];
    return c.feasible_check(z) >= 0.0;
  };
  clipped = false;
  if (feasible(t_max)) {
    clipped = true;
    return t_max;
  }
  double lo = 0.0, hi = t_max;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    (feasible(mid) ? lo : hi) = mid;
  }
  return lo;
}

// Distance from zeta0 along u to the box boundary.
double box_exit(std::span<const double> zeta0, std::span<const double> u, double box) {
  double t = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < zeta0.size(); ++a) {
    if (u[a] > 0.0) t = std::min(t, (box - zeta0[a]) / u[a]);
    if (u[a] < 0.0) t = std::min(t, (-box - zeta0[a]) / u[a]);
  }
  return std::max(t, 0.0);
}

// M_g is nonincreasing along u when every support point has x . u <= 0.
bool recedes(const KullbackContext& c, std::span<const double> u) {
  for (std::size_t i = 0; i < c.log_w.size(); ++i) {
    double dot = 0.0;
    for (std::size_t a = 0; a < c.n; ++a) dot += c.x[i * c.n + a] * u[a];
    if (dot > 0.0) return false;
  }
  return true;
}

std::vector<double> direction(std::span<const double> angles, std::size_t n) {
  if (n == 1) return {angles[0] >= 0.0 ? 1.0 : -1.0};
  if (n == 2) return {std::cos(angles[0]), std::sin(angles[0])};
  const double sp = std::sin(angles[1]);
  return {sp * std::cos(angles[0]), sp * std::sin(angles[0]), std::cos(angles[1])};
}

}  // namespace

KullbackBound kullback_bound_2(const Density& f, const Density& g, const WeightFunction& phi,
                               const KullbackOptions& opts) {
  const KullbackContext c = make_kullback_context(f, g, phi);
  const std::size_t n = c.n;
  if (n > 3) throw std::invalid_argument("kullback_bound_2: supports of dimension at most 3");
  const Box box{std::vector<double>(n, -opts.box), std::vector<double>(n, opts.box)};
  KullbackBound out;

  // A point of the feasible set: the minimizer of log M_g in the box.
  const ScalarFn neg = [&](std::span<const double> z) { return -c.log_mg(z); };
  const VectorFn neg_grad = [&](std::span<const double> z) {
    auto gm = c.grad_log_mg(z);
    for (double& v : gm) v = -v;
    return gm;
  };
  const MaximizeResult mn = maximize_concave(neg, &neg_grad, {std::vector<double>(n, 0.0)}, box);
  const std::vector<double> zeta0 = mn.argmax;
  if (c.feasible_check(zeta0) < 0.0) {
    out.infeasible = true;
    out.bound = -std::numeric_limits<double>::infinity();
    out.argmax_zeta = zeta0;
    return out;
  }

  auto objective = [&](std::span<const double> z) {
    double s = 0.0;
    for (std::size_t a = 0; a < n; ++a) s += c.e_phi_f[a] * z[a];
    return s;
  };
  out.argmax_zeta = zeta0;
  out.bound = objective(zeta0);
  std::vector<double> zero(n, 0.0);
  if (c.feasible_check(zero) >= 0.0 && objective(zero) >= out.bound) {
    out.argmax_zeta = zero;
    out.bound = 0.0;
  }
  if (norm2(c.e_phi_f) == 0.0) return out;

  // Unbounded when the objective direction itself recedes in the set.
  std::vector<double> ehat = c.e_phi_f;
  for (double& v : ehat) v /= norm2(c.e_phi_f);
  if (recedes(c, ehat)) {
    out.unbounded = true;
    out.bound = std::numeric_limits<double>::infinity();
    out.argmax_zeta = ehat;  // certificate direction
    return out;
  }

  bool best_clipped = false;
  auto along = [&](const std::vector<double>& u, std::vector<double>& z, bool& clipped) {
    const double t = boundary_along(c, zeta0, u, box_exit(zeta0, u, opts.box), clipped);
    z.resize(n);
    for (std::size_t a = 0; a < n; ++a) z[a] = zeta0[a] + t * u[a];
    return objective(z);
  };
  auto consider = [&](const std::vector<double>& u) {
    std::vector<double> z;
    bool clipped = false;
    const double val = along(u, z, clipped);
    if (val > out.bound) {
      out.bound = val;
      out.argmax_zeta = z;
      best_clipped = clipped;
    }
    return val;
  };

  if (n == 1) {
    consider({c.e_phi_f[0] > 0.0 ? 1.0 : -1.0});
  } else {
    // Angular scan, then golden-section refinement one angle at a time.
    const std::size_t na = n == 2 ? 720 : 144, np = n == 2 ? 1 : 72;
    const double two_pi = 2.0 * std::numbers::pi;
    std::vector<double> best{0.0, std::numbers::pi / 2};
    double best_val = -std::numeric_limits<double>::infinity();
    for (std::size_t ia = 0; ia < na; ++ia)
      for (std::size_t ip = 0; ip < np; ++ip) {
        std::vector<double> ang{two_pi * static_cast<double>(ia) / static_cast<double>(na),
                                n == 2 ? 0.0
                                       : std::numbers::pi * (static_cast<double>(ip) + 0.5) /
                                             static_cast<double>(np)};
        const double val = consider(direction(ang, n));
        if (val > best_val) {
          best_val = val;
          best = ang;
        }
      }
    const double da = two_pi / static_cast<double>(na);
    const double dp = std::numbers::pi / static_cast<double>(np);
    for (int sweep = 0; sweep < (n == 2 ? 1 : 4); ++sweep)
      for (std::size_t k = 0; k < n - 1; ++k) {
        const double w = k == 0 ? da : dp;
        const double centre = best[k];
        const auto gs = golden_section_max(
            [&](double a) {
              auto ang = best;
              ang[k] = a;
              return consider(direction(ang, n));
            },
            centre - w, centre + w, 1e-12);
        best[k] = gs.x;
      }
  }
  out.clipped = best_clipped;
  // Stationarity of the Lagrangian: e parallel to grad M_g at the optimum.
  if (!out.clipped) {
    const auto gm = c.grad_log_mg(out.argmax_zeta);
    const double gn = norm2(gm), en = norm2(c.e_phi_f);
    double cosang = 0.0;
    for (std::size_t a = 0; a < n; ++a) cosang += gm[a] * c.e_phi_f[a];
    out.foc_residual = gn > 0.0 ? std::abs(1.0 - cosang / (gn * en)) : 1.0;
  }
  return out;
}

namespace {

Verdict kullback_verdict(const char* id, const Density& f, double value, const KullbackBound& b) {
  Verdict v;
  v.theorem_id = id;
  v.tol = tolerances_for(f.space);
  v.hypothesis_margin = 0.0;
  const double inf = std::numeric_limits<double>::infinity();
  if (value == inf)
    v.conclusion_margin = inf;
  else if (b.bound == inf)
    v.conclusion_margin = -inf;
  else
    v.conclusion_margin = value - b.bound;
  v.note("bound", b.bound);
  v.note("value", value);
  v.note("foc_residual", b.foc_residual);
  for (std::size_t a = 0; a < b.argmax_zeta.size(); ++a)
    v.note("argmax_zeta_" + std::to_string(a), b.argmax_zeta[a]);
  if (b.clipped) v.note("clipped", 1.0);
  if (b.infeasible) v.note("infeasible", 1.0);
  finalize(v, true);
  return v;
}

}  // namespace

Verdict check_kullback_1(const Density& f, const Density& g, const WeightFunction& phi) {
  const KullbackBound b = kullback_bound_1(f, g, phi);
  return kullback_verdict("kullback_1", f, calibrated_relative_we(f, g, phi).value, b);
}

Verdict check_kullback_2(const Density& f, const Density& g, const WeightFunction& phi) {
  const KullbackBound b = kullback_bound_2(f, g, phi);
  return kullback_verdict("kullback_2", f, weighted_relative_entropy(f, g, phi), b);
}

}  // namespace wentropy
