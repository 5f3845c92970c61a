#include "wentropy/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace wentropy {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) throw std::invalid_argument("Matrix: size mismatch");
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> d) {
  Matrix m(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

double Matrix::trace() const {
  double s = 0.0;
  for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) s += (*this)(i, i);
  return s;
}

double Matrix::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

Matrix& Matrix::operator+=(const Matrix& o) {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw std::invalid_argument("Matrix +: shape");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& o) {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw std::invalid_argument("Matrix -: shape");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(Matrix a, double s) { return a *= s; }
Matrix operator*(double s, Matrix a) { return a *= s; }

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("Matrix *: shape");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

namespace {

// Plain Cholesky; fails when a pivot is not above `floor`.
std::optional<Matrix> cholesky_lower(const Matrix& a, double floor) {
  const std::size_t n = a.rows();
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > floor) || !std::isfinite(d)) return std::nullopt;
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / ljj;
    }
  }
  return l;
}

}  // namespace

std::vector<double> Cholesky::solve(std::span<const double> b) const {
  const std::size_t n = lower.rows();
  if (b.size() != n) throw std::invalid_argument("Cholesky::solve: size");
  std::vector<double> y(b.begin(), b.end());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < i; ++k) y[i] -= lower(i, k) * y[k];
    y[i] /= lower(i, i);
  }
  for (std::size_t ii = n; ii-- > 0;) {
    for (std::size_t k = ii + 1; k < n; ++k) y[ii] -= lower(k, ii) * y[k];
    y[ii] /= lower(ii, ii);
  }
  return y;
}

Matrix Cholesky::solve(const Matrix& b) const {
  Matrix x(b.rows(), b.cols());
  std::vector<double> col(b.rows());
  for (std::size_t j = 0; j < b.cols(); ++j) {
    for (std::size_t i = 0; i < b.rows(); ++i) col[i] = b(i, j);
    const auto s = solve(col);
    for (std::size_t i = 0; i < b.rows(); ++i) x(i, j) = s[i];
  }
  return x;
}

Matrix Cholesky::inverse() const { return solve(Matrix::identity(lower.rows())); }

std::optional<Cholesky> spd_factor(const Matrix& a) {
  if (!a.square()) throw std::invalid_argument("spd_factor: matrix not square");
  double scale = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) scale = std::max(scale, std::abs(a(i, i)));
  auto l = cholesky_lower(a, 1e-14 * scale);
  if (!l) return std::nullopt;
  Cholesky c;
  c.lower = std::move(*l);
  for (std::size_t i = 0; i < a.rows(); ++i) c.logdet += 2.0 * std::log(c.lower(i, i));
  return c;
}

Matrix spd_inverse(const Matrix& a) {
  auto c = spd_factor(a);
  if (!c) throw std::domain_error("spd_inverse: matrix is not positive definite");
  Matrix inv = c->inverse();
  return symmetrize(inv, std::numeric_limits<double>::infinity());
}

Matrix symmetrize(const Matrix& a, double sym_tol) {
  if (!a.square()) throw std::invalid_argument("symmetrize: matrix not square");
  Matrix s(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      if (std::abs(a(i, j) - a(j, i)) > sym_tol)
        throw std::invalid_argument("symmetrize: matrix is not symmetric");
      s(i, j) = 0.5 * (a(i, j) + a(j, i));
    }
  return s;
}

double min_eig_margin(const Matrix& a, double sym_tol) {
  const Matrix s = symmetrize(a, sym_tol);
  const std::size_t n = s.rows();
  if (n == 0) throw std::invalid_argument("min_eig_margin: empty matrix");
  if (n == 1) return s(0, 0);
  double lo = std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double r = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) r += std::abs(s(i, j));
    lo = std::min(lo, s(i, i) - r);
    hi = std::min(hi, s(i, i));
    scale = std::max(scale, std::abs(s(i, i)) + r);
  }
  if (scale == 0.0) return 0.0;
  const double tol = 1e-15 * scale;
  Matrix shifted = s;
  auto positive_after_shift = [&](double t) {
    for (std::size_t i = 0; i < n; ++i) shifted(i, i) = s(i, i) - t;
    return cholesky_lower(shifted, 0.0).has_value();
  };
  lo -= tol;
  for (int it = 0; it < 200 && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (positive_after_shift(mid))
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

SymEig sym_eig(const Matrix& a, double sym_tol) {
  Matrix m = symmetrize(a, sym_tol);
  const std::size_t n = m.rows();
  Matrix v = Matrix::identity(n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += m(p, q) * m(p, q);
    if (off < 1e-300) break;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        if (m(p, q) == 0.0) continue;
        const double theta = (m(q, q) - m(p, p)) / (2.0 * m(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double mkp = m(k, p), mkq = m(k, q);
          m(k, p) = c * mkp - sn * mkq;
          m(k, q) = sn * mkp + c * mkq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double mpk = m(p, k), mqk = m(q, k);
          m(p, k) = c * mpk - sn * mqk;
          m(q, k) = sn * mpk + c * mqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - sn * vkq;
          v(k, q) = sn * vkp + c * vkq;
        }
      }
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return m(i, i) < m(j, j); });
  SymEig out;
  out.vectors = Matrix(n, n);
  for (std::size_t c = 0; c < n; ++c) {
    out.eigenvalues.push_back(m(order[c], order[c]));
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, c) = v(r, order[c]);
  }
  const Matrix s = symmetrize(a, sym_tol);
  for (std::size_t c = 0; c < n; ++c)
    for (std::size_t r = 0; r < n; ++r) {
      double av = 0.0;
      for (std::size_t k = 0; k < n; ++k) av += s(r, k) * out.vectors(k, c);
      out.residual =
          std::max(out.residual, std::abs(av - out.eigenvalues[c] * out.vectors(r, c)));
    }
  return out;
}

Matrix finite_diff_jacobian(const VectorFn& fn, std::span<const double> theta,
                            double rel_step) {
  const std::size_t m = theta.size();
  std::vector<double> t(theta.begin(), theta.end());
  Matrix jac;
  for (std::size_t j = 0; j < m; ++j) {
    const double h = rel_step * (1.0 + std::abs(theta[j]));
    t[j] = theta[j] + h;
    const auto fp = fn(t);
    t[j] = theta[j] - h;
    const auto fm = fn(t);
    t[j] = theta[j];
    if (fp.size() != fm.size()) throw std::runtime_error("finite_diff_jacobian: size changed");
    if (j == 0) jac = Matrix(fp.size(), m);
    if (fp.size() != jac.rows()) throw std::runtime_error("finite_diff_jacobian: size changed");
    for (std::size_t i = 0; i < fp.size(); ++i) jac(i, j) = (fp[i] - fm[i]) / (2.0 * h);
  }
  return jac;
}

namespace {

void clamp_to(std::vector<double>& x, const Box& box) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!box.lo.empty()) x[i] = std::max(x[i], box.lo[i]);
    if (!box.hi.empty()) x[i] = std::min(x[i], box.hi[i]);
  }
}

bool on_lower(const Box& box, const std::vector<double>& x, std::size_t i) {
  return !box.lo.empty() && x[i] <= box.lo[i];
}
bool on_upper(const Box& box, const std::vector<double>& x, std::size_t i) {
  return !box.hi.empty() && x[i] >= box.hi[i];
}

double projected_grad_norm(const Box& box, const std::vector<double>& x,
                           const std::vector<double>& g, bool& blocked) {
  double n = 0.0;
  blocked = false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if ((g[i] < 0 && on_lower(box, x, i)) || (g[i] > 0 && on_upper(box, x, i))) {
      blocked = true;
      continue;
    }
    n = std::max(n, std::abs(g[i]));
  }
  return n;
}

MaximizeResult ascend(const ScalarFn& fn, const VectorFn& grad, std::vector<double> x,
                      const Box& box, const MaximizeOptions& opts) {
  clamp_to(x, box);
  double fx = fn(x);
  double step = 1.0;
  MaximizeResult r;
  bool blocked = false;
  double pg = 0.0;
  std::size_t it = 0;
  for (; it < opts.max_iter; ++it) {
    const auto g = grad(x);
    pg = projected_grad_norm(box, x, g, blocked);
    if (pg <= opts.grad_tol) break;
    bool moved = false;
    for (int half = 0; half < 80; ++half) {
      std::vector<double> y(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + step * g[i];
      clamp_to(y, box);
      double dir = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) dir += g[i] * (y[i] - x[i]);
      const double fy = fn(y);
      bool accept = std::isfinite(fy) && fy >= fx + 1e-4 * dir;
      if (!accept && std::isfinite(fy) && std::abs(fy - fx) <= 1e-12 * (1.0 + std::abs(fx))) {
        // Values are flat at rounding level; a concave function still
        // increases along the step if the slope at y points the same way.
        const auto gy = grad(y);
        double slope = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) slope += gy[i] * (y[i] - x[i]);
        accept = slope >= 0.0 && y != x;
      }
      if (accept) {
        moved = fy > fx || y != x;
        x = std::move(y);
        fx = fy;
        step = std::min(step * 2.0, 1e6);
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  const auto g = grad(x);
  r.foc_residual = projected_grad_norm(box, x, g, blocked);
  r.argmax = std::move(x);
  r.value = fx;
  r.at_boundary = blocked;
  r.iterations = it;
  return r;
}

MaximizeResult coordinate_golden(const ScalarFn& fn, std::vector<double> x, const Box& box,
                                 const MaximizeOptions& opts) {
  for (std::size_t i = 0; i < x.size(); ++i)
    if (box.lo.empty() || box.hi.empty() || !std::isfinite(box.lo[i]) ||
        !std::isfinite(box.hi[i]))
      throw std::invalid_argument("maximize_concave: golden section needs a finite box");
  clamp_to(x, box);
  double fx = fn(x);
  double gain = 0.0;
  std::size_t sweep = 0;
  for (; sweep < opts.max_sweeps; ++sweep) {
    const double before = fx;
    for (std::size_t i = 0; i < x.size(); ++i) {
      auto line = [&](double t) {
        std::vector<double> y = x;
        y[i] = t;
        return fn(y);
      };
      const auto g = golden_section_max(line, box.lo[i], box.hi[i], opts.golden_tol);
      if (g.value >= fx) {
        x[i] = g.x;
        fx = g.value;
      }
    }
    gain = fx - before;
    if (gain <= opts.golden_tol) break;
  }
  MaximizeResult r;
  bool edge = false;
  for (std::size_t i = 0; i < x.size(); ++i)
    edge = edge || x[i] - box.lo[i] < 1e-8 || box.hi[i] - x[i] < 1e-8;
  r.argmax = std::move(x);
  r.value = fx;
  r.foc_residual = gain;
  r.at_boundary = edge;
  r.iterations = sweep;
  return r;
}

}  // namespace

MaximizeResult maximize_concave(const ScalarFn& fn, const VectorFn* grad,
                                const std::vector<std::vector<double>>& starts,
                                const Box& box, const MaximizeOptions& opts) {
  if (starts.empty()) throw std::invalid_argument("maximize_concave: no starting point");
  std::vector<MaximizeResult> results(starts.size());
#pragma omp parallel for schedule(static) if (starts.size() > 1)
  for (std::ptrdiff_t s = 0; s < static_cast<std::ptrdiff_t>(starts.size()); ++s) {
    const auto& x0 = starts[static_cast<std::size_t>(s)];
    results[static_cast<std::size_t>(s)] =
        grad ? ascend(fn, *grad, x0, box, opts) : coordinate_golden(fn, x0, box, opts);
  }
  std::size_t best = 0;
  for (std::size_t s = 1; s < results.size(); ++s) {
    const auto& a = results[s];
    const auto& b = results[best];
    if (a.value > b.value || (a.value == b.value && a.argmax < b.argmax)) best = s;
  }
  return results[best];
}

GoldenResult golden_section_max(const std::function<double(double)>& fn, double a, double b,
                                double tol, std::size_t max_iter) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = fn(c), fd = fn(d);
  for (std::size_t it = 0; it < max_iter && (b - a) > tol * (1.0 + std::abs(a) + std::abs(b));
       ++it) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = fn(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = fn(d);
    }
  }
  GoldenResult best{c, fc};
  if (fd > best.value) best = {d, fd};
  for (double e : {a, b}) {
    const double fe = fn(e);
    if (fe > best.value) best = {e, fe};
  }
  return best;
}

}  // namespace wentropy
