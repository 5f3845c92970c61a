#include "wentropy/measure.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "wentropy/kernels.hpp"

namespace wentropy {

MeasureSpace::MeasureSpace(SpaceKind kind, std::size_t dim, std::vector<double> points,
                           std::vector<double> nu)
    : kind_(kind), dim_(dim), points_(std::move(points)), nu_(std::move(nu)) {
  if (dim_ == 0) throw std::invalid_argument("MeasureSpace: zero dimension");
  if (nu_.empty()) throw std::invalid_argument("MeasureSpace: empty space");
  if (points_.size() != nu_.size() * dim_)
    throw std::invalid_argument("MeasureSpace: points and nu sizes disagree");
  for (double v : nu_)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw std::invalid_argument("MeasureSpace: reference masses must be finite and >= 0");
  for (double p : points_)
    if (!std::isfinite(p)) throw std::invalid_argument("MeasureSpace: non-finite point");
  if (kind_ == SpaceKind::Grid) {
    if (dim_ != 1 || nu_.size() < 2)
      throw std::invalid_argument("MeasureSpace: grid spaces are 1-D with >= 2 points");
    spacing_ = points_[1] - points_[0];
  }
}

double MeasureSpace::total_mass() const {
  double s = 0.0;
  for (double v : nu_) s += v;
  return s;
}

bool MeasureSpace::is_counting() const {
  return kind_ == SpaceKind::Discrete &&
         std::all_of(nu_.begin(), nu_.end(), [](double v) { return v == 1.0; });
}

SpacePtr discrete_space(std::vector<double> points, std::vector<double> nu) {
  if (nu.empty()) nu.assign(points.size(), 1.0);
  return std::make_shared<const MeasureSpace>(SpaceKind::Discrete, 1, std::move(points),
                                              std::move(nu));
}

SpacePtr counting_space(std::size_t n) {
  std::vector<double> pts(n);
  for (std::size_t i = 0; i < n; ++i) pts[i] = static_cast<double>(i + 1);
  return discrete_space(std::move(pts));
}

SpacePtr discrete_space_nd(std::size_t dim, std::vector<double> points,
                           std::vector<double> nu) {
  if (dim == 0 || points.size() % dim != 0)
    throw std::invalid_argument("discrete_space_nd: bad point array");
  if (nu.empty()) nu.assign(points.size() / dim, 1.0);
  return std::make_shared<const MeasureSpace>(SpaceKind::Discrete, dim, std::move(points),
                                              std::move(nu));
}

SpacePtr grid_space(double lo, double hi, std::size_t n) {
  if (n < 2 || !(hi > lo)) throw std::invalid_argument("grid_space: need n >= 2 and hi > lo");
  const double h = (hi - lo) / static_cast<double>(n - 1);
  std::vector<double> pts(n), nu(n, h);
  for (std::size_t i = 0; i < n; ++i) pts[i] = lo + h * static_cast<double>(i);
  pts[n - 1] = hi;
  nu[0] = nu[n - 1] = 0.5 * h;
  return std::make_shared<const MeasureSpace>(SpaceKind::Grid, 1, std::move(pts),
                                              std::move(nu));
}

bool same_space(const MeasureSpace& a, const MeasureSpace& b) {
  return &a == &b || (a.kind() == b.kind() && a.dim() == b.dim() && a.nu() == b.nu() &&
                      a.points() == b.points());
}

ProductSpace::ProductSpace(SpacePtr single) : ProductSpace(std::vector<SpacePtr>{single}) {}

ProductSpace::ProductSpace(std::vector<SpacePtr> axes) : axes_(std::move(axes)) {
  if (axes_.empty()) throw std::invalid_argument("ProductSpace: no axes");
  const std::size_t n = axes_.size();
  shape_.resize(n);
  strides_.resize(n);
  size_ = 1;
  for (std::size_t k = n; k-- > 0;) {
    if (!axes_[k]) throw std::invalid_argument("ProductSpace: null axis");
    shape_[k] = axes_[k]->size();
    strides_[k] = size_;
    size_ *= shape_[k];
    point_dim_ += axes_[k]->dim();
  }
  nu_.assign(size_, 1.0);
  for (std::size_t i = 0; i < size_; ++i) {
    double w = 1.0;
    for (std::size_t k = 0; k < n; ++k) w *= axes_[k]->nu()[axis_index(i, k)];
    nu_[i] = w;
  }
}

void ProductSpace::point(std::size_t flat, std::span<double> out) const {
  std::size_t o = 0;
  for (std::size_t k = 0; k < axes_.size(); ++k) {
    const auto p = axes_[k]->point(axis_index(flat, k));
    for (double c : p) out[o++] = c;
  }
}

std::vector<double> ProductSpace::point(std::size_t flat) const {
  std::vector<double> out(point_dim_);
  point(flat, out);
  return out;
}

ProductSpace ProductSpace::sub(const std::vector<std::size_t>& keep) const {
  std::vector<SpacePtr> ax;
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (keep[i] >= axes_.size()) throw std::invalid_argument("ProductSpace::sub: bad axis");
    if (i > 0 && keep[i] <= keep[i - 1])
      throw std::invalid_argument("ProductSpace::sub: axes must be increasing");
    ax.push_back(axes_[keep[i]]);
  }
  return ProductSpace(std::move(ax));
}

std::vector<std::size_t> ProductSpace::projection(const std::vector<std::size_t>& keep) const {
  const ProductSpace s = sub(keep);
  std::vector<std::size_t> map(size_);
  for (std::size_t i = 0; i < size_; ++i) {
    std::size_t j = 0;
    for (std::size_t t = 0; t < keep.size(); ++t) j += axis_index(i, keep[t]) * s.strides()[t];
    map[i] = j;
  }
  return map;
}

bool ProductSpace::all_grid() const {
  return std::all_of(axes_.begin(), axes_.end(),
                     [](const SpacePtr& a) { return a->kind() == SpaceKind::Grid; });
}

bool same_space(const ProductSpace& a, const ProductSpace& b) {
  if (a.arity() != b.arity()) return false;
  for (std::size_t k = 0; k < a.arity(); ++k)
    if (!same_space(*a.axis(k), *b.axis(k))) return false;
  return true;
}

Field::Field(ProductSpace s, std::vector<double> v) : space(std::move(s)), values(std::move(v)) {
  if (values.size() != space.size())
    throw std::invalid_argument("Field: value count does not match the space");
  for (double x : values)
    if (!(x >= 0.0) || !std::isfinite(x))
      throw std::invalid_argument("Field: values must be finite and nonnegative");
}

double Density::mass() const { return integrate(values, space); }

bool Density::normalized(double tol) const { return std::abs(mass() - 1.0) <= tol; }

WeightFunction WeightFunction::constant(const ProductSpace& s, double c) {
  return WeightFunction(s, std::vector<double>(s.size(), c));
}

StochasticKernel::StochasticKernel(SpacePtr in_, SpacePtr out_, std::vector<double> v)
    : in(std::move(in_)), out(std::move(out_)), values(std::move(v)) {
  if (!in || !out) throw std::invalid_argument("StochasticKernel: null space");
  if (values.size() != in->size() * out->size())
    throw std::invalid_argument("StochasticKernel: shape mismatch");
  for (std::size_t u = 0; u < in->size(); ++u) {
    double s = 0.0;
    for (std::size_t x = 0; x < out->size(); ++x) {
      const double p = (*this)(u, x);
      if (!(p >= 0.0) || !std::isfinite(p))
        throw std::invalid_argument("StochasticKernel: entries must be finite and >= 0");
      s += p * out->nu()[x];
    }
    if (std::abs(s - 1.0) > kTolNorm)
      throw std::invalid_argument("StochasticKernel: row " + std::to_string(u) +
                                  " does not integrate to 1");
  }
}

double integrate(std::span<const double> h, std::span<const double> nu) {
  if (h.size() != nu.size()) throw std::invalid_argument("integrate: size mismatch");
  for (std::size_t i = 0; i < h.size(); ++i)
    if (nu[i] > 0.0 && !std::isfinite(h[i]))
      throw std::domain_error("integrate: non-finite integrand");
  return kernels::reduce_sum(h.size(), [&](std::size_t i) { return h[i] * nu[i]; });
}

double integrate(std::span<const double> h, const ProductSpace& space) {
  return integrate(h, std::span<const double>(space.nu()));
}

Density marginalize(const Density& joint, const std::vector<std::size_t>& keep) {
  const ProductSpace sub = joint.space.sub(keep);
  const auto map = joint.space.projection(keep);
  const auto& nu = joint.space.nu();
  std::vector<double> out(sub.size(), 0.0);
  // nu(x) = nu_keep(x_keep) * nu_rest(x_rest); divide the kept part back out.
  for (std::size_t i = 0; i < joint.size(); ++i) {
    const double nk = sub.nu()[map[i]];
    if (nk > 0.0) out[map[i]] += joint.values[i] * nu[i] / nk;
  }
  return Density(sub, std::move(out));
}

Conditional condition(const Density& joint, const std::vector<std::size_t>& given) {
  Conditional c;
  c.given_marginal = marginalize(joint, given);
  const auto map = joint.space.projection(given);
  c.values.assign(joint.size(), 0.0);
  for (std::size_t i = 0; i < joint.size(); ++i) {
    const double m = c.given_marginal.values[map[i]];
    if (m > 0.0) c.values[i] = joint.values[i] / m;
  }
  for (std::size_t j = 0; j < c.given_marginal.size(); ++j)
    if (c.given_marginal.values[j] == 0.0) c.zero_marginal.push_back(j);
  return c;
}

Density apply_kernel(const Density& f, const StochasticKernel& k) {
  if (f.arity() != 1 || !same_space(*f.space.axis(0), *k.in))
    throw std::invalid_argument("apply_kernel: density is not on the kernel's input space");
  const auto& nu = k.in->nu();
  std::vector<double> out(k.out->size(), 0.0);
  for (std::size_t u = 0; u < k.in->size(); ++u)
    for (std::size_t x = 0; x < k.out->size(); ++x) out[x] += f.values[u] * k(u, x) * nu[u];
  return Density(ProductSpace(k.out), std::move(out));
}

std::size_t default_grid_points(std::size_t d) {
  switch (d) {
    case 1: return 4097;
    case 2: return 257;
    case 3: return 65;
    default: throw std::invalid_argument("grid dimension must be 1, 2 or 3");
  }
}

ProductSpace make_gaussian_grid(const Matrix& cov, double half_width, std::size_t points,
                                std::span<const double> mean) {
  const std::size_t d = cov.rows();
  if (!cov.square() || d == 0) throw std::invalid_argument("make_gaussian_grid: bad covariance");
  if (d > 3) throw std::invalid_argument("make_gaussian_grid: dimension above 3");
  if (!spd_factor(symmetrize(cov)))
    throw std::invalid_argument("make_gaussian_grid: covariance not positive definite");
  if (points == 0) points = default_grid_points(d);
  if (points < 33 || points % 2 == 0)
    throw std::invalid_argument("make_gaussian_grid: points must be odd and >= 33");
  if (half_width < 6.0) throw std::invalid_argument("make_gaussian_grid: half_width < 6");
  if (!mean.empty() && mean.size() != d)
    throw std::invalid_argument("make_gaussian_grid: mean size");
  std::vector<SpacePtr> axes;
  for (std::size_t i = 0; i < d; ++i) {
    const double c = mean.empty() ? 0.0 : mean[i];
    const double r = half_width * std::sqrt(cov(i, i));
    axes.push_back(grid_space(c - r, c + r, points));
  }
  return ProductSpace(std::move(axes));
}

Density gaussian_density(const ProductSpace& space, const Matrix& cov,
                         std::span<const double> mean) {
  const std::size_t d = cov.rows();
  if (space.point_dim() != d) throw std::invalid_argument("gaussian_density: dimension mismatch");
  auto ch = spd_factor(symmetrize(cov));
  if (!ch) throw std::invalid_argument("gaussian_density: covariance not positive definite");
  const double lognorm =
      -0.5 * (static_cast<double>(d) * std::log(2.0 * std::numbers::pi) + ch->logdet);
  std::vector<double> vals(space.size());
  std::vector<double> x(d);
  for (std::size_t i = 0; i < space.size(); ++i) {
    space.point(i, x);
    if (!mean.empty())
      for (std::size_t k = 0; k < d; ++k) x[k] -= mean[k];
    // Forward substitution L y = x gives the quadratic form |y|^2.
    double q = 0.0;
    std::vector<double> y(d);
    for (std::size_t r = 0; r < d; ++r) {
      double s = x[r];
      for (std::size_t k = 0; k < r; ++k) s -= ch->lower(r, k) * y[k];
      y[r] = s / ch->lower(r, r);
      q += y[r] * y[r];
    }
    vals[i] = std::exp(lognorm - 0.5 * q);
  }
  return Density(space, std::move(vals));
}

WeightFunction tabulate_weight(const ProductSpace& space, const PointWeight& fn) {
  std::vector<double> vals(space.size());
  std::vector<double> x(space.point_dim());
  for (std::size_t i = 0; i < space.size(); ++i) {
    space.point(i, x);
    vals[i] = fn(x);
  }
  return WeightFunction(space, std::move(vals));
}

PointWeight step_weight(double threshold, std::size_t axis) {
  return [threshold, axis](std::span<const double> x) {
    const double t = x[axis];
    return t > threshold ? 1.0 : (t == threshold ? 0.5 : 0.0);
  };
}

std::vector<double> product_of_marginals(const Density& joint) {
  std::vector<double> out(joint.size(), 1.0);
  for (std::size_t k = 0; k < joint.arity(); ++k) {
    const Density m = marginalize(joint, {k});
    for (std::size_t i = 0; i < joint.size(); ++i)
      out[i] *= m.values[joint.space.axis_index(i, k)];
  }
  return out;
}

}  // namespace wentropy
