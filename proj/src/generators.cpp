#include "wentropy/generators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "wentropy/cramer_rao.hpp"
#include "wentropy/extremal.hpp"
#include "wentropy/inequalities.hpp"

namespace wentropy {

ProductSpace random_counting_space(CounterRng& rng, std::size_t axes, const GenOptions& o) {
  if (o.max_support < 2) throw std::invalid_argument("max_support must be at least 2");
  std::vector<SpacePtr> ax;
  for (std::size_t k = 0; k < axes; ++k) ax.push_back(counting_space(rng.integer(2, o.max_support)));
  return ProductSpace(ax);
}

Density dirichlet_density(CounterRng& rng, const ProductSpace& s) {
  std::vector<double> v(s.size());
  double total = 0.0;
  for (double& x : v) total += (x = rng.exponential());
  for (double& x : v) x /= total;
  return Density(s, std::move(v));
}

WeightFunction log_uniform_weight(CounterRng& rng, const ProductSpace& s, const GenOptions& o) {
  std::vector<double> v(s.size());
  for (double& x : v) x = rng.log_uniform(o.phi_lo, o.phi_hi);
  return WeightFunction(s, std::move(v));
}

StochasticKernel random_kernel(CounterRng& rng, const SpacePtr& in, const SpacePtr& out) {
  std::vector<double> v;
  v.reserve(in->size() * out->size());
  for (std::size_t u = 0; u < in->size(); ++u) {
    const Density row = dirichlet_density(rng, ProductSpace(out));
    v.insert(v.end(), row.values.begin(), row.values.end());
  }
  return StochasticKernel(in, out, std::move(v));
}

namespace {

SpacePtr random_axis(CounterRng& rng, const GenOptions& o) {
  return counting_space(rng.integer(2, o.max_support));
}

Instance densities_and_weight(CounterRng& rng, const GenOptions& o, std::size_t axes,
                              std::size_t count) {
  Instance in;
  const ProductSpace s = random_counting_space(rng, axes, o);
  for (std::size_t i = 0; i < count; ++i) in.densities.push_back(dirichlet_density(rng, s));
  in.weights.push_back(log_uniform_weight(rng, s, o));
  return in;
}

// f(a, b, c) = f1(a) K12(a, b) K23(b, c).
Density chain_joint(const Density& f1, const StochasticKernel& k12, const StochasticKernel& k23) {
  const ProductSpace s({k12.in, k12.out, k23.out});
  std::vector<double> v(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const std::size_t a = s.axis_index(i, 0), b = s.axis_index(i, 1), c = s.axis_index(i, 2);
    v[i] = f1.values[a] * k12(a, b) * k23(b, c);
  }
  return Density(s, std::move(v));
}

Instance markov_instance(CounterRng& rng, const GenOptions& o, bool stationary) {
  Instance in;
  if (stationary) {
    const SpacePtr ax = random_axis(rng, o);
    const StochasticKernel k = random_kernel(rng, ax, ax);
    // stationary law by power iteration; rows are strictly positive
    std::vector<double> p(ax->size(), 1.0 / static_cast<double>(ax->size()));
    for (int it = 0; it < 5000; ++it) {
      std::vector<double> q(p.size(), 0.0);
      for (std::size_t a = 0; a < p.size(); ++a)
        for (std::size_t b = 0; b < p.size(); ++b) q[b] += p[a] * k(a, b);
      double d = 0.0;
      for (std::size_t a = 0; a < p.size(); ++a) d = std::max(d, std::abs(q[a] - p[a]));
      p = q;
      if (d == 0.0) break;
    }
    const Density j = chain_joint(Density(ProductSpace(ax), p), k, k);
    in.densities.push_back(j);
    // a constant weight keeps the two conditional entropies comparable
    in.weights.push_back(WeightFunction::constant(j.space, rng.log_uniform(o.phi_lo, o.phi_hi)));
    return in;
  }
  const SpacePtr a1 = random_axis(rng, o), a2 = random_axis(rng, o), a3 = random_axis(rng, o);
  const Density f1 = dirichlet_density(rng, ProductSpace(a1));
  const StochasticKernel k12 = random_kernel(rng, a1, a2);
  const StochasticKernel k23 = random_kernel(rng, a2, a3);
  const Density j = chain_joint(f1, k12, k23);
  in.densities.push_back(j);
  in.weights.push_back(log_uniform_weight(rng, j.space, o));
  return in;
}

std::vector<double> normals(CounterRng& rng, std::size_t n, double scale = 1.0) {
  std::vector<double> v(n);
  for (double& x : v) x = scale * rng.normal();
  return v;
}

// Softmax family on the given support with m parameters; theta in scalars.
void add_softmax(Instance& in, CounterRng& rng, const ProductSpace& s, std::size_t m) {
  in.family = std::make_shared<const ParametricFamily>(softmax_family(s, m, normals(rng, s.size() * m)));
  in.scalars = normals(rng, m, 0.5);
}

Checker simple(std::string name, std::size_t axes, std::size_t count,
               std::function<Verdict(const Instance&)> eval) {
  return {std::move(name),
          [axes, count](CounterRng& rng, const GenOptions& o) {
            return densities_and_weight(rng, o, axes, count);
          },
          std::move(eval)};
}

std::vector<Checker> build_registry() {
  std::vector<Checker> r;
  const auto& d = [](const Instance& in, std::size_t i) -> const Density& { return in.densities[i]; };
  const auto& w = [](const Instance& in) -> const WeightFunction& { return in.weights[0]; };

  r.push_back(simple("gibbs", 1, 2, [=](const Instance& in) {
    return check_gibbs(d(in, 0), d(in, 1), w(in));
  }));
  r.push_back({"uniform_bound",
               [](CounterRng& rng, const GenOptions& o) {
                 Instance in = densities_and_weight(rng, o, 1, 1);
                 const double n = static_cast<double>(in.densities[0].size());
                 in.scalars = {std::min(1.0, rng.uniform(0.01, 2.0) / n)};
                 return in;
               },
               [=](const Instance& in) { return check_uniform_bound(d(in, 0), w(in), in.scalars[0]); }});
  r.push_back(simple("conditional_nonneg_pair", 2, 1, [=](const Instance& in) {
    return check_conditional_nonneg(d(in, 0), w(in), PairOrTriple::Pair);
  }));
  r.push_back(simple("conditional_nonneg_triple", 3, 1, [=](const Instance& in) {
    return check_conditional_nonneg(d(in, 0), w(in), PairOrTriple::Triple);
  }));
  r.push_back(simple("subadditivity_pair", 2, 1, [=](const Instance& in) {
    return check_subadditivity(d(in, 0), w(in), PairOrTriple::Pair);
  }));
  r.push_back(simple("subadditivity_triple", 3, 1, [=](const Instance& in) {
    return check_subadditivity(d(in, 0), w(in), PairOrTriple::Triple);
  }));
  r.push_back(simple("conditional_bound_joint_given_third", 3, 1, [=](const Instance& in) {
    return check_conditional_bound(d(in, 0), w(in), ConditionalBound::JointGivenThird);
  }));
  r.push_back(simple("conditional_bound_joint_given_second", 3, 1, [=](const Instance& in) {
    return check_conditional_bound(d(in, 0), w(in), ConditionalBound::JointGivenSecond);
  }));
  r.push_back(simple("conditional_bound_conditioning_reduces", 3, 1, [=](const Instance& in) {
    return check_conditional_bound(d(in, 0), w(in), ConditionalBound::ConditioningReduces);
  }));
  r.push_back(simple("conditional_subadditivity", 3, 1, [=](const Instance& in) {
    return check_conditional_subadditivity(d(in, 0), w(in));
  }));
  r.push_back(simple("strong_subadditivity", 3, 1, [=](const Instance& in) {
    return check_strong_subadditivity(d(in, 0), w(in));
  }));
  r.push_back({"concavity_we",
               [](CounterRng& rng, const GenOptions& o) {
                 Instance in = densities_and_weight(rng, o, 1, 2);
                 in.scalars = {rng.uniform()};
                 return in;
               },
               [=](const Instance& in) {
                 return check_concavity_we(d(in, 0), d(in, 1), in.scalars[0], w(in));
               }});
  r.push_back({"convexity_relative_we",
               [](CounterRng& rng, const GenOptions& o) {
                 Instance in = densities_and_weight(rng, o, 1, 4);
                 in.scalars = {rng.uniform()};
                 return in;
               },
               [=](const Instance& in) {
                 return check_convexity_relative_we(d(in, 0), d(in, 1), d(in, 2), d(in, 3),
                                                    in.scalars[0], w(in));
               }});
  r.push_back({"dp_relative",
               [](CounterRng& rng, const GenOptions& o) {
                 Instance in;
                 const SpacePtr a = random_axis(rng, o), b = random_axis(rng, o);
                 in.densities = {dirichlet_density(rng, ProductSpace(a)),
                                 dirichlet_density(rng, ProductSpace(a))};
                 in.kernels.push_back(random_kernel(rng, a, b));
                 in.weights.push_back(log_uniform_weight(rng, ProductSpace(b), o));
                 return in;
               },
               [=](const Instance& in) {
                 return check_dp_relative(d(in, 0), d(in, 1), w(in), in.kernels[0]);
               }});
  const std::pair<const char*, MarkovMode> modes[] = {
      {"dp_markov_conditional", MarkovMode::Conditional},
      {"dp_markov_doubling", MarkovMode::ConditionalDoubling},
      {"dp_markov_mutual", MarkovMode::Mutual}};
  for (const auto& [name, mode] : modes) {
    const bool stationary = mode == MarkovMode::ConditionalDoubling;
    r.push_back({name,
                 [stationary](CounterRng& rng, const GenOptions& o) {
                   return markov_instance(rng, o, stationary);
                 },
                 [=, mode = mode](const Instance& in) { return check_dp_markov(d(in, 0), w(in), mode); }});
  }
  r.push_back({"mutual_convex_in_channel",
               [](CounterRng& rng, const GenOptions& o) {
                 Instance in;
                 const SpacePtr a = random_axis(rng, o), b = random_axis(rng, o);
                 in.densities = {dirichlet_density(rng, ProductSpace(a))};
                 in.kernels = {random_kernel(rng, a, b), random_kernel(rng, a, b)};
                 in.weights.push_back(log_uniform_weight(rng, ProductSpace({a, b}), o));
                 in.scalars = {rng.uniform()};
                 return in;
               },
               [=](const Instance& in) {
                 return check_mutual_convex_in_channel(d(in, 0), in.kernels[0], in.kernels[1],
                                                       in.scalars[0], w(in));
               }});
  r.push_back({"mutual_concave_in_input",
               [](CounterRng& rng, const GenOptions& o) {
                 Instance in;
                 const SpacePtr a = random_axis(rng, o), b = random_axis(rng, o);
                 in.densities = {dirichlet_density(rng, ProductSpace(a)),
                                 dirichlet_density(rng, ProductSpace(a))};
                 in.kernels = {random_kernel(rng, a, b)};
                 const WeightFunction out = log_uniform_weight(rng, ProductSpace(b), o);
                 const ProductSpace joint({a, b});
                 std::vector<double> v(joint.size());
                 for (std::size_t i = 0; i < v.size(); ++i) v[i] = out.values[joint.axis_index(i, 1)];
                 in.weights.push_back(WeightFunction(joint, std::move(v)));
                 in.scalars = {rng.uniform()};
                 return in;
               },
               [=](const Instance& in) {
                 return check_mutual_concave_in_input(d(in, 0), d(in, 1), in.kernels[0],
                                                      in.scalars[0], w(in));
               }});
  r.push_back({"fano",
               [](CounterRng& rng, const GenOptions& o) {
                 Instance in = densities_and_weight(rng, o, 1, 1);
                 in.scalars = {static_cast<double>(rng.integer(0, in.densities[0].size() - 1))};
                 return in;
               },
               [=](const Instance& in) {
                 FanoContext ctx;
                 ctx.x_star = static_cast<std::size_t>(in.scalars[0]);
                 return check_fano(d(in, 0), w(in), ctx);
               }});
  r.push_back({"generalized_fano",
               [](CounterRng& rng, const GenOptions& o) {
                 Instance in;
                 const std::size_t k1 = rng.integer(2, o.max_support);
                 const std::size_t m = rng.integer(2, k1);
                 const ProductSpace s({counting_space(k1), counting_space(m)});
                 in.densities = {dirichlet_density(rng, s)};
                 in.weights = {log_uniform_weight(rng, s, o)};
                 return in;
               },
               [=](const Instance& in) { return check_generalized_fano(d(in, 0), w(in)); }});
  r.push_back({"multi_subadditivity",
               [](CounterRng& rng, const GenOptions& o) {
                 return densities_and_weight(rng, o, rng.integer(2, 3), 1);
               },
               [=](const Instance& in) { return check_multi_subadditivity(d(in, 0), w(in)); }});
  r.push_back(simple("max_we_direct", 1, 2, [=](const Instance& in) {
    return check_max_we_direct(d(in, 0), d(in, 1), w(in));
  }));
  r.push_back({"max_we_gibbsian",
               [](CounterRng& rng, const GenOptions& o) {
                 const ProductSpace s = random_counting_space(rng, 2, o);
                 Instance in;
                 in.weights.push_back(log_uniform_weight(rng, s, o));
                 auto& phi = in.weights[0].values;
                 const auto beta = normals(rng, s.size());
                 const double b = rng.uniform(-2.0, 2.0);
                 double z = 0.0;
                 for (double x : beta) z += std::exp(-b * x);
                 std::vector<double> fs(s.size());
                 for (std::size_t i = 0; i < s.size(); ++i) fs[i] = std::exp(-b * beta[i]) / z;
                 // rescale phi so that f* carries unit weighted mass
                 double mass = 0.0, moment = 0.0;
                 for (std::size_t i = 0; i < s.size(); ++i) mass += phi[i] * fs[i];
                 for (double& x : phi) x /= mass;
                 for (std::size_t i = 0; i < s.size(); ++i) moment += phi[i] * fs[i] * beta[i];
                 // f = f* + t h with h orthogonal to 1, phi and phi beta, so f meets
                 // both equality constraints with zero mass gap
                 std::vector<std::vector<double>> basis;
                 auto orthogonalize = [&basis](std::vector<double> v) {
                   for (const auto& e : basis) {
                     double dot = 0.0;
                     for (std::size_t i = 0; i < v.size(); ++i) dot += v[i] * e[i];
                     for (std::size_t i = 0; i < v.size(); ++i) v[i] -= dot * e[i];
                   }
                   double norm = 0.0;
                   for (double x : v) norm += x * x;
                   norm = std::sqrt(norm);
                   if (norm > 1e-10)
                     for (double& x : v) x /= norm;
                   else
                     v.assign(v.size(), 0.0);
                   return v;
                 };
                 std::vector<double> pb(s.size());
                 for (std::size_t i = 0; i < s.size(); ++i) pb[i] = phi[i] * beta[i];
                 for (const auto& v : {std::vector<double>(s.size(), 1.0), phi, pb})
                   basis.push_back(orthogonalize(v));
                 const auto h = orthogonalize(normals(rng, s.size()));
                 double t = std::numeric_limits<double>::infinity();
                 for (std::size_t i = 0; i < s.size(); ++i)
                   if (h[i] < 0.0) t = std::min(t, -fs[i] / h[i]);
                 if (!std::isfinite(t)) t = 0.0;
                 t *= rng.uniform();
                 std::vector<double> f(s.size());
                 for (std::size_t i = 0; i < s.size(); ++i) f[i] = std::max(0.0, fs[i] + t * h[i]);
                 in.densities.push_back(Density(s, std::move(f)));
                 in.scalars = {b, z, moment};
                 in.scalars.insert(in.scalars.end(), beta.begin(), beta.end());
                 return in;
               },
               [=](const Instance& in) {
                 GibbsianSpec spec;
                 spec.b = in.scalars[0];
                 spec.z = in.scalars[1];
                 spec.c = in.scalars[2];
                 spec.beta.assign(in.scalars.begin() + 3, in.scalars.end());
                 return check_max_we_gibbsian(d(in, 0), spec, w(in));
               }});
  r.push_back({"chain_rule",
               [](CounterRng& rng, const GenOptions& o) {
                 Instance in;
                 const ProductSpace s = random_counting_space(rng, 2, o);
                 add_softmax(in, rng, s, rng.integer(1, 2));
                 auto fam = std::make_shared<ParametricFamily>(*in.family);
                 fam->x_axes = 1;
                 in.family = fam;
                 in.weights = {log_uniform_weight(rng, s, o)};
                 return in;
               },
               [=](const Instance& in) { return check_chain_rule(*in.family, w(in), in.scalars); }});
  r.push_back({"data_refinement", r.back().draw, [=](const Instance& in) {
                 return check_data_refinement(*in.family, w(in), in.scalars);
               }});
  r.push_back({"dp_fisher",
               [](CounterRng& rng, const GenOptions& o) {
                 Instance in;
                 const std::size_t n = rng.integer(2, o.max_support);
                 const std::size_t k = rng.integer(1, n);
                 add_softmax(in, rng, ProductSpace(counting_space(n)), rng.integer(1, 2));
                 // map table after theta; weights on outputs 1..k
                 for (std::size_t i = 0; i < n; ++i)
                   in.scalars.push_back(static_cast<double>(rng.integer(1, k)));
                 in.weights = {log_uniform_weight(rng, ProductSpace(counting_space(k)), o)};
                 return in;
               },
               [=](const Instance& in) {
                 const std::size_t m = in.family->param_dim;
                 const std::vector<double> theta(in.scalars.begin(), in.scalars.begin() + m);
                 const std::vector<double> table(in.scalars.begin() + m, in.scalars.end());
                 const auto& out = w(in).values;
                 const PointMap g = [table](std::span<const double> x) {
                   return table[static_cast<std::size_t>(x[0]) - 1];
                 };
                 const PairWeight phi = [out](std::span<const double>, double y) {
                   return out[static_cast<std::size_t>(y) - 1];
                 };
                 return check_dp_fisher(*in.family, phi, g, theta);
               }});
  r.push_back({"wcr_I",
               [](CounterRng& rng, const GenOptions& o) {
                 Instance in;
                 const ProductSpace s = random_counting_space(rng, 1, o);
                 add_softmax(in, rng, s, 1);
                 const std::size_t dim = rng.integer(1, 2);
                 in.weights = {log_uniform_weight(rng, s, o)};
                 in.scalars.push_back(static_cast<double>(dim));
                 const auto t = normals(rng, s.size() * dim);
                 in.scalars.insert(in.scalars.end(), t.begin(), t.end());
                 return in;
               },
               [=](const Instance& in) {
                 const std::vector<double> theta{in.scalars[0]};
                 const auto dim = static_cast<std::size_t>(in.scalars[1]);
                 const std::vector<double> table(in.scalars.begin() + 2, in.scalars.end());
                 const StatisticFn t = [table, dim](std::span<const double> x) {
                   const auto i = static_cast<std::size_t>(x[0]) - 1;
                   return std::vector<double>(table.begin() + static_cast<std::ptrdiff_t>(i * dim),
                                              table.begin() + static_cast<std::ptrdiff_t>((i + 1) * dim));
                 };
                 const CRContextI ctx = build_cr_context_I(*in.family, w(in), t, theta);
                 return check_wcr_I(ctx, weighted_fisher(*in.family, w(in), theta));
               }});
  r.push_back({"wcr_II_normalized",
               [](CounterRng& rng, const GenOptions& o) {
                 Instance in;
                 const std::size_t n = rng.integer(2, o.max_support);
                 const ProductSpace s(discrete_space(normals(rng, n, 2.0)));
                 add_softmax(in, rng, s, 1);
                 in.weights = {log_uniform_weight(rng, s, o)};
                 return in;
               },
               [=](const Instance& in) {
                 return check_wcr_II(*in.family, w(in), in.scalars, CR2Form::Normalized);
               }});
  r.push_back(simple("kullback_1", 1, 2, [=](const Instance& in) {
    return check_kullback_1(d(in, 0), d(in, 1), w(in));
  }));
  r.push_back(simple("kullback_2", 1, 2, [=](const Instance& in) {
    return check_kullback_2(d(in, 0), d(in, 1), w(in));
  }));
  return r;
}

}  // namespace

const std::vector<Checker>& registered_checkers() {
  static const std::vector<Checker> registry = build_registry();
  return registry;
}

const Checker& find_checker(const std::string& name) {
  for (const Checker& c : registered_checkers())
    if (c.name == name) return c;
  throw std::invalid_argument("unknown checker: " + name);
}

}  // namespace wentropy
