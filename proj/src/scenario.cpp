#include "wentropy/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>

#include "wentropy/cramer_rao.hpp"
#include "wentropy/extremal.hpp"
#include "wentropy/fisher.hpp"
#include "wentropy/functionals.hpp"
#include "wentropy/inequalities.hpp"

namespace wentropy {

namespace {

[[noreturn]] void fail(int code, const std::string& msg) { throw ScenarioError(code, msg); }

void flatten(const Json& j, std::vector<double>& out) {
  if (j.is_array()) {
    for (const auto& e : j) flatten(e, out);
    return;
  }
  out.push_back(number_from_json(j));
}

std::vector<double> numbers(const Json& j) {
  std::vector<double> v;
  flatten(j, v);
  return v;
}

// Named inputs with lazy, cached resolution.
class Inputs {
 public:
  Inputs(const Json& defs, std::string base_dir) : defs_(defs), base_(std::move(base_dir)) {
    if (!defs_.is_object()) fail(kExitParse, "\"inputs\" must be an object");
  }

  bool has(const std::string& name) const { return defs_.contains(name); }

  // Definition with any {"file": ...} indirection applied.
  const Json& def(const std::string& name) {
    if (auto it = loaded_.find(name); it != loaded_.end()) return it->second;
    if (!has(name)) fail(kExitUnresolved, "unresolved input reference: " + name);
    Json d = defs_.at(name);
    if (d.is_object() && d.contains("file")) {
      std::filesystem::path p = d.at("file").get<std::string>();
      if (p.is_relative()) p = std::filesystem::path(base_) / p;
      std::ifstream in(p);
      if (!in) fail(kExitUnresolved, "input file not found: " + p.string());
      try {
        d = Json::parse(in);
      } catch (const Json::parse_error& e) {
        fail(kExitParse, "input file " + p.string() + ": " + e.what());
      }
    }
    if (!d.is_object()) fail(kExitParse, "input " + name + " must be an object");
    return loaded_.emplace(name, std::move(d)).first->second;
  }

  std::string type_of(const std::string& name) {
    const Json& d = def(name);
    if (!d.contains("type")) fail(kExitParse, "input " + name + " has no type");
    return d.at("type").get<std::string>();
  }

  void expect_type(const std::string& name, std::initializer_list<const char*> types) {
    const std::string t = type_of(name);
    for (const char* x : types)
      if (t == x) return;
    fail(kExitParse, "input " + name + " has type " + t + ", not the one required here");
  }

  SpacePtr space_factor(const Json& j) {
    if (j.is_string()) {
      const std::string name = j.get<std::string>();
      expect_type(name, {"space"});
      return space_factor(def(name));
    }
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "counting") return counting_space(j.at("n").get<std::size_t>());
    if (kind == "discrete") {
      std::vector<double> nu = j.contains("nu") ? numbers(j.at("nu")) : std::vector<double>{};
      const std::size_t dim = j.value("dim", std::size_t{1});
      if (dim == 1) return discrete_space(numbers(j.at("points")), std::move(nu));
      return discrete_space_nd(dim, numbers(j.at("points")), std::move(nu));
    }
    if (kind == "grid")
      return grid_space(j.at("lo").get<double>(), j.at("hi").get<double>(),
                        j.at("n").get<std::size_t>());
    fail(kExitParse, "unknown space kind: " + kind);
  }

  ProductSpace space(const Json& j) {
    if (j.is_array()) {
      std::vector<SpacePtr> axes;
      for (const auto& a : j) axes.push_back(space_factor(a));
      return ProductSpace(axes);
    }
    return ProductSpace(space_factor(j));
  }

  Matrix matrix(const Json& j) {
    if (j.is_string()) {
      const std::string name = j.get<std::string>();
      expect_type(name, {"matrix"});
      return matrix(def(name).at("rows"));
    }
    if (!j.is_array() || j.empty()) fail(kExitParse, "matrix must be a non-empty array of rows");
    const std::size_t cols = j.at(0).size();
    std::vector<double> data;
    for (const auto& row : j) {
      if (!row.is_array() || row.size() != cols) fail(kExitParse, "matrix rows differ in length");
      flatten(row, data);
    }
    return Matrix(j.size(), cols, std::move(data));
  }

  const Density& density(const std::string& name) {
    if (auto it = densities_.find(name); it != densities_.end()) return it->second;
    expect_type(name, {"density", "joint"});
    const Json& d = def(name);
    Density f;
    if (d.contains("gaussian")) {
      const Json& g = d.at("gaussian");
      const Matrix cov = matrix(g.at("cov"));
      const std::vector<double> mean =
          g.contains("mean") ? numbers(g.at("mean")) : std::vector<double>{};
      const ProductSpace s =
          make_gaussian_grid(cov, g.value("half_width", 8.0), g.value("points", std::size_t{0}), mean);
      f = gaussian_density(s, cov, mean);
    } else {
      f = Density(space(d.at("space")), numbers(d.at("values")));
    }
    return densities_.emplace(name, std::move(f)).first->second;
  }

  PointWeight point_weight(const std::string& name) {
    expect_type(name, {"point_weight"});
    const Json& d = def(name);
    const std::string kind = d.at("kind").get<std::string>();
    if (kind == "constant") {
      const double c = d.value("value", 1.0);
      return [c](std::span<const double>) { return c; };
    }
    if (kind == "step") return step_weight(d.value("threshold", 0.0), d.value("axis", std::size_t{0}));
    fail(kExitParse, "unknown point_weight kind: " + kind);
  }

  // A tabulated weight (which must live on `s`) or a point weight tabulated on `s`.
  WeightFunction weight_on(const std::string& name, const ProductSpace& s) {
    if (type_of(name) == "point_weight") return tabulate_weight(s, point_weight(name));
    expect_type(name, {"weight"});
    const Json& d = def(name);
    const ProductSpace ws = d.contains("space") ? space(d.at("space")) : s;
    if (d.contains("constant")) return WeightFunction::constant(ws, d.at("constant").get<double>());
    return WeightFunction(ws, numbers(d.at("values")));
  }

  StochasticKernel kernel(const std::string& name) {
    expect_type(name, {"kernel"});
    const Json& d = def(name);
    return StochasticKernel(space_factor(d.at("in")), space_factor(d.at("out")),
                            numbers(d.at("values")));
  }

  std::shared_ptr<const ParametricFamily> family(const std::string& name) {
    if (auto it = families_.find(name); it != families_.end()) return it->second;
    expect_type(name, {"family"});
    const Json& d = def(name);
    const std::string fam = d.at("name").get<std::string>();
    ParametricFamily p;
    if (fam == "gaussian_location") {
      p = gaussian_location_family(d.value("sigma2", 1.0));
    } else if (fam == "gaussian_location_d") {
      p = gaussian_location_d_family(matrix(d.at("cov")));
    } else if (fam == "poisson") {
      p = poisson_family(d.at("lambda_max").get<double>());
    } else if (fam == "exponential_rate") {
      p = exponential_rate_family(d.at("rate_min").get<double>());
    } else if (fam == "discrete_shift") {
      p = discrete_shift_family(d.at("k").get<std::size_t>(), d.at("a").get<double>());
    } else if (fam == "softmax") {
      p = softmax_family(space(d.at("space")), d.at("m").get<std::size_t>(),
                         numbers(d.at("features")));
    } else {
      fail(kExitUnresolved, "unknown family: " + fam);
    }
    if (d.contains("x_axes")) p.x_axes = d.at("x_axes").get<std::size_t>();
    auto ptr = std::make_shared<const ParametricFamily>(std::move(p));
    families_.emplace(name, ptr);
    return ptr;
  }

  // The task's arguments with every input reference replaced by its
  // definition, for the digest.
  Json expand(const Json& j, int depth = 0) {
    if (depth > 8) return j;
    if (j.is_string() && has(j.get<std::string>())) return expand(def(j.get<std::string>()), depth + 1);
    if (j.is_object() || j.is_array()) {
      Json out = j;
      for (auto& [k, v] : out.items()) v = expand(v, depth + 1);
      return out;
    }
    return j;
  }

 private:
  Json defs_;
  std::string base_;
  std::map<std::string, Json> loaded_;
  std::map<std::string, Density> densities_;
  std::map<std::string, std::shared_ptr<const ParametricFamily>> families_;
};

// Argument access for one task.
class Args {
 public:
  Args(const Json& args, Inputs& in) : a_(args), in_(in) {
    if (!a_.is_object()) fail(kExitParse, "task \"args\" must be an object");
  }

  bool has(const char* key) const { return a_.contains(key); }

  const Json& raw(const char* key) const {
    if (!a_.contains(key)) fail(kExitParse, std::string("missing argument: ") + key);
    return a_.at(key);
  }

  std::string ref(const char* key) const {
    const Json& j = raw(key);
    if (!j.is_string()) fail(kExitParse, std::string("argument ") + key + " must name an input");
    return j.get<std::string>();
  }

  const Density& density(const char* key) const { return in_.density(ref(key)); }

  // Missing weight: phi = 1 on the given space.
  WeightFunction weight(const ProductSpace& s, const char* key = "phi") const {
    if (!has(key)) return WeightFunction::constant(s);
    return in_.weight_on(ref(key), s);
  }

  PointWeight point_weight(const char* key = "phi") const {
    if (!has(key)) return [](std::span<const double>) { return 1.0; };
    return in_.point_weight(ref(key));
  }

  Matrix matrix(const char* key) const { return in_.matrix(raw(key)); }
  StochasticKernel kernel(const char* key) const { return in_.kernel(ref(key)); }
  std::shared_ptr<const ParametricFamily> family(const char* key = "family") const {
    return in_.family(ref(key));
  }

  double number(const char* key) const { return number_from_json(raw(key)); }
  double number(const char* key, double fallback) const {
    return has(key) ? number(key) : fallback;
  }
  std::vector<double> vector(const char* key) const { return numbers(raw(key)); }

  std::vector<std::size_t> indices(const char* key, std::vector<std::size_t> fallback) const {
    if (!has(key)) return fallback;
    return raw(key).get<std::vector<std::size_t>>();
  }

  std::string option(const char* key, const std::string& fallback) const {
    return has(key) ? raw(key).get<std::string>() : fallback;
  }

 private:
  const Json& a_;
  Inputs& in_;
};

using Outputs = std::vector<std::pair<std::string, double>>;

struct OpResult {
  Outputs outputs;
  std::optional<Verdict> verdict;
};

struct Op {
  bool check = false;
  std::function<OpResult(const Args&)> run;
};

OpResult value(double x) { return {{{"value", x}}, std::nullopt}; }

OpResult verdict(Verdict v) {
  OpResult r;
  r.outputs = {{"value", v.conclusion_margin}};
  r.verdict = std::move(v);
  return r;
}

OpResult identity_report(const IdentityReport& r) {
  return {{{"value", r.value}, {"via_identity", r.via_identity}, {"residual", r.residual}},
          std::nullopt};
}

OpResult kullback_outputs(const KullbackBound& b) {
  OpResult r;
  r.outputs = {{"bound", b.bound},
               {"foc_residual", b.foc_residual},
               {"clipped", b.clipped ? 1.0 : 0.0},
               {"unbounded", b.unbounded ? 1.0 : 0.0},
               {"infeasible", b.infeasible ? 1.0 : 0.0}};
  for (std::size_t i = 0; i < b.argmax_zeta.size(); ++i)
    r.outputs.emplace_back("argmax_zeta_" + std::to_string(i), b.argmax_zeta[i]);
  return r;
}

PairOrTriple parse_form(const std::string& s) {
  if (s == "pair") return PairOrTriple::Pair;
  if (s == "triple") return PairOrTriple::Triple;
  fail(kExitParse, "form must be pair or triple, got " + s);
}

FanoConvention parse_convention(const std::string& s) {
  if (s == "proof") return FanoConvention::Proof;
  if (s == "as_written") return FanoConvention::AsWritten;
  fail(kExitParse, "convention must be proof or as_written, got " + s);
}

std::vector<double> theta_arg(const Args& a) { return a.vector("theta"); }

const std::map<std::string, Op>& op_table() {
  static const std::map<std::string, Op> ops = [] {
    std::map<std::string, Op> t;
    auto compute = [&t](const char* name, std::function<OpResult(const Args&)> fn) {
      t[name] = Op{false, std::move(fn)};
    };
    auto check = [&t](const char* name, std::function<Verdict(const Args&)> fn) {
      t[name] = Op{true, [fn](const Args& a) { return verdict(fn(a)); }};
    };

    compute("weighted_entropy", [](const Args& a) {
      const Density& f = a.density("f");
      return value(weighted_entropy(f, a.weight(f.space)));
    });
    compute("weighted_relative_entropy", [](const Args& a) {
      const Density& f = a.density("f");
      return value(weighted_relative_entropy(f, a.density("g"), a.weight(f.space)));
    });
    compute("weighted_mass", [](const Args& a) {
      const Density& f = a.density("f");
      return value(weighted_mass(f, a.weight(f.space)));
    });
    compute("joint_we", [](const Args& a) {
      const Density& j = a.density("j");
      return value(joint_we(j, a.weight(j.space)));
    });
    compute("conditional_we", [](const Args& a) {
      const Density& j = a.density("j");
      return identity_report(conditional_we_report(j, a.weight(j.space), a.indices("given", {1})));
    });
    compute("mutual_we", [](const Args& a) {
      const Density& j = a.density("j");
      return identity_report(
          mutual_we_report(j, a.weight(j.space), a.indices("a", {0}), a.indices("b", {1})));
    });
    compute("calibrated_relative_we", [](const Args& a) {
      const Density& f = a.density("f");
      const auto r = calibrated_relative_we(f, a.density("g"), a.weight(f.space));
      return OpResult{{{"value", r.value},
                       {"alpha_f", r.alpha_f},
                       {"alpha_g", r.alpha_g},
                       {"cross_check", r.cross_check}},
                      std::nullopt};
    });
    compute("we_decomposition", [](const Args& a) {
      const Density& f = a.density("f");
      const auto r = we_decomposition_check(f, a.weight(f.space));
      OpResult o{{{"value", r.weighted_entropy},
                  {"shannon_of_phi_f", r.shannon_of_phi_f},
                  {"kl_phi_f_to_f", r.kl_phi_f_to_f},
                  {"shannon_plus_kl", r.shannon_plus_kl}},
                 std::nullopt};
      if (r.neg_kl_to_phi) o.outputs.emplace_back("neg_kl_to_phi", *r.neg_kl_to_phi);
      return o;
    });
    compute("gaussian_we", [](const Args& a) {
      const auto r = gaussian_we(a.matrix("cov"), a.point_weight());
      return OpResult{{{"value", r.value},
                       {"direct", r.direct},
                       {"residual", r.residual},
                       {"alpha", r.alpha}},
                      std::nullopt};
    });
    compute("weighted_fisher", [](const Args& a) {
      const auto fam = a.family();
      const auto j = weighted_fisher(*fam, a.weight(fam->support), theta_arg(a));
      OpResult o{{{"weight_mass", j.weight_mass}, {"masked", static_cast<double>(j.masked)}},
                 std::nullopt};
      for (std::size_t r = 0; r < j.entries.rows(); ++r)
        for (std::size_t c = 0; c < j.entries.cols(); ++c)
          o.outputs.emplace_back("J_" + std::to_string(r) + "_" + std::to_string(c),
                                 j.entries(r, c));
      if (j.entries.rows() == 1) o.outputs.emplace_back("value", j.entries(0, 0));
      return o;
    });
    compute("kullback_bound_1", [](const Args& a) {
      const Density& f = a.density("f");
      return kullback_outputs(kullback_bound_1(f, a.density("g"), a.weight(f.space)));
    });
    compute("kullback_bound_2", [](const Args& a) {
      const Density& f = a.density("f");
      return kullback_outputs(kullback_bound_2(f, a.density("g"), a.weight(f.space)));
    });

    check("check_gibbs", [](const Args& a) {
      const Density& f = a.density("f");
      return check_gibbs(f, a.density("g"), a.weight(f.space));
    });
    check("check_uniform_bound", [](const Args& a) {
      const Density& f = a.density("f");
      return check_uniform_bound(f, a.weight(f.space), a.number("beta"));
    });
    check("check_conditional_nonneg", [](const Args& a) {
      const Density& j = a.density("j");
      return check_conditional_nonneg(j, a.weight(j.space), parse_form(a.option("form", "pair")));
    });
    check("check_subadditivity", [](const Args& a) {
      const Density& j = a.density("j");
      return check_subadditivity(j, a.weight(j.space), parse_form(a.option("form", "pair")));
    });
    check("check_conditional_bound", [](const Args& a) {
      const Density& j = a.density("j");
      const std::string v = a.option("variant", "joint_given_third");
      ConditionalBound b;
      if (v == "joint_given_third")
        b = ConditionalBound::JointGivenThird;
      else if (v == "joint_given_second")
        b = ConditionalBound::JointGivenSecond;
      else if (v == "conditioning_reduces")
        b = ConditionalBound::ConditioningReduces;
      else
        fail(kExitParse, "unknown conditional bound variant: " + v);
      return check_conditional_bound(j, a.weight(j.space), b);
    });
    check("check_conditional_subadditivity", [](const Args& a) {
      const Density& j = a.density("j");
      return check_conditional_subadditivity(j, a.weight(j.space));
    });
    check("check_strong_subadditivity", [](const Args& a) {
      const Density& j = a.density("j");
      return check_strong_subadditivity(j, a.weight(j.space));
    });
    check("check_concavity_we", [](const Args& a) {
      const Density& f1 = a.density("f1");
      return check_concavity_we(f1, a.density("f2"), a.number("lambda"), a.weight(f1.space));
    });
    check("check_convexity_relative_we", [](const Args& a) {
      const Density& f1 = a.density("f1");
      return check_convexity_relative_we(f1, a.density("g1"), a.density("f2"), a.density("g2"),
                                         a.number("lambda"), a.weight(f1.space));
    });
    check("check_dp_relative", [](const Args& a) {
      const StochasticKernel k = a.kernel("kernel");
      return check_dp_relative(a.density("f"), a.density("g"), a.weight(ProductSpace(k.out)), k);
    });
    check("check_dp_markov", [](const Args& a) {
      const Density& j = a.density("j");
      const std::string m = a.option("mode", "conditional");
      MarkovMode mode;
      if (m == "conditional")
        mode = MarkovMode::Conditional;
      else if (m == "doubling")
        mode = MarkovMode::ConditionalDoubling;
      else if (m == "mutual")
        mode = MarkovMode::Mutual;
      else
        fail(kExitParse, "unknown markov mode: " + m);
      return check_dp_markov(j, a.weight(j.space), mode);
    });
    check("check_mutual_convex_in_channel", [](const Args& a) {
      const Density& f = a.density("f");
      const StochasticKernel w1 = a.kernel("w1");
      const ProductSpace joint({w1.in, w1.out});
      return check_mutual_convex_in_channel(f, w1, a.kernel("w2"), a.number("lambda"),
                                            a.weight(joint));
    });
    check("check_mutual_concave_in_input", [](const Args& a) {
      const StochasticKernel w = a.kernel("w");
      const ProductSpace joint({w.in, w.out});
      return check_mutual_concave_in_input(a.density("fa"), a.density("fb"), w,
                                           a.number("lambda"), a.weight(joint));
    });
    check("check_fano", [](const Args& a) {
      const Density& f = a.density("f");
      FanoContext ctx;
      ctx.convention = parse_convention(a.option("convention", "proof"));
      ctx.x_star = a.has("x_star")
                       ? a.raw("x_star").get<std::size_t>()
                       : static_cast<std::size_t>(
                             std::max_element(f.values.begin(), f.values.end()) - f.values.begin());
      return check_fano(f, a.weight(f.space), ctx);
    });
    check("check_generalized_fano", [](const Args& a) {
      const Density& j = a.density("j");
      return check_generalized_fano(j, a.weight(j.space),
                                    parse_convention(a.option("convention", "proof")));
    });
    check("check_gaussian_max", [](const Args& a) {
      const Density& f = a.density("f");
      return check_gaussian_max(f, a.matrix("cov"), a.weight(f.space));
    });
    check("check_hadamard",
          [](const Args& a) { return check_hadamard(a.matrix("cov"), a.point_weight()); });
    check("check_ky_fan", [](const Args& a) {
      return check_ky_fan(a.matrix("c1"), a.matrix("c2"), a.number("lambda"), a.point_weight());
    });
    check("check_max_we_direct", [](const Args& a) {
      const Density& f = a.density("f");
      return check_max_we_direct(f, a.density("f_star"), a.weight(f.space));
    });
    check("check_max_we_gibbsian", [](const Args& a) {
      const Density& f = a.density("f");
      GibbsianSpec spec;
      spec.beta = a.vector("beta");
      spec.b = a.number("b");
      spec.z = a.number("z");
      spec.c = a.number("c");
      return check_max_we_gibbsian(f, spec, a.weight(f.space));
    });
    check("check_multi_subadditivity", [](const Args& a) {
      const Density& j = a.density("j");
      return check_multi_subadditivity(j, a.weight(j.space));
    });
    check("check_chain_rule", [](const Args& a) {
      const auto fam = a.family();
      return check_chain_rule(*fam, a.weight(fam->support), theta_arg(a));
    });
    check("check_data_refinement", [](const Args& a) {
      const auto fam = a.family();
      return check_data_refinement(*fam, a.weight(fam->support), theta_arg(a));
    });
    check("check_wcr_I", [](const Args& a) {
      const auto fam = a.family();
      if (a.option("statistic", "identity") != "identity")
        fail(kExitParse, "check_wcr_I supports statistic \"identity\" only");
      const StatisticFn t = [](std::span<const double> x) {
        return std::vector<double>(x.begin(), x.end());
      };
      const auto theta = theta_arg(a);
      const WeightFunction phi = a.weight(fam->support);
      return check_wcr_I(build_cr_context_I(*fam, phi, t, theta), weighted_fisher(*fam, phi, theta));
    });
    check("check_wcr_II", [](const Args& a) {
      const auto fam = a.family();
      CR2Form form;
      try {
        form = parse_cr2_form(a.option("form", "as_stated"));
      } catch (const std::invalid_argument& e) {
        fail(kExitParse, e.what());
      }
      return check_wcr_II(*fam, a.weight(fam->support), theta_arg(a), form);
    });
    check("check_kullback_1", [](const Args& a) {
      const Density& f = a.density("f");
      return check_kullback_1(f, a.density("g"), a.weight(f.space));
    });
    check("check_kullback_2", [](const Args& a) {
      const Density& f = a.density("f");
      return check_kullback_2(f, a.density("g"), a.weight(f.space));
    });
    check("check_shift_model", [](const Args& a) {
      ShiftMode mode;
      try {
        mode = parse_shift_mode(a.option("mode", "lemma"));
      } catch (const std::invalid_argument& e) {
        fail(kExitParse, e.what());
      }
      const ShiftModel m = gaussian_shift_model(a.matrix("q"), a.matrix("p"), a.matrix("cov"));
      return check_shift_model(m, a.point_weight(), theta_arg(a), mode);
    });
    return t;
  }();
  return ops;
}

std::vector<Expectation> parse_expectations(const Json& task) {
  const char* key = task.contains("expect") ? "expect" : "expected";
  if (!task.contains(key)) return {};
  const Json& e = task.at(key);
  std::vector<Expectation> out;
  auto one = [](const Json& j) {
    if (!j.is_object()) fail(kExitParse, "expectation must be an object");
    Expectation x;
    x.field = j.value("field", std::string("value"));
    if (j.contains("value")) x.value = number_from_json(j.at("value"));
    x.tol = j.value("tol", 1e-9);
    if (j.contains("min")) x.min = number_from_json(j.at("min"));
    if (j.contains("max")) x.max = number_from_json(j.at("max"));
    if (j.contains("equals")) x.equals = j.at("equals").get<bool>();
    if (!x.value && !x.min && !x.max && !x.equals)
      fail(kExitParse, "expectation needs value, min, max or equals");
    return x;
  };
  if (e.is_array()) {
    for (const auto& j : e) out.push_back(one(j));
  } else {
    out.push_back(one(e));
  }
  return out;
}

double observe(const TaskRecord& t, const std::string& field) {
  for (const auto& [k, v] : t.outputs)
    if (k == field) return v;
  if (t.verdict) {
    const Verdict& v = *t.verdict;
    auto b = [](bool x) { return x ? 1.0 : 0.0; };
    if (field == "hypothesis_margin") return v.hypothesis_margin;
    if (field == "conclusion_margin") return v.conclusion_margin;
    if (field == "hypothesis_holds") return b(v.hypothesis_holds);
    if (field == "conclusion_holds") return b(v.conclusion_holds);
    if (field == "equality_detected") return b(v.equality_detected);
    if (field == "inapplicable") return b(v.inapplicable);
    if (field == "violation") return b(v.violation());
    for (const auto& [k, x] : v.diagnostics)
      if (k == field) return x;
  }
  fail(kExitUnresolved, "task " + std::to_string(t.index) + " (" + t.op +
                            ") has no output named " + field);
}

ExpectationResult evaluate(const TaskRecord& t, const Expectation& e) {
  ExpectationResult r;
  r.expected = e;
  r.observed = observe(t, e.field);
  const double x = r.observed;
  char buf[256];
  r.passed = true;
  if (e.value) {
    const bool ok = x == *e.value || std::abs(x - *e.value) <= e.tol;
    if (!ok) {
      std::snprintf(buf, sizeof buf, "%s = %.12g, expected %.12g +- %g", e.field.c_str(), x,
                    *e.value, e.tol);
      r.message = buf;
    }
    r.passed = r.passed && ok;
  }
  if (e.min && !(x >= *e.min)) {
    std::snprintf(buf, sizeof buf, "%s = %.12g, expected >= %.12g", e.field.c_str(), x, *e.min);
    r.message = buf;
    r.passed = false;
  }
  if (e.max && !(x <= *e.max)) {
    std::snprintf(buf, sizeof buf, "%s = %.12g, expected <= %.12g", e.field.c_str(), x, *e.max);
    r.message = buf;
    r.passed = false;
  }
  if (e.equals && (x != 0.0) != *e.equals) {
    r.message = e.field + " is " + (x != 0.0 ? "true" : "false") + ", expected " +
                (*e.equals ? "true" : "false");
    r.passed = false;
  }
  return r;
}

}  // namespace

std::vector<std::string> registered_ops() {
  std::vector<std::string> names;
  for (const auto& [k, v] : op_table()) names.push_back(k);
  return names;
}

bool is_check_op(const std::string& op) {
  const auto it = op_table().find(op);
  return it != op_table().end() && it->second.check;
}

int exit_code_for(const Report& r) {
  if (r.violations() > 0) return kExitViolation;
  if (r.failed_expectations() > 0) return kExitAssertion;
  return kExitOk;
}

Report run_scenario_json(const Json& doc, const std::string& base_dir, RunMode mode) {
  if (!doc.is_object()) fail(kExitParse, "scenario must be a JSON object");
  if (!doc.contains("schema") || doc.at("schema") != kSchema)
    fail(kExitParse, std::string("scenario must declare \"schema\": \"") + kSchema + "\"");
  if (!doc.contains("tasks") || !doc.at("tasks").is_array())
    fail(kExitParse, "scenario needs a \"tasks\" array");
  Report report;
  try {
    report.scenario_id = doc.value("id", std::string{});
    report.seed = doc.value("seed", std::uint64_t{0});
  } catch (const Json::exception& e) {
    fail(kExitParse, e.what());
  }
  const Json& tasks = doc.at("tasks");
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const Json& t = tasks[i];
    if (!t.is_object() || !t.contains("op") || !t.at("op").is_string())
      fail(kExitParse, "task " + std::to_string(i) + " needs a string \"op\"");
    if (!op_table().contains(t.at("op").get<std::string>()))
      fail(kExitUnresolved, "task " + std::to_string(i) + ": unknown op " +
                                t.at("op").get<std::string>());
  }

  Inputs inputs(doc.value("inputs", Json::object()), base_dir);
  const Json no_args = Json::object();
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const Json& t = tasks[i];
    TaskRecord rec;
    rec.index = i;
    rec.op = t.at("op").get<std::string>();
    const Op& op = op_table().at(rec.op);
    try {
      const Json& args = t.contains("args") ? t.at("args") : no_args;
      const std::vector<Expectation> expected = parse_expectations(t);
      rec.inputs_digest = fnv1a_hex(Json{{"op", rec.op}, {"args", inputs.expand(args)}}.dump());
      rec.skipped = (mode == RunMode::Compute && op.check) || (mode == RunMode::Check && !op.check);
      if (!rec.skipped) {
        const auto start = std::chrono::steady_clock::now();
        OpResult r = op.run(Args(args, inputs));
        rec.wall_time =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        rec.outputs = std::move(r.outputs);
        rec.verdict = std::move(r.verdict);
        for (const auto& e : expected) rec.expectations.push_back(evaluate(rec, e));
      }
    } catch (const ScenarioError&) {
      throw;
    } catch (const Json::exception& e) {
      fail(kExitParse, "task " + std::to_string(i) + " (" + rec.op + "): " + e.what());
    } catch (const std::exception& e) {
      fail(kExitParse, "task " + std::to_string(i) + " (" + rec.op + ") rejected its inputs: " +
                           e.what());
    }
    report.tasks.push_back(std::move(rec));
  }
  report.exit_code = exit_code_for(report);
  return report;
}

Report run_scenario(const std::string& path, RunMode mode) {
  std::ifstream in(path);
  if (!in) fail(kExitParse, "cannot open scenario " + path);
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    fail(kExitParse, "scenario " + path + " does not parse: " + e.what());
  }
  const std::string base = std::filesystem::path(path).parent_path().string();
  return run_scenario_json(doc, base.empty() ? "." : base, mode);
}

}  // namespace wentropy
