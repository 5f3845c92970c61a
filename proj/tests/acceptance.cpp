// Acceptance run: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria (capped at 1 for ctest).

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "wentropy/cramer_rao.hpp"
#include "wentropy/extremal.hpp"
#include "wentropy/fisher.hpp"
#include "wentropy/functionals.hpp"
#include "wentropy/inequalities.hpp"
#include "wentropy/suite.hpp"

using namespace wentropy;

namespace {

using Rng = std::mt19937_64;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (ok) return;
    pass = false;
    if (!detail.empty()) detail += "; ";
    detail += what;
  }
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double x) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

std::vector<double> simplex(Rng& rng, std::size_t n) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> v(n);
  double s = 0.0;
  for (auto& x : v) s += (x = e(rng));
  for (auto& x : v) x /= s;
  return v;
}

std::vector<double> log_uniform(Rng& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(std::log(0.1), std::log(10.0));
  std::vector<double> v(n);
  for (auto& x : v) x = std::exp(u(rng));
  return v;
}

std::size_t between(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

ProductSpace counting(std::vector<std::size_t> sizes) {
  std::vector<SpacePtr> axes;
  for (auto n : sizes) axes.push_back(counting_space(n));
  return ProductSpace(axes);
}

// Independent Shannon and KL formulas on plain vectors.
double shannon(const std::vector<double>& p) {
  double h = 0.0;
  for (double x : p)
    if (x > 0.0) h -= x * std::log(x);
  return h;
}

double kl(const std::vector<double>& p, const std::vector<double>& q) {
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] > 0.0) d += p[i] * std::log(p[i] / q[i]);
  return d;
}

// Row and column sums of an a x b table.
std::vector<double> rows(const std::vector<double>& j, std::size_t a, std::size_t b) {
  std::vector<double> r(a, 0.0);
  for (std::size_t i = 0; i < a; ++i)
    for (std::size_t k = 0; k < b; ++k) r[i] += j[i * b + k];
  return r;
}

std::vector<double> cols(const std::vector<double>& j, std::size_t a, std::size_t b) {
  std::vector<double> c(b, 0.0);
  for (std::size_t i = 0; i < a; ++i)
    for (std::size_t k = 0; k < b; ++k) c[k] += j[i * b + k];
  return c;
}

int run_command(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const std::filesystem::path kWork = WENTROPY_WORKDIR;
const std::string kCli = WENTROPY_CLI;
const std::filesystem::path kFixtures = WENTROPY_FIXTURES;

Outcome classical_reductions() {
  Outcome o;
  const auto t0 = Clock::now();
  Rng rng(1001);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = between(rng, 2, 6);
    const ProductSpace s = counting({n});
    const Density f(s, simplex(rng, n)), g(s, simplex(rng, n));
    const WeightFunction one = WeightFunction::constant(s);
    worst = std::max(worst, std::abs(weighted_entropy(f, one) - shannon(f.values)));
    worst = std::max(worst, std::abs(weighted_relative_entropy(f, g, one) - kl(f.values, g.values)));

    const std::size_t a = between(rng, 2, 4), b = between(rng, 2, 4);
    const ProductSpace js = counting({a, b});
    const Density j(js, simplex(rng, a * b));
    const WeightFunction jone = WeightFunction::constant(js);
    const double h12 = shannon(j.values);
    const double h1 = shannon(rows(j.values, a, b)), h2 = shannon(cols(j.values, a, b));
    worst = std::max(worst, std::abs(conditional_we(j, jone, {1}) - (h12 - h2)));
    worst = std::max(worst, std::abs(conditional_we(j, jone, {0}) - (h12 - h1)));
    worst = std::max(worst, std::abs(mutual_we(j, jone) - (h1 + h2 - h12)));
  }
  const double dt = seconds_since(t0);
  o.require(worst <= 1e-10, "max deviation " + fmt("%.3e", worst));
  o.require(dt < 5.0, "runtime " + fmt("%.2f s", dt));
  if (o.pass) o.detail = "max |delta| " + fmt("%.2e", worst) + ", " + fmt("%.3f s", dt);
  return o;
}

Outcome soundness_sweep() {
  Outcome o;
  const auto out = kWork / "acceptance_suite_100000.txt";
  const std::string cmd = "OMP_NUM_THREADS=1 WENTROPY_THREADS=1 " + kCli +
                          " suite --theorems all --instances 100000 --seed 1 --max-support 4 > " +
                          out.string();
  const auto t0 = Clock::now();
  const int code = run_command(cmd);
  const double dt = seconds_since(t0);
  const std::string text = slurp(out);
  o.require(code == 0, "exit code " + std::to_string(code));
  o.require(text.find("result: zero soundness violations") != std::string::npos,
            "summary does not report zero violations");
  o.require(text.find("errors:") == std::string::npos, "some draws raised errors");
  o.require(dt < 600.0, "runtime " + fmt("%.1f s", dt));
  const auto total = text.find("total checks=");
  if (o.pass)
    o.detail = text.substr(total, text.find('\n', total) - total) + ", " + fmt("%.1f s", dt) +
               " single-threaded";
  return o;
}

Outcome negative_divergence() {
  Outcome o;
  const ProductSpace s = counting({2});
  const Density f(s, {0.25, 0.75}), g(s, {0.5, 0.5});
  const WeightFunction phi(s, {2.0, 1.0});
  // 2 (1/4) log(1/2) + (3/4) log(3/2)
  const double oracle = 0.5 * std::log(0.5) + 0.75 * std::log(1.5);
  const double d = weighted_relative_entropy(f, g, phi);
  const Verdict v = check_gibbs(f, g, phi);
  o.require(std::abs(d - oracle) <= 1e-9, "D^w " + fmt("%.12f", d));
  o.require(std::abs(d - (-0.042475)) <= 5e-7, "D^w differs from -0.042475 beyond rounding");
  o.require(std::abs(v.hypothesis_margin + 0.25) <= 1e-12,
            "hypothesis margin " + fmt("%.15f", v.hypothesis_margin));
  o.require(!v.hypothesis_holds && !v.violation(), "hypothesis should fail without a violation");
  if (o.pass)
    o.detail = "D^w = " + fmt("%.9f", d) + ", hypothesis_margin = " + fmt("%.12f", v.hypothesis_margin);
  return o;
}

Outcome identity_suite() {
  Outcome o;
  Rng rng(1004);
  double decomposition = 0.0, mutual = 0.0, legs = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = between(rng, 2, 6);
    const ProductSpace s = counting({n});
    const Density f(s, simplex(rng, n));
    const WeightFunction phi(s, log_uniform(rng, n));
    const WeDecomposition d = we_decomposition_check(f, phi);
    decomposition = std::max(decomposition, std::abs(d.shannon_plus_kl - d.weighted_entropy));
    legs = std::max(legs, std::abs(*d.neg_kl_to_phi - d.weighted_entropy));
    legs = std::max(legs, std::abs(*d.neg_kl_to_phi - d.shannon_plus_kl));

    const std::size_t a = between(rng, 2, 4), b = between(rng, 2, 4);
    const ProductSpace js = counting({a, b});
    const Density j(js, simplex(rng, a * b));
    const WeightFunction jphi(js, log_uniform(rng, a * b));
    const IdentityReport m = mutual_we_report(j, jphi, {0}, {1});
    mutual = std::max(mutual, std::abs(m.value - m.via_identity));
  }
  o.require(decomposition <= 1e-10, "decomposition " + fmt("%.3e", decomposition));
  o.require(mutual <= 1e-10, "mutual identity " + fmt("%.3e", mutual));
  o.require(legs <= 1e-10, "three legs " + fmt("%.3e", legs));
  if (o.pass)
    o.detail = "max residuals " + fmt("%.1e", decomposition) + " / " + fmt("%.1e", mutual) +
               " / " + fmt("%.1e", legs);
  return o;
}

Outcome fano_equality() {
  Outcome o;
  const ProductSpace s = counting({4});
  const Density f(s, {0.25, 0.25, 0.25, 0.25});
  const WeightFunction one = WeightFunction::constant(s);
  const Verdict proof = check_fano(f, one, {0, FanoConvention::Proof});
  const Verdict written = check_fano(f, one, {0, FanoConvention::AsWritten});
  const double h = weighted_entropy(f, one);
  o.require(std::abs(proof.diagnostic("bound") - std::log(4.0)) <= 1e-12, "proof bound");
  o.require(std::abs(h - std::log(4.0)) <= 1e-12, "entropy");
  o.require(std::abs(written.diagnostic("bound") - 5.545177) <= 1e-6,
            "as_written bound " + fmt("%.9f", written.diagnostic("bound")));
  if (o.pass)
    o.detail = "proof bound " + fmt("%.12f", proof.diagnostic("bound")) + ", as_written " +
               fmt("%.6f", written.diagnostic("bound"));
  return o;
}

Outcome gaussian_closed_forms() {
  Outcome o;
  const PointWeight one = [](std::span<const double>) { return 1.0; };
  auto timed = [&o](const char* name, double limit, const std::function<double()>& fn) {
    const auto t0 = Clock::now();
    const double x = fn();
    const double dt = seconds_since(t0);
    o.require(dt < limit, std::string(name) + " took " + fmt("%.2f s", dt));
    return x;
  };
  double direct = 0.0;
  const double we = timed("gaussian_we", 10.0, [&] {
    const GaussianWe g = gaussian_we(Matrix(1, 1, 1.0), one);
    direct = g.direct;
    return g.value;
  });
  const double hadamard = timed("hadamard", 10.0, [&] {
    return check_hadamard(Matrix(2, 2, {1.0, 0.5, 0.5, 1.0}), one).conclusion_margin;
  });
  const double ky_fan = timed("ky_fan", 10.0, [&] {
    return check_ky_fan(Matrix(1, 1, 1.0), Matrix(1, 1, 3.0), 0.5, one).conclusion_margin;
  });
  o.require(std::abs(we - 1.418939) <= 1e-6, "gaussian_we " + fmt("%.9f", we));
  o.require(std::abs(direct - 1.418939) <= 1e-6, "grid quadrature " + fmt("%.9f", direct));
  o.require(std::abs(hadamard - 0.287682) <= 1e-6, "hadamard " + fmt("%.9f", hadamard));
  o.require(std::abs(ky_fan - 0.071920) <= 1e-6, "ky fan " + fmt("%.9f", ky_fan));
  if (o.pass)
    o.detail = fmt("%.7f", we) + " (grid " + fmt("%.7f", direct) + "), " + fmt("%.6f", hadamard) +
               ", " + fmt("%.6f", ky_fan);
  return o;
}

Outcome fisher_reductions() {
  Outcome o;
  const ParametricFamily fam = gaussian_location_family();
  const double th[1] = {0.0};
  const double j1 = weighted_fisher(fam, WeightFunction::constant(fam.support), th).entries(0, 0);
  const double js =
      weighted_fisher(fam, tabulate_weight(fam.support, step_weight(0.0)), th).entries(0, 0);
  o.require(std::abs(j1 - 1.0) <= 1e-5, "unit weight " + fmt("%.9f", j1));
  o.require(std::abs(js - 0.5) <= 1e-5, "indicator weight " + fmt("%.9f", js));

  double chain = 0.0, refine = INFINITY, dp = INFINITY;
  const GenOptions gen;
  for (const auto& a : generate_instances("chain_rule", 7, 50, gen).accepted)
    chain = std::max(chain, a.verdict.diagnostic("residual"));
  for (const auto& a : generate_instances("data_refinement", 7, 50, gen).accepted)
    refine = std::min(refine, a.verdict.conclusion_margin);
  const auto dpi = generate_instances("dp_fisher", 7, 50, gen);
  for (const auto& a : dpi.accepted) {
    dp = std::min(dp, a.verdict.conclusion_margin);
    dp = std::min(dp, a.verdict.diagnostic("corrected_margin"));
  }
  o.require(chain <= 1e-6, "chain-rule residual " + fmt("%.3e", chain));
  o.require(refine >= -1e-6, "data refinement margin " + fmt("%.3e", refine));
  o.require(dp >= -1e-6, "data processing margin " + fmt("%.3e", dp));
  o.require(dpi.accepted.size() == 50, "data processing sweep accepted fewer than 50");
  if (o.pass)
    o.detail = "J = " + fmt("%.8f", j1) + " / " + fmt("%.8f", js) + ", chain residual " +
               fmt("%.1e", chain) + ", min margins " + fmt("%.3g", refine) + " / " +
               fmt("%.3g", dp);
  return o;
}

Outcome cramer_rao() {
  Outcome o;
  const StatisticFn id = [](std::span<const double> x) {
    return std::vector<double>(x.begin(), x.end());
  };
  const ParametricFamily fam = gaussian_location_family();
  const WeightFunction one = WeightFunction::constant(fam.support);
  const double th[1] = {0.0};
  const Verdict v1 =
      check_wcr_I(build_cr_context_I(fam, one, id, th), weighted_fisher(fam, one, th));
  const Verdict v2 = check_wcr_II(fam, one, th);
  o.require(std::abs(v1.conclusion_margin) <= 1e-8 && v1.equality_detected,
            "version I margin " + fmt("%.3e", v1.conclusion_margin));
  o.require(std::abs(v2.conclusion_margin) <= 1e-6 && v2.equality_detected,
            "version II margin " + fmt("%.3e", v2.conclusion_margin));

  // Location families with unit weight: the version I bound on C is
  // A J^-1 A^T and the version II bound on J is de^T C~^-1 de; the first is
  // the inverse of the second.
  double coincide = 0.0;
  struct Case {
    ParametricFamily fam;
    std::vector<double> theta;
  };
  std::vector<Case> cases;
  cases.push_back({gaussian_location_family(1.0), {0.0}});
  cases.push_back({gaussian_location_family(2.5), {0.7}});
  cases.push_back({gaussian_location_d_family(Matrix(2, 2, {1.0, 0.5, 0.5, 1.0})), {0.0, 0.0}});
  cases.push_back({gaussian_location_d_family(Matrix(2, 2, {2.0, -0.3, -0.3, 0.8})), {0.4, -0.2}});
  for (const auto& c : cases) {
    const WeightFunction w = WeightFunction::constant(c.fam.support);
    const CRContextI ci = build_cr_context_I(c.fam, w, id, c.theta);
    const Matrix j = weighted_fisher(c.fam, w, c.theta).entries;
    Matrix a = ci.d_eta;
    for (std::size_t r = 0; r < a.rows(); ++r)
      for (std::size_t k = 0; k < a.cols(); ++k) a(r, k) -= ci.eta[r] * ci.d_alpha[k];
    const Matrix rhs1 = a * spd_inverse(j) * a.transpose();
    const CRContextII cii = build_cr_context_II(c.fam, w, c.theta);
    Matrix rhs2 = cii.d_e.transpose() * spd_inverse(cii.c_tilde) * cii.d_e;
    for (std::size_t r = 0; r < rhs2.rows(); ++r)
      for (std::size_t k = 0; k < rhs2.cols(); ++k)
        rhs2(r, k) += cii.d_alpha[r] * cii.d_alpha[k] / cii.alpha;
    coincide = std::max(coincide, (rhs1 - spd_inverse(rhs2)).max_abs());
  }
  o.require(coincide <= 1e-6, "right-hand sides differ by " + fmt("%.3e", coincide));

  const WeightFunction step = tabulate_weight(fam.support, step_weight(0.0));
  WeightFunction twice = step;
  for (double& x : twice.values) x *= 2.0;
  const double m1 =
      check_wcr_I(build_cr_context_I(fam, step, id, th), weighted_fisher(fam, step, th))
          .conclusion_margin;
  const double m2 =
      check_wcr_I(build_cr_context_I(fam, twice, id, th), weighted_fisher(fam, twice, th))
          .conclusion_margin;
  o.require(std::abs(m2 - m1) > 1e-3, "scaling the weight left the margin unchanged");
  if (o.pass)
    o.detail = "margins " + fmt("%.1e", v1.conclusion_margin) + " / " +
               fmt("%.1e", v2.conclusion_margin) + ", rhs gap " + fmt("%.1e", coincide) +
               ", phi vs 2 phi " + fmt("%.6f", m1) + " vs " + fmt("%.6f", m2);
  return o;
}

Outcome kullback() {
  Outcome o;
  Rng rng(1009);
  double slack1 = INFINITY, slack2 = INFINITY, foc = 0.0, same = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const bool two_d = t % 4 == 3;
    const std::size_t n = between(rng, 2, two_d ? 5 : 4);
    ProductSpace s = counting({n});
    if (two_d) {
      std::normal_distribution<double> nd(0.0, 1.0);
      std::vector<double> pts(2 * n);
      for (double& x : pts) x = nd(rng);
      s = ProductSpace(discrete_space_nd(2, pts));
    }
    const Density f(s, simplex(rng, n)), g(s, simplex(rng, n));
    const WeightFunction phi(s, log_uniform(rng, n));
    const KullbackBound b1 = kullback_bound_1(f, g, phi);
    const KullbackBound b2 = kullback_bound_2(f, g, phi);
    slack1 = std::min(slack1, calibrated_relative_we(f, g, phi).value - b1.bound);
    slack2 = std::min(slack2, weighted_relative_entropy(f, g, phi) - b2.bound);
    if (!b1.clipped) foc = std::max(foc, b1.foc_residual);
    if (t < 200) {
      same = std::max(same, std::abs(kullback_bound_1(f, f, phi).bound));
      same = std::max(same, std::abs(kullback_bound_2(f, f, phi).bound));
    }
  }
  o.require(slack1 >= -1e-9, "bound 1 slack " + fmt("%.3e", slack1));
  o.require(slack2 >= -1e-9, "bound 2 slack " + fmt("%.3e", slack2));
  o.require(foc <= 1e-5, "foc residual " + fmt("%.3e", foc));
  o.require(same <= 1e-10, "f = g bound " + fmt("%.3e", same));
  if (o.pass)
    o.detail = "min slack " + fmt("%.2e", slack1) + " / " + fmt("%.2e", slack2) + ", foc " +
               fmt("%.1e", foc) + ", f = g " + fmt("%.1e", same);
  return o;
}

Outcome cli_contract() {
  Outcome o;
  const std::pair<const char*, int> fixtures[] = {
      {"exit0_weighted_entropy.json", 0},
      {"exit2_malformed.json", 2},
      {"exit3_unknown_op.json", 3},
      {"exit4_negative_divergence.json", 4},
      {"exit5_generalized_fano_as_written.json", 5},
  };
  const std::string quiet = " > /dev/null 2>&1";
  for (const auto& [file, expected] : fixtures) {
    const int code = run_command(kCli + " run " + (kFixtures / file).string() + quiet);
    o.require(code == expected, std::string(file) + " exited " + std::to_string(code));
  }
  const std::string suite = kCli + " suite --theorems all --instances 2000 --seed 11 > ";
  const auto a = kWork / "acceptance_suite_a.txt", b = kWork / "acceptance_suite_b.txt";
  const int ca = run_command("WENTROPY_THREADS=2 " + suite + a.string());
  const int cb = run_command("WENTROPY_THREADS=2 " + suite + b.string());
  const std::string ta = slurp(a), tb = slurp(b);
  o.require(ca == 0 && cb == 0, "suite exit codes " + std::to_string(ca) + "/" + std::to_string(cb));
  o.require(!ta.empty() && ta == tb, "suite output differs between runs");
  if (o.pass) o.detail = "five fixtures, suite output " + std::to_string(ta.size()) + " bytes identical";
  return o;
}

}  // namespace

int main() {
  const std::pair<const char*, Outcome (*)()> criteria[] = {
      {"classical reductions at unit weight", classical_reductions},
      {"soundness sweep, 100000 instances per checker", soundness_sweep},
      {"negative-divergence fixture", negative_divergence},
      {"identity suite", identity_suite},
      {"Fano equality and the as-written bound", fano_equality},
      {"Gaussian closed forms", gaussian_closed_forms},
      {"Fisher reductions", fisher_reductions},
      {"Cramer-Rao equality, agreement and non-invariance", cramer_rao},
      {"Kullback bounds", kullback},
      {"CLI contract", cli_contract},
  };
  int failed = 0;
  int index = 1;
  for (const auto& [name, fn] : criteria) {
    Outcome r;
    try {
      r = fn();
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail = std::string("threw: ") + e.what();
    }
    std::printf("criterion %2d: %s  %s (%s)\n", index++, r.pass ? "PASS" : "FAIL", name,
                r.detail.c_str());
    std::fflush(stdout);
    failed += r.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(std::size(criteria)) - failed,
              std::size(criteria));
  return failed == 0 ? 0 : 1;
}
