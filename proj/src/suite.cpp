#include "wentropy/suite.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>

namespace wentropy {

namespace {

constexpr std::uint64_t kBatch = 1024;
constexpr std::size_t kKeepViolations = 5;

struct Outcome {
  bool error = false;
  std::string message;
  std::optional<Verdict> verdict;
  std::optional<Instance> instance;
};

std::uint64_t draw_cap(std::uint64_t instances, std::uint64_t max_draws) {
  if (max_draws != 0) return max_draws;
  return std::max<std::uint64_t>(50 * instances, kVacuityDraws);
}

// Core loop shared by the sweep and the instance generator.
CheckerStats sweep(const Checker& c, std::uint64_t seed, std::uint64_t count,
                   const GenOptions& gen, std::uint64_t max_draws,
                   std::vector<AcceptedInstance>* keep) {
  CheckerStats st;
  st.name = c.name;
  st.min_margin = std::numeric_limits<double>::infinity();
  const std::uint64_t stream = checker_stream(c.name);
  const std::uint64_t cap = draw_cap(count, max_draws);
  std::vector<Outcome> batch;
  std::uint64_t next = 0;
  while (st.accepted < count && next < cap) {
    const std::uint64_t n = std::min(kBatch, cap - next);
    batch.assign(n, Outcome{});
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(n); ++k) {
      const std::uint64_t idx = next + static_cast<std::uint64_t>(k);
      Outcome& o = batch[static_cast<std::size_t>(k)];
      try {
        CounterRng rng(seed, stream, idx);
        Instance in = c.draw(rng, gen);
        in.draw = idx;
        o.verdict = c.evaluate(in);
        if (keep) o.instance = std::move(in);
      } catch (const std::exception& e) {
        o.error = true;
        o.message = e.what();
      }
    }
    for (std::uint64_t k = 0; k < n && st.accepted < count; ++k) {
      Outcome& o = batch[k];
      ++st.draws;
      if (o.error) {
        if (st.errors++ == 0) st.first_error = o.message;
        continue;
      }
      const Verdict& v = *o.verdict;
      if (v.inapplicable) {
        ++st.inapplicable;
        continue;
      }
      if (!v.hypothesis_holds) continue;
      ++st.accepted;
      st.min_margin = std::min(st.min_margin, v.conclusion_margin);
      if (v.conclusion_holds) ++st.conclusion_holds;
      if (v.equality_detected) ++st.equality;
      if (v.violation()) {
        ++st.violations;
        if (st.first_violations.size() < kKeepViolations)
          st.first_violations.push_back({next + k, v.hypothesis_margin, v.conclusion_margin});
      }
      if (keep) keep->push_back({std::move(*o.instance), v});
    }
    next += n;
  }
  if (st.accepted == 0) st.min_margin = std::numeric_limits<double>::quiet_NaN();
  st.vacuous = st.draws >= kVacuityDraws && st.acceptance_rate() < kVacuityRate;
  return st;
}

}  // namespace

std::uint64_t checker_stream(const std::string& name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : name) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t SuiteReport::total_checks() const {
  std::uint64_t s = 0;
  for (const auto& c : checkers) s += c.accepted;
  return s;
}

std::uint64_t SuiteReport::total_violations() const {
  std::uint64_t s = 0;
  for (const auto& c : checkers) s += c.violations;
  return s;
}

std::vector<std::string> resolve_theorems(const std::vector<std::string>& names) {
  std::vector<std::string> out;
  const bool all = names.empty() || std::find(names.begin(), names.end(), "all") != names.end();
  if (all) {
    for (const Checker& c : registered_checkers()) out.push_back(c.name);
    return out;
  }
  for (const auto& n : names) out.push_back(find_checker(n).name);
  return out;
}

SuiteReport run_suite(const SuiteOptions& opts) {
  if (opts.instances == 0) throw std::invalid_argument("suite: instances must be positive");
  if (opts.gen.max_support < 2 || opts.gen.max_support > 4)
    throw std::invalid_argument("suite: max_support must be in [2, 4]");
  if (!(opts.gen.phi_lo > 0.0) || !(opts.gen.phi_hi >= opts.gen.phi_lo))
    throw std::invalid_argument("suite: phi range must be positive");
  SuiteReport r;
  r.options = opts;
  for (const auto& name : resolve_theorems(opts.theorems))
    r.checkers.push_back(
        sweep(find_checker(name), opts.seed, opts.instances, opts.gen, opts.max_draws, nullptr));
  return r;
}

GeneratedInstances generate_instances(const std::string& checker, std::uint64_t seed,
                                      std::uint64_t count, const GenOptions& gen,
                                      std::uint64_t max_draws) {
  GeneratedInstances g;
  g.stats = sweep(find_checker(checker), seed, count, gen, max_draws, &g.accepted);
  return g;
}

void print_suite(const SuiteReport& r, std::ostream& out) {
  char buf[512];
  const auto& o = r.options;
  std::snprintf(buf, sizeof buf, "suite seed=%llu instances=%llu max_support=%zu phi=[%g,%g]\n",
                static_cast<unsigned long long>(o.seed),
                static_cast<unsigned long long>(o.instances), o.gen.max_support, o.gen.phi_lo,
                o.gen.phi_hi);
  out << buf;
  std::snprintf(buf, sizeof buf, "%-40s %10s %10s %10s %8s %10s %8s %10s %13s\n", "checker",
                "draws", "accepted", "acceptance", "inappl", "holds", "equal", "violations",
                "min_margin");
  out << buf;
  for (const auto& c : r.checkers) {
    std::snprintf(buf, sizeof buf, "%-40s %10llu %10llu %10.6f %8llu %10llu %8llu %10llu %13.6e\n",
                  c.name.c_str(), static_cast<unsigned long long>(c.draws),
                  static_cast<unsigned long long>(c.accepted), c.acceptance_rate(),
                  static_cast<unsigned long long>(c.inapplicable),
                  static_cast<unsigned long long>(c.conclusion_holds),
                  static_cast<unsigned long long>(c.equality),
                  static_cast<unsigned long long>(c.violations), c.min_margin);
    out << buf;
    if (c.vacuous) out << "  note: hypothesis practically vacuous for this generator\n";
    if (c.accepted < o.instances && !c.vacuous) {
      std::snprintf(buf, sizeof buf, "  note: draw cap reached with %llu of %llu accepted\n",
                    static_cast<unsigned long long>(c.accepted),
                    static_cast<unsigned long long>(o.instances));
      out << buf;
    }
    if (c.errors > 0) {
      std::snprintf(buf, sizeof buf, "  errors: %llu (first: %s)\n",
                    static_cast<unsigned long long>(c.errors), c.first_error.c_str());
      out << buf;
    }
    for (const auto& v : c.first_violations) {
      std::snprintf(buf, sizeof buf, "  violation: draw=%llu hypothesis_margin=%.9e conclusion_margin=%.9e\n",
                    static_cast<unsigned long long>(v.draw), v.hypothesis_margin,
                    v.conclusion_margin);
      out << buf;
    }
  }
  std::snprintf(buf, sizeof buf, "total checks=%llu violations=%llu\n",
                static_cast<unsigned long long>(r.total_checks()),
                static_cast<unsigned long long>(r.total_violations()));
  out << buf;
  out << (r.total_violations() == 0 ? "result: zero soundness violations\n"
                                    : "result: SOUNDNESS VIOLATIONS FOUND\n");
}

}  // namespace wentropy
