#pragma once
// Randomized soundness sweep. For every selected checker, draws are made
// until `instances` of them are accepted (applicable and hypothesis holds)
// or the draw cap is reached. Draws are evaluated in parallel in fixed-size
// batches and accepted in draw order, so the statistics depend only on the
// seed and the options.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "wentropy/generators.hpp"

namespace wentropy {

inline constexpr std::uint64_t kVacuityDraws = 1000000;
inline constexpr double kVacuityRate = 1e-4;

struct SuiteOptions {
  std::vector<std::string> theorems;  // empty or {"all"}: every registered checker
  std::uint64_t instances = 1000;
  std::uint64_t seed = 1;
  GenOptions gen;
  std::uint64_t max_draws = 0;  // 0: max(50 * instances, kVacuityDraws)
};

struct ViolationRecord {
  std::uint64_t draw = 0;
  double hypothesis_margin = 0.0;
  double conclusion_margin = 0.0;
};

struct CheckerStats {
  std::string name;
  std::uint64_t draws = 0;
  std::uint64_t accepted = 0;
  std::uint64_t inapplicable = 0;
  std::uint64_t conclusion_holds = 0;
  std::uint64_t equality = 0;
  std::uint64_t violations = 0;
  std::uint64_t errors = 0;  // evaluation threw; first message kept
  std::string first_error;
  double min_margin = 0.0;  // smallest conclusion margin over accepted draws
  std::vector<ViolationRecord> first_violations;  // up to 5
  bool vacuous = false;  // acceptance below 1e-4 after 1e6 draws

  double acceptance_rate() const {
    return draws == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(draws);
  }
};

struct SuiteReport {
  SuiteOptions options;
  std::vector<CheckerStats> checkers;
  std::uint64_t total_checks() const;
  std::uint64_t total_violations() const;
};

std::vector<std::string> resolve_theorems(const std::vector<std::string>& names);

SuiteReport run_suite(const SuiteOptions& opts);

// Deterministic text summary (no timings).
void print_suite(const SuiteReport& r, std::ostream& out);

// Accepted instances of one checker with their verdicts, in draw order.
struct AcceptedInstance {
  Instance instance;
  Verdict verdict;
};
struct GeneratedInstances {
  std::vector<AcceptedInstance> accepted;
  CheckerStats stats;
};
GeneratedInstances generate_instances(const std::string& checker, std::uint64_t seed,
                                      std::uint64_t count, const GenOptions& gen,
                                      std::uint64_t max_draws = 0);

// Stream id of a checker: FNV-1a of its name.
std::uint64_t checker_stream(const std::string& name);

}  // namespace wentropy
