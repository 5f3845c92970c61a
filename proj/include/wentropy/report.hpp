#pragma once
// Records produced by scenario runs and the soundness sweep.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wentropy/suite.hpp"
#include "wentropy/verdict.hpp"

namespace wentropy {

// Exit codes of the command-line front end.
enum ExitCode : int {
  kExitOk = 0,
  kExitParse = 2,
  kExitUnresolved = 3,
  kExitAssertion = 4,
  kExitViolation = 5,
};

// One assertion on a task output. `field` names an output, a verdict field
// (hypothesis_margin, conclusion_holds, ...) or a verdict diagnostic.
struct Expectation {
  std::string field = "value";
  std::optional<double> value;
  double tol = 1e-9;
  std::optional<double> min;
  std::optional<double> max;
  std::optional<bool> equals;
};

struct ExpectationResult {
  Expectation expected;
  double observed = 0.0;
  bool passed = false;
  std::string message;  // empty when passed
};

struct TaskRecord {
  std::size_t index = 0;
  std::string op;
  std::string inputs_digest;  // FNV-1a of the resolved argument definitions
  bool skipped = false;       // not selected by the subcommand
  std::vector<std::pair<std::string, double>> outputs;
  std::optional<Verdict> verdict;
  std::vector<ExpectationResult> expectations;
  double wall_time = 0.0;  // seconds
};

struct Report {
  std::string scenario_id;
  std::uint64_t seed = 0;
  std::vector<TaskRecord> tasks;
  std::optional<SuiteReport> suite;
  int exit_code = kExitOk;

  std::size_t failed_expectations() const;
  std::size_t violations() const;  // task verdicts plus suite violations
};

}  // namespace wentropy
