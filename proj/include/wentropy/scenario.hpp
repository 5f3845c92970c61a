#pragma once
// Scenario files: named inputs plus an ordered task list, run sequentially.
// The file format is documented in docs/scenario-format.md.

#include <stdexcept>
#include <string>
#include <vector>

#include "wentropy/json_io.hpp"
#include "wentropy/report.hpp"

namespace wentropy {

// Carries the exit code of a scenario that cannot run: kExitParse for
// malformed files and inputs, kExitUnresolved for unknown names.
class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(int code, const std::string& what) : std::runtime_error(what), code_(code) {}
  int code() const { return code_; }

 private:
  int code_;
};

enum class RunMode {
  All,
  Compute,  // functionals only; checks are recorded as skipped
  Check,    // theorem verdicts only
};

// Registered operation names in a fixed order.
std::vector<std::string> registered_ops();
bool is_check_op(const std::string& op);

// Runs every selected task and sets report.exit_code: kExitViolation if any
// verdict is a soundness violation, else kExitAssertion if any expectation
// failed, else kExitOk. Throws ScenarioError before running anything when
// the file does not parse or names an unknown op, and during a task when a
// reference does not resolve or an input is rejected.
Report run_scenario(const std::string& path, RunMode mode = RunMode::All);
// Relative "file" references resolve against base_dir.
Report run_scenario_json(const Json& doc, const std::string& base_dir,
                         RunMode mode = RunMode::All);

// kExitViolation / kExitAssertion / kExitOk as above.
int exit_code_for(const Report& r);

}  // namespace wentropy
