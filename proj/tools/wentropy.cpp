// Command-line front end: scenario runs, the soundness sweep and report export.

#include <omp.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "wentropy/json_io.hpp"
#include "wentropy/scenario.hpp"
#include "wentropy/suite.hpp"

using namespace wentropy;

namespace {

// WENTROPY_THREADS caps the OpenMP team size.
void apply_thread_cap() {
  const char* env = std::getenv("WENTROPY_THREADS");
  if (!env || !*env) return;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (*end != '\0' || n < 1) {
    std::cerr << "warning: ignoring WENTROPY_THREADS=" << env << "\n";
    return;
  }
  omp_set_num_threads(static_cast<int>(std::min<long>(n, omp_get_max_threads())));
}

void print_report(const Report& r, std::ostream& out) {
  out << "scenario " << (r.scenario_id.empty() ? "(unnamed)" : r.scenario_id)
      << " seed=" << r.seed << "\n";
  char buf[256];
  for (const auto& t : r.tasks) {
    if (t.skipped) {
      std::snprintf(buf, sizeof buf, "  [%zu] %s skipped\n", t.index, t.op.c_str());
      out << buf;
      continue;
    }
    std::snprintf(buf, sizeof buf, "  [%zu] %s", t.index, t.op.c_str());
    out << buf;
    if (t.verdict) {
      const Verdict& v = *t.verdict;
      if (v.inapplicable) {
        out << " inapplicable: " << v.inapplicable_reason;
      } else {
        std::snprintf(buf, sizeof buf,
                      " hypothesis_margin=%.9g conclusion_margin=%.9g%s%s", v.hypothesis_margin,
                      v.conclusion_margin, v.equality_detected ? " equality" : "",
                      v.violation() ? " VIOLATION" : "");
        out << buf;
      }
    } else {
      for (const auto& [k, x] : t.outputs) {
        std::snprintf(buf, sizeof buf, " %s=%.9g", k.c_str(), x);
        out << buf;
      }
    }
    out << "\n";
    for (const auto& e : t.expectations)
      out << "      expect " << e.expected.field << ": "
          << (e.passed ? "ok" : "FAILED (" + e.message + ")") << "\n";
  }
  out << "exit " << r.exit_code << "\n";
}

void write_json(const Json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ScenarioError(kExitParse, "cannot write " + path);
  out << j.dump(2) << "\n";
}

int run_file(const std::string& path, RunMode mode, const std::string& out_path) {
  const Report r = run_scenario(path, mode);
  print_report(r, std::cout);
  if (!out_path.empty()) write_json(report_to_json(r), out_path);
  return r.exit_code;
}

// A saved report is converted as is; anything else is run as a scenario.
Report load_or_run(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError(kExitParse, "cannot open " + path);
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ScenarioError(kExitParse, path + " does not parse: " + e.what());
  }
  if (doc.is_object() && doc.value("kind", std::string{}) == "report") {
    try {
      return report_from_json(doc);
    } catch (const std::exception& e) {
      throw ScenarioError(kExitParse, path + ": " + e.what());
    }
  }
  return run_scenario(path);
}

}  // namespace

int main(int argc, char** argv) {
  apply_thread_cap();
  CLI::App app{"Weighted entropy toolkit: functionals, theorem checks and soundness sweeps"};
  app.require_subcommand(1);

  std::string scenario_path, out_path;
  auto* run = app.add_subcommand("run", "Run every task of a scenario");
  auto* compute = app.add_subcommand("compute", "Run the functional tasks of a scenario");
  auto* check = app.add_subcommand("check", "Run the theorem-check tasks of a scenario");
  for (auto* sc : {run, compute, check}) {
    sc->add_option("scenario", scenario_path, "Scenario JSON file")->required();
    sc->add_option("--out", out_path, "Write the report JSON here");
  }

  SuiteOptions sopt;
  std::string theorems = "all";
  auto* suite = app.add_subcommand("suite", "Randomized soundness sweep");
  suite->add_option("--theorems", theorems, "Comma-separated checker names or 'all'");
  suite->add_option("--instances", sopt.instances, "Accepted instances per checker")
      ->check(CLI::PositiveNumber);
  suite->add_option("--seed", sopt.seed, "Random seed");
  suite->add_option("--max-support", sopt.gen.max_support, "Largest support size per axis")
      ->check(CLI::Range(2, 4));
  suite->add_option("--phi-lo", sopt.gen.phi_lo, "Lower end of the weight range");
  suite->add_option("--phi-hi", sopt.gen.phi_hi, "Upper end of the weight range");
  suite->add_option("--max-draws", sopt.max_draws, "Draw cap per checker (0: automatic)");
  suite->add_option("--out", out_path, "Write the report JSON here");

  std::string format = "json";
  auto* report = app.add_subcommand("report", "Export a scenario run or a saved report");
  report->add_option("input", scenario_path, "Scenario or report JSON file")->required();
  report->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  report->add_option("--out", out_path, "Output path")->required();

  auto* list = app.add_subcommand("list", "List scenario ops and sweep checkers");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitParse;
  }

  try {
    if (*run) return run_file(scenario_path, RunMode::All, out_path);
    if (*compute) return run_file(scenario_path, RunMode::Compute, out_path);
    if (*check) return run_file(scenario_path, RunMode::Check, out_path);
    if (*suite) {
      std::stringstream names(theorems);
      for (std::string item; std::getline(names, item, ',');)
        if (!item.empty()) sopt.theorems.push_back(item);
      try {
        sopt.theorems = resolve_theorems(sopt.theorems);
      } catch (const std::invalid_argument& e) {
        throw ScenarioError(kExitUnresolved, e.what());
      }
      if (theorems == "all") sopt.theorems = {"all"};
      SuiteReport sr;
      try {
        sr = run_suite(sopt);
      } catch (const std::invalid_argument& e) {
        throw ScenarioError(kExitParse, e.what());
      }
      print_suite(sr, std::cout);
      Report r;
      r.scenario_id = "suite";
      r.seed = sopt.seed;
      r.suite = std::move(sr);
      r.exit_code = exit_code_for(r);
      if (!out_path.empty()) write_json(report_to_json(r), out_path);
      return r.exit_code;
    }
    if (*report) {
      const Report r = load_or_run(scenario_path);
      if (format == "json") {
        write_json(report_to_json(r), out_path);
      } else {
        std::ofstream out(out_path);
        if (!out) throw ScenarioError(kExitParse, "cannot write " + out_path);
        write_report_csv(r, out);
      }
      return r.exit_code;
    }
    if (*list) {
      std::cout << "ops:\n";
      for (const auto& op : registered_ops())
        std::cout << "  " << op << (is_check_op(op) ? "  (check)" : "") << "\n";
      std::cout << "checkers:\n";
      for (const auto& c : registered_checkers()) std::cout << "  " << c.name << "\n";
      return kExitOk;
    }
  } catch (const ScenarioError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code();
  }
  return kExitOk;
}
