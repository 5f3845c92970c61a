#include "wentropy/json_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace wentropy {

std::size_t Report::failed_expectations() const {
  std::size_t n = 0;
  for (const auto& t : tasks)
    for (const auto& e : t.expectations) n += e.passed ? 0 : 1;
  return n;
}

std::size_t Report::violations() const {
  std::size_t n = 0;
  for (const auto& t : tasks) n += (t.verdict && t.verdict->violation()) ? 1 : 0;
  if (suite) n += suite->total_violations();
  return n;
}

Json number_to_json(double x) {
  if (std::isnan(x)) return nullptr;
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

double number_from_json(const Json& j) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto& s = j.get_ref<const std::string&>();
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw std::invalid_argument("expected a number, got " + j.dump());
}

namespace {

Json pairs_to_json(const std::vector<std::pair<std::string, double>>& kv) {
  Json o = Json::object();
  for (const auto& [k, v] : kv) o[k] = number_to_json(v);
  return o;
}

std::vector<std::pair<std::string, double>> pairs_from_json(const Json& o) {
  std::vector<std::pair<std::string, double>> kv;
  for (const auto& [k, v] : o.items()) kv.emplace_back(k, number_from_json(v));
  return kv;
}

Json optional_number(const std::optional<double>& x) {
  return x ? number_to_json(*x) : Json(nullptr);
}

std::optional<double> read_optional(const Json& o, const char* key) {
  if (!o.contains(key) || o.at(key).is_null()) return std::nullopt;
  return number_from_json(o.at(key));
}

Json stats_to_json(const CheckerStats& c) {
  Json j;
  j["name"] = c.name;
  j["draws"] = c.draws;
  j["accepted"] = c.accepted;
  j["acceptance_rate"] = c.acceptance_rate();
  j["inapplicable"] = c.inapplicable;
  j["conclusion_holds"] = c.conclusion_holds;
  j["equality"] = c.equality;
  j["violations"] = c.violations;
  j["errors"] = c.errors;
  j["first_error"] = c.first_error;
  j["min_margin"] = number_to_json(c.min_margin);
  j["vacuous"] = c.vacuous;
  Json v = Json::array();
  for (const auto& r : c.first_violations)
    v.push_back({{"draw", r.draw},
                 {"hypothesis_margin", number_to_json(r.hypothesis_margin)},
                 {"conclusion_margin", number_to_json(r.conclusion_margin)}});
  j["first_violations"] = v;
  return j;
}

CheckerStats stats_from_json(const Json& j) {
  CheckerStats c;
  c.name = j.at("name").get<std::string>();
  c.draws = j.at("draws").get<std::uint64_t>();
  c.accepted = j.at("accepted").get<std::uint64_t>();
  c.inapplicable = j.at("inapplicable").get<std::uint64_t>();
  c.conclusion_holds = j.at("conclusion_holds").get<std::uint64_t>();
  c.equality = j.at("equality").get<std::uint64_t>();
  c.violations = j.at("violations").get<std::uint64_t>();
  c.errors = j.value("errors", std::uint64_t{0});
  c.first_error = j.value("first_error", std::string{});
  c.min_margin = number_from_json(j.at("min_margin"));
  c.vacuous = j.at("vacuous").get<bool>();
  for (const auto& r : j.at("first_violations"))
    c.first_violations.push_back({r.at("draw").get<std::uint64_t>(),
                                  number_from_json(r.at("hypothesis_margin")),
                                  number_from_json(r.at("conclusion_margin"))});
  return c;
}

std::string fmt_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

}  // namespace

Json verdict_to_json(const Verdict& v) {
  Json j;
  j["theorem_id"] = v.theorem_id;
  j["hypothesis_margin"] = number_to_json(v.hypothesis_margin);
  j["hypothesis_holds"] = v.hypothesis_holds;
  j["conclusion_margin"] = number_to_json(v.conclusion_margin);
  j["conclusion_holds"] = v.conclusion_holds;
  j["equality_detected"] = v.equality_detected;
  j["violation"] = v.violation();
  j["inapplicable"] = v.inapplicable;
  j["inapplicable_reason"] = v.inapplicable_reason;
  j["tol"] = {{"hyp", v.tol.hyp}, {"eq", v.tol.eq}, {"pt", v.tol.pt},
              {"conclusion", v.tol.conclusion}};
  j["assumption_tags"] = v.assumption_tags;
  j["diagnostics"] = pairs_to_json(v.diagnostics);
  return j;
}

Verdict verdict_from_json(const Json& j) {
  Verdict v;
  v.theorem_id = j.at("theorem_id").get<std::string>();
  v.hypothesis_margin = number_from_json(j.at("hypothesis_margin"));
  v.hypothesis_holds = j.at("hypothesis_holds").get<bool>();
  v.conclusion_margin = number_from_json(j.at("conclusion_margin"));
  v.conclusion_holds = j.at("conclusion_holds").get<bool>();
  v.equality_detected = j.at("equality_detected").get<bool>();
  v.inapplicable = j.at("inapplicable").get<bool>();
  v.inapplicable_reason = j.value("inapplicable_reason", std::string{});
  const Json& t = j.at("tol");
  v.tol = {t.at("hyp").get<double>(), t.at("eq").get<double>(), t.at("pt").get<double>(),
           t.at("conclusion").get<double>()};
  v.assumption_tags = j.at("assumption_tags").get<std::vector<std::string>>();
  v.diagnostics = pairs_from_json(j.at("diagnostics"));
  return v;
}

Json suite_to_json(const SuiteReport& r) {
  Json j;
  const auto& o = r.options;
  j["seed"] = o.seed;
  j["instances"] = o.instances;
  j["max_support"] = o.gen.max_support;
  j["phi_range"] = {o.gen.phi_lo, o.gen.phi_hi};
  j["max_draws"] = o.max_draws;
  j["theorems"] = o.theorems;
  std::uint64_t draws = 0, holds = 0, equal = 0;
  for (const auto& c : r.checkers) {
    draws += c.draws;
    holds += c.conclusion_holds;
    equal += c.equality;
  }
  j["summary"] = {{"checks_run", draws},
                  {"hypothesis_holds", r.total_checks()},
                  {"conclusion_holds", holds},
                  {"violations", r.total_violations()},
                  {"equality_cases", equal}};
  Json cs = Json::array();
  for (const auto& c : r.checkers) cs.push_back(stats_to_json(c));
  j["checkers"] = cs;
  return j;
}

SuiteReport suite_from_json(const Json& j) {
  SuiteReport r;
  auto& o = r.options;
  o.seed = j.at("seed").get<std::uint64_t>();
  o.instances = j.at("instances").get<std::uint64_t>();
  o.gen.max_support = j.at("max_support").get<std::size_t>();
  o.gen.phi_lo = j.at("phi_range").at(0).get<double>();
  o.gen.phi_hi = j.at("phi_range").at(1).get<double>();
  o.max_draws = j.value("max_draws", std::uint64_t{0});
  o.theorems = j.at("theorems").get<std::vector<std::string>>();
  for (const auto& c : j.at("checkers")) r.checkers.push_back(stats_from_json(c));
  return r;
}

Json report_to_json(const Report& r) {
  Json j;
  j["schema"] = kSchema;
  j["kind"] = "report";
  j["scenario"] = r.scenario_id;
  j["seed"] = r.seed;
  j["exit_code"] = r.exit_code;
  Json tasks = Json::array();
  for (const auto& t : r.tasks) {
    Json tj;
    tj["index"] = t.index;
    tj["op"] = t.op;
    tj["inputs_digest"] = t.inputs_digest;
    tj["skipped"] = t.skipped;
    tj["outputs"] = pairs_to_json(t.outputs);
    tj["verdict"] = t.verdict ? verdict_to_json(*t.verdict) : Json(nullptr);
    Json ex = Json::array();
    for (const auto& e : t.expectations) {
      const auto& x = e.expected;
      ex.push_back({{"field", x.field},
                    {"value", optional_number(x.value)},
                    {"tol", x.tol},
                    {"min", optional_number(x.min)},
                    {"max", optional_number(x.max)},
                    {"equals", x.equals ? Json(*x.equals) : Json(nullptr)},
                    {"observed", number_to_json(e.observed)},
                    {"passed", e.passed},
                    {"message", e.message}});
    }
    tj["expectations"] = ex;
    tj["wall_time"] = t.wall_time;
    tasks.push_back(tj);
  }
  j["tasks"] = tasks;
  j["suite"] = r.suite ? suite_to_json(*r.suite) : Json(nullptr);
  return j;
}

Report report_from_json(const Json& j) {
  if (j.value("schema", std::string{}) != kSchema || j.value("kind", std::string{}) != "report")
    throw std::invalid_argument("not a wentropy/1 report");
  Report r;
  r.scenario_id = j.at("scenario").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.exit_code = j.at("exit_code").get<int>();
  for (const auto& tj : j.at("tasks")) {
    TaskRecord t;
    t.index = tj.at("index").get<std::size_t>();
    t.op = tj.at("op").get<std::string>();
    t.inputs_digest = tj.at("inputs_digest").get<std::string>();
    t.skipped = tj.at("skipped").get<bool>();
    t.outputs = pairs_from_json(tj.at("outputs"));
    if (!tj.at("verdict").is_null()) t.verdict = verdict_from_json(tj.at("verdict"));
    for (const auto& e : tj.at("expectations")) {
      ExpectationResult res;
      res.expected.field = e.at("field").get<std::string>();
      res.expected.value = read_optional(e, "value");
      res.expected.tol = e.at("tol").get<double>();
      res.expected.min = read_optional(e, "min");
      res.expected.max = read_optional(e, "max");
      if (!e.at("equals").is_null()) res.expected.equals = e.at("equals").get<bool>();
      res.observed = number_from_json(e.at("observed"));
      res.passed = e.at("passed").get<bool>();
      res.message = e.at("message").get<std::string>();
      t.expectations.push_back(res);
    }
    t.wall_time = tj.at("wall_time").get<double>();
    r.tasks.push_back(std::move(t));
  }
  if (!j.at("suite").is_null()) r.suite = suite_from_json(j.at("suite"));
  return r;
}

void write_report_csv(const Report& r, std::ostream& out) {
  out << "index,op,inputs_digest,skipped,theorem_id,hypothesis_margin,hypothesis_holds,"
         "conclusion_margin,conclusion_holds,equality_detected,inapplicable,"
         "expectations_passed,outputs\n";
  auto flag = [](bool b) { return b ? "1" : "0"; };
  for (const auto& t : r.tasks) {
    std::string outputs;
    for (const auto& [k, v] : t.outputs) {
      if (!outputs.empty()) outputs += ';';
      outputs += k + '=' + fmt_number(v);
    }
    bool passed = true;
    for (const auto& e : t.expectations) passed = passed && e.passed;
    out << t.index << ',' << csv_field(t.op) << ',' << t.inputs_digest << ',' << flag(t.skipped)
        << ',';
    if (t.verdict) {
      const Verdict& v = *t.verdict;
      out << csv_field(v.theorem_id) << ',' << fmt_number(v.hypothesis_margin) << ','
          << flag(v.hypothesis_holds) << ',' << fmt_number(v.conclusion_margin) << ','
          << flag(v.conclusion_holds) << ',' << flag(v.equality_detected) << ','
          << flag(v.inapplicable) << ',';
    } else {
      out << ",,,,,,,";
    }
    out << (t.expectations.empty() ? "" : flag(passed)) << ',' << csv_field(outputs) << '\n';
  }
  if (!r.suite) return;
  for (const auto& c : r.suite->checkers) {
    std::string outputs = "draws=" + std::to_string(c.draws) +
                          ";accepted=" + std::to_string(c.accepted) +
                          ";inapplicable=" + std::to_string(c.inapplicable) +
                          ";conclusion_holds=" + std::to_string(c.conclusion_holds) +
                          ";equality=" + std::to_string(c.equality) +
                          ";violations=" + std::to_string(c.violations) +
                          ";errors=" + std::to_string(c.errors);
    out << ',' << csv_field("suite:" + c.name) << ",,0,,,,"
        << fmt_number(c.min_margin) << ",,,,," << csv_field(outputs) << '\n';
  }
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace wentropy
