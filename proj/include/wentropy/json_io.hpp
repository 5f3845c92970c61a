#pragma once
// JSON and CSV forms of verdicts, suite results and reports. Non-finite
// numbers are written as the strings "inf" and "-inf" and NaN as null, and
// are read back the same way.

#include <iosfwd>
#include <string>

#include "json.hpp"
#include "wentropy/report.hpp"

namespace wentropy {

using Json = nlohmann::ordered_json;

inline constexpr const char* kSchema = "wentropy/1";

Json number_to_json(double x);
// Accepts numbers, null and the strings "inf", "+inf", "-inf", "nan".
double number_from_json(const Json& j);

Json verdict_to_json(const Verdict& v);
Verdict verdict_from_json(const Json& j);

Json suite_to_json(const SuiteReport& r);
SuiteReport suite_from_json(const Json& j);

Json report_to_json(const Report& r);
Report report_from_json(const Json& j);

// One row per task: index, op, digest, skipped, the verdict fields (empty for
// plain computations), the expectation outcome and the outputs as
// key=value pairs joined by ';'. Suite checkers follow as rows with op
// "suite:<checker>".
void write_report_csv(const Report& r, std::ostream& out);

// 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace wentropy
