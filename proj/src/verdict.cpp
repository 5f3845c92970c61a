#include "wentropy/verdict.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace wentropy {

double Verdict::diagnostic(const std::string& key) const {
  for (const auto& [k, v] : diagnostics)
    if (k == key) return v;
  throw std::out_of_range("Verdict: no diagnostic named " + key);
}

void finalize(Verdict& v, bool pointwise_equal) {
  if (std::isnan(v.hypothesis_margin) || std::isnan(v.conclusion_margin))
    throw std::runtime_error(v.theorem_id + ": margin evaluated to NaN");
  v.hypothesis_holds = v.hypothesis_margin >= -v.tol.hyp;
  v.conclusion_holds = v.conclusion_margin >= -v.tol.conclusion;
  v.equality_detected = std::abs(v.conclusion_margin) <= v.tol.eq && pointwise_equal;
}

Verdict make_inapplicable(std::string theorem_id, std::string reason, Tolerances tol) {
  Verdict v;
  v.theorem_id = std::move(theorem_id);
  v.inapplicable = true;
  v.inapplicable_reason = std::move(reason);
  v.tol = tol;
  v.hypothesis_margin = std::numeric_limits<double>::quiet_NaN();
  v.conclusion_margin = std::numeric_limits<double>::quiet_NaN();
  return v;
}

}  // namespace wentropy
