#pragma once
// Result record shared by every theorem checker. Margins are signed so that
// a nonnegative value means the hypothesis (resp. conclusion) holds.

#include <string>
#include <utility>
#include <vector>

namespace wentropy {

struct Tolerances {
  double hyp = 1e-9;
  double eq = 1e-9;
  double pt = 1e-9;
  double conclusion = 1e-9;

  static Tolerances discrete() { return {}; }
  static Tolerances grid() { return {1e-6, 1e-6, 1e-9, 1e-6}; }
  static Tolerances fisher() { return {1e-9, 1e-6, 1e-9, 1e-6}; }
};

inline constexpr double kTolFisher = 1e-6;

struct Verdict {
  std::string theorem_id;
  double hypothesis_margin = 0.0;
  bool hypothesis_holds = false;
  double conclusion_margin = 0.0;
  bool conclusion_holds = false;
  bool equality_detected = false;
  Tolerances tol;
  bool inapplicable = false;
  std::string inapplicable_reason;
  std::vector<std::string> assumption_tags;
  std::vector<std::pair<std::string, double>> diagnostics;

  // Hypothesis holds and preconditions hold but the conclusion fails.
  bool violation() const { return hypothesis_holds && !inapplicable && !conclusion_holds; }
  void note(std::string key, double value) { diagnostics.emplace_back(std::move(key), value); }
  double diagnostic(const std::string& key) const;
};

// Fills the holds flags from the margins and tolerances. The equality flag
// is set only when the conclusion margin is within tol.eq of zero and the
// checker's pointwise criterion (pointwise_equal) holds.
void finalize(Verdict& v, bool pointwise_equal);

Verdict make_inapplicable(std::string theorem_id, std::string reason, Tolerances tol = {});

}  // namespace wentropy
