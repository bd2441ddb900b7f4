#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cmlc/conformal.hpp"

namespace cmlc {

enum class DecisionMode { force, abstain };

enum class Outcome : std::uint8_t { predict_negative = 0, predict_positive = 1, abstain = 2 };

struct DecisionConfig {
  // Plausibility ratio threshold: predict positive iff q1 >= theta * q0.
  // theta = 0 is the degenerate always-positive rule; so is q0 = q1 = 0 at
  // theta = 1, since the comparison is inclusive.
  double theta = 1.0;
  // In abstain mode, abstain when max(q0, q1) <= abstention_threshold.
  double abstention_threshold = 0.1;
  DecisionMode mode = DecisionMode::force;

  void validate() const;  // throws config_error
};

struct LabelDecision {
  Outcome outcome = Outcome::predict_negative;
  PlausibilityPair plausibility;

  bool abstained() const { return outcome == Outcome::abstain; }
  int predicted() const { return outcome == Outcome::predict_positive ? 1 : 0; }
};

// Abstention (abstain mode only) is checked before the threshold rule.
LabelDecision decide(const PlausibilityPair& pair, const DecisionConfig& config);

// Normalizes the query and produces one decision per label, in label order.
std::vector<LabelDecision> predict_instance(std::span<const double> raw_query,
                                            const CalibratedModel& model,
                                            const DecisionConfig& config);

const char* outcome_name(Outcome outcome);  // "0", "1", or "abstain"

}  // namespace cmlc
