#include "cmlc/decision.hpp"

#include <algorithm>

#include "cmlc/errors.hpp"

namespace cmlc {

void DecisionConfig::validate() const {
  if (!(theta >= 0.0)) throw config_error("theta must be non-negative");
  if (!(abstention_threshold >= 0.0 && abstention_threshold <= 1.0))
    throw config_error("abstention threshold must lie in [0,1]");
}

LabelDecision decide(const PlausibilityPair& pair, const DecisionConfig& config) {
  LabelDecision decision;
  decision.plausibility = pair;
  if (config.mode == DecisionMode::abstain &&
      std::max(pair.q0, pair.q1) <= config.abstention_threshold) {
    decision.outcome = Outcome::abstain;
    return decision;
  }
  decision.outcome = pair.q1 >= config.theta * pair.q0 ? Outcome::predict_positive
                                                       : Outcome::predict_negative;
  return decision;
}

std::vector<LabelDecision> predict_instance(std::span<const double> raw_query,
                                            const CalibratedModel& model,
                                            const DecisionConfig& config) {
  config.validate();
  const auto pairs = query_plausibilities(model, raw_query);
  std::vector<LabelDecision> decisions(pairs.size());
  for (std::size_t k = 0; k < pairs.size(); ++k) decisions[k] = decide(pairs[k], config);
  return decisions;
}

const char* outcome_name(Outcome outcome) {
  switch (outcome) {
    case Outcome::predict_negative: return "0";
    case Outcome::predict_positive: return "1";
    default: return "abstain";
  }
}

}  // namespace cmlc
