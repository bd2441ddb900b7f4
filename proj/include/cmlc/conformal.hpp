#pragma once

#include <cstddef>
#include <ostream>
#include <span>
#include <vector>

#include "cmlc/dataset.hpp"
#include "cmlc/normalize.hpp"
#include "cmlc/rule_search.hpp"

namespace cmlc {

// Quality of the best rule supporting one (query, label, value) triple.
struct ConformityScore {
  double value = 0.0;  // in (-1, 1]
};

// Leave-one-out conformity scores of the training rows for one label,
// partitioned by the row's true label value. Both lists sorted ascending.
struct CalibrationTable {
  std::size_t label_index = 0;
  std::vector<double> scores_pos;  // rows with y_k = 1
  std::vector<double> scores_neg;  // rows with y_k = 0
};

struct PlausibilityPair {
  double q0 = 0.0;
  double q1 = 0.0;
};

// Best-rule evaluation for the head `value`; `excluded` rows (sorted) are
// invisible to the window search.
ConformityScore conformity(std::span<const double> query, std::size_t label_index, int value,
                           const MultiLabelDataset& data, std::span<const std::size_t> excluded,
                           const SearchSchedule& schedule);

// Per training row i: its conformity on the remaining N-1 rows, filed under
// its true label value. Requires at least two rows.
CalibrationTable calibrate(const MultiLabelDataset& train, std::size_t label_index,
                           const SearchSchedule& schedule, unsigned jobs = 1);

// Fraction of same-value calibration scores strictly below c; 0 when the
// matching list is empty.
double plausibility(ConformityScore c, const CalibrationTable& table, int value);

// (q0, q1) for a query that is not part of the training data.
PlausibilityPair plausibility_pair(std::span<const double> query, std::size_t label_index,
                                   const CalibrationTable& table, const MultiLabelDataset& train,
                                   const SearchSchedule& schedule);

// Classical conformal p-value: (#{alpha_i >= alpha_new} + 1) / (N + 1),
// where alpha are nonconformity scores (higher = stranger) and the new score
// participates in its own count.
double p_value(std::span<const double> calibration_scores, double alpha_new);

// "label_index,true_value,score" rows, scores in ascending order per class.
void write_calibration_csv(const CalibrationTable& table, std::ostream& out);

// Everything needed to answer queries for one training split.
struct CalibratedModel {
  MultiLabelDataset train;  // features normalized to [0,1]^d
  NormalizationModel normalizer;
  SearchSchedule schedule;
  std::vector<CalibrationTable> tables;  // one per label
};

CalibratedModel fit_model(const MultiLabelDataset& data, std::span<const std::size_t> train_rows,
                          const SearchSchedule& schedule, unsigned jobs = 1);

// Normalizes the raw query and computes one PlausibilityPair per label.
std::vector<PlausibilityPair> query_plausibilities(const CalibratedModel& model,
                                                   std::span<const double> raw_query);

}  // namespace cmlc
