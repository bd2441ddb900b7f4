#include "cmlc/conformal.hpp"

#include <algorithm>
#include <cstdio>
#include <string>

#include "cmlc/errors.hpp"
#include "cmlc/parallel.hpp"

namespace cmlc {

ConformityScore conformity(std::span<const double> query, std::size_t label_index, int value,
                           const MultiLabelDataset& data, std::span<const std::size_t> excluded,
                           const SearchSchedule& schedule) {
  return {best_rule(query, label_index, value, data, excluded, schedule).eval};
}

CalibrationTable calibrate(const MultiLabelDataset& train, std::size_t label_index,
                           const SearchSchedule& schedule, unsigned jobs) {
  if (train.n_rows() < 2)
    throw config_error("leave-one-out calibration needs at least two training rows");
  if (label_index >= train.n_labels())
    throw config_error("label index " + std::to_string(label_index) + " out of range");

  std::vector<double> scores(train.n_rows());
  parallel_for(train.n_rows(), jobs, [&](std::size_t i) {
    const std::size_t self[] = {i};
    scores[i] = conformity(train.feature_row(i), label_index, train.label(i, label_index), train,
                           self, schedule)
                    .value;
  });

  CalibrationTable table;
  table.label_index = label_index;
  for (std::size_t i = 0; i < train.n_rows(); ++i) {
    if (train.label(i, label_index) == 1)
      table.scores_pos.push_back(scores[i]);
    else
      table.scores_neg.push_back(scores[i]);
  }
  std::sort(table.scores_pos.begin(), table.scores_pos.end());
  std::sort(table.scores_neg.begin(), table.scores_neg.end());
  return table;
}

double plausibility(ConformityScore c, const CalibrationTable& table, int value) {
  const std::vector<double>& scores = value == 1 ? table.scores_pos : table.scores_neg;
  if (scores.empty()) return 0.0;
  const auto below = std::lower_bound(scores.begin(), scores.end(), c.value) - scores.begin();
  return static_cast<double>(below) / static_cast<double>(scores.size());
}

PlausibilityPair plausibility_pair(std::span<const double> query, std::size_t label_index,
                                   const CalibrationTable& table, const MultiLabelDataset& train,
                                   const SearchSchedule& schedule) {
  PlausibilityPair pair;
  pair.q1 = plausibility(conformity(query, label_index, 1, train, {}, schedule), table, 1);
  pair.q0 = plausibility(conformity(query, label_index, 0, train, {}, schedule), table, 0);
  return pair;
}

double p_value(std::span<const double> calibration_scores, double alpha_new) {
  std::size_t at_least = 0;
  for (double s : calibration_scores) at_least += static_cast<std::size_t>(s >= alpha_new);
  return static_cast<double>(at_least + 1) /
         static_cast<double>(calibration_scores.size() + 1);
}

void write_calibration_csv(const CalibrationTable& table, std::ostream& out) {
  out << "label_index,true_value,score\n";
  char buf[64];
  for (double s : table.scores_neg) {
    std::snprintf(buf, sizeof(buf), "%.17g", s);
    out << table.label_index << ",0," << buf << '\n';
  }
  for (double s : table.scores_pos) {
    std::snprintf(buf, sizeof(buf), "%.17g", s);
    out << table.label_index << ",1," << buf << '\n';
  }
}

CalibratedModel fit_model(const MultiLabelDataset& data, std::span<const std::size_t> train_rows,
                          const SearchSchedule& schedule, unsigned jobs) {
  auto normalizer = NormalizationModel::fit(data, train_rows);
  MultiLabelDataset train = normalizer.apply(data.subset(train_rows));
  std::vector<CalibrationTable> tables;
  tables.reserve(train.n_labels());
  for (std::size_t k = 0; k < train.n_labels(); ++k)
    tables.push_back(calibrate(train, k, schedule, jobs));
  return CalibratedModel{std::move(train), std::move(normalizer), schedule, std::move(tables)};
}

std::vector<PlausibilityPair> query_plausibilities(const CalibratedModel& model,
                                                   std::span<const double> raw_query) {
  const std::vector<double> query = model.normalizer.apply_row(raw_query);
  std::vector<PlausibilityPair> pairs(model.train.n_labels());
  for (std::size_t k = 0; k < model.train.n_labels(); ++k)
    pairs[k] = plausibility_pair(query, k, model.tables[k], model.train, model.schedule);
  return pairs;
}

}  // namespace cmlc
