#include "cmlc/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "cmlc/errors.hpp"
#include "cmlc/parallel.hpp"

namespace cmlc {

namespace {

struct PairCounts {
  std::size_t evaluated = 0;
  std::size_t abstained = 0;
  std::size_t mismatches = 0;
  std::size_t tp = 0, fp = 0, fn = 0;
};

PairCounts count_pairs(const LabelMatrix& truth, const DecisionMatrix& decisions) {
  if (truth.size() != decisions.size())
    throw config_error("truth and decision matrices have different numbers of rows");
  PairCounts counts;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i].size() != decisions[i].size())
      throw config_error("truth and decision rows have different lengths");
    for (std::size_t k = 0; k < truth[i].size(); ++k) {
      const LabelDecision& d = decisions[i][k];
      if (d.abstained()) {
        ++counts.abstained;
        continue;
      }
      ++counts.evaluated;
      const int y = truth[i][k];
      const int y_hat = d.predicted();
      counts.mismatches += static_cast<std::size_t>(y != y_hat);
      counts.tp += static_cast<std::size_t>(y == 1 && y_hat == 1);
      counts.fp += static_cast<std::size_t>(y == 0 && y_hat == 1);
      counts.fn += static_cast<std::size_t>(y == 1 && y_hat == 0);
    }
  }
  return counts;
}

double hamming_from_counts(const PairCounts& c) {
  return static_cast<double>(c.mismatches) / static_cast<double>(c.evaluated);
}

double f1_from_counts(const PairCounts& c) {
  const std::size_t denom = 2 * c.tp + c.fp + c.fn;
  if (denom == 0) return 1.0;  // all-negative block predicted all-negative
  return 2.0 * static_cast<double>(c.tp) / static_cast<double>(denom);
}

}  // namespace

double hamming_loss(const LabelMatrix& truth, const DecisionMatrix& decisions) {
  const PairCounts counts = count_pairs(truth, decisions);
  if (counts.evaluated == 0)
    throw undefined_metric_error("Hamming loss undefined: every pair abstained");
  return hamming_from_counts(counts);
}

double micro_f1(const LabelMatrix& truth, const DecisionMatrix& decisions) {
  const PairCounts counts = count_pairs(truth, decisions);
  if (counts.evaluated == 0)
    throw undefined_metric_error("micro-F1 undefined: every pair abstained");
  return f1_from_counts(counts);
}

MetricReport compute_metrics(const LabelMatrix& truth, const DecisionMatrix& decisions) {
  const PairCounts counts = count_pairs(truth, decisions);
  MetricReport report;
  report.n_evaluated = counts.evaluated;
  const std::size_t total = counts.evaluated + counts.abstained;
  report.rejection_rate =
      total == 0 ? 0.0 : static_cast<double>(counts.abstained) / static_cast<double>(total);
  if (counts.evaluated == 0) {
    report.defined = false;
    report.hamming_loss = std::numeric_limits<double>::quiet_NaN();
    report.micro_f1 = std::numeric_limits<double>::quiet_NaN();
    return report;
  }
  report.defined = true;
  report.hamming_loss = hamming_from_counts(counts);
  report.micro_f1 = f1_from_counts(counts);
  return report;
}

void ExperimentConfig::validate(std::size_t n_total) const {
  if (n_splits == 0) throw config_error("n_splits must be at least 1");
  if (n_train == 0 || n_train >= n_total)
    throw config_error("n_train must satisfy 0 < n_train < N (N=" + std::to_string(n_total) +
                       ")");
  auto check_grid = [](const std::vector<double>& grid, const char* name) {
    if (grid.empty()) throw config_error(std::string(name) + " is empty");
    for (std::size_t i = 1; i < grid.size(); ++i)
      if (!(grid[i] > grid[i - 1]))
        throw config_error(std::string(name) + " must be strictly increasing");
  };
  check_grid(theta_grid, "theta grid");
  check_grid(abstention_grid, "abstention grid");
  for (double t : theta_grid)
    if (!(t > 0.0)) throw config_error("theta grid values must be positive");
  for (double a : abstention_grid)
    if (!(a >= 0.0 && a <= 1.0)) throw config_error("abstention grid values must lie in [0,1]");
  if (!(rejection_theta >= 0.0)) throw config_error("rejection theta must be non-negative");
}

std::vector<std::vector<PlausibilityPair>> test_plausibilities(const CalibratedModel& model,
                                                               const MultiLabelDataset& test,
                                                               unsigned jobs) {
  std::vector<std::vector<PlausibilityPair>> pairs(test.n_rows());
  parallel_for(test.n_rows(), jobs, [&](std::size_t i) {
    pairs[i] = query_plausibilities(model, test.feature_row(i));
  });
  return pairs;
}

namespace {

LabelMatrix truth_matrix(const MultiLabelDataset& data) {
  LabelMatrix truth(data.n_rows());
  for (std::size_t i = 0; i < data.n_rows(); ++i) {
    auto row = data.label_row(i);
    truth[i].assign(row.begin(), row.end());
  }
  return truth;
}

DecisionMatrix decide_all(const std::vector<std::vector<PlausibilityPair>>& pairs,
                          const DecisionConfig& config) {
  DecisionMatrix decisions(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    decisions[i].resize(pairs[i].size());
    for (std::size_t k = 0; k < pairs[i].size(); ++k)
      decisions[i][k] = decide(pairs[i][k], config);
  }
  return decisions;
}

std::vector<CurvePoint> theta_sweep_from_pairs(
    const std::vector<std::vector<PlausibilityPair>>& pairs, const LabelMatrix& truth,
    std::span<const double> theta_grid) {
  std::vector<CurvePoint> curve;
  curve.reserve(theta_grid.size());
  for (double theta : theta_grid) {
    DecisionConfig config{theta, 0.0, DecisionMode::force};
    curve.push_back({theta, compute_metrics(truth, decide_all(pairs, config))});
  }
  return curve;
}

std::vector<CurvePoint> rejection_curve_from_pairs(
    const std::vector<std::vector<PlausibilityPair>>& pairs, const LabelMatrix& truth,
    std::span<const double> abstention_grid, double theta) {
  std::vector<CurvePoint> curve;
  curve.reserve(abstention_grid.size());
  for (double threshold : abstention_grid) {
    DecisionConfig config{theta, threshold, DecisionMode::abstain};
    curve.push_back({threshold, compute_metrics(truth, decide_all(pairs, config))});
  }
  return curve;
}

}  // namespace

std::vector<CurvePoint> theta_sweep(const CalibratedModel& model, const MultiLabelDataset& test,
                                    std::span<const double> theta_grid, unsigned jobs) {
  const auto pairs = test_plausibilities(model, test, jobs);
  return theta_sweep_from_pairs(pairs, truth_matrix(test), theta_grid);
}

std::vector<CurvePoint> rejection_curve(const CalibratedModel& model,
                                        const MultiLabelDataset& test,
                                        std::span<const double> abstention_grid, double theta,
                                        unsigned jobs) {
  const auto pairs = test_plausibilities(model, test, jobs);
  return rejection_curve_from_pairs(pairs, truth_matrix(test), abstention_grid, theta);
}

std::vector<AveragedPoint> average_curves(const std::vector<std::vector<CurvePoint>>& by_split) {
  std::vector<AveragedPoint> averaged;
  if (by_split.empty()) return averaged;
  const std::size_t n_points = by_split.front().size();
  averaged.resize(n_points);
  for (std::size_t p = 0; p < n_points; ++p) {
    AveragedPoint& out = averaged[p];
    out.grid_value = by_split.front()[p].grid_value;
    double hamming_sum = 0.0, f1_sum = 0.0, rejection_sum = 0.0;
    for (const auto& split : by_split) {
      const MetricReport& r = split[p].report;
      rejection_sum += r.rejection_rate;
      if (!r.defined) {
        out.undefined_flag = true;
        continue;
      }
      ++out.n_defined;
      hamming_sum += r.hamming_loss;
      f1_sum += r.micro_f1;
    }
    out.rejection_rate_mean = rejection_sum / static_cast<double>(by_split.size());
    if (out.n_defined == 0) {
      out.hamming_mean = out.f1_mean = std::numeric_limits<double>::quiet_NaN();
      out.hamming_std = out.f1_std = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    out.hamming_mean = hamming_sum / static_cast<double>(out.n_defined);
    out.f1_mean = f1_sum / static_cast<double>(out.n_defined);
    if (out.n_defined >= 2) {
      double hamming_sq = 0.0, f1_sq = 0.0;
      for (const auto& split : by_split) {
        const MetricReport& r = split[p].report;
        if (!r.defined) continue;
        hamming_sq += (r.hamming_loss - out.hamming_mean) * (r.hamming_loss - out.hamming_mean);
        f1_sq += (r.micro_f1 - out.f1_mean) * (r.micro_f1 - out.f1_mean);
      }
      out.hamming_std = std::sqrt(hamming_sq / static_cast<double>(out.n_defined - 1));
      out.f1_std = std::sqrt(f1_sq / static_cast<double>(out.n_defined - 1));
    }
  }
  return averaged;
}

ExperimentResult run_experiment(const MultiLabelDataset& data, const ExperimentConfig& config) {
  config.validate(data.n_rows());

  ExperimentResult result;
  result.n_rows = data.n_rows();
  result.n_features = data.n_features();
  result.n_labels = data.n_labels();

  for (std::size_t s = 0; s < config.n_splits; ++s) {
    const SplitSpec spec{config.base_seed, config.n_train, s};
    const TrainTestSplit split = random_split(data.n_rows(), spec);
    const CalibratedModel model = fit_model(data, split.train, config.schedule, config.jobs);
    const MultiLabelDataset test = data.subset(split.test);
    const auto pairs = test_plausibilities(model, test, config.jobs);
    const LabelMatrix truth = truth_matrix(test);
    result.theta_by_split.push_back(theta_sweep_from_pairs(pairs, truth, config.theta_grid));
    result.rejection_by_split.push_back(
        rejection_curve_from_pairs(pairs, truth, config.abstention_grid, config.rejection_theta));
  }

  result.theta_curve = average_curves(result.theta_by_split);
  result.rejection_curve = average_curves(result.rejection_by_split);
  return result;
}

std::vector<ConformityDumpRow> dump_conformity_distributions(
    const MultiLabelDataset& data, std::span<const std::size_t> train_rows,
    std::size_t label_index, const SearchSchedule& schedule, unsigned jobs) {
  if (train_rows.size() < 2)
    throw config_error("conformity dump needs at least two training rows");
  if (label_index >= data.n_labels())
    throw config_error("label index " + std::to_string(label_index) + " out of range");

  const auto normalizer = NormalizationModel::fit(data, train_rows);
  const MultiLabelDataset train = normalizer.apply(data.subset(train_rows));
  const std::size_t n = train.n_rows();

  std::vector<ConformityDumpRow> rows(n);
  parallel_for(n, jobs, [&](std::size_t i) {
    const std::size_t self[] = {i};
    rows[i].true_value = train.label(i, label_index);
    rows[i].c_pos = conformity(train.feature_row(i), label_index, 1, train, self, schedule).value;
    rows[i].c_neg = conformity(train.feature_row(i), label_index, 0, train, self, schedule).value;
  });

  // Calibration lists hold each row's LOO conformity for its true value.
  std::vector<double> pos, neg;
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].true_value == 1)
      pos.push_back(rows[i].c_pos);
    else
      neg.push_back(rows[i].c_neg);
  }
  std::sort(pos.begin(), pos.end());
  std::sort(neg.begin(), neg.end());

  // Rank against the list with the row's own entry removed; the other list is
  // used as-is because the row never contributed to it.
  auto rank = [](const std::vector<double>& sorted, double c, bool remove_own, double own) {
    const std::size_t size = sorted.size() - (remove_own ? 1 : 0);
    if (size == 0) return 0.0;
    std::size_t below = static_cast<std::size_t>(
        std::lower_bound(sorted.begin(), sorted.end(), c) - sorted.begin());
    if (remove_own && own < c) --below;
    return static_cast<double>(below) / static_cast<double>(size);
  };

  for (std::size_t i = 0; i < n; ++i) {
    const bool positive = rows[i].true_value == 1;
    rows[i].q_pos = rank(pos, rows[i].c_pos, positive, rows[i].c_pos);
    rows[i].q_neg = rank(neg, rows[i].c_neg, !positive, rows[i].c_neg);
  }
  return rows;
}

std::string format_float(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

void write_theta_curve_csv(std::span<const AveragedPoint> curve, std::ostream& out) {
  out << "theta,hamming_mean,hamming_std,f1_mean,f1_std\n";
  for (const auto& p : curve) {
    out << format_float(p.grid_value) << ',' << format_float(p.hamming_mean) << ','
        << format_float(p.hamming_std) << ',' << format_float(p.f1_mean) << ','
        << format_float(p.f1_std) << '\n';
  }
}

void write_rejection_curve_csv(std::span<const AveragedPoint> curve, std::ostream& out) {
  out << "threshold,rejection_rate_mean,hamming_mean,hamming_std,f1_mean,f1_std,undefined_flag\n";
  for (const auto& p : curve) {
    out << format_float(p.grid_value) << ',' << format_float(p.rejection_rate_mean) << ','
        << format_float(p.hamming_mean) << ',' << format_float(p.hamming_std) << ','
        << format_float(p.f1_mean) << ',' << format_float(p.f1_std) << ','
        << (p.undefined_flag ? 1 : 0) << '\n';
  }
}

void write_conformity_dump_csv(std::span<const ConformityDumpRow> rows, std::ostream& out) {
  out << "true_value,c_pos,c_neg,q_pos,q_neg\n";
  for (const auto& r : rows) {
    out << r.true_value << ',' << format_float(r.c_pos) << ',' << format_float(r.c_neg) << ','
        << format_float(r.q_pos) << ',' << format_float(r.q_neg) << '\n';
  }
}

}  // namespace cmlc
