#pragma once

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "cmlc/conformal.hpp"
#include "cmlc/decision.hpp"
#include "cmlc/split.hpp"

namespace cmlc {

// Metrics are computed over the non-abstained (instance,label) pairs only.
// defined == false when every pair abstained; hamming_loss / micro_f1 are
// meaningless in that case.
struct MetricReport {
  double hamming_loss = 0.0;
  double micro_f1 = 0.0;
  std::size_t n_evaluated = 0;  // non-abstained pairs
  double rejection_rate = 0.0;  // abstained / (n_instances * K)
  bool defined = false;
};

using LabelMatrix = std::vector<std::vector<std::uint8_t>>;
using DecisionMatrix = std::vector<std::vector<LabelDecision>>;

// Throw undefined_metric_error when every pair abstained.
double hamming_loss(const LabelMatrix& truth, const DecisionMatrix& decisions);
double micro_f1(const LabelMatrix& truth, const DecisionMatrix& decisions);

// Never throws; reports defined = false instead.
MetricReport compute_metrics(const LabelMatrix& truth, const DecisionMatrix& decisions);

struct ExperimentConfig {
  std::size_t n_splits = 50;
  std::size_t n_train = 400;
  std::uint64_t base_seed = 0;
  std::vector<double> theta_grid = {0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0};
  std::vector<double> abstention_grid = {0.0, 0.05, 0.1, 0.15, 0.2, 0.25,
                                         0.3, 0.35, 0.4, 0.45, 0.5};
  // Threshold rule applied to the labels that survive abstention.
  double rejection_theta = 1.0;
  SearchSchedule schedule = default_schedule();
  unsigned jobs = 1;

  void validate(std::size_t n_total) const;  // throws config_error
};

struct CurvePoint {
  double grid_value = 0.0;  // theta or abstention threshold
  MetricReport report;
};

struct AveragedPoint {
  double grid_value = 0.0;
  double hamming_mean = 0.0;
  double hamming_std = 0.0;
  double f1_mean = 0.0;
  double f1_std = 0.0;
  double rejection_rate_mean = 0.0;
  std::size_t n_defined = 0;   // splits with at least one non-abstained pair
  bool undefined_flag = false;  // some split had every pair abstained
};

// One PlausibilityPair per (test row, label); rows are independent jobs.
std::vector<std::vector<PlausibilityPair>> test_plausibilities(const CalibratedModel& model,
                                                               const MultiLabelDataset& test,
                                                               unsigned jobs = 1);

// Force-mode report per theta; plausibilities are computed once and reused
// across the grid.
std::vector<CurvePoint> theta_sweep(const CalibratedModel& model, const MultiLabelDataset& test,
                                    std::span<const double> theta_grid, unsigned jobs = 1);

// Abstain-mode report per abstention threshold, Eq-style ratio rule with the
// given theta on the surviving labels.
std::vector<CurvePoint> rejection_curve(const CalibratedModel& model,
                                        const MultiLabelDataset& test,
                                        std::span<const double> abstention_grid, double theta,
                                        unsigned jobs = 1);

struct ExperimentResult {
  std::size_t n_rows = 0;
  std::size_t n_features = 0;
  std::size_t n_labels = 0;
  std::vector<std::vector<CurvePoint>> theta_by_split;
  std::vector<std::vector<CurvePoint>> rejection_by_split;
  std::vector<AveragedPoint> theta_curve;      // pointwise over splits
  std::vector<AveragedPoint> rejection_curve;  // pointwise over splits
};

// Repeated-random-split protocol: for each split, fit a model on n_train rows
// and sweep both grids on the held-out rows. Deterministic given the config;
// a failing split aborts the whole experiment.
ExperimentResult run_experiment(const MultiLabelDataset& data, const ExperimentConfig& config);

// Pointwise mean/stddev across splits. Splits where every pair abstained are
// left out of the means and raise undefined_flag.
std::vector<AveragedPoint> average_curves(const std::vector<std::vector<CurvePoint>>& by_split);

struct ConformityDumpRow {
  int true_value = 0;
  double c_pos = 0.0;
  double c_neg = 0.0;
  double q_pos = 0.0;
  double q_neg = 0.0;
};

// Per training row: leave-one-out conformity for both head values, and both
// plausibilities ranked against the calibration lists with the row's own
// score removed.
std::vector<ConformityDumpRow> dump_conformity_distributions(
    const MultiLabelDataset& data, std::span<const std::size_t> train_rows,
    std::size_t label_index, const SearchSchedule& schedule, unsigned jobs = 1);

// Floats rendered with 6 significant digits.
std::string format_float(double v);
void write_theta_curve_csv(std::span<const AveragedPoint> curve, std::ostream& out);
void write_rejection_curve_csv(std::span<const AveragedPoint> curve, std::ostream& out);
void write_conformity_dump_csv(std::span<const ConformityDumpRow> rows, std::ostream& out);

}  // namespace cmlc
