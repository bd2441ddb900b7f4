#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "cmlc/errors.hpp"
#include "cmlc/evaluation.hpp"
#include "support/oracle.hpp"
#include "support/synthetic.hpp"

using namespace cmlc;

namespace {

LabelDecision predicted(int value) {
  LabelDecision d;
  d.outcome = value == 1 ? Outcome::predict_positive : Outcome::predict_negative;
  return d;
}

LabelDecision abstained() {
  LabelDecision d;
  d.outcome = Outcome::abstain;
  return d;
}

DecisionMatrix decisions_from_bits(const std::vector<std::vector<int>>& bits) {
  DecisionMatrix out(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i)
    for (int b : bits[i]) out[i].push_back(b < 0 ? abstained() : predicted(b));
  return out;
}

}  // namespace

TEST_CASE("hamming_loss: direct counts") {
  const LabelMatrix truth{{1, 0, 1, 0, 0, 0}};
  CHECK(hamming_loss(truth, decisions_from_bits({{1, 1, 1, 0, 0, 0}})) == 1.0 / 6.0);
  CHECK(hamming_loss(truth, decisions_from_bits({{1, 0, 1, 0, 0, 0}})) == 0.0);
}

TEST_CASE("hamming_loss: abstained pairs drop out of both sides") {
  const LabelMatrix truth{{1, 0}};
  const auto decisions = decisions_from_bits({{-1, 1}});  // abstain, predict 1
  CHECK(hamming_loss(truth, decisions) == 1.0);
}

TEST_CASE("metrics are undefined when every pair abstains") {
  const LabelMatrix truth{{1, 0}};
  const auto decisions = decisions_from_bits({{-1, -1}});
  CHECK_THROWS_AS(hamming_loss(truth, decisions), undefined_metric_error);
  CHECK_THROWS_AS(micro_f1(truth, decisions), undefined_metric_error);
  const auto report = compute_metrics(truth, decisions);
  CHECK(!report.defined);
  CHECK(report.rejection_rate == 1.0);
  CHECK(report.n_evaluated == 0);
}

TEST_CASE("micro_f1: pooled contingency counts") {
  CHECK(micro_f1({{1, 1, 0}}, decisions_from_bits({{1, 1, 1}})) == 0.8);  // TP=2 FP=1 FN=0
  CHECK(micro_f1({{0, 0}}, decisions_from_bits({{0, 0}})) == 1.0);        // convention
  CHECK(micro_f1({{1, 1}}, decisions_from_bits({{0, 0}})) == 0.0);
}

TEST_CASE("metrics match a naive reimplementation on random matrices") {
  std::mt19937_64 rng(123456);
  for (int trial = 0; trial < 200; ++trial) {
    LabelMatrix truth(50, std::vector<std::uint8_t>(6));
    DecisionMatrix decisions(50);
    for (auto& row : truth)
      for (auto& bit : row) bit = rng() % 2;
    for (auto& row : decisions) {
      for (int k = 0; k < 6; ++k) {
        const auto roll = rng() % 4;
        row.push_back(roll == 0 ? abstained() : predicted(static_cast<int>(roll % 2)));
      }
    }
    const auto want = oracle::metrics(truth, decisions);
    const auto got = compute_metrics(truth, decisions);
    CHECK(got.defined == want.defined);
    CHECK(got.rejection_rate == want.rejection_rate);
    CHECK(got.n_evaluated == want.evaluated);
    if (want.defined) {
      CHECK(got.hamming_loss == want.hamming);
      CHECK(got.micro_f1 == want.f1);
      CHECK(hamming_loss(truth, decisions) == want.hamming);
      CHECK(micro_f1(truth, decisions) == want.f1);
    }
  }
}

namespace {

CalibratedModel surrogate_model(std::uint64_t seed, std::size_t n, std::size_t n_train,
                                std::size_t d, std::size_t k,
                                MultiLabelDataset* test_out) {
  const auto data = synthetic::correlated_surrogate(seed, n, d, k);
  const auto split = random_split(n, {seed, n_train, 0});
  if (test_out) *test_out = data.subset(split.test);
  return fit_model(data, split.train, default_schedule());
}

}  // namespace

TEST_CASE("theta_sweep: grid {1.0} equals plain prediction") {
  MultiLabelDataset test;
  const auto model = surrogate_model(31, 120, 80, 4, 3, &test);
  const double grid[] = {1.0};
  const auto curve = theta_sweep(model, test, grid);
  REQUIRE(curve.size() == 1);

  const auto pairs = test_plausibilities(model, test);
  LabelMatrix truth;
  DecisionMatrix decisions;
  const DecisionConfig config{1.0, 0.0, DecisionMode::force};
  for (std::size_t i = 0; i < test.n_rows(); ++i) {
    auto row = test.label_row(i);
    truth.emplace_back(row.begin(), row.end());
    decisions.emplace_back();
    for (const auto& pair : pairs[i]) decisions.back().push_back(decide(pair, config));
  }
  CHECK(curve[0].report.hamming_loss == hamming_loss(truth, decisions));
  CHECK(curve[0].report.micro_f1 == micro_f1(truth, decisions));
  CHECK(curve[0].report.rejection_rate == 0.0);
}

TEST_CASE("theta_sweep: theta = 0 predicts positive everywhere") {
  MultiLabelDataset test;
  const auto model = surrogate_model(32, 100, 70, 4, 2, &test);
  const double grid[] = {0.0};
  const auto curve = theta_sweep(model, test, grid);
  std::size_t negatives = 0;
  for (std::size_t i = 0; i < test.n_rows(); ++i)
    for (std::size_t k = 0; k < test.n_labels(); ++k)
      negatives += static_cast<std::size_t>(test.label(i, k) == 0);
  const double expected =
      static_cast<double>(negatives) / static_cast<double>(test.n_rows() * test.n_labels());
  CHECK(curve[0].report.hamming_loss == expected);
}

TEST_CASE("theta sweep at huge theta matches the all-negative predictor") {
  MultiLabelDataset test;
  const auto model = surrogate_model(33, 100, 70, 4, 2, &test);
  // The equivalence needs every q0 to be positive (a q0 = 0 pair predicts
  // positive at any theta); verify that on this fixture rather than assume it.
  const auto pairs = test_plausibilities(model, test);
  for (const auto& row : pairs)
    for (const auto& pair : row) REQUIRE(pair.q0 > 0.0);

  const double grid[] = {1e12};
  const auto curve = theta_sweep(model, test, grid);
  std::size_t positives = 0;
  for (std::size_t i = 0; i < test.n_rows(); ++i)
    for (std::size_t k = 0; k < test.n_labels(); ++k)
      positives += static_cast<std::size_t>(test.label(i, k) == 1);
  const double expected =
      static_cast<double>(positives) / static_cast<double>(test.n_rows() * test.n_labels());
  CHECK(curve[0].report.hamming_loss == expected);
}

TEST_CASE("rejection_curve: endpoints") {
  MultiLabelDataset test;
  const auto model = surrogate_model(34, 100, 70, 4, 2, &test);
  const double grid[] = {0.0, 1.0};
  const auto curve = rejection_curve(model, test, grid, 1.0);
  REQUIRE(curve.size() == 2);

  // Threshold 0 abstains exactly on q0 = q1 = 0 pairs.
  const auto pairs = test_plausibilities(model, test);
  std::size_t zero_pairs = 0;
  for (const auto& row : pairs)
    for (const auto& pair : row)
      zero_pairs += static_cast<std::size_t>(pair.q0 == 0.0 && pair.q1 == 0.0);
  CHECK(curve[0].report.rejection_rate ==
        static_cast<double>(zero_pairs) /
            static_cast<double>(test.n_rows() * test.n_labels()));

  // Threshold 1 abstains on everything: explicit undefined marker.
  CHECK(curve[1].report.rejection_rate == 1.0);
  CHECK(!curve[1].report.defined);
  CHECK(std::isnan(curve[1].report.hamming_loss));
}

TEST_CASE("run_experiment: single split equals its own average") {
  const auto data = synthetic::correlated_surrogate(35, 90, 4, 2);
  ExperimentConfig config;
  config.n_splits = 1;
  config.n_train = 60;
  config.base_seed = 9;
  config.theta_grid = {0.5, 1.0, 2.0};
  config.abstention_grid = {0.0, 0.2};
  const auto result = run_experiment(data, config);
  REQUIRE(result.theta_by_split.size() == 1);
  for (std::size_t p = 0; p < config.theta_grid.size(); ++p) {
    CHECK(result.theta_curve[p].hamming_mean ==
          result.theta_by_split[0][p].report.hamming_loss);
    CHECK(result.theta_curve[p].f1_mean == result.theta_by_split[0][p].report.micro_f1);
    CHECK(result.theta_curve[p].hamming_std == 0.0);
  }
}

TEST_CASE("run_experiment: deterministic and independent of the thread count") {
  const auto data = synthetic::correlated_surrogate(36, 90, 4, 2);
  ExperimentConfig config;
  config.n_splits = 2;
  config.n_train = 60;
  config.base_seed = 5;
  config.theta_grid = {0.5, 1.0};
  config.abstention_grid = {0.0, 0.1, 0.2};
  config.jobs = 1;
  const auto a = run_experiment(data, config);
  config.jobs = 4;
  const auto b = run_experiment(data, config);
  REQUIRE(a.theta_curve.size() == b.theta_curve.size());
  for (std::size_t p = 0; p < a.theta_curve.size(); ++p) {
    CHECK(a.theta_curve[p].hamming_mean == b.theta_curve[p].hamming_mean);
    CHECK(a.theta_curve[p].hamming_std == b.theta_curve[p].hamming_std);
    CHECK(a.theta_curve[p].f1_mean == b.theta_curve[p].f1_mean);
  }
  for (std::size_t p = 0; p < a.rejection_curve.size(); ++p) {
    CHECK(a.rejection_curve[p].hamming_mean == b.rejection_curve[p].hamming_mean);
    CHECK(a.rejection_curve[p].rejection_rate_mean == b.rejection_curve[p].rejection_rate_mean);
  }
}

TEST_CASE("run_experiment: protocol-scale golden values") {
  // Benchmark-scale run (600 rows, 6 labels, 10 splits of 400). Values pinned
  // from a verified run; the curve must keep its interior minimum near
  // theta = 1 and its falling rejection trend.
  const auto data = synthetic::correlated_surrogate(424242, 600, 8, 6);
  ExperimentConfig config;
  config.n_splits = 10;
  config.n_train = 400;
  config.base_seed = 20250501;
  config.theta_grid = {0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0};
  config.abstention_grid = {0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5};
  config.jobs = 2;
  const auto result = run_experiment(data, config);

  CHECK(result.theta_curve[3].grid_value == 1.0);
  CHECK(result.theta_curve[3].hamming_mean == 0.18708333333333332);
  CHECK(result.theta_curve[3].f1_mean == 0.80402244434200321);
  CHECK(result.rejection_curve[10].grid_value == 0.5);
  CHECK(result.rejection_curve[10].hamming_mean == 0.069760734800041205);
  CHECK(result.rejection_curve[10].rejection_rate_mean == 0.46650000000000003);

  // Interior structure: both grid ends are worse than theta = 1.
  CHECK(result.theta_curve.front().hamming_mean > result.theta_curve[3].hamming_mean);
  CHECK(result.theta_curve.back().hamming_mean > result.theta_curve[3].hamming_mean);
}

TEST_CASE("run_experiment: config validation") {
  const auto data = synthetic::correlated_surrogate(37, 50, 3, 2);
  ExperimentConfig config;
  config.n_train = 30;
  SUBCASE("zero splits") {
    config.n_splits = 0;
    CHECK_THROWS_AS(run_experiment(data, config), config_error);
  }
  SUBCASE("train size too large") {
    config.n_train = 50;
    CHECK_THROWS_AS(run_experiment(data, config), config_error);
  }
  SUBCASE("empty grid") {
    config.theta_grid.clear();
    CHECK_THROWS_AS(run_experiment(data, config), config_error);
  }
  SUBCASE("unsorted grid") {
    config.abstention_grid = {0.2, 0.1};
    CHECK_THROWS_AS(run_experiment(data, config), config_error);
  }
  SUBCASE("non-positive theta") {
    config.theta_grid = {0.0, 1.0};
    CHECK_THROWS_AS(run_experiment(data, config), config_error);
  }
  SUBCASE("abstention outside [0,1]") {
    config.abstention_grid = {0.0, 1.1};
    CHECK_THROWS_AS(run_experiment(data, config), config_error);
  }
}

TEST_CASE("average_curves: undefined splits are flagged and skipped in means") {
  MetricReport defined;
  defined.defined = true;
  defined.hamming_loss = 0.2;
  defined.micro_f1 = 0.7;
  defined.rejection_rate = 0.5;
  MetricReport undefined;
  undefined.defined = false;
  undefined.hamming_loss = std::numeric_limits<double>::quiet_NaN();
  undefined.micro_f1 = std::numeric_limits<double>::quiet_NaN();
  undefined.rejection_rate = 1.0;

  const std::vector<std::vector<CurvePoint>> by_split{{{0.3, defined}}, {{0.3, undefined}}};
  const auto averaged = average_curves(by_split);
  REQUIRE(averaged.size() == 1);
  CHECK(averaged[0].grid_value == 0.3);
  CHECK(averaged[0].n_defined == 1);
  CHECK(averaged[0].undefined_flag);
  CHECK(averaged[0].hamming_mean == 0.2);
  CHECK(averaged[0].hamming_std == 0.0);
  CHECK(averaged[0].rejection_rate_mean == 0.75);
}

TEST_CASE("dump_conformity_distributions: two-row dataset") {
  // Each LOO computation sees one remaining row, covered only by the full
  // window: eval is 0 when that row agrees with the head and -1 otherwise.
  const MultiLabelDataset data({"f"}, {"L"}, {0.2, 0.8}, {1, 0});
  const std::size_t rows[] = {0, 1};
  const auto dump = dump_conformity_distributions(data, rows, 0, default_schedule());
  REQUIRE(dump.size() == 2);
  CHECK(dump[0].true_value == 1);
  CHECK(dump[0].c_pos == -1.0);
  CHECK(dump[0].c_neg == 0.0);
  CHECK(dump[1].true_value == 0);
  CHECK(dump[1].c_pos == 0.0);
  CHECK(dump[1].c_neg == -1.0);
  // Own-class lists shrink to nothing once the row's own score is removed;
  // the other-class rank compares 0 against {-1}.
  CHECK(dump[0].q_pos == 0.0);
  CHECK(dump[0].q_neg == 1.0);
  CHECK(dump[1].q_pos == 1.0);
  CHECK(dump[1].q_neg == 0.0);
}

TEST_CASE("dump_conformity_distributions: all-positive label zeroes q_neg") {
  const MultiLabelDataset data({"f"}, {"L"}, {0.1, 0.5, 0.9}, {1, 1, 1});
  const std::size_t rows[] = {0, 1, 2};
  const auto dump = dump_conformity_distributions(data, rows, 0, default_schedule());
  REQUIRE(dump.size() == 3);
  for (const auto& r : dump) {
    CHECK(r.true_value == 1);
    CHECK(r.q_neg == 0.0);
    CHECK(r.q_pos >= 0.0);
    CHECK(r.q_pos <= 1.0);
  }
}

TEST_CASE("dump_conformity_distributions: plausibilities rank against loo tables") {
  const auto data = synthetic::correlated_surrogate(41, 30, 3, 2);
  std::vector<std::size_t> rows(20);
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  const auto dump = dump_conformity_distributions(data, rows, 1, default_schedule());
  REQUIRE(dump.size() == 20);

  // Reference: recompute with the oracle on the normalized training subset.
  const auto normalizer = NormalizationModel::fit(data, rows);
  const auto train = normalizer.apply(data.subset(rows));
  std::vector<double> pos, neg;
  std::vector<double> c_pos(20), c_neg(20);
  for (std::size_t i = 0; i < 20; ++i) {
    const std::size_t self[] = {i};
    c_pos[i] = oracle::conformity(train.feature_row(i), 1, 1, train, self, default_schedule());
    c_neg[i] = oracle::conformity(train.feature_row(i), 1, 0, train, self, default_schedule());
    CHECK(dump[i].c_pos == c_pos[i]);
    CHECK(dump[i].c_neg == c_neg[i]);
    (train.label(i, 1) == 1 ? pos : neg).push_back(train.label(i, 1) == 1 ? c_pos[i] : c_neg[i]);
  }
  for (std::size_t i = 0; i < 20; ++i) {
    auto minus_own = [&](const std::vector<double>& list, double own, bool remove) {
      std::vector<double> out;
      bool removed = false;
      for (double s : list) {
        if (remove && !removed && s == own) {
          removed = true;
          continue;
        }
        out.push_back(s);
      }
      return out;
    };
    const bool positive = train.label(i, 1) == 1;
    const auto pos_list = minus_own(pos, c_pos[i], positive);
    const auto neg_list = minus_own(neg, c_neg[i], !positive);
    CHECK(dump[i].q_pos == oracle::plausibility(c_pos[i], pos_list));
    CHECK(dump[i].q_neg == oracle::plausibility(c_neg[i], neg_list));
  }
}

TEST_CASE("csv formatting uses six significant digits") {
  CHECK(format_float(0.123456789) == "0.123457");
  CHECK(format_float(1.0) == "1");
  CHECK(format_float(1.0 / 3.0) == "0.333333");

  AveragedPoint p;
  p.grid_value = 0.5;
  p.hamming_mean = 1.0 / 3.0;
  p.hamming_std = 0.0;
  p.f1_mean = 2.0 / 3.0;
  p.f1_std = 0.0;
  const std::vector<AveragedPoint> curve{p};
  std::ostringstream out;
  write_theta_curve_csv(curve, out);
  CHECK(out.str() ==
        "theta,hamming_mean,hamming_std,f1_mean,f1_std\n"
        "0.5,0.333333,0,0.666667,0\n");
}

TEST_CASE("rejection csv carries the undefined flag") {
  AveragedPoint p;
  p.grid_value = 1.0;
  p.rejection_rate_mean = 1.0;
  p.hamming_mean = std::numeric_limits<double>::quiet_NaN();
  p.hamming_std = std::numeric_limits<double>::quiet_NaN();
  p.f1_mean = std::numeric_limits<double>::quiet_NaN();
  p.f1_std = std::numeric_limits<double>::quiet_NaN();
  p.undefined_flag = true;
  const std::vector<AveragedPoint> curve{p};
  std::ostringstream out;
  write_rejection_curve_csv(curve, out);
  CHECK(out.str() ==
        "threshold,rejection_rate_mean,hamming_mean,hamming_std,f1_mean,f1_std,undefined_flag\n"
        "1,1,nan,nan,nan,nan,1\n");
}
