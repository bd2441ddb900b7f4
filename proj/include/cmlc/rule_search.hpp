#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cmlc/dataset.hpp"

namespace cmlc {

// Axis-aligned hypercube body centered on a (normalized) query with a
// single-label head. A training instance x is covered iff
// max_j |x_j - center_j| <= half_width.
struct WindowRule {
  std::vector<double> center;  // in [0,1]^d
  double half_width = 1.0;     // in (0,1]; 1.0 covers the whole space
  std::size_t label_index = 0;
  int head_value = 1;  // 0 or 1
};

struct RuleStats {
  std::size_t n = 0;        // covered instances after exclusions
  std::size_t n_agree = 0;  // covered instances whose label k equals the head
  double p_hat() const { return static_cast<double>(n_agree) / static_cast<double>(n); }
};

// Window half-widths tried during the bottom-up search. Strictly increasing,
// in (0,1], ending exactly at 1.0 so the largest window covers everything.
class SearchSchedule {
 public:
  explicit SearchSchedule(std::vector<double> half_widths);

  static SearchSchedule linear(double min, double max, std::size_t steps);

  std::span<const double> half_widths() const { return widths_; }
  std::size_t size() const { return widths_.size(); }

 private:
  std::vector<double> widths_;
};

// 20 half-widths from 0.05 to 1.00.
SearchSchedule default_schedule();

double chebyshev_distance(std::span<const double> a, std::span<const double> b);

// Indices covered by the rule's window, ascending, minus `excluded`
// (which must be sorted ascending).
std::vector<std::size_t> coverage(const WindowRule& rule, const MultiLabelDataset& data,
                                  std::span<const std::size_t> excluded = {});

// Lower confidence bound p_hat - sqrt(1/n); requires stats.n >= 1.
double evaluate_rule(const RuleStats& stats);

struct BestRule {
  double eval = 0.0;
  double half_width = 0.0;
  RuleStats stats;
};

// Scans every half-width in the schedule (skipping empty windows) and returns
// the maximum evaluation; ties go to the smaller window. The dataset minus
// `excluded` must be nonempty, which guarantees the final full-space window
// is never empty.
BestRule best_rule(std::span<const double> query, std::size_t label_index, int head_value,
                   const MultiLabelDataset& data, std::span<const std::size_t> excluded,
                   const SearchSchedule& schedule);

}  // namespace cmlc
