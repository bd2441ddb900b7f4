#include "cmlc/rule_search.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>
#include <string>

#include "cmlc/errors.hpp"

namespace cmlc {

SearchSchedule::SearchSchedule(std::vector<double> half_widths) : widths_(std::move(half_widths)) {
  if (widths_.empty()) throw config_error("search schedule is empty");
  double prev = 0.0;
  for (double h : widths_) {
    if (!(h > prev)) throw config_error("search schedule half-widths must be strictly increasing");
    if (h > 1.0) throw config_error("search schedule half-widths must lie in (0,1]");
    prev = h;
  }
  if (widths_.back() != 1.0)
    throw config_error("search schedule must end at half-width 1.0 so the last window covers "
                       "the whole space");
}

SearchSchedule SearchSchedule::linear(double min, double max, std::size_t steps) {
  if (steps < 1) throw config_error("schedule needs at least one step");
  std::vector<double> widths(steps);
  for (std::size_t i = 0; i < steps; ++i) {
    widths[i] = (i + 1 == steps)
                    ? max
                    : min + (max - min) * static_cast<double>(i) / static_cast<double>(steps - 1);
  }
  return SearchSchedule(std::move(widths));
}

SearchSchedule default_schedule() { return SearchSchedule::linear(0.05, 1.0, 20); }

double chebyshev_distance(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  double dist = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) dist = std::max(dist, std::fabs(a[j] - b[j]));
  return dist;
}

std::vector<std::size_t> coverage(const WindowRule& rule, const MultiLabelDataset& data,
                                  std::span<const std::size_t> excluded) {
  if (rule.center.size() != data.n_features())
    throw config_error("rule center dimension does not match the dataset");
  std::vector<std::size_t> covered;
  for (std::size_t i = 0; i < data.n_rows(); ++i) {
    if (std::binary_search(excluded.begin(), excluded.end(), i)) continue;
    if (chebyshev_distance(rule.center, data.feature_row(i)) <= rule.half_width)
      covered.push_back(i);
  }
  return covered;
}

double evaluate_rule(const RuleStats& stats) {
  if (stats.n == 0)
    throw std::invalid_argument("evaluate_rule is undefined on an empty window");
  return stats.p_hat() - std::sqrt(1.0 / static_cast<double>(stats.n));
}

BestRule best_rule(std::span<const double> query, std::size_t label_index, int head_value,
                   const MultiLabelDataset& data, std::span<const std::size_t> excluded,
                   const SearchSchedule& schedule) {
  if (query.size() != data.n_features())
    throw config_error("query dimension does not match the dataset");
  if (label_index >= data.n_labels())
    throw config_error("label index " + std::to_string(label_index) + " out of range");

  const auto widths = schedule.half_widths();
  // One pass over the rows: each row lands in the bucket of the first
  // schedule width that covers it; prefix sums then give the coverage stats
  // of every scheduled window, identical to per-width rescans.
  std::vector<std::size_t> covered(widths.size(), 0);
  std::vector<std::size_t> agree(widths.size(), 0);
  for (std::size_t i = 0; i < data.n_rows(); ++i) {
    if (std::binary_search(excluded.begin(), excluded.end(), i)) continue;
    const double dist = chebyshev_distance(query, data.feature_row(i));
    const auto it = std::lower_bound(widths.begin(), widths.end(), dist);
    if (it == widths.end()) continue;  // only possible on un-normalized input
    const std::size_t bucket = static_cast<std::size_t>(it - widths.begin());
    ++covered[bucket];
    agree[bucket] += static_cast<std::size_t>(data.label(i, label_index) == head_value);
  }

  BestRule best;
  bool found = false;
  RuleStats cumulative;
  for (std::size_t b = 0; b < widths.size(); ++b) {
    cumulative.n += covered[b];
    cumulative.n_agree += agree[b];
    if (cumulative.n == 0) continue;
    const double eval = evaluate_rule(cumulative);
    if (!found || eval > best.eval) {
      best = BestRule{eval, widths[b], cumulative};
      found = true;
    }
  }
  // The schedule ends at 1.0 and features are normalized, so a nonempty
  // dataset minus exclusions always yields at least the full-space window.
  if (!found)
    throw std::logic_error("best_rule: all windows empty; dataset minus exclusions is empty "
                           "or features are not normalized");
  return best;
}

}  // namespace cmlc
