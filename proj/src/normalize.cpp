#include "cmlc/normalize.hpp"

#include <algorithm>

#include "cmlc/errors.hpp"

namespace cmlc {

NormalizationModel NormalizationModel::fit(const MultiLabelDataset& data,
                                           std::span<const std::size_t> train_rows) {
  if (train_rows.empty()) throw config_error("cannot fit a normalizer on an empty index set");
  NormalizationModel model;
  const std::size_t d = data.n_features();
  model.min_.assign(d, 0.0);
  model.max_.assign(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    double lo = data.feature(train_rows[0], j);
    double hi = lo;
    for (std::size_t r : train_rows) {
      const double v = data.feature(r, j);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    model.min_[j] = lo;
    model.max_[j] = hi;
  }
  return model;
}

double NormalizationModel::apply(std::size_t feature, double value) const {
  const double lo = min_[feature];
  const double hi = max_[feature];
  if (lo == hi) return 0.5;
  const double scaled = (value - lo) / (hi - lo);
  return std::clamp(scaled, 0.0, 1.0);
}

std::vector<double> NormalizationModel::apply_row(std::span<const double> row) const {
  if (row.size() != n_features())
    throw config_error("query has " + std::to_string(row.size()) + " features, model expects " +
                       std::to_string(n_features()));
  std::vector<double> out(row.size());
  for (std::size_t j = 0; j < row.size(); ++j) out[j] = apply(j, row[j]);
  return out;
}

MultiLabelDataset NormalizationModel::apply(const MultiLabelDataset& data) const {
  if (data.n_features() != n_features())
    throw config_error("dataset feature count does not match the normalizer");
  std::vector<double> feats;
  feats.reserve(data.n_rows() * data.n_features());
  for (std::size_t i = 0; i < data.n_rows(); ++i) {
    for (std::size_t j = 0; j < data.n_features(); ++j)
      feats.push_back(apply(j, data.feature(i, j)));
  }
  return {data.feature_names(), data.label_names(), std::move(feats), data.labels()};
}

}  // namespace cmlc
