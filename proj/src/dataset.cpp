#include "cmlc/dataset.hpp"

#include <cmath>
#include <unordered_set>
#include <utility>

#include "cmlc/errors.hpp"

namespace cmlc {

MultiLabelDataset::MultiLabelDataset(std::vector<std::string> feature_names,
                                     std::vector<std::string> label_names,
                                     std::vector<double> features,
                                     std::vector<std::uint8_t> labels)
    : feature_names_(std::move(feature_names)),
      label_names_(std::move(label_names)),
      features_(std::move(features)),
      labels_(std::move(labels)) {
  const std::size_t d = feature_names_.size();
  const std::size_t k = label_names_.size();
  if (d == 0) throw validation_error("dataset has no feature columns");
  if (k == 0) throw validation_error("dataset has no label columns");
  if (features_.size() % d != 0)
    throw validation_error("feature matrix size is not a multiple of the feature count");
  n_rows_ = features_.size() / d;
  if (n_rows_ == 0) throw validation_error("dataset has no rows");
  if (labels_.size() != n_rows_ * k)
    throw validation_error("label matrix size does not match rows x labels");

  for (double v : features_) {
    if (!std::isfinite(v)) throw validation_error("non-finite feature value");
  }
  for (std::uint8_t b : labels_) {
    if (b > 1) throw validation_error("label value outside {0,1}");
  }

  std::unordered_set<std::string> seen;
  for (const auto& name : feature_names_) {
    if (!seen.insert(name).second)
      throw validation_error("duplicate column name: " + name);
  }
  for (const auto& name : label_names_) {
    if (!seen.insert(name).second)
      throw validation_error("duplicate column name: " + name);
  }
}

MultiLabelDataset MultiLabelDataset::subset(std::span<const std::size_t> rows) const {
  std::vector<double> feats;
  std::vector<std::uint8_t> labs;
  feats.reserve(rows.size() * n_features());
  labs.reserve(rows.size() * n_labels());
  for (std::size_t r : rows) {
    auto f = feature_row(r);
    feats.insert(feats.end(), f.begin(), f.end());
    auto l = label_row(r);
    labs.insert(labs.end(), l.begin(), l.end());
  }
  return {feature_names_, label_names_, std::move(feats), std::move(labs)};
}

MultiLabelDataset concat(const MultiLabelDataset& a, const MultiLabelDataset& b) {
  if (a.feature_names() != b.feature_names() || a.label_names() != b.label_names())
    throw validation_error("cannot concatenate datasets with different columns");
  std::vector<double> feats = a.features();
  feats.insert(feats.end(), b.features().begin(), b.features().end());
  std::vector<std::uint8_t> labs = a.labels();
  labs.insert(labs.end(), b.labels().begin(), b.labels().end());
  return {a.feature_names(), a.label_names(), std::move(feats), std::move(labs)};
}

}  // namespace cmlc
