#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cmlc/dataset.hpp"

namespace cmlc {

// Per-feature min-max scaler fitted on training rows only. apply() maps into
// [0,1] and clamps values outside the training range; a constant feature maps
// everything to 0.5 so the feature carries no distance information.
class NormalizationModel {
 public:
  static NormalizationModel fit(const MultiLabelDataset& data,
                                std::span<const std::size_t> train_rows);

  double apply(std::size_t feature, double value) const;
  std::vector<double> apply_row(std::span<const double> row) const;

  // Copy of the dataset with all feature values normalized. Labels unchanged.
  MultiLabelDataset apply(const MultiLabelDataset& data) const;

  std::size_t n_features() const { return min_.size(); }
  double min(std::size_t feature) const { return min_[feature]; }
  double max(std::size_t feature) const { return max_[feature]; }

 private:
  std::vector<double> min_;
  std::vector<double> max_;
};

}  // namespace cmlc
