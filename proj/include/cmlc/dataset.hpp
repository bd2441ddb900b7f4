#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace cmlc {

// Dense multi-label dataset: N rows, d numeric features, K binary labels.
// Immutable after construction; safe to share across threads.
class MultiLabelDataset {
 public:
  MultiLabelDataset() = default;

  // features is row-major N x d, labels is row-major N x K.
  // Throws validation_error when any invariant is violated: N,d,K >= 1,
  // finite features, labels in {0,1}, unique and disjoint column names.
  MultiLabelDataset(std::vector<std::string> feature_names, std::vector<std::string> label_names,
                    std::vector<double> features, std::vector<std::uint8_t> labels);

  std::size_t n_rows() const { return n_rows_; }
  std::size_t n_features() const { return feature_names_.size(); }
  std::size_t n_labels() const { return label_names_.size(); }

  double feature(std::size_t row, std::size_t col) const {
    return features_[row * n_features() + col];
  }
  int label(std::size_t row, std::size_t k) const { return labels_[row * n_labels() + k]; }

  std::span<const double> feature_row(std::size_t row) const {
    return {features_.data() + row * n_features(), n_features()};
  }
  std::span<const std::uint8_t> label_row(std::size_t row) const {
    return {labels_.data() + row * n_labels(), n_labels()};
  }

  const std::vector<std::string>& feature_names() const { return feature_names_; }
  const std::vector<std::string>& label_names() const { return label_names_; }
  const std::vector<double>& features() const { return features_; }
  const std::vector<std::uint8_t>& labels() const { return labels_; }

  // New dataset holding the given rows, in the given order.
  MultiLabelDataset subset(std::span<const std::size_t> rows) const;

 private:
  std::vector<std::string> feature_names_;
  std::vector<std::string> label_names_;
  std::vector<double> features_;
  std::vector<std::uint8_t> labels_;
  std::size_t n_rows_ = 0;
};

// Appends b's rows to a's. Column names must match exactly.
MultiLabelDataset concat(const MultiLabelDataset& a, const MultiLabelDataset& b);

}  // namespace cmlc
