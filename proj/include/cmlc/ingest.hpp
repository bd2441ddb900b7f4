#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "cmlc/dataset.hpp"

namespace cmlc {

// ARFF subset: @relation, @attribute <name> numeric|real|integer or
// @attribute <name> {0,1}, then @data with dense comma-separated rows.
// Keywords are case-insensitive; '%' comments and blank lines are skipped.
// Attributes named in label_names become label columns, in declaration order;
// everything else becomes a feature column.
MultiLabelDataset parse_arff(std::istream& in, const std::vector<std::string>& label_names);
MultiLabelDataset parse_arff_file(const std::filesystem::path& path,
                                  const std::vector<std::string>& label_names);

// Plain comma-separated values with a header row; the trailing n_labels
// columns are labels, the rest features.
MultiLabelDataset parse_csv(std::istream& in, std::size_t n_labels);
MultiLabelDataset parse_csv_file(const std::filesystem::path& path, std::size_t n_labels);

// Mulan-style label list: every <label name="..."/> element, in file order.
std::vector<std::string> parse_label_xml(std::istream& in);
std::vector<std::string> parse_label_xml_file(const std::filesystem::path& path);

// Header plus one row per instance; features at full precision so that
// parse_csv(write_csv(data)) reproduces the matrices exactly.
void write_csv(const MultiLabelDataset& data, std::ostream& out);

// Feature-only CSV with a header row, used for prediction queries.
std::vector<std::vector<double>> parse_query_csv(std::istream& in);
std::vector<std::vector<double>> parse_query_csv_file(const std::filesystem::path& path);

}  // namespace cmlc
