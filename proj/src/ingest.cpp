#include "cmlc/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "cmlc/errors.hpp"

namespace cmlc {

namespace {

std::string to_lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string strip_quotes(const std::string& s) {
  if (s.size() >= 2 && ((s.front() == '\'' && s.back() == '\'') ||
                        (s.front() == '"' && s.back() == '"')))
    return s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      out.push_back(trim(std::string_view(line).substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

double parse_number(const std::string& token, std::size_t line, const std::string& where) {
  if (token == "?")
    throw parse_error(line, "missing values ('?') are not supported (" + where + ")");
  const std::string t = strip_quotes(token);
  double value = 0.0;
  const char* begin = t.data();
  const char* end = t.data() + t.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || t.empty())
    throw parse_error(line, "expected a number for " + where + ", got '" + token + "'");
  if (!std::isfinite(value))
    throw parse_error(line, "non-finite value for " + where + ": '" + token + "'");
  return value;
}

std::uint8_t parse_bit(const std::string& token, std::size_t line, const std::string& where) {
  const double v = parse_number(token, line, where);
  if (v == 0.0) return 0;
  if (v == 1.0) return 1;
  throw validation_error("line " + std::to_string(line) + ": " + where +
                         " must be 0 or 1, got '" + token + "'");
}

// Reads lines, tracking 1-based numbers, dropping '\r'.
class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  bool next(std::string& line) {
    if (!std::getline(in_, line)) return false;
    ++line_number_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_number_ == 1 && line.size() >= 3 && line[0] == '\xEF' && line[1] == '\xBB' &&
        line[2] == '\xBF')
      line.erase(0, 3);
    return true;
  }

  std::size_t line_number() const { return line_number_; }

 private:
  std::istream& in_;
  std::size_t line_number_ = 0;
};

struct ArffAttribute {
  std::string name;
  bool nominal_bit = false;  // declared as {0,1}; otherwise numeric
};

// Parses "@attribute <name> <type>" after the keyword has been recognized.
ArffAttribute parse_attribute_decl(const std::string& rest, std::size_t line) {
  std::string text = trim(rest);
  if (text.empty()) throw parse_error(line, "@attribute without a name");

  ArffAttribute attr;
  std::size_t pos = 0;
  if (text[0] == '\'' || text[0] == '"') {
    const char quote = text[0];
    const std::size_t close = text.find(quote, 1);
    if (close == std::string::npos)
      throw parse_error(line, "unterminated quoted attribute name");
    attr.name = text.substr(1, close - 1);
    pos = close + 1;
  } else {
    while (pos < text.size() && !std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    attr.name = text.substr(0, pos);
  }

  std::string type = trim(std::string_view(text).substr(pos));
  if (type.empty()) throw parse_error(line, "attribute '" + attr.name + "' has no type");

  if (type.front() == '{') {
    if (type.back() != '}')
      throw parse_error(line, "unterminated nominal specification for '" + attr.name + "'");
    auto values = split_commas(type.substr(1, type.size() - 2));
    for (auto& v : values) v = strip_quotes(v);
    std::sort(values.begin(), values.end());
    if (values != std::vector<std::string>{"0", "1"})
      throw parse_error(line, "attribute '" + attr.name +
                                  "' has an unsupported nominal domain (only {0,1} is supported)");
    attr.nominal_bit = true;
    return attr;
  }

  const std::string lowered = to_lower(type);
  if (lowered == "numeric" || lowered == "real" || lowered == "integer") return attr;
  throw parse_error(line, "attribute '" + attr.name + "' has unsupported type '" + type + "'");
}

}  // namespace

MultiLabelDataset parse_arff(std::istream& in, const std::vector<std::string>& label_names) {
  if (label_names.empty()) throw config_error("no label names given");
  std::unordered_set<std::string> label_set(label_names.begin(), label_names.end());

  LineReader reader(in);
  std::string line;
  std::vector<ArffAttribute> attrs;
  bool saw_data = false;
  while (reader.next(line)) {
    const std::string text = trim(line);
    if (text.empty() || text[0] == '%') continue;
    if (text[0] != '@')
      throw parse_error(reader.line_number(), "expected a directive before @data, got '" + text + "'");

    std::size_t kw_end = 1;
    while (kw_end < text.size() && !std::isspace(static_cast<unsigned char>(text[kw_end])))
      ++kw_end;
    const std::string keyword = to_lower(text.substr(1, kw_end - 1));
    if (keyword == "relation") continue;
    if (keyword == "attribute") {
      attrs.push_back(parse_attribute_decl(text.substr(kw_end), reader.line_number()));
      continue;
    }
    if (keyword == "data") {
      saw_data = true;
      break;
    }
    throw parse_error(reader.line_number(), "unknown directive '@" + keyword + "'");
  }
  if (!saw_data) throw parse_error(reader.line_number(), "missing @data section");
  if (attrs.empty()) throw parse_error(reader.line_number(), "no attributes declared");

  // Columns in declaration order, partitioned into labels and features.
  std::vector<std::string> feature_names;
  std::vector<std::string> names_found;
  std::vector<bool> is_label(attrs.size(), false);
  for (std::size_t i = 0; i < attrs.size(); ++i) {
    if (label_set.count(attrs[i].name)) {
      is_label[i] = true;
      names_found.push_back(attrs[i].name);
    } else {
      feature_names.push_back(attrs[i].name);
    }
  }
  if (names_found.size() != label_set.size()) {
    std::string missing;
    std::unordered_set<std::string> found(names_found.begin(), names_found.end());
    for (const auto& name : label_names)
      if (!found.count(name)) missing += (missing.empty() ? "" : ", ") + name;
    throw config_error("label attribute(s) not present in the ARFF file: " + missing);
  }

  std::vector<double> features;
  std::vector<std::uint8_t> labels;
  std::size_t n_rows = 0;
  while (reader.next(line)) {
    const std::string text = trim(line);
    if (text.empty() || text[0] == '%') continue;
    if (text[0] == '{')
      throw parse_error(reader.line_number(), "sparse ARFF rows are not supported");
    const auto tokens = split_commas(text);
    if (tokens.size() != attrs.size())
      throw parse_error(reader.line_number(),
                        "row has " + std::to_string(tokens.size()) + " values, expected " +
                            std::to_string(attrs.size()));
    for (std::size_t i = 0; i < attrs.size(); ++i) {
      if (is_label[i]) {
        labels.push_back(parse_bit(tokens[i], reader.line_number(),
                                   "label '" + attrs[i].name + "'"));
      } else if (attrs[i].nominal_bit) {
        features.push_back(parse_bit(tokens[i], reader.line_number(),
                                     "nominal attribute '" + attrs[i].name + "'"));
      } else {
        features.push_back(parse_number(tokens[i], reader.line_number(),
                                        "attribute '" + attrs[i].name + "'"));
      }
    }
    ++n_rows;
  }
  if (n_rows == 0) throw parse_error(reader.line_number(), "no data rows");

  std::vector<std::string> ordered_labels = names_found;
  return {std::move(feature_names), std::move(ordered_labels), std::move(features),
          std::move(labels)};
}

MultiLabelDataset parse_arff_file(const std::filesystem::path& path,
                                  const std::vector<std::string>& label_names) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open file: " + path.string());
  return parse_arff(in, label_names);
}

MultiLabelDataset parse_csv(std::istream& in, std::size_t n_labels) {
  if (n_labels == 0) throw config_error("n_labels must be at least 1");
  LineReader reader(in);
  std::string line;
  if (!reader.next(line)) throw parse_error(1, "empty CSV input");
  const auto header = split_commas(trim(line));
  if (n_labels >= header.size())
    throw config_error("n_labels=" + std::to_string(n_labels) + " but the CSV has only " +
                       std::to_string(header.size()) + " columns");
  const std::size_t d = header.size() - n_labels;

  std::vector<std::string> feature_names(header.begin(), header.begin() + d);
  std::vector<std::string> label_names(header.begin() + d, header.end());

  std::vector<double> features;
  std::vector<std::uint8_t> labels;
  std::size_t n_rows = 0;
  while (reader.next(line)) {
    const std::string text = trim(line);
    if (text.empty()) continue;
    const auto tokens = split_commas(text);
    if (tokens.size() != header.size())
      throw parse_error(reader.line_number(),
                        "row has " + std::to_string(tokens.size()) + " values, expected " +
                            std::to_string(header.size()));
    for (std::size_t i = 0; i < d; ++i)
      features.push_back(
          parse_number(tokens[i], reader.line_number(), "column '" + header[i] + "'"));
    for (std::size_t i = d; i < header.size(); ++i)
      labels.push_back(parse_bit(tokens[i], reader.line_number(), "label '" + header[i] + "'"));
    ++n_rows;
  }
  if (n_rows == 0) throw parse_error(reader.line_number(), "no data rows");

  return {std::move(feature_names), std::move(label_names), std::move(features),
          std::move(labels)};
}

MultiLabelDataset parse_csv_file(const std::filesystem::path& path, std::size_t n_labels) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open file: " + path.string());
  return parse_csv(in, n_labels);
}

namespace {

std::string decode_entities(std::string s) {
  static const std::pair<const char*, char> table[] = {
      {"&amp;", '&'}, {"&lt;", '<'}, {"&gt;", '>'}, {"&quot;", '"'}, {"&apos;", '\''}};
  for (const auto& [entity, ch] : table) {
    std::size_t pos = 0;
    while ((pos = s.find(entity, pos)) != std::string::npos) s.replace(pos, strlen(entity), 1, ch);
  }
  return s;
}

}  // namespace

std::vector<std::string> parse_label_xml(std::istream& in) {
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();

  std::vector<std::string> names;
  std::size_t pos = 0;
  while ((pos = text.find("<label", pos)) != std::string::npos) {
    const std::size_t after = pos + 6;
    if (after < text.size() && !std::isspace(static_cast<unsigned char>(text[after])) &&
        text[after] != '/' && text[after] != '>') {
      pos = after;  // e.g. "<labels>"
      continue;
    }
    const std::size_t tag_end = text.find('>', pos);
    if (tag_end == std::string::npos) throw parse_error("unterminated <label> tag");
    const std::string tag = text.substr(pos, tag_end - pos);
    const std::size_t name_pos = tag.find("name");
    if (name_pos == std::string::npos)
      throw parse_error("<label> tag without a name attribute");
    const std::size_t eq = tag.find('=', name_pos);
    if (eq == std::string::npos) throw parse_error("<label> tag without a name attribute");
    std::size_t vstart = eq + 1;
    while (vstart < tag.size() && std::isspace(static_cast<unsigned char>(tag[vstart]))) ++vstart;
    if (vstart >= tag.size() || (tag[vstart] != '"' && tag[vstart] != '\''))
      throw parse_error("unquoted name attribute in <label> tag");
    const char quote = tag[vstart];
    const std::size_t vend = tag.find(quote, vstart + 1);
    if (vend == std::string::npos) throw parse_error("unterminated name attribute");
    names.push_back(decode_entities(tag.substr(vstart + 1, vend - vstart - 1)));
    pos = tag_end + 1;
  }
  if (names.empty()) throw parse_error("no <label> entries found");
  return names;
}

std::vector<std::string> parse_label_xml_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open file: " + path.string());
  return parse_label_xml(in);
}

void write_csv(const MultiLabelDataset& data, std::ostream& out) {
  bool first = true;
  for (const auto& name : data.feature_names()) {
    out << (first ? "" : ",") << name;
    first = false;
  }
  for (const auto& name : data.label_names()) out << ',' << name;
  out << '\n';

  char buf[64];
  for (std::size_t i = 0; i < data.n_rows(); ++i) {
    for (std::size_t j = 0; j < data.n_features(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", data.feature(i, j));
      out << (j == 0 ? "" : ",") << buf;
    }
    for (std::size_t k = 0; k < data.n_labels(); ++k) out << ',' << data.label(i, k);
    out << '\n';
  }
}

std::vector<std::vector<double>> parse_query_csv(std::istream& in) {
  LineReader reader(in);
  std::string line;
  if (!reader.next(line)) throw parse_error(1, "empty query file");
  const std::size_t d = split_commas(trim(line)).size();

  std::vector<std::vector<double>> rows;
  while (reader.next(line)) {
    const std::string text = trim(line);
    if (text.empty()) continue;
    const auto tokens = split_commas(text);
    if (tokens.size() != d)
      throw parse_error(reader.line_number(), "query row has " + std::to_string(tokens.size()) +
                                                  " values, expected " + std::to_string(d));
    std::vector<double> row;
    row.reserve(d);
    for (std::size_t i = 0; i < d; ++i)
      row.push_back(
          parse_number(tokens[i], reader.line_number(), "column " + std::to_string(i + 1)));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw parse_error(reader.line_number(), "query file has no rows");
  return rows;
}

std::vector<std::vector<double>> parse_query_csv_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open file: " + path.string());
  return parse_query_csv(in);
}

}  // namespace cmlc
