#include "ldfm/dataset.hpp"

#include "ldfm/error.hpp"

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace ldfm {

namespace {

using linalg::Matrix;

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool starts_with_ci(std::string_view s, std::string_view prefix) {
  return s.size() >= prefix.size() && lower(s.substr(0, prefix.size())) == prefix;
}

[[noreturn]] void syntax_error(std::size_t line, std::size_t column, const std::string& msg) {
  throw Error(ErrorCode::SyntaxError,
              "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + msg);
}

std::optional<double> parse_number(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double value = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || end != s.data() + s.size() || !std::isfinite(value)) return std::nullopt;
  return value;
}

std::string unquote(std::string_view s) {
  if (s.size() >= 2 && (s.front() == '\'' || s.front() == '"') && s.back() == s.front()) {
    std::string out;
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
      if (s[i] == '\\' && i + 2 < s.size()) ++i;
      out.push_back(s[i]);
    }
    return out;
  }
  return std::string(s);
}

struct Token {
  std::string_view text;
  std::size_t column;  // 1-based, relative to the start of the line
};

// Splits on `sep` outside single or double quotes.
std::vector<Token> split_quoted(std::string_view s, char sep, std::size_t base_column) {
  std::vector<Token> out;
  std::size_t start = 0;
  char quote = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i < s.size()) {
      const char c = s[i];
      if (quote != 0) {
        if (c == '\\') {
          ++i;
        } else if (c == quote) {
          quote = 0;
        }
        continue;
      }
      if (c == '\'' || c == '"') {
        quote = c;
        continue;
      }
      if (c != sep) continue;
    }
    std::string_view piece = s.substr(start, i - start);
    std::size_t lead = 0;
    while (lead < piece.size() && is_space(piece[lead])) ++lead;
    out.push_back({trim(piece), base_column + start + lead});
    start = i + 1;
  }
  return out;
}

enum class AttrKind { Numeric, Nominal };

struct Attribute {
  std::string name;
  AttrKind kind = AttrKind::Numeric;
  std::vector<std::string> values;  // nominal only
};

// "@attribute <name> <type>", name optionally quoted.
Attribute parse_attribute(std::string_view line, std::size_t line_no) {
  std::string_view rest = trim(line.substr(std::string_view("@attribute").size()));
  const std::size_t offset = line.size() - rest.size() + 1;
  if (rest.empty()) syntax_error(line_no, offset, "attribute without a name");

  Attribute attr;
  std::size_t name_end = 0;
  if (rest.front() == '\'' || rest.front() == '"') {
    const char q = rest.front();
    name_end = 1;
    while (name_end < rest.size() && rest[name_end] != q) {
      if (rest[name_end] == '\\') ++name_end;
      ++name_end;
    }
    if (name_end >= rest.size()) syntax_error(line_no, offset, "unterminated quoted name");
    ++name_end;
  } else {
    while (name_end < rest.size() && !is_space(rest[name_end]) && rest[name_end] != '{') ++name_end;
  }
  attr.name = unquote(rest.substr(0, name_end));
  std::string_view type = trim(rest.substr(name_end));
  const std::size_t type_col = line.size() - type.size() + 1;

  if (type.empty()) syntax_error(line_no, type_col, "attribute '" + attr.name + "' has no type");
  if (type.front() == '{') {
    if (type.back() != '}') syntax_error(line_no, type_col, "unterminated nominal specification");
    attr.kind = AttrKind::Nominal;
    for (const auto& tok : split_quoted(type.substr(1, type.size() - 2), ',', type_col + 1)) {
      attr.values.push_back(unquote(tok.text));
    }
    return attr;
  }
  const std::string t = lower(type);
  if (t == "numeric" || t == "real" || t == "integer") return attr;
  syntax_error(line_no, type_col, "unsupported attribute type '" + std::string(type) + "'");
}

}  // namespace

void MultiLabelDataset::validate() const {
  if (labels.cols() != features.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "features and labels disagree on instance count");
  }
  if (static_cast<Eigen::Index>(feature_names.size()) != features.rows() ||
      static_cast<Eigen::Index>(label_names.size()) != labels.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "name lists do not match matrix shapes");
  }
  for (const auto* names : {&feature_names, &label_names}) {
    std::unordered_set<std::string> seen;
    for (const auto& n : *names) {
      if (!seen.insert(n).second) throw Error(ErrorCode::SchemaMismatch, "duplicate name '" + n + "'");
    }
  }
  if (!(labels.array() == 0.0 || labels.array() == 1.0).all()) {
    throw Error(ErrorCode::NonBinaryLabel, "label matrix has entries other than 0 and 1");
  }
  linalg::require_finite(features, "features");
}

bool MultiLabelDataset::operator==(const MultiLabelDataset& other) const {
  return feature_names == other.feature_names && label_names == other.label_names &&
         features.rows() == other.features.rows() && features.cols() == other.features.cols() &&
         labels.rows() == other.labels.rows() && labels.cols() == other.labels.cols() &&
         features == other.features && labels == other.labels;
}

std::vector<std::string> parse_label_header(std::string_view xml) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream in{std::string(xml)};
    pt::read_xml(in, tree);
  } catch (const pt::xml_parser_error& e) {
    throw Error(ErrorCode::MalformedXml, e.what());
  }
  const auto root = tree.get_child_optional("labels");
  if (!root) throw Error(ErrorCode::MalformedXml, "missing <labels> root element");

  std::vector<std::string> names;
  const auto walk = [&names](const pt::ptree& node, const auto& self) -> void {
    for (const auto& [tag, child] : node) {
      if (tag != "label") continue;
      const auto name = child.template get_optional<std::string>("<xmlattr>.name");
      if (!name) throw Error(ErrorCode::MalformedXml, "<label> without a name attribute");
      names.push_back(*name);
      self(child, self);
    }
  };
  walk(*root, walk);
  if (names.empty()) throw Error(ErrorCode::EmptyLabelSet, "no <label> elements");
  return names;
}

MultiLabelDataset parse_arff(std::string_view text, std::span<const std::string> label_names) {
  std::vector<Attribute> attrs;
  std::unordered_map<std::string, std::size_t> attr_index;
  bool in_data = false;
  bool seen_relation = false;
  std::size_t line_no = 0;

  // Row-major staging: one vector of values per instance, attribute order.
  std::vector<double> values;
  std::size_t rows = 0;

  // Column position of each label within the attribute list, -1 for features.
  std::vector<long> label_slot;

  const auto finish_header = [&]() {
    label_slot.assign(attrs.size(), -1);
    for (std::size_t j = 0; j < label_names.size(); ++j) {
      const auto it = attr_index.find(label_names[j]);
      if (it == attr_index.end()) {
        throw Error(ErrorCode::UnknownLabelName, "label '" + label_names[j] + "' is not an attribute");
      }
      if (label_slot[it->second] != -1) {
        throw Error(ErrorCode::SchemaMismatch, "label '" + label_names[j] + "' listed twice");
      }
      label_slot[it->second] = static_cast<long>(j);
    }
  };

  const auto convert = [&](std::size_t a, const Token& tok, std::size_t ln) -> double {
    if (tok.text == "?") {
      throw Error(ErrorCode::MissingValue, "line " + std::to_string(ln) + ", column " +
                                               std::to_string(tok.column) + ": '?' in attribute '" +
                                               attrs[a].name + "'");
    }
    const std::string raw = unquote(tok.text);
    const Attribute& attr = attrs[a];
    std::optional<double> v = parse_number(raw);
    if (!v && attr.kind == AttrKind::Nominal) {
      const auto it = std::find(attr.values.begin(), attr.values.end(), raw);
      if (it != attr.values.end()) v = static_cast<double>(it - attr.values.begin());
    }
    if (!v) syntax_error(ln, tok.column, "cannot parse value '" + raw + "' for '" + attr.name + "'");
    if (label_slot[a] >= 0 && *v != 0.0 && *v != 1.0) {
      throw Error(ErrorCode::NonBinaryLabel, "line " + std::to_string(ln) + ": label '" + attr.name +
                                                 "' has value " + raw);
    }
    return *v;
  };

  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    const std::string_view raw_line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;

    const std::string_view line = trim(raw_line);
    const std::size_t indent = raw_line.find_first_not_of(" \t") == std::string_view::npos
                                   ? 0
                                   : raw_line.find_first_not_of(" \t");
    if (line.empty() || line.front() == '%') continue;

    if (!in_data) {
      if (starts_with_ci(line, "@relation")) {
        seen_relation = true;
      } else if (starts_with_ci(line, "@attribute")) {
        Attribute attr = parse_attribute(line, line_no);
        if (!attr_index.emplace(attr.name, attrs.size()).second) {
          syntax_error(line_no, indent + 1, "duplicate attribute '" + attr.name + "'");
        }
        attrs.push_back(std::move(attr));
      } else if (starts_with_ci(line, "@data")) {
        if (!seen_relation) syntax_error(line_no, indent + 1, "@data before @relation");
        if (attrs.empty()) syntax_error(line_no, indent + 1, "@data without attributes");
        finish_header();
        in_data = true;
      } else {
        syntax_error(line_no, indent + 1, "unexpected header line");
      }
      continue;
    }

    const std::size_t width = attrs.size();
    const std::size_t base = values.size();
    values.resize(base + width, 0.0);
    if (line.front() == '{') {
      if (line.back() != '}') syntax_error(line_no, indent + line.size(), "unterminated sparse row");
      const std::string_view body = line.substr(1, line.size() - 2);
      if (!trim(body).empty()) {
        for (const auto& entry : split_quoted(body, ',', indent + 2)) {
          const std::size_t gap = entry.text.find_first_of(" \t");
          if (gap == std::string_view::npos) syntax_error(line_no, entry.column, "expected 'index value'");
          const auto idx = parse_number(entry.text.substr(0, gap));
          if (!idx || *idx < 0 || *idx != std::floor(*idx) || *idx >= static_cast<double>(width)) {
            syntax_error(line_no, entry.column, "bad sparse index");
          }
          const auto a = static_cast<std::size_t>(*idx);
          const std::string_view val = trim(entry.text.substr(gap));
          const std::size_t val_col = entry.column + (entry.text.size() - val.size());
          values[base + a] = convert(a, Token{val, val_col}, line_no);
        }
      }
    } else {
      const auto fields = split_quoted(line, ',', indent + 1);
      if (fields.size() != width) {
        syntax_error(line_no, indent + 1,
                     "expected " + std::to_string(width) + " values, found " + std::to_string(fields.size()));
      }
      for (std::size_t a = 0; a < width; ++a) values[base + a] = convert(a, fields[a], line_no);
    }
    ++rows;
  }
  if (!in_data) syntax_error(line_no, 1, "missing @data section");

  MultiLabelDataset out;
  const auto k = static_cast<Eigen::Index>(label_names.size());
  const auto d = static_cast<Eigen::Index>(attrs.size()) - k;
  const auto n = static_cast<Eigen::Index>(rows);
  out.features.resize(d, n);
  out.labels.resize(k, n);
  out.label_names.assign(label_names.begin(), label_names.end());
  std::vector<Eigen::Index> feature_row(attrs.size(), -1);
  for (std::size_t a = 0; a < attrs.size(); ++a) {
    if (label_slot[a] < 0) {
      feature_row[a] = static_cast<Eigen::Index>(out.feature_names.size());
      out.feature_names.push_back(attrs[a].name);
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const double* row = values.data() + static_cast<std::size_t>(i) * attrs.size();
    for (std::size_t a = 0; a < attrs.size(); ++a) {
      if (label_slot[a] >= 0) {
        out.labels(label_slot[a], i) = row[a];
      } else {
        out.features(feature_row[a], i) = row[a];
      }
    }
  }
  return out;
}

std::string write_arff(const MultiLabelDataset& data, std::string_view relation) {
  const auto quoted = [](const std::string& s) {
    std::string out = "'";
    for (char c : s) {
      if (c == '\'' || c == '\\') out.push_back('\\');
      out.push_back(c);
    }
    return out + "'";
  };
  std::ostringstream os;
  os.precision(17);
  os << "@relation " << quoted(std::string(relation)) << "\n\n";
  for (const auto& n : data.feature_names) os << "@attribute " << quoted(n) << " numeric\n";
  for (const auto& n : data.label_names) os << "@attribute " << quoted(n) << " {0,1}\n";
  os << "\n@data\n";
  for (Eigen::Index i = 0; i < data.num_instances(); ++i) {
    bool first = true;
    for (Eigen::Index m = 0; m < data.num_features(); ++m) {
      os << (first ? "" : ",") << data.features(m, i);
      first = false;
    }
    for (Eigen::Index j = 0; j < data.num_labels(); ++j) {
      os << (first ? "" : ",") << (data.labels(j, i) != 0.0 ? 1 : 0);
      first = false;
    }
    os << '\n';
  }
  return os.str();
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::IoError, "read failed for '" + path.string() + "'");
  return ss.str();
}

DatasetPair load_mulan_pair(const std::filesystem::path& train_path,
                            const std::filesystem::path& test_path,
                            const std::filesystem::path& xml_path) {
  const auto labels = parse_label_header(read_file(xml_path));
  DatasetPair pair;
  pair.name = xml_path.stem().string();
  pair.train = parse_arff(read_file(train_path), labels);
  pair.test = parse_arff(read_file(test_path), labels);
  if (pair.train.feature_names != pair.test.feature_names) {
    throw Error(ErrorCode::SchemaMismatch,
                "train has " + std::to_string(pair.train.num_features()) + " features, test has " +
                    std::to_string(pair.test.num_features()) + " (or names differ)");
  }
  pair.train.validate();
  pair.test.validate();
  return pair;
}

MultiLabelDataset corrupt_labels(const MultiLabelDataset& data, double proportion,
                                 std::uint64_t seed) {
  if (!(proportion >= 0.0 && proportion <= 1.0)) {
    throw Error(ErrorCode::OutOfRange, "missing-label proportion must lie in [0,1]");
  }
  MultiLabelDataset out = data;
  std::vector<Eigen::Index> positives;
  for (Eigen::Index idx = 0; idx < out.labels.size(); ++idx) {
    if (out.labels.data()[idx] == 1.0) positives.push_back(idx);
  }
  // The small slack keeps e.g. 0.29 * 100 from flooring to 28.
  const auto remove = std::min(
      positives.size(),
      static_cast<std::size_t>(std::floor(proportion * static_cast<double>(positives.size()) + 1e-9)));

  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < remove; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, positives.size() - 1);
    std::swap(positives[i], positives[pick(rng)]);
    out.labels.data()[positives[i]] = 0.0;
  }
  return out;
}

MultiLabelDataset select_features(const MultiLabelDataset& data,
                                  std::span<const Eigen::Index> rows) {
  MultiLabelDataset out;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), data.num_instances());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] < 0 || rows[r] >= data.num_features()) {
      throw Error(ErrorCode::OutOfRange, "feature index " + std::to_string(rows[r]) + " out of range");
    }
    out.features.row(static_cast<Eigen::Index>(r)) = data.features.row(rows[r]);
    out.feature_names.push_back(data.feature_names[static_cast<std::size_t>(rows[r])]);
  }
  out.labels = data.labels;
  out.label_names = data.label_names;
  return out;
}

}  // namespace ldfm
