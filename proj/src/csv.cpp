#include "sbm/csv.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace sbm::io {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_line(std::string_view line, char delimiter) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cell += c;
      }
    } else if (c == '"' && trim(cell).empty()) {
      quoted = true;
      was_quoted = true;
      cell.clear();
    } else if (c == delimiter) {
      cells.emplace_back(was_quoted ? cell : std::string(trim(cell)));
      cell.clear();
      was_quoted = false;
    } else {
      cell += c;
    }
  }
  cells.emplace_back(was_quoted ? cell : std::string(trim(cell)));
  return cells;
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

[[noreturn]] void cell_error(std::size_t line, const std::string& column, const std::string& what) {
  std::ostringstream msg;
  msg << "line " << line << ", column '" << column << "': " << what;
  throw InputError(msg.str());
}

}  // namespace

std::optional<std::size_t> RawTable::find(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) return std::nullopt;
  return static_cast<std::size_t>(it - header.begin());
}

std::size_t RawTable::column(const std::string& name) const {
  if (auto c = find(name)) return *c;
  throw InputError("missing column '" + name + "'");
}

RawTable parse_raw_table(std::string_view text, char delimiter) {
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  RawTable table;
  bool have_header = false;
  std::size_t line_no = 0;
  for (auto line : lines_of(text)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split_line(line, delimiter);
    if (!have_header) {
      table.header = std::move(cells);
      have_header = true;
      continue;
    }
    if (cells.size() != table.header.size()) {
      std::ostringstream msg;
      msg << "line " << line_no << ": expected " << table.header.size() << " fields, found " << cells.size();
      throw InputError(msg.str());
    }
    table.rows.push_back(std::move(cells));
  }
  if (!have_header) throw InputError("missing header row");
  return table;
}

RawTable read_raw_table(const std::filesystem::path& path, char delimiter) {
  return parse_raw_table(read_file(path), delimiter);
}

const std::vector<std::string> kAdultColumns = {
    "age",          "workclass", "fnlwgt",       "education",    "education-num",
    "marital-status", "occupation", "relationship", "race",         "sex",
    "capital-gain", "capital-loss", "hours-per-week", "native-country", "income"};

RawTable read_adult_uci(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  std::string body;
  for (auto line : lines_of(text)) {
    if (trim(line).empty() || line.front() == '|') continue;
    body.append(line);
    body += '\n';
  }
  std::string header;
  for (std::size_t i = 0; i < kAdultColumns.size(); ++i) header += (i ? "," : "") + kAdultColumns[i];
  RawTable table = parse_raw_table(header + "\n" + body);
  const std::size_t income = table.column("income");
  for (auto& row : table.rows)
    if (!row[income].empty() && row[income].back() == '.') row[income].pop_back();
  return table;
}

std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) return "nan";
  return std::string(buf, ptr);
}

GroupedDataset features_from_table(const RawTable& table, const FeatureSchema& schema) {
  const std::size_t group_col = table.column(schema.group_column);
  const auto label_col = table.find(schema.label_column);
  std::vector<std::size_t> feature_cols;
  if (schema.feature_columns.empty()) {
    for (std::size_t c = 0; c < table.header.size(); ++c)
      if (c != group_col && (!label_col || c != *label_col)) feature_cols.push_back(c);
  } else {
    for (const auto& name : schema.feature_columns) feature_cols.push_back(table.column(name));
  }
  if (feature_cols.empty()) throw InputError("no feature columns");
  if (table.rows.empty()) throw InputError("no data rows");

  const auto n = static_cast<Eigen::Index>(table.rows.size());
  GroupedDataset ds;
  ds.features.resize(n, static_cast<Eigen::Index>(feature_cols.size()));
  ds.groups.resize(n);
  if (label_col) ds.labels = IntVector(n);

  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = table.rows[static_cast<std::size_t>(i)];
    const std::size_t line = static_cast<std::size_t>(i) + 2;  // 1-based, after the header
    for (std::size_t f = 0; f < feature_cols.size(); ++f) {
      const auto v = parse_double(row[feature_cols[f]]);
      if (!v) cell_error(line, table.header[feature_cols[f]], "non-numeric feature value '" + row[feature_cols[f]] + "'");
      ds.features(i, static_cast<Eigen::Index>(f)) = *v;
    }
    const auto g = parse_double(row[group_col]);
    if (!g || (*g != 0.0 && *g != 1.0))
      cell_error(line, schema.group_column, "unknown group value '" + row[group_col] + "' (expected 0 or 1)");
    ds.groups[i] = static_cast<int>(*g);
    if (label_col) {
      const auto y = parse_double(row[*label_col]);
      if (!y || (*y != -1.0 && *y != 1.0))
        cell_error(line, schema.label_column, "unknown label value '" + row[*label_col] + "' (expected -1 or 1)");
      (*ds.labels)[i] = static_cast<int>(*y);
    }
  }
  return ds;
}

GroupedDataset load_features_csv(const std::filesystem::path& path, const FeatureSchema& schema) {
  try {
    return features_from_table(read_raw_table(path), schema);
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

VoteTable parse_votes_csv(std::string_view text) {
  const RawTable table = parse_raw_table(text);
  if (table.rows.empty()) throw InputError("votes file has no rows");
  VoteTable out;
  out.names = table.header;
  VoteMatrix votes(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(table.header.size()));
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    for (std::size_t j = 0; j < table.header.size(); ++j) {
      const auto v = parse_double(table.rows[i][j]);
      if (!v || *v != static_cast<int>(*v))
        cell_error(i + 2, table.header[j], "non-integer vote '" + table.rows[i][j] + "'");
      // Out-of-range integers are kept so that validation can name them.
      votes(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = static_cast<int>(*v);
    }
  }
  out.votes = WeakLabelMatrix(std::move(votes));
  return out;
}

VoteTable read_votes_csv(const std::filesystem::path& path) {
  try {
    return parse_votes_csv(read_file(path));
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

std::vector<std::string> default_lf_names(Eigen::Index m) {
  std::vector<std::string> names;
  for (Eigen::Index j = 0; j < m; ++j) names.push_back("lf_" + std::to_string(j));
  return names;
}

std::string votes_to_csv(const WeakLabelMatrix& wl, const std::vector<std::string>& names) {
  const auto header = names.empty() ? default_lf_names(wl.m()) : names;
  if (static_cast<Eigen::Index>(header.size()) != wl.m()) throw InputError("votes_to_csv: name count mismatch");
  std::string out;
  for (std::size_t j = 0; j < header.size(); ++j) out += (j ? "," : "") + header[j];
  out += '\n';
  for (Eigen::Index i = 0; i < wl.n(); ++i) {
    for (Eigen::Index j = 0; j < wl.m(); ++j) {
      if (j) out += ',';
      out += std::to_string(wl(i, j));
    }
    out += '\n';
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw InputError("write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace sbm::io
