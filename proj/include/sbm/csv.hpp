#pragma once

#include "sbm/core.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sbm::io {

// Header plus string cells, whitespace-trimmed. CRLF and LF line endings
// parse identically; blank lines are skipped; double-quoted fields are
// unquoted.
struct RawTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::optional<std::size_t> find(const std::string& column) const;
  std::size_t column(const std::string& column) const;  // throws InputError
};

RawTable parse_raw_table(std::string_view text, char delimiter = ',');
RawTable read_raw_table(const std::filesystem::path& path, char delimiter = ',');

// UCI Adult files ship without a header and the test split starts with a
// "|1x3 Cross validator" line; labels there carry a trailing '.'.
RawTable read_adult_uci(const std::filesystem::path& path);
extern const std::vector<std::string> kAdultColumns;

struct FeatureSchema {
  std::string group_column = "group";
  std::string label_column = "label";    // used when present in the header
  std::vector<std::string> feature_columns;  // empty: every other column
};

GroupedDataset features_from_table(const RawTable& table, const FeatureSchema& schema);
GroupedDataset load_features_csv(const std::filesystem::path& path, const FeatureSchema& schema = {});

struct VoteTable {
  std::vector<std::string> names;
  WeakLabelMatrix votes;
};

VoteTable parse_votes_csv(std::string_view text);
VoteTable read_votes_csv(const std::filesystem::path& path);
std::string votes_to_csv(const WeakLabelMatrix& wl, const std::vector<std::string>& names = {});
std::vector<std::string> default_lf_names(Eigen::Index m);

std::string read_file(const std::filesystem::path& path);
// Write to a sibling temp file, then rename over the target.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

// Shortest round-trip decimal form.
std::string format_double(double v);
std::optional<double> parse_double(std::string_view s);

}  // namespace sbm::io
