#pragma once

#include "sbm/csv.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

namespace sbm::lf {

enum class CompareOp { lt, le, gt, ge, eq, ne };

// Boolean expression over the named columns of a raw row.
class Predicate {
 public:
  struct Node;

  static Predicate compare(std::string column, CompareOp op, double value);
  static Predicate in_set(std::string column, std::set<std::string> values);
  static Predicate contains(std::string column, std::string needle);
  static Predicate all_of(std::vector<Predicate> parts);
  static Predicate any_of(std::vector<Predicate> parts);
  static Predicate negate(Predicate p);

  // Throws InputError naming the row and column on a type mismatch.
  bool evaluate(const io::RawTable& table, std::size_t row) const;
  std::set<std::string> columns() const;

 private:
  explicit Predicate(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

struct LfRule {
  std::string name;
  Predicate predicate;
  bool abstain_on_false = false;  // false -> 0 instead of -1
};

// Extra spellings accepted by in_set predicates: column -> canonical -> aliases.
using AliasMap = std::map<std::string, std::map<std::string, std::vector<std::string>>>;

// Lines of the form "column.Canonical=alias one|alias two"; '#' starts a comment.
AliasMap parse_alias_file(std::string_view text);
AliasMap load_alias_file(const std::filesystem::path& path);

struct LfBank {
  std::string name;
  std::vector<LfRule> rules;
  Predicate group;  // true -> group 1
  Predicate label;  // true -> +1
};

// One vote column per rule, true -> +1, false -> -1 (or abstain).
WeakLabelMatrix apply_lf_bank(const io::RawTable& table, const std::vector<LfRule>& rules);

std::vector<std::string> builtin_bank_names();
// "adult-v1" (UCI Adult column names) or "bank-v1" (UCI bank-additional).
LfBank builtin_bank(const std::string& name, const AliasMap& aliases = {});

IntVector evaluate_groups(const LfBank& bank, const io::RawTable& table);
IntVector evaluate_labels(const LfBank& bank, const io::RawTable& table);

}  // namespace sbm::lf
