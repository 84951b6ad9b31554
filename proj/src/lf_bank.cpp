#include "sbm/lf_bank.hpp"

#include <iostream>
#include <sstream>
#include <variant>

namespace sbm::lf {

struct Compare {
  std::string column;
  CompareOp op;
  double value;
};

struct InSet {
  std::string column;
  std::set<std::string> values;
};

struct Contains {
  std::string column;
  std::string needle;
};

struct Junction {
  bool conjunction;
  std::vector<Predicate> parts;
};

struct Not {
  Predicate inner;
};

struct Predicate::Node {
  std::variant<Compare, InSet, Contains, Junction, Not> expr;
};

Predicate Predicate::compare(std::string column, CompareOp op, double value) {
  return Predicate(std::make_shared<const Node>(Node{Compare{std::move(column), op, value}}));
}

Predicate Predicate::in_set(std::string column, std::set<std::string> values) {
  return Predicate(std::make_shared<const Node>(Node{InSet{std::move(column), std::move(values)}}));
}

Predicate Predicate::contains(std::string column, std::string needle) {
  return Predicate(std::make_shared<const Node>(Node{Contains{std::move(column), std::move(needle)}}));
}

Predicate Predicate::all_of(std::vector<Predicate> parts) {
  return Predicate(std::make_shared<const Node>(Node{Junction{true, std::move(parts)}}));
}

Predicate Predicate::any_of(std::vector<Predicate> parts) {
  return Predicate(std::make_shared<const Node>(Node{Junction{false, std::move(parts)}}));
}

Predicate Predicate::negate(Predicate p) { return Predicate(std::make_shared<const Node>(Node{Not{std::move(p)}})); }

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

const std::string& cell(const io::RawTable& table, std::size_t row, const std::string& column) {
  return table.rows[row][table.column(column)];
}

}  // namespace

bool Predicate::evaluate(const io::RawTable& table, std::size_t row) const {
  return std::visit(
      overloaded{
          [&](const Compare& c) {
            const std::string& raw = cell(table, row, c.column);
            const auto v = io::parse_double(raw);
            if (!v) {
              std::ostringstream msg;
              msg << "type mismatch at line " << row + 2 << ", column '" << c.column << "': '" << raw
                  << "' is not numeric";
              throw InputError(msg.str());
            }
            switch (c.op) {
              case CompareOp::lt: return *v < c.value;
              case CompareOp::le: return *v <= c.value;
              case CompareOp::gt: return *v > c.value;
              case CompareOp::ge: return *v >= c.value;
              case CompareOp::eq: return *v == c.value;
              case CompareOp::ne: return *v != c.value;
            }
            return false;
          },
          [&](const InSet& s) { return s.values.count(cell(table, row, s.column)) > 0; },
          [&](const Contains& s) { return cell(table, row, s.column).find(s.needle) != std::string::npos; },
          [&](const Junction& j) {
            for (const auto& p : j.parts)
              if (p.evaluate(table, row) != j.conjunction) return !j.conjunction;
            return j.conjunction;
          },
          [&](const Not& n) { return !n.inner.evaluate(table, row); },
      },
      node_->expr);
}

std::set<std::string> Predicate::columns() const {
  return std::visit(overloaded{
                        [](const Compare& c) { return std::set<std::string>{c.column}; },
                        [](const InSet& s) { return std::set<std::string>{s.column}; },
                        [](const Contains& s) { return std::set<std::string>{s.column}; },
                        [](const Junction& j) {
                          std::set<std::string> out;
                          for (const auto& p : j.parts) out.merge(p.columns());
                          return out;
                        },
                        [](const Not& n) { return n.inner.columns(); },
                    },
                    node_->expr);
}

AliasMap parse_alias_file(std::string_view text) {
  AliasMap out;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto eq = line.find('=');
    const auto dot = line.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq)
      throw InputError("alias file line " + std::to_string(line_no) + ": expected column.Canonical=alias|alias");
    auto strip = [](std::string s) {
      const auto a = s.find_first_not_of(" \t");
      const auto b = s.find_last_not_of(" \t");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string column = strip(line.substr(0, dot));
    const std::string canonical = strip(line.substr(dot + 1, eq - dot - 1));
    std::string rest = line.substr(eq + 1);
    std::size_t start = 0;
    while (start <= rest.size()) {
      auto bar = rest.find('|', start);
      if (bar == std::string::npos) bar = rest.size();
      const std::string alias = strip(rest.substr(start, bar - start));
      if (!alias.empty()) out[column][canonical].push_back(alias);
      start = bar + 1;
    }
  }
  return out;
}

AliasMap load_alias_file(const std::filesystem::path& path) { return parse_alias_file(io::read_file(path)); }

WeakLabelMatrix apply_lf_bank(const io::RawTable& table, const std::vector<LfRule>& rules) {
  if (rules.empty()) throw InputError("apply_lf_bank: empty rule list");
  if (rules.size() < 3)
    std::clog << "warning: " << rules.size() << " labeling functions; accuracy estimation needs at least 3\n";
  for (const auto& rule : rules)
    for (const auto& c : rule.predicate.columns())
      if (!table.find(c)) throw InputError("rule '" + rule.name + "' references missing column '" + c + "'");

  VoteMatrix votes(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(rules.size()));
  for (std::size_t j = 0; j < rules.size(); ++j) {
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
      const bool fired = rules[j].predicate.evaluate(table, i);
      votes(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          fired ? 1 : (rules[j].abstain_on_false ? kAbstain : -1);
    }
  }
  return WeakLabelMatrix(std::move(votes));
}

namespace {

// Canonical spellings plus any aliases for that column.
Predicate one_of(const AliasMap& aliases, const std::string& column, std::set<std::string> canonical) {
  if (auto col = aliases.find(column); col != aliases.end()) {
    std::set<std::string> extra;
    for (const auto& value : canonical)
      if (auto it = col->second.find(value); it != col->second.end()) extra.insert(it->second.begin(), it->second.end());
    canonical.merge(extra);
  }
  return Predicate::in_set(column, std::move(canonical));
}

LfBank adult_bank(const AliasMap& a) {
  using P = Predicate;
  std::vector<LfRule> rules = {
      {"age", P::all_of({P::compare("age", CompareOp::ge, 30), P::compare("age", CompareOp::le, 60)})},
      {"education", one_of(a, "education", {"Bachelors", "Masters", "Doctorate"})},
      {"marital", one_of(a, "marital-status", {"Married-civ-spouse", "Married-AF-spouse", "Married-spouse-absent"})},
      {"relationship", one_of(a, "relationship", {"Wife", "Own-child", "Husband"})},
      {"capital", P::compare("capital-gain", CompareOp::gt, 5000)},
      {"race", one_of(a, "race", {"Asian-Pac-Islander", "Other"})},
      {"country", one_of(a, "native-country", {"Germany", "Japan", "Greece", "China"})},
      {"workclass",
       one_of(a, "workclass", {"Self-emp-not-inc", "Self-emp-inc", "Federal-gov", "Local-gov", "State-gov"})},
      {"occupation", one_of(a, "occupation", {"Sales", "Exec-managerial", "Prof-specialty", "Machine-op-inspct"})},
  };
  return LfBank{"adult-v1", std::move(rules), P::compare("age", CompareOp::gt, 25), P::contains("income", ">50K")};
}

LfBank bank_marketing_bank(const AliasMap& a) {
  using P = Predicate;
  std::vector<LfRule> rules = {
      {"loan", one_of(a, "loan", {"yes"})},
      {"previous_contact", P::compare("previous", CompareOp::gt, 1.1)},
      {"duration", P::compare("duration", CompareOp::gt, 360)},  // seconds
      {"marital", one_of(a, "marital", {"single"})},
      {"previous_outcome", one_of(a, "poutcome", {"success"})},
      {"education", one_of(a, "education", {"university.degree", "professional.course"})},
  };
  return LfBank{"bank-v1", std::move(rules), P::compare("age", CompareOp::gt, 25), one_of(a, "y", {"yes"})};
}

IntVector evaluate_binary(const Predicate& p, const io::RawTable& table, int on_true, int on_false) {
  for (const auto& c : p.columns())
    if (!table.find(c)) throw InputError("missing column '" + c + "'");
  IntVector out(static_cast<Eigen::Index>(table.rows.size()));
  for (std::size_t i = 0; i < table.rows.size(); ++i)
    out[static_cast<Eigen::Index>(i)] = p.evaluate(table, i) ? on_true : on_false;
  return out;
}

}  // namespace

std::vector<std::string> builtin_bank_names() { return {"adult-v1", "bank-v1"}; }

LfBank builtin_bank(const std::string& name, const AliasMap& aliases) {
  if (name == "adult-v1") return adult_bank(aliases);
  if (name == "bank-v1") return bank_marketing_bank(aliases);
  throw InputError("unknown LF bank '" + name + "' (expected adult-v1 or bank-v1)");
}

IntVector evaluate_groups(const LfBank& bank, const io::RawTable& table) { return evaluate_binary(bank.group, table, 1, 0); }

IntVector evaluate_labels(const LfBank& bank, const io::RawTable& table) {
  return evaluate_binary(bank.label, table, 1, -1);
}

}  // namespace sbm::lf
