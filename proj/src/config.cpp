#include "sbm/config.hpp"

#include "sbm/csv.hpp"

#include <charconv>
#include <limits>
#include <sstream>

namespace sbm::config {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* expected) {
  throw InputError("config key '" + key + "': bad value '" + value + "' (expected " + expected + ")");
}

double as_double(const std::string& key, const std::string& value) {
  const auto v = io::parse_double(value);
  if (!v) bad_value(key, value, "a number");
  return *v;
}

double as_positive(const std::string& key, const std::string& value) {
  const double v = as_double(key, value);
  if (!(v > 0.0)) bad_value(key, value, "a positive number");
  return v;
}

long long as_integer(const std::string& key, const std::string& value, long long lo) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size() || v < lo) bad_value(key, value, "an integer");
  return v;
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "ot_type",         "knn_k",     "sinkhorn_eta", "sinkhorn_max_iter", "sinkhorn_tol",
      "covariance_ridge", "transport_scope", "class_balance", "tie_tol",   "seed",
      "end_model",       "epochs",    "lr",           "l2"};
  return keys;
}

void apply_setting(PipelineConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "ot_type") {
    cfg.ot_type = parse_ot_type(value);
  } else if (key == "knn_k") {
    cfg.knn_k = static_cast<int>(as_integer(key, value, 1));
  } else if (key == "sinkhorn_eta") {
    cfg.sinkhorn_eta = as_positive(key, value);
  } else if (key == "sinkhorn_max_iter") {
    cfg.sinkhorn_max_iter = static_cast<int>(as_integer(key, value, 1));
  } else if (key == "sinkhorn_tol") {
    cfg.sinkhorn_tol = as_positive(key, value);
  } else if (key == "covariance_ridge") {
    cfg.covariance_ridge = as_double(key, value);
    if (cfg.covariance_ridge < 0.0) bad_value(key, value, "a nonnegative number");
  } else if (key == "transport_scope") {
    cfg.transport_scope = parse_transport_scope(value);
  } else if (key == "class_balance") {
    cfg.class_balance = as_double(key, value);
    if (!(cfg.class_balance > 0.0 && cfg.class_balance < 1.0)) bad_value(key, value, "a number in (0, 1)");
  } else if (key == "tie_tol") {
    cfg.tie_tol = as_double(key, value);
    if (cfg.tie_tol < 0.0) bad_value(key, value, "a nonnegative number");
  } else if (key == "seed") {
    cfg.seed = static_cast<std::uint64_t>(as_integer(key, value, 0));
  } else if (key == "end_model") {
    if (value == "on") cfg.end_model = true;
    else if (value == "off") cfg.end_model = false;
    else bad_value(key, value, "on|off");
  } else if (key == "epochs") {
    cfg.epochs = static_cast<int>(as_integer(key, value, 0));
  } else if (key == "lr") {
    cfg.lr = as_positive(key, value);
  } else if (key == "l2") {
    cfg.l2 = as_double(key, value);
    if (cfg.l2 < 0.0) bad_value(key, value, "a nonnegative number");
  } else {
    throw InputError("unknown config key '" + key + "'");
  }
}

PipelineConfig parse_config(std::string_view text, PipelineConfig base) {
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InputError("config line " + std::to_string(line_no) + ": expected key=value");
    try {
      apply_setting(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const InputError& e) {
      throw InputError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return base;
}

PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base) {
  try {
    return parse_config(io::read_file(path), std::move(base));
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

std::string to_kv(const PipelineConfig& cfg) {
  std::ostringstream out;
  out << "ot_type=" << to_string(cfg.ot_type) << '\n'
      << "knn_k=" << cfg.knn_k << '\n'
      << "sinkhorn_eta=" << io::format_double(cfg.sinkhorn_eta) << '\n'
      << "sinkhorn_max_iter=" << cfg.sinkhorn_max_iter << '\n'
      << "sinkhorn_tol=" << io::format_double(cfg.sinkhorn_tol) << '\n'
      << "covariance_ridge=" << io::format_double(cfg.covariance_ridge) << '\n'
      << "transport_scope=" << to_string(cfg.transport_scope) << '\n'
      << "class_balance=" << io::format_double(cfg.class_balance) << '\n'
      << "tie_tol=" << io::format_double(cfg.tie_tol) << '\n'
      << "seed=" << cfg.seed << '\n'
      << "end_model=" << (cfg.end_model ? "on" : "off") << '\n'
      << "epochs=" << cfg.epochs << '\n'
      << "lr=" << io::format_double(cfg.lr) << '\n'
      << "l2=" << io::format_double(cfg.l2) << '\n';
  return out.str();
}

}  // namespace sbm::config
