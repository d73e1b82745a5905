#include "fwt/config.hpp"

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace fwt {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || *end != '\0') throw std::invalid_argument("bad number for " + key + ": '" + v + "'");
  return x;
}

std::int64_t to_int(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const long long x = std::strtoll(v.c_str(), &end, 10);
  if (v.empty() || *end != '\0') throw std::invalid_argument("bad integer for " + key + ": '" + v + "'");
  return x;
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "n_users_high", "n_users_low",           "n_miners",     "block_rate",  "impatience",
      "mean_tx_size", "storage_cost_per_byte", "utility_high", "utility_low", "mining_power"};
  return keys;
}

void apply_param(SystemParams& p, const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (key == "n_users_high") p.n_users_high = to_int(key, v);
  else if (key == "n_users_low") p.n_users_low = to_int(key, v);
  else if (key == "n_miners") p.n_miners = to_int(key, v);
  else if (key == "block_rate") p.block_rate = to_double(key, v);
  else if (key == "impatience") p.impatience = to_double(key, v);
  else if (key == "mean_tx_size") p.mean_tx_size = to_double(key, v);
  else if (key == "storage_cost_per_byte") p.storage_cost_per_byte = to_double(key, v);
  else if (key == "utility_high") p.utility_high = to_double(key, v);
  else if (key == "utility_low") p.utility_low = to_double(key, v);
  else if (key == "mining_power") {
    p.mining_power.clear();
    if (v == "uniform" || v.empty()) return;
    std::istringstream ls(v);
    std::string item;
    while (std::getline(ls, item, ',')) p.mining_power.push_back(to_double(key, trim(item)));
  } else {
    throw std::invalid_argument("unknown parameter '" + key + "'");
  }
}

void apply_param(SystemParams& p, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw std::invalid_argument("expected key=value, got '" + assignment + "'");
  apply_param(p, trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

SystemParams read_config(std::istream& is) {
  SystemParams p;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    if (trim(line).empty()) continue;
    try {
      apply_param(p, line);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return p;
}

SystemParams read_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot open config " + path);
  return read_config(f);
}

void write_config(std::ostream& os, const SystemParams& p) {
  const auto old = os.precision(17);
  os << "n_users_high = " << p.n_users_high << '\n'
     << "n_users_low = " << p.n_users_low << '\n'
     << "n_miners = " << p.n_miners << '\n'
     << "block_rate = " << p.block_rate << '\n'
     << "impatience = " << p.impatience << '\n'
     << "mean_tx_size = " << p.mean_tx_size << '\n'
     << "storage_cost_per_byte = " << p.storage_cost_per_byte << '\n'
     << "utility_high = " << p.utility_high << '\n'
     << "utility_low = " << p.utility_low << '\n'
     << "mining_power = ";
  if (p.mining_power.empty()) {
    os << "uniform";
  } else {
    for (std::size_t i = 0; i < p.mining_power.size(); ++i) os << (i ? "," : "") << p.mining_power[i];
  }
  os << '\n';
  os.precision(old);
}

}  // namespace fwt
