#include "fwt/model.hpp"

#include <cmath>
#include <sstream>

namespace fwt {

const char* to_string(UserType t) { return t == UserType::High ? "H" : "L"; }

const char* to_string(SneKind k) {
  switch (k) {
    case SneKind::HighFeeSNE: return "HighFeeSNE";
    case SneKind::LowFeeSNE: return "LowFeeSNE";
    case SneKind::NoGeneration: return "NoGeneration";
  }
  return "?";
}

SystemParams SystemParams::calibrated() { return SystemParams{}; }

double SystemParams::alpha(std::int64_t miner) const {
  if (mining_power.empty()) return 1.0 / static_cast<double>(n_miners);
  return mining_power.at(static_cast<std::size_t>(miner));
}

double TaxVector::rate(UserType payer, UserType payee) const {
  if (payer == UserType::High) return payee == UserType::High ? p_hh : p_hl;
  return payee == UserType::High ? p_lh : p_ll;
}

double TaxVector::row_sum(UserType payer, const SystemParams& p) const {
  const auto same = static_cast<double>(p.count(payer) - 1);
  const auto cross = static_cast<double>(p.count(other(payer)));
  return same * rate(payer, payer) + cross * rate(payer, other(payer));
}

ClassLoad class_load(const StrategyProfile& s, const SystemParams& p) {
  const double nh = static_cast<double>(p.n_users_high);
  const double nl = static_cast<double>(p.n_users_low);
  return {nh * s.rates.high.high_fee + nl * s.rates.low.high_fee,
          nh * s.rates.high.low_fee + nl * s.rates.low.low_fee};
}

std::string ValidationResult::joined() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (i) os << "; ";
    os << errors[i];
  }
  return os.str();
}

ValidationResult validate_params(const SystemParams& p) {
  ValidationResult r;
  auto fail = [&](std::string msg) { r.errors.push_back(std::move(msg)); };

  if (p.n_users_high < 1) fail("n_users_high must be >= 1");
  if (p.n_users_low < 1) fail("n_users_low must be >= 1");
  if (p.n_miners < 1) fail("n_miners must be >= 1");
  if (!(p.block_rate > 0.0) || !std::isfinite(p.block_rate))
    fail("block_rate must be positive");
  if (!(p.impatience >= 0.0) || !std::isfinite(p.impatience))
    fail("impatience must be nonnegative");
  if (!(p.mean_tx_size > 0.0) || !std::isfinite(p.mean_tx_size))
    fail("mean_tx_size must be positive");
  if (!(p.storage_cost_per_byte >= 0.0) || !std::isfinite(p.storage_cost_per_byte))
    fail("storage_cost_per_byte must be nonnegative");
  if (!(p.utility_low >= 0.0) || !std::isfinite(p.utility_low))
    fail("utility_low must be nonnegative");
  if (!(p.utility_high >= p.utility_low) || !std::isfinite(p.utility_high))
    fail("utility_high must be >= utility_low");

  if (!p.mining_power.empty()) {
    if (static_cast<std::int64_t>(p.mining_power.size()) != p.n_miners) {
      fail("mining_power must have n_miners entries");
    }
    double sum = 0.0;
    bool negative = false;
    for (double a : p.mining_power) {
      if (!(a >= 0.0)) negative = true;
      sum += a;
    }
    if (negative) fail("mining_power entries must be nonnegative");
    if (std::abs(sum - 1.0) > 1e-12) fail("mining power must sum to 1");
  }
  return r;
}

ValidationResult validate_menu(const FeeMenu& m) {
  ValidationResult r;
  if (!(m.rho_low >= 0.0)) r.errors.push_back("rho_low must be nonnegative");
  if (!(m.rho_high > m.rho_low)) r.errors.push_back("rho_high must exceed rho_low");
  return r;
}

ValidationResult validate_hetero(const HeteroCostParams& h) {
  ValidationResult r;
  if (!(h.cost_low > 0.0)) r.errors.push_back("cost_low must be positive");
  if (!(h.cost_high >= h.cost_low)) r.errors.push_back("cost_high must be >= cost_low");
  if (!(h.high_cost_fraction >= 0.0 && h.high_cost_fraction <= 1.0))
    r.errors.push_back("high_cost_fraction must lie in [0, 1]");
  return r;
}

ValidationResult validate_rates(const RatePair& r, const SystemParams& p, double tol) {
  ValidationResult v;
  if (!(r.high_fee >= 0.0) || !(r.low_fee >= 0.0)) v.errors.push_back("rates must be nonnegative");
  if (r.total() > p.rate_cap() * (1.0 + tol)) v.errors.push_back("total rate exceeds mu/N");
  return v;
}

}  // namespace fwt
