#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fwt {

enum class UserType { High, Low };

inline constexpr UserType other(UserType t) {
  return t == UserType::High ? UserType::Low : UserType::High;
}

const char* to_string(UserType t);

// Small helper for quantities carried once per user type.
template <class T>
struct PerType {
  T high{};
  T low{};

  constexpr T& operator[](UserType t) { return t == UserType::High ? high : low; }
  constexpr const T& operator[](UserType t) const {
    return t == UserType::High ? high : low;
  }
};

/// Exogenous model constants. Units: USD, seconds, bytes.
///
/// `mining_power` holds one normalized share per miner. An empty vector is
/// shorthand for the uniform split 1/M and is what `calibrated()` produces, so
/// that full-scale miner counts do not allocate a 10^4-entry vector for
/// every parameter copy.
struct SystemParams {
  std::int64_t n_users_high = 100;
  std::int64_t n_users_low = 100;
  std::int64_t n_miners = 10000;
  double block_rate = 15.0;               // mu
  double impatience = 5e-5;               // gamma
  double mean_tx_size = 150.0;            // s-bar
  double storage_cost_per_byte = 5e-10;   // C_s
  double utility_high = 1.8e-3;           // R_H
  double utility_low = 9e-4;              // R_L
  std::vector<double> mining_power;       // alpha_m, empty => uniform

  /// Ethereum-calibrated defaults with desk-scale user counts.
  static SystemParams calibrated();

  std::int64_t n_users() const { return n_users_high + n_users_low; }
  std::int64_t count(UserType t) const {
    return t == UserType::High ? n_users_high : n_users_low;
  }
  double utility(UserType t) const {
    return t == UserType::High ? utility_high : utility_low;
  }
  /// Per-user generation cap mu / N.
  double rate_cap() const { return block_rate / static_cast<double>(n_users()); }
  /// Storage cost per byte summed over every miner (M * C_s).
  double system_cost_per_byte() const {
    return static_cast<double>(n_miners) * storage_cost_per_byte;
  }
  double alpha(std::int64_t miner) const;
  bool uniform_power() const { return mining_power.empty(); }
};

struct FeeMenu {
  double rho_high = 0.0;
  double rho_low = 0.0;
};

/// Waiting-tax rates paid per included transaction by a user of the first
/// type to each user of the second type. Entries may be negative.
struct TaxVector {
  double p_hh = 0.0;
  double p_hl = 0.0;
  double p_lh = 0.0;
  double p_ll = 0.0;

  double rate(UserType payer, UserType payee) const;
  /// Total waiting tax paid by one user of `payer` type per included
  /// transaction, summed over every other user.
  double row_sum(UserType payer, const SystemParams& p) const;
};

/// Generation rates of one user at the high and the low fee-per-byte.
struct RatePair {
  double high_fee = 0.0;
  double low_fee = 0.0;
  double total() const { return high_fee + low_fee; }
};

enum class SneKind { HighFeeSNE, LowFeeSNE, NoGeneration };
const char* to_string(SneKind k);

struct StrategyProfile {
  PerType<RatePair> rates;
  SneKind kind = SneKind::NoGeneration;
};

/// Load offered at each fee class by the whole population.
struct ClassLoad {
  double high = 0.0;
  double low = 0.0;
  double total() const { return high + low; }
};
ClassLoad class_load(const StrategyProfile& s, const SystemParams& p);

struct HeteroCostParams {
  double cost_low = 5e-10;
  double cost_high = 5e-10;
  double high_cost_fraction = 0.5;

  /// Average per-miner storage cost per byte.
  double mean_cost() const {
    return (1.0 - high_cost_fraction) * cost_low + high_cost_fraction * cost_high;
  }
  static HeteroCostParams from_ratio(double cost_low, double ratio) {
    return {cost_low, cost_low * ratio, 0.5};
  }
};

struct ValidationResult {
  std::vector<std::string> errors;
  bool ok() const { return errors.empty(); }
  std::string joined() const;
};

ValidationResult validate_params(const SystemParams& p);
ValidationResult validate_menu(const FeeMenu& m);
ValidationResult validate_hetero(const HeteroCostParams& h);
/// Rate constraints: both rates nonnegative and total at most mu/N.
ValidationResult validate_rates(const RatePair& r, const SystemParams& p, double tol = 1e-12);

}  // namespace fwt
