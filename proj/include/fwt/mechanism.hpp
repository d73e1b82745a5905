#pragma once

#include <optional>

#include "fwt/model.hpp"
#include "fwt/user_game.hpp"

namespace fwt {

/// How the four individual tax entries are chosen once their two row sums
/// are fixed.
///
/// `Fairness` takes the minimum-norm entries that also equalize the
/// equilibrium payoffs of the two types (falling back to `Uniform` when that
/// system is inconsistent). `Uniform` spreads each row sum evenly over the
/// N-1 counterparts.
enum class TaxSplit { Fairness, Uniform };
const char* to_string(TaxSplit s);

struct Mechanism {
  FeeMenu menu;
  TaxVector tax;
  PerType<double> row_sums;  // q_H, q_L
  int regime = 1;  // 1: no tax needed, 2: taxed
  double g1 = 0.0;  // target per-user rate of type H
  double g2 = 0.0;  // target per-user rate of type L
  TaxSplit split = TaxSplit::Fairness;
  bool split_fell_back = false;
  bool has_negative_entry() const {
    return tax.p_hh < 0.0 || tax.p_hl < 0.0 || tax.p_lh < 0.0 || tax.p_ll < 0.0;
  }
};

struct SufficientFeeResult {
  PerType<std::optional<double>> avg_fee;  // nullopt for types that do not generate
  bool ok = true;
};

/// Rate-weighted average fee-per-byte of every generating user against the
/// whole network's storage cost per byte (closed inequality).
SufficientFeeResult sufficient_fee_check(const SneOutcome& outcome, const FeeMenu& menu,
                                         const SystemParams& p,
                                         std::optional<double> system_cost_per_byte = {});

struct WelfareBreakdown {
  double total = 0.0;
  double user_sum = 0.0;
  double miner_sum = 0.0;
  PerType<double> user_payoff;
  PerType<std::optional<double>> avg_fee;
};

/// Users' time-average payoffs plus miners' time-average fee income net of
/// storage. `system_cost_per_byte` defaults to M * C_s.
WelfareBreakdown social_welfare(const SneOutcome& outcome, const FeeMenu& menu,
                                const TaxVector& tax, const SystemParams& p,
                                std::optional<double> system_cost_per_byte = {});

/// Welfare with every transfer cancelled: sum of lambda (R - s M C_s) minus
/// gamma times total waiting. Depends on rates only.
double welfare_from_rates(const StrategyProfile& s, const PerType<double>& waiting,
                          const SystemParams& p, std::optional<double> system_cost_per_byte = {});

/// Socially optimal per-user rates (g1, g2) for a given per-byte system cost.
PerType<double> optimal_rates(const SystemParams& p, double system_cost_per_byte);

Mechanism optimal_mechanism(const SystemParams& p, TaxSplit split = TaxSplit::Fairness);

/// Same construction with the network storage cost per byte taken as
/// M times the mean miner cost.
Mechanism optimal_mechanism_hetero(const SystemParams& p, const HeteroCostParams& hc,
                                   TaxSplit split = TaxSplit::Fairness);

/// Choose entries for fixed row sums according to `split`. Row sums alone
/// pin the equilibrium, so `outcome` is the equilibrium they induce (solved
/// with any entries having those row sums).
TaxVector split_taxes(const PerType<double>& row_sums, const SneOutcome& outcome,
                      const FeeMenu& menu, const SystemParams& p, TaxSplit split,
                      bool* fell_back = nullptr);

/// Row sums to tax vector with the uniform split.
TaxVector uniform_taxes(const PerType<double>& row_sums, const SystemParams& p);

struct OracleResult {
  double welfare = 0.0;
  FeeMenu menu;
  PerType<double> row_sums;
  std::size_t evaluated = 0;
};

/// Grid search of welfare over (rho_high > rho_low) in [0, 1.5 R_H / s]^2 and
/// row sums in [-R_H, R_H]^2 without any fee floor. Welfare depends on taxes
/// only through the row sums, so the search is four-dimensional.
OracleResult unconstrained_optimum_oracle(const SystemParams& p, int points_per_axis = 50);

struct TaxComparison {
  double delta = 0.0;
  PerType<double> row_sums;
  double utility_gap = 0.0;      // R_H - R_L
  bool predicted_high_lower = false;  // utility_gap < delta
  bool observed_high_lower = false;   // q_H < q_L
};

/// Compares the two types' total waiting tax under the optimal mechanism.
/// Throws std::domain_error when the optimal mechanism blocks generation.
TaxComparison tax_comparison(const SystemParams& p);

}  // namespace fwt
