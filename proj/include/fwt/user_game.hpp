#pragma once

#include <optional>

#include "fwt/model.hpp"

namespace fwt {

/// Time-average waiting (sum of expected waits per unit time) of one user
/// whose own rates are `own`, when all other users together offer
/// `others.high` at the high fee and `others.low` at the low fee.
///
/// The queue is a two-class preemptive-priority M/M/1 queue served at the
/// block rate; a class whose fee is below one miner's storage cost is never
/// served. Returns +infinity whenever a positive rate meets an unstable or
/// never-served class.
double waiting_rate(const RatePair& own, const ClassLoad& others, const FeeMenu& menu,
                    const SystemParams& p);

/// Symmetric-profile form: the waiting rate of any user of type `t`.
double waiting_rate(UserType t, const StrategyProfile& s, const FeeMenu& menu,
                    const SystemParams& p);

struct NetUtilities {
  PerType<double> h;
  UserType bigger = UserType::High;  // type-B; ties resolve to High

  double h_big() const { return h[bigger]; }
  double h_small() const { return h[other(bigger)]; }
  std::int64_t n_big(const SystemParams& p) const { return p.count(bigger); }
  std::int64_t n_small(const SystemParams& p) const { return p.count(other(bigger)); }
};

NetUtilities net_utilities(const SystemParams& p, const TaxVector& tax);

enum class SneBranch { NoneGenerate, OnlyBigGenerates, BothGenerate };

struct SneRates {
  double big = 0.0;
  double small = 0.0;
  SneBranch branch = SneBranch::NoneGenerate;
};

/// Symmetric equilibrium rates when everyone uses the single fee `rho`.
SneRates sne_rates(const NetUtilities& nu, double rho, const SystemParams& p);

/// Same piecewise solution expressed through per-transaction margins
/// (net utility minus fee) of the bigger and smaller type. Used directly by
/// models whose types pay different fees.
SneRates sne_rates_from_margins(double margin_big, double margin_small, std::int64_t n_big,
                                std::int64_t n_small, const SystemParams& p);

/// Marginal value of moving one transaction to the high fee at the low-fee
/// equilibrium, maximized over both types.
double high_fee_incentive(const NetUtilities& nu, double rho_low, const SystemParams& p);

enum class FeeLevel { High, Low, None };
const char* to_string(FeeLevel f);

struct SneOutcome {
  StrategyProfile profile;
  FeeLevel fee_used = FeeLevel::None;
  NetUtilities nu;
  PerType<double> waiting;
  std::optional<PerType<double>> payoff;
  double incentive = 0.0;  // high_fee_incentive at the low fee

  double active_fee(const FeeMenu& m) const {
    return fee_used == FeeLevel::High ? m.rho_high : fee_used == FeeLevel::Low ? m.rho_low : 0.0;
  }
  double rate_total(UserType t) const { return profile.rates[t].total(); }
};

/// Pick the equilibrium for a fee menu. A low fee below one miner's storage
/// cost is never served, so in that case only the high-fee equilibrium (or
/// no generation) can arise.
SneOutcome sne_select(const NetUtilities& nu, const FeeMenu& menu, const SystemParams& p);

struct TaxFlows {
  double outflow = 0.0;
  double inflow = 0.0;
};

/// Per-unit-time waiting tax paid and received by one user of type `t`.
TaxFlows tax_flows(UserType t, const StrategyProfile& s, const TaxVector& tax,
                   const SystemParams& p);

double user_payoff(UserType t, const SneOutcome& outcome, const FeeMenu& menu,
                   const TaxVector& tax, const SystemParams& p);

/// net_utilities + sne_select + user_payoff for both types.
SneOutcome solve_users(const SystemParams& p, const FeeMenu& menu, const TaxVector& tax);

struct BestResponseReport {
  bool ok = true;
  UserType type = UserType::High;
  RatePair best;           // best deviating rates found
  double gain = 0.0;       // best payoff minus equilibrium payoff
  double sne_payoff = 0.0;
  double tolerance = 0.0;
};

/// Grid oracle: hold everyone else at the equilibrium profile and scan one
/// user's rates over the feasible simplex with `grid` steps per axis. Passes
/// iff no grid point beats the equilibrium payoff by more than
/// eps * max(1, |u|).
BestResponseReport best_response_check(const SneOutcome& outcome, const FeeMenu& menu,
                                       const TaxVector& tax, const SystemParams& p,
                                       int grid = 200, double eps = 1e-9);

/// Payoff of a single user of type `t` playing `own` while all other users
/// follow `s`.
double deviation_payoff(UserType t, const RatePair& own, const StrategyProfile& s,
                        const FeeMenu& menu, const TaxVector& tax, const SystemParams& p);

}  // namespace fwt
