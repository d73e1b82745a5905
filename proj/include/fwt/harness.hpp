#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "fwt/baseline_existing.hpp"
#include "fwt/mechanism.hpp"
#include "fwt/model.hpp"
#include "fwt/sim.hpp"

namespace fwt {

/// (sum u)^2 / (N sum u^2). NaN when every payoff is zero.
double jain_index(const std::vector<double>& payoffs);
/// Same index for n_high users at u_high and n_low users at u_low.
double jain_index(double u_high, std::int64_t n_high, double u_low, std::int64_t n_low);

/// Rate-weighted fee-per-byte over every generated transaction.
std::optional<double> population_avg_fee(const SneOutcome& o, const FeeMenu& menu,
                                          const SystemParams& p);

struct SolveResult {
  Mechanism mechanism;
  SneOutcome outcome;
  WelfareBreakdown welfare;
  SufficientFeeResult fee;
  double system_cost_per_byte = 0.0;
  std::optional<HeteroCostParams> hetero;
};

/// optimal mechanism -> equilibrium -> welfare -> sufficient-fee check.
SolveResult solve(const SystemParams& p, TaxSplit split = TaxSplit::Fairness,
                  const std::optional<HeteroCostParams>& hetero = {});
nlohmann::json to_json(const SolveResult& r);

enum class SweepAxis { Gamma, RHigh, NUsers, CostRatio };
SweepAxis parse_axis(const std::string& s);
const char* to_string(SweepAxis a);

struct SweepOptions {
  SweepAxis axis = SweepAxis::Gamma;
  std::optional<double> lo;
  std::optional<double> hi;
  int steps = 10;
  bool paper_scale = false;
  double high_fraction = 0.5;  // share of type-H users on the n_users axis
  TaxSplit split = TaxSplit::Fairness;
  int fee_grid = 200;
};

/// Default range of each axis: gamma [1e-5, 1e-3], r_high [5e-4, 3e-3],
/// n_users [100, 1000] ([153000, 537000] at full scale), cost_ratio [1, 10].
std::pair<double, double> default_range(SweepAxis a, bool paper_scale);

/// Parameters at one sweep point. r_high keeps R_L / R_H fixed; n_users
/// splits N by `high_fraction`; cost_ratio leaves params untouched.
SystemParams sweep_params(const SystemParams& base, SweepAxis axis, double value,
                          double high_fraction);

struct SweepRow {
  std::string axis;
  double value = 0.0;
  double fwt_avg_fee = 0.0;
  double existing_avg_fee = 0.0;
  double system_cost_per_byte = 0.0;
  double fwt_welfare = 0.0;
  double existing_welfare = 0.0;
  double improvement_pct = 0.0;
  PerType<double> fwt_payoff;
  PerType<double> existing_payoff;
  double fwt_jain = 0.0;
  double existing_jain = 0.0;
  bool fwt_sufficient = false;
  bool existing_sufficient = false;
  std::string error;
};

SweepRow sweep_point(const SystemParams& base, const SweepOptions& opt, double value);
std::vector<SweepRow> sweep(const SystemParams& base, const SweepOptions& opt);
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);
const char* sweep_csv_header();

struct SimulateOptions {
  std::string scheme = "fwt";  // fwt or existing
  double horizon = 0.0;        // 0 => 1e5 blocks after warmup
  double warmup = 0.1;
  int replications = 10;
  std::uint64_t seed = 1;
  TaxSplit split = TaxSplit::Fairness;
  bool record_log = false;
};

/// Simulates the equilibrium of one scheme and reports it next to the
/// closed form. The full report (with the event log) goes to `report`.
nlohmann::json simulate(const SystemParams& p, const SimulateOptions& opt,
                        SimReport* report = nullptr);

struct CheckReport {
  std::string suite;
  bool pass = true;
  int cases = 0;
  int failures = 0;
  std::string summary;
  std::vector<std::string> failures_detail;  // first few only
  nlohmann::json data = nlohmann::json::object();
  double seconds = 0.0;

  void fail(const std::string& what);
};

const std::vector<std::string>& check_suites();

/// Random pools of up to 20 transactions with random fees, sizes and mining
/// power; the equilibrium selection must survive every deviation at eps = 0.
CheckReport check_miner_ne(int pools, std::uint64_t seed);

/// Best-response oracle on the equilibrium of every point of a 5x5x5
/// (gamma, R_H, rho_high) sweep without taxes, rho_low = M C_s, and on the
/// taxed equilibrium of the optimal mechanism over a 20x20 (gamma, R_H) grid.
CheckReport check_user_ne(const SystemParams& base, int grid = 200, int per_axis = 5);

/// Simulated waiting rates against the closed form on fixed profiles.
CheckReport check_waiting_rates(int replications, std::uint64_t seed, double blocks = 1e5);

/// Closed-form welfare against the grid oracle on random draws from both regimes.
CheckReport check_optimum(int draws, std::uint64_t seed, int points = 50, double rel_tol = 0.01);

/// Jain index of equilibrium payoffs under the optimal mechanism over a
/// gamma x R_H grid.
CheckReport check_fairness(const SystemParams& base, int per_axis = 20);

/// Rate-weighted fee covers M C_s at every point of the same grid.
CheckReport check_sufficient_fee(const SystemParams& base, int per_axis = 20);

/// Sweeps R_L so that R_H - R_L crosses delta; the sign of q_H - q_L must
/// follow the prediction at every grid point.
CheckReport check_tax_ordering(double step = 1e-7);

/// Exact fee/tax ledgers per replication and analytic welfare invariance to
/// the split of fixed row sums.
CheckReport check_conservation(int replications, std::uint64_t seed);

/// Qualitative comparison against the Existing surrogate over 10-point sweeps.
CheckReport check_qualitative(const SystemParams& base, int steps = 10);

CheckReport run_check(const std::string& suite, std::optional<int> budget, std::uint64_t seed,
                      const SystemParams& base);
nlohmann::json to_json(const CheckReport& r);

}  // namespace fwt
