#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fwt/model.hpp"

namespace fwt {

struct SimConfig {
  SystemParams params;
  FeeMenu menu;
  TaxVector tax;
  StrategyProfile profile;
  // One entry per user (type-H users first). Overrides `profile` when set.
  std::optional<std::vector<RatePair>> per_user_rates;
  double horizon = 1e4;
  std::uint64_t seed = 1;
  double warmup = 0.1;  // fraction of the horizon discarded
  int replications = 10;
  bool record_log = false;  // event log of replication 0
};

struct Estimate {
  double mean = 0.0;
  double half_width = 0.0;  // 95% Student-t
  int n = 0;
  double lo() const { return mean - half_width; }
  double hi() const { return mean + half_width; }
  bool covers(double x) const { return x >= lo() && x <= hi(); }
};

struct SimEvent {
  enum Kind { Generate, Include, EmptyBlock };
  double time = 0.0;
  Kind kind = Generate;
  std::int64_t user_id = -1;
  std::int64_t tx_index = -1;
  double fee_per_byte = 0.0;
  std::int64_t block_id = -1;
  std::int64_t winner_miner = -1;
};

/// Exact per-replication ledger in units of 1e-18 USD.
struct Ledger {
  __int128 fees_paid = 0;
  __int128 fees_received = 0;
  __int128 tax_out = 0;
  __int128 tax_in = 0;
  bool fees_balance() const { return fees_paid == fees_received; }
  bool taxes_balance() const { return tax_out == tax_in; }
};

/// Sufficient statistics of one replication, measured over the window
/// [warmup * horizon, horizon].
struct ReplicationResult {
  std::vector<double> waiting_rate;           // per user
  std::vector<double> censored_waiting_rate;  // part from txs still pooled at the horizon
  std::vector<double> payoff;                 // per user
  double welfare = 0.0;
  double user_sum = 0.0;
  double miner_sum = 0.0;
  std::int64_t blocks = 0;
  std::int64_t empty_blocks = 0;
  std::int64_t included_high = 0;
  std::int64_t included_low = 0;
  std::int64_t generated_high = 0;
  std::int64_t generated_low = 0;
  std::int64_t censored_high = 0;
  std::int64_t censored_low = 0;
  Ledger ledger;
};

struct SimReport {
  PerType<Estimate> waiting_rate;  // average over the users of each type
  PerType<Estimate> censored_waiting_rate;
  PerType<Estimate> payoff;
  Estimate welfare;
  std::vector<double> user_waiting_rate;  // per user, mean over replications
  std::vector<double> user_payoff;
  std::vector<ReplicationResult> replications;
  std::vector<SimEvent> log;

  bool conservation_ok() const;
};

std::string validate_sim_config(const SimConfig& c);

/// Runs every replication (in parallel) and merges them in index order.
SimReport run(const SimConfig& c);

/// One replication with the given replication index.
ReplicationResult run_replication(const SimConfig& c, int index, std::vector<SimEvent>* log);

void write_event_log(std::ostream& os, const std::vector<SimEvent>& log);

/// Replays a log and checks that no pooled transaction had a strictly higher
/// fee-per-byte than the one included. Returns the first offending block id
/// or -1.
std::int64_t audit_priority(const std::vector<SimEvent>& log);

struct WaitingCheck {
  UserType type = UserType::High;
  double analytic = 0.0;
  Estimate measured;
  bool pass = false;
  std::string note;
};

/// Simulates `profile` and compares each type's waiting rate with the
/// closed form. Unserved classes (infinite closed form) pass when their
/// transactions pile up uncollected.
std::vector<WaitingCheck> validate_waiting_rates(const SystemParams& p, const FeeMenu& menu,
                                         const StrategyProfile& profile, double tolerance = 0.02,
                                         std::uint64_t seed = 1, int replications = 10,
                                         double blocks = 1e5);

}  // namespace fwt
