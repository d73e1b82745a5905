#include "fwt/sim.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <future>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <queue>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include "fwt/miner_game.hpp"
#include "fwt/user_game.hpp"

namespace fwt {

namespace {

constexpr double kAtto = 1e18;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Stream 0 drives blocks, 1 draws winners, 2 + 2u + c is user u's class-c
// arrivals. Fixed ids keep existing streams intact when users are added.
std::uint64_t stream_seed(std::uint64_t root, int replication, std::uint64_t stream) {
  const std::uint64_t rep = splitmix64(root ^ splitmix64(static_cast<std::uint64_t>(replication)));
  return splitmix64(rep + 0x632be59bd9b4e019ULL * (stream + 1));
}

class Stream {
 public:
  explicit Stream(std::uint64_t seed) : gen_(seed) {}
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

 private:
  std::mt19937_64 gen_;
};

struct Pooled {
  PendingTx tx;
  int cls = 0;  // 0 high fee, 1 low fee
};

struct PoolOrder {
  bool operator()(const Pooled& a, const Pooled& b) const { return selected_before(a.tx, b.tx); }
};

std::int64_t to_atto(double usd) { return std::llround(usd * kAtto); }

std::vector<RatePair> user_rates(const SimConfig& c) {
  const SystemParams& p = c.params;
  if (c.per_user_rates) return *c.per_user_rates;
  std::vector<RatePair> r(static_cast<std::size_t>(p.n_users()));
  for (std::int64_t u = 0; u < p.n_users(); ++u)
    r[static_cast<std::size_t>(u)] = c.profile.rates[u < p.n_users_high ? UserType::High : UserType::Low];
  return r;
}

Estimate estimate(const std::vector<double>& xs) {
  Estimate e;
  e.n = static_cast<int>(xs.size());
  if (xs.empty()) return e;
  double sum = 0.0;
  for (double x : xs) sum += x;
  e.mean = sum / e.n;
  if (e.n < 2) {
    e.half_width = std::numeric_limits<double>::infinity();
    return e;
  }
  double ss = 0.0;
  for (double x : xs) ss += (x - e.mean) * (x - e.mean);
  const double sd = std::sqrt(ss / (e.n - 1));
  boost::math::students_t dist(e.n - 1);
  e.half_width = boost::math::quantile(dist, 0.975) * sd / std::sqrt(static_cast<double>(e.n));
  return e;
}

}  // namespace

bool SimReport::conservation_ok() const {
  for (const auto& r : replications) {
    if (!r.ledger.fees_balance() || !r.ledger.taxes_balance()) return false;
  }
  return true;
}

std::string validate_sim_config(const SimConfig& c) {
  std::ostringstream err;
  const auto v = validate_params(c.params);
  if (!v.ok()) err << v.joined() << "; ";
  if (!(c.horizon > 0.0)) err << "horizon must be positive; ";
  if (!(c.warmup >= 0.0 && c.warmup <= 0.5)) err << "warmup must lie in [0, 0.5]; ";
  if (c.replications < 1) err << "replications must be at least 1; ";
  if (c.per_user_rates &&
      static_cast<std::int64_t>(c.per_user_rates->size()) != c.params.n_users())
    err << "per-user rates need one entry per user; ";
  for (const auto& r : user_rates(c)) {
    if (r.high_fee < 0.0 || r.low_fee < 0.0) {
      err << "rates must be nonnegative; ";
      break;
    }
  }
  return err.str();
}

ReplicationResult run_replication(const SimConfig& c, int index, std::vector<SimEvent>* log) {
  const SystemParams& p = c.params;
  const auto n = static_cast<std::size_t>(p.n_users());
  const std::vector<RatePair> rates = user_rates(c);
  const double t0 = c.warmup * c.horizon;
  const double window = c.horizon - t0;
  const double sbar = p.mean_tx_size;
  const double fee_of[2] = {c.menu.rho_high, c.menu.rho_low};
  auto type_of = [&](std::size_t u) {
    return static_cast<std::int64_t>(u) < p.n_users_high ? UserType::High : UserType::Low;
  };

  Stream blocks(stream_seed(c.seed, index, 0));
  Stream winners(stream_seed(c.seed, index, 1));
  std::vector<Stream> arrivals;
  arrivals.reserve(2 * n);
  for (std::size_t s = 0; s < 2 * n; ++s) arrivals.emplace_back(stream_seed(c.seed, index, 2 + s));

  // Pending arrivals keyed by (time, stream); stream 2n is the block clock.
  using Next = std::pair<double, std::size_t>;
  std::priority_queue<Next, std::vector<Next>, std::greater<>> events;
  auto rate_of = [&](std::size_t s) {
    return s % 2 == 0 ? rates[s / 2].high_fee : rates[s / 2].low_fee;
  };
  for (std::size_t s = 0; s < 2 * n; ++s) {
    if (rate_of(s) > 0.0) events.push({arrivals[s].exponential(rate_of(s)), s});
  }
  events.push({blocks.exponential(p.block_rate), 2 * n});

  std::vector<double> cum_alpha;
  if (!p.uniform_power()) {
    double acc = 0.0;
    for (double a : p.mining_power) cum_alpha.push_back(acc += a);
  }
  auto draw_winner = [&]() -> std::int64_t {
    const double u = winners.uniform();
    if (cum_alpha.empty())
      return std::min<std::int64_t>(p.n_miners - 1, static_cast<std::int64_t>(u * static_cast<double>(p.n_miners)));
    const auto it = std::upper_bound(cum_alpha.begin(), cum_alpha.end(), u);
    return std::min<std::int64_t>(p.n_miners - 1, it - cum_alpha.begin());
  };

  ReplicationResult r;
  r.waiting_rate.assign(n, 0.0);
  r.censored_waiting_rate.assign(n, 0.0);
  r.payoff.assign(n, 0.0);

  std::set<Pooled, PoolOrder> pool;
  std::vector<std::int64_t> next_index(n, 0);
  std::vector<std::int64_t> in_system(n, 0);
  std::vector<double> last_change(n, 0.0);
  std::vector<double> area(n, 0.0);
  std::vector<double> window_gain(n, 0.0);          // utility net of fee and outflow
  std::vector<std::int64_t> window_included(n, 0);
  PerType<std::int64_t> window_by_type;
  std::vector<std::int64_t> included_total(n, 0);
  PerType<std::int64_t> included_by_type;
  std::map<std::int64_t, __int128> sparse_credit;  // large M without a dense vector
  double miner_window = 0.0;

  auto accrue = [&](std::size_t u, double t) {
    const double from = std::max(last_change[u], t0);
    if (t > from) area[u] += static_cast<double>(in_system[u]) * (t - from);
    last_change[u] = t;
  };

  const PerType<std::int64_t> tax_out_atto{
      (p.n_users_high - 1) * to_atto(c.tax.p_hh) + p.n_users_low * to_atto(c.tax.p_hl),
      p.n_users_high * to_atto(c.tax.p_lh) + (p.n_users_low - 1) * to_atto(c.tax.p_ll)};
  std::int64_t block_id = 0;

  while (!events.empty()) {
    const auto [t, s] = events.top();
    if (t > c.horizon) break;
    events.pop();

    if (s == 2 * n) {
      ++r.blocks;
      const std::int64_t winner = draw_winner();
      const bool take = !pool.empty() && pool.begin()->tx.fee_per_byte >= p.storage_cost_per_byte;
      if (take) {
        const Pooled top = *pool.begin();
        pool.erase(pool.begin());
        const auto u = static_cast<std::size_t>(top.tx.user_id);
        const UserType ut = type_of(u);
        accrue(u, t);
        --in_system[u];

        const std::int64_t fee = to_atto(top.tx.size_bytes * top.tx.fee_per_byte);
        r.ledger.fees_paid += fee;
        sparse_credit[winner] += fee;
        r.ledger.tax_out += tax_out_atto[ut];
        ++included_total[u];
        ++included_by_type[ut];
        (top.cls == 0 ? r.included_high : r.included_low) += 1;

        if (t >= t0) {
          window_gain[u] += p.utility(ut) - top.tx.size_bytes * top.tx.fee_per_byte -
                            c.tax.row_sum(ut, p);
          ++window_included[u];
          ++window_by_type[ut];
          miner_window += top.tx.size_bytes *
                          (top.tx.fee_per_byte - static_cast<double>(p.n_miners) * p.storage_cost_per_byte);
        }
        if (log)
          log->push_back({t, SimEvent::Include, top.tx.user_id, top.tx.tx_index,
                          top.tx.fee_per_byte, block_id, winner});
      } else {
        ++r.empty_blocks;
        if (log) log->push_back({t, SimEvent::EmptyBlock, -1, -1, 0.0, block_id, winner});
      }
      ++block_id;
      events.push({t + blocks.exponential(p.block_rate), s});
      continue;
    }

    const std::size_t u = s / 2;
    const int cls = static_cast<int>(s % 2);
    Pooled tx;
    tx.tx = {static_cast<std::int64_t>(u), next_index[u]++, sbar, fee_of[cls], t};
    tx.cls = cls;
    pool.insert(tx);
    accrue(u, t);
    ++in_system[u];
    (cls == 0 ? r.generated_high : r.generated_low) += 1;
    if (log) log->push_back({t, SimEvent::Generate, tx.tx.user_id, tx.tx.tx_index, tx.tx.fee_per_byte, -1, -1});
    events.push({t + arrivals[s].exponential(rate_of(s)), s});
  }

  for (std::size_t u = 0; u < n; ++u) accrue(u, c.horizon);
  for (const auto& tx : pool) {
    const auto u = static_cast<std::size_t>(tx.tx.user_id);
    r.censored_waiting_rate[u] += c.horizon - std::max(tx.tx.gen_time, t0);
    (tx.cls == 0 ? r.censored_high : r.censored_low) += 1;
  }

  for (const auto& [m, v] : sparse_credit) r.ledger.fees_received += v;

  for (std::size_t u = 0; u < n; ++u) {
    const UserType ut = type_of(u);
    const UserType ot = other(ut);
    // Every included tx of another user pays this user the entry for the
    // (payer type, this type) pair.
    const auto same_total = included_by_type[ut] - included_total[u];
    r.ledger.tax_in += static_cast<__int128>(same_total) * to_atto(c.tax.rate(ut, ut)) +
                       static_cast<__int128>(included_by_type[ot]) * to_atto(c.tax.rate(ot, ut));
    const double inflow =
        static_cast<double>(window_by_type[ut] - window_included[u]) * c.tax.rate(ut, ut) +
        static_cast<double>(window_by_type[ot]) * c.tax.rate(ot, ut);

    r.waiting_rate[u] = area[u] / window;
    r.censored_waiting_rate[u] /= window;
    r.payoff[u] = (window_gain[u] + inflow - p.impatience * area[u]) / window;
    r.user_sum += r.payoff[u];
  }
  r.miner_sum = miner_window / window;
  r.welfare = r.user_sum + r.miner_sum;
  return r;
}

SimReport run(const SimConfig& c) {
  const std::string err = validate_sim_config(c);
  if (!err.empty()) throw std::invalid_argument(err);

  std::vector<std::future<ReplicationResult>> jobs;
  SimReport rep;
  for (int i = 0; i < c.replications; ++i) {
    std::vector<SimEvent>* log = (i == 0 && c.record_log) ? &rep.log : nullptr;
    jobs.push_back(std::async(std::launch::async, run_replication, std::cref(c), i, log));
  }
  for (auto& j : jobs) rep.replications.push_back(j.get());

  const SystemParams& p = c.params;
  const auto n = static_cast<std::size_t>(p.n_users());
  rep.user_waiting_rate.assign(n, 0.0);
  rep.user_payoff.assign(n, 0.0);
  PerType<std::vector<double>> wait, cens, pay;
  std::vector<double> welfare;
  for (const auto& r : rep.replications) {
    PerType<double> w, ce, py;
    for (std::size_t u = 0; u < n; ++u) {
      const UserType t = static_cast<std::int64_t>(u) < p.n_users_high ? UserType::High : UserType::Low;
      w[t] += r.waiting_rate[u] / static_cast<double>(p.count(t));
      ce[t] += r.censored_waiting_rate[u] / static_cast<double>(p.count(t));
      py[t] += r.payoff[u] / static_cast<double>(p.count(t));
      rep.user_waiting_rate[u] += r.waiting_rate[u] / c.replications;
      rep.user_payoff[u] += r.payoff[u] / c.replications;
    }
    for (UserType t : {UserType::High, UserType::Low}) {
      wait[t].push_back(w[t]);
      cens[t].push_back(ce[t]);
      pay[t].push_back(py[t]);
    }
    welfare.push_back(r.welfare);
  }
  for (UserType t : {UserType::High, UserType::Low}) {
    rep.waiting_rate[t] = estimate(wait[t]);
    rep.censored_waiting_rate[t] = estimate(cens[t]);
    rep.payoff[t] = estimate(pay[t]);
  }
  rep.welfare = estimate(welfare);
  return rep;
}

void write_event_log(std::ostream& os, const std::vector<SimEvent>& log) {
  os << "time,event_type,user_id,tx_index,fee_per_byte,block_id,winner_miner\n";
  os << std::setprecision(17);
  for (const auto& e : log) {
    const char* kind = e.kind == SimEvent::Generate ? "generate"
                       : e.kind == SimEvent::Include ? "include"
                                                     : "empty_block";
    os << e.time << ',' << kind << ',' << e.user_id << ',' << e.tx_index << ',' << e.fee_per_byte
       << ',' << e.block_id << ',' << e.winner_miner << '\n';
  }
}

std::int64_t audit_priority(const std::vector<SimEvent>& log) {
  std::map<std::pair<std::int64_t, std::int64_t>, double> pooled;
  std::multiset<double> fees;
  for (const auto& e : log) {
    switch (e.kind) {
      case SimEvent::Generate:
        pooled[{e.user_id, e.tx_index}] = e.fee_per_byte;
        fees.insert(e.fee_per_byte);
        break;
      case SimEvent::Include: {
        auto it = pooled.find({e.user_id, e.tx_index});
        if (it == pooled.end()) return e.block_id;
        if (!fees.empty() && *fees.rbegin() > it->second) return e.block_id;
        fees.erase(fees.find(it->second));
        pooled.erase(it);
        break;
      }
      case SimEvent::EmptyBlock:
        break;
    }
  }
  return -1;
}

std::vector<WaitingCheck> validate_waiting_rates(const SystemParams& p, const FeeMenu& menu,
                                         const StrategyProfile& profile, double tolerance,
                                         std::uint64_t seed, int replications, double blocks) {
  SimConfig c;
  c.params = p;
  c.menu = menu;
  c.profile = profile;
  c.seed = seed;
  c.replications = replications;
  c.horizon = blocks / p.block_rate / (1.0 - c.warmup);
  const SimReport rep = run(c);

  std::vector<WaitingCheck> out;
  for (UserType t : {UserType::High, UserType::Low}) {
    WaitingCheck ch;
    ch.type = t;
    ch.analytic = waiting_rate(t, profile, menu, p);
    ch.measured = rep.waiting_rate[t];
    const RatePair& r = profile.rates[t];
    if (r.total() <= 0.0) {
      ch.pass = ch.measured.mean == 0.0;
      ch.note = "no generation";
    } else if (std::isinf(ch.analytic)) {
      // Uncollected transactions should pile up at their generation rate.
      double expected = 0.0;
      if (menu.rho_high < p.storage_cost_per_byte) expected += r.high_fee;
      if (menu.rho_low < p.storage_cost_per_byte) expected += r.low_fee;
      expected *= static_cast<double>(p.count(t)) * c.horizon;
      std::int64_t censored = 0;
      for (const auto& rr : rep.replications) {
        censored += menu.rho_high < p.storage_cost_per_byte ? rr.censored_high : 0;
        censored += menu.rho_low < p.storage_cost_per_byte ? rr.censored_low : 0;
      }
      const double mean_censored = static_cast<double>(censored) / replications;
      ch.pass = expected > 0.0 && mean_censored >= 0.9 * expected;
      ch.note = "unserved class: " + std::to_string(mean_censored) + " pooled vs " +
                std::to_string(expected) + " expected";
    } else {
      const double rel = std::abs(ch.measured.mean - ch.analytic) / ch.analytic;
      ch.pass = ch.measured.covers(ch.analytic) || rel <= tolerance;
      std::ostringstream os;
      os << "relative error " << rel;
      ch.note = os.str();
    }
    out.push_back(ch);
  }
  return out;
}

}  // namespace fwt
