#include "fwt/miner_game.hpp"

#include <algorithm>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>

namespace fwt {

namespace {

bool pool_order(const PendingTx& a, const PendingTx& b) {
  return std::tie(a.gen_time, a.user_id, a.tx_index) < std::tie(b.gen_time, b.user_id, b.tx_index);
}

void check_selection(const MinerSelection& sel, const TxPool& pool, const SystemParams& p) {
  if (static_cast<std::int64_t>(sel.picks.size()) != p.n_miners)
    throw std::invalid_argument("selection must hold one entry per miner");
  for (const auto& pick : sel.picks) {
    if (pick && *pick >= pool.size()) throw std::out_of_range("selected tx is not in the pool");
  }
}

double picked_size(const std::optional<std::size_t>& pick, const TxPool& pool) {
  return pick ? pool[*pick].size_bytes : 0.0;
}

double picked_fee(const std::optional<std::size_t>& pick, const TxPool& pool) {
  return pick ? pool[*pick].size_bytes * pool[*pick].fee_per_byte : 0.0;
}

}  // namespace

bool selected_before(const PendingTx& a, const PendingTx& b) {
  if (a.fee_per_byte != b.fee_per_byte) return a.fee_per_byte > b.fee_per_byte;
  return pool_order(a, b);
}

TxPool::TxPool(std::vector<PendingTx> txs) {
  for (const auto& tx : txs) add(tx);
}

void TxPool::add(const PendingTx& tx) {
  if (!(tx.size_bytes > 0.0)) throw std::invalid_argument("tx size must be positive");
  if (!(tx.fee_per_byte >= 0.0)) throw std::invalid_argument("fee_per_byte must be nonnegative");
  if (!(tx.gen_time >= 0.0)) throw std::invalid_argument("gen_time must be nonnegative");
  for (const auto& t : txs_) {
    if (t.user_id == tx.user_id && t.tx_index == tx.tx_index)
      throw std::invalid_argument("duplicate (user_id, tx_index) in pool");
  }
  txs_.insert(std::upper_bound(txs_.begin(), txs_.end(), tx, pool_order), tx);
}

void TxPool::write_csv(std::ostream& os) const {
  os << "user_id,tx_index,size_bytes,fee_per_byte,gen_time\n";
  os << std::setprecision(17);
  for (const auto& t : txs_) {
    os << t.user_id << ',' << t.tx_index << ',' << t.size_bytes << ',' << t.fee_per_byte << ','
       << t.gen_time << '\n';
  }
}

TxPool TxPool::read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("empty pool csv");
  if (line.rfind("user_id,tx_index,size_bytes,fee_per_byte,gen_time", 0) != 0)
    throw std::runtime_error("unexpected pool csv header: " + line);
  TxPool pool;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    std::istringstream ls(line);
    PendingTx t;
    char c1, c2, c3, c4;
    if (!(ls >> t.user_id >> c1 >> t.tx_index >> c2 >> t.size_bytes >> c3 >> t.fee_per_byte >> c4 >>
          t.gen_time) ||
        c1 != ',' || c2 != ',' || c3 != ',' || c4 != ',') {
      throw std::runtime_error("malformed pool csv line " + std::to_string(lineno));
    }
    pool.add(t);
  }
  return pool;
}

double storage_cost(const MinerSelection& sel, const TxPool& pool, const SystemParams& p) {
  check_selection(sel, pool, p);
  double total = 0.0;
  for (std::size_t j = 0; j < sel.picks.size(); ++j) {
    total += p.alpha(static_cast<std::int64_t>(j)) * picked_size(sel.picks[j], pool);
  }
  return total * p.storage_cost_per_byte;
}

double miner_payoff(std::int64_t miner, const MinerSelection& sel, const TxPool& pool,
                    const SystemParams& p) {
  const double cost = storage_cost(sel, pool, p);
  const auto m = static_cast<std::size_t>(miner);
  return p.alpha(miner) * picked_fee(sel.picks.at(m), pool) - cost;
}

std::optional<std::size_t> equilibrium_pick(const TxPool& pool, double storage_cost_per_byte) {
  if (pool.empty()) return std::nullopt;
  std::size_t best = 0;
  for (std::size_t i = 1; i < pool.size(); ++i) {
    if (selected_before(pool[i], pool[best])) best = i;
  }
  if (pool[best].fee_per_byte >= storage_cost_per_byte) return best;
  return std::nullopt;
}

MinerSelection equilibrium_selection(const TxPool& pool, const SystemParams& p) {
  return MinerSelection::uniform(p.n_miners, equilibrium_pick(pool, p.storage_cost_per_byte));
}

MinerNashReport check_miner_nash(const MinerSelection& sel, const TxPool& pool,
                                 const SystemParams& p, double eps, DeviationSet set) {
  check_selection(sel, pool, p);
  const double cs = p.storage_cost_per_byte;

  std::vector<std::size_t> alternatives;
  if (!pool.empty()) {
    double top = pool[0].fee_per_byte;
    for (const auto& t : pool.txs()) top = std::max(top, t.fee_per_byte);
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (set == DeviationSet::FullPool || pool[i].fee_per_byte == top) alternatives.push_back(i);
    }
  }

  // Switching only moves miner m's own alpha-weighted term of the storage
  // cost, so the gain is alpha_m * [s'(rho' - C_s) - s(rho - C_s)].
  auto net = [&](const std::optional<std::size_t>& pick) {
    if (!pick) return 0.0;
    const auto& t = pool[*pick];
    return t.size_bytes * t.fee_per_byte - t.size_bytes * cs;
  };

  for (std::size_t m = 0; m < sel.picks.size(); ++m) {
    const double a = p.alpha(static_cast<std::int64_t>(m));
    const double cur = net(sel.picks[m]);
    auto consider = [&](const std::optional<std::size_t>& dev) -> std::optional<MinerNashReport> {
      const double gain = a * (net(dev) - cur);
      if (gain > eps) return MinerNashReport{false, static_cast<std::int64_t>(m), dev, gain};
      return std::nullopt;
    };
    if (auto r = consider(std::nullopt)) return *r;
    for (std::size_t i : alternatives) {
      if (auto r = consider(i)) return *r;
    }
  }
  return {};
}

}  // namespace fwt
