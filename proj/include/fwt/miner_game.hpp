#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "fwt/model.hpp"

namespace fwt {

struct PendingTx {
  std::int64_t user_id = 0;
  std::int64_t tx_index = 0;
  double size_bytes = 0.0;
  double fee_per_byte = 0.0;
  double gen_time = 0.0;
};

/// Selection order used by every miner: higher fee-per-byte first, then the
/// earliest generation time, then (user_id, tx_index).
bool selected_before(const PendingTx& a, const PendingTx& b);

/// Transactions waiting just before a block is found. Kept sorted by
/// (gen_time, user_id, tx_index); duplicate ids are rejected.
class TxPool {
 public:
  TxPool() = default;
  explicit TxPool(std::vector<PendingTx> txs);

  void add(const PendingTx& tx);
  bool empty() const { return txs_.empty(); }
  std::size_t size() const { return txs_.size(); }
  const PendingTx& operator[](std::size_t i) const { return txs_[i]; }
  const std::vector<PendingTx>& txs() const { return txs_; }

  void write_csv(std::ostream& os) const;
  static TxPool read_csv(std::istream& is);

 private:
  std::vector<PendingTx> txs_;
};

/// One entry per miner: an index into the pool, or nullopt for an empty block.
struct MinerSelection {
  std::vector<std::optional<std::size_t>> picks;

  static MinerSelection uniform(std::int64_t n_miners, std::optional<std::size_t> pick) {
    return {std::vector<std::optional<std::size_t>>(static_cast<std::size_t>(n_miners), pick)};
  }
};

/// Expected storage cost borne in this round. Every miner stores every block,
/// so the value is the same for all miners.
double storage_cost(const MinerSelection& sel, const TxPool& pool, const SystemParams& p);

double miner_payoff(std::int64_t miner, const MinerSelection& sel, const TxPool& pool,
                    const SystemParams& p);

/// Earliest highest-fee transaction if its fee covers one miner's storage
/// cost (closed inequality), otherwise nullopt.
std::optional<std::size_t> equilibrium_pick(const TxPool& pool, double storage_cost_per_byte);

MinerSelection equilibrium_selection(const TxPool& pool, const SystemParams& p);

struct MinerNashReport {
  bool ok = true;
  std::int64_t miner = -1;
  std::optional<std::size_t> deviation;  // nullopt = deviate to an empty block
  double gain = 0.0;
};

/// Alternatives a miner may deviate to.
///
/// `HighestFee` is the strategy space under the usual miner assumption that a
/// block carries either the highest fee-per-byte transaction or nothing.
/// `FullPool` admits every pooled transaction; with unequal sizes a larger,
/// slightly cheaper-per-byte transaction can pay a miner more than the
/// highest-fee one, so the equilibrium profile only survives this set when
/// sizes are equal.
enum class DeviationSet { HighestFee, FullPool };

/// Exhaustive unilateral-deviation check: every miner, every alternative in
/// the deviation set plus the empty block.
MinerNashReport check_miner_nash(const MinerSelection& sel, const TxPool& pool,
                                 const SystemParams& p, double eps,
                                 DeviationSet set = DeviationSet::HighestFee);

}  // namespace fwt
