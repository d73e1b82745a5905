#pragma once

#include <optional>

#include "fwt/model.hpp"
#include "fwt/user_game.hpp"

namespace fwt {

/// Fee market without waiting taxes. Users compete for queue priority with
/// their fee; miners accept any fee at or above one miner's storage cost.
///
/// The clearing fee-per-byte is the lowest grid fee that covers the priority
/// price c + (gamma / s) * O / (mu - O)^2, where O is the load of other users
/// seen by an average transaction and both types generate at their
/// equilibrium rates for that fee. That price is what the marginal
/// transaction at the back of the queue would pay to move to the front.
struct ExistingOutcome {
  SneOutcome outcome;  // single fee, carried in the high slot of `menu`
  FeeMenu menu;
  double avg_fee_per_byte = 0.0;
  double acceptance_cost = 0.0;
  std::size_t grid_index = 0;
  std::size_t grid_points = 0;
  int iterations = 0;
  bool converged = true;
  double welfare = 0.0;
  PerType<double> payoff;
};

struct ExistingOptions {
  int fee_grid = 200;
  /// Acceptance threshold per byte. Defaults to C_s; with heterogeneous
  /// costs the cheapest miners set it.
  std::optional<double> acceptance_cost;
  /// Network storage cost per byte used for welfare. Defaults to M * C_s.
  std::optional<double> system_cost_per_byte;
};

ExistingOutcome existing_equilibrium(const SystemParams& p, const ExistingOptions& opt = {});

ExistingOutcome existing_equilibrium_hetero(const SystemParams& p, const HeteroCostParams& hc,
                                            int fee_grid = 200);

}  // namespace fwt
