#include <random>

#include "doctest.h"
#include "fwt/miner_game.hpp"

using namespace fwt;

namespace {

SystemParams two_miners(double a0, double a1) {
  SystemParams p;
  p.n_miners = 2;
  p.mining_power = {a0, a1};
  return p;
}

PendingTx tx(std::int64_t id, double size, double fee, double t) {
  return {id, 0, size, fee, t};
}

}  // namespace

TEST_CASE("storage cost") {
  const double cs = 5e-10;
  TxPool pool({tx(0, 150.0, 1e-9, 0.0), tx(1, 100.0, 1e-9, 1.0)});
  {
    const SystemParams p = two_miners(0.5, 0.5);
    CHECK(storage_cost(MinerSelection::uniform(2, std::nullopt), pool, p) == 0.0);
    CHECK(storage_cost(MinerSelection::uniform(2, 0), pool, p) == doctest::Approx(150.0 * cs));
  }
  {
    const SystemParams p = two_miners(0.3, 0.7);
    MinerSelection sel{{std::nullopt, 1}};
    CHECK(storage_cost(sel, pool, p) == doctest::Approx(0.7 * 100.0 * cs));
  }
}

TEST_CASE("empty blocks pay nothing") {
  const SystemParams p = two_miners(0.5, 0.5);
  TxPool pool({tx(0, 150.0, 1e-9, 0.0)});
  const auto sel = MinerSelection::uniform(2, std::nullopt);
  CHECK(miner_payoff(0, sel, pool, p) == 0.0);
}

TEST_CASE("equilibrium pick") {
  const double cs = 5e-10;
  CHECK_FALSE(equilibrium_pick(TxPool{}, cs).has_value());
  TxPool tie({tx(0, 150.0, 2 * cs, 5.0), tx(1, 150.0, 2 * cs, 3.0)});
  REQUIRE(equilibrium_pick(tie, cs).has_value());
  CHECK(tie[*equilibrium_pick(tie, cs)].user_id == 1);
  CHECK_FALSE(equilibrium_pick(TxPool({tx(0, 150.0, 0.5 * cs, 0.0)}), cs).has_value());
  // Accepted at one miner's cost even though the network cost is far higher.
  CHECK(equilibrium_pick(TxPool({tx(0, 150.0, cs, 0.0)}), cs).has_value());
}

TEST_CASE("nash certificate") {
  const double cs = 5e-10;
  SystemParams p = two_miners(0.5, 0.5);
  TxPool pool({tx(0, 150.0, 0.5 * cs, 0.0)});
  MinerSelection bad{{0, std::nullopt}};
  const auto rep = check_miner_nash(bad, pool, p, 0.0);
  CHECK_FALSE(rep.ok);
  CHECK(rep.miner == 0);
  CHECK(rep.gain == doctest::Approx(0.5 * 150.0 * (cs - 0.5 * cs)));

  SystemParams one;
  one.n_miners = 1;
  TxPool best({tx(0, 150.0, 3 * cs, 0.0), tx(1, 150.0, 2 * cs, 0.0)});
  CHECK(check_miner_nash(equilibrium_selection(best, one), best, one, 0.0).ok);
}

TEST_CASE("random pools") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SystemParams p = two_miners(0.25, 0.75);
  for (int k = 0; k < 200; ++k) {
    TxPool pool;
    const int n = static_cast<int>(u(rng) * 20);
    for (int i = 0; i < n; ++i) pool.add(tx(i, 50.0 + 450.0 * u(rng), 1.5e-9 * u(rng), u(rng)));
    CHECK(check_miner_nash(equilibrium_selection(pool, p), pool, p, 0.0).ok);
  }
}
