#include <cmath>
#include <random>

#include "doctest.h"
#include "fwt/user_game.hpp"

using namespace fwt;

TEST_CASE("two-class waiting rate") {
  SystemParams p;
  p.n_users_high = 1;
  p.n_users_low = 1;
  p.n_miners = 1;
  const FeeMenu menu{2e-9, 1e-9};
  StrategyProfile s;
  s.rates.high = {1.0, 1.0};
  s.rates.low = {1.0, 1.0};
  CHECK(waiting_rate(UserType::High, s, menu, p) == doctest::Approx(1.0 / 13 + 15.0 / 143).epsilon(1e-12));
}

TEST_CASE("waiting rate branches") {
  SystemParams p;
  p.n_miners = 1;
  const double cs = p.storage_cost_per_byte;
  CHECK(waiting_rate(RatePair{0.0, 0.0}, ClassLoad{}, FeeMenu{0.9 * cs, 0.5 * cs}, p) == 0.0);
  CHECK(std::isinf(waiting_rate(RatePair{0.0, 0.1}, ClassLoad{}, FeeMenu{2 * cs, 0.5 * cs}, p)));
  CHECK(std::isinf(waiting_rate(RatePair{1.0, 0.0}, ClassLoad{20.0, 0.0}, FeeMenu{2 * cs, cs}, p)));
}

TEST_CASE("net utilities") {
  SystemParams p;
  auto nu = net_utilities(p, TaxVector{});
  CHECK(nu.h.high == p.utility_high);
  CHECK(nu.h.low == p.utility_low);
  CHECK(nu.bigger == UserType::High);

  p.utility_high = 1.0;
  p.utility_low = 1.0;
  p.n_users_high = 1;
  p.n_users_low = 1;
  TaxVector t;
  t.p_hl = 0.6;
  t.p_lh = 0.4;
  nu = net_utilities(p, t);
  CHECK(nu.h.high == doctest::Approx(0.4));
  CHECK(nu.h.low == doctest::Approx(0.6));
  CHECK(nu.bigger == UserType::Low);
}

TEST_CASE("no generation below threshold") {
  SystemParams p;
  p.utility_high = 1e-7;
  p.utility_low = 1e-7;
  const auto r = sne_rates(net_utilities(p, {}), 5e-6, p);
  CHECK(r.big == 0.0);
  CHECK(r.small == 0.0);
  CHECK(r.branch == SneBranch::NoneGenerate);
}

TEST_CASE("big type generates at least as much") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int checked = 0;
  for (int k = 0; k < 10000; ++k) {
    SystemParams p;
    p.n_users_high = 1 + static_cast<std::int64_t>(u(rng) * 300);
    p.n_users_low = 1 + static_cast<std::int64_t>(u(rng) * 300);
    p.impatience = std::pow(10.0, -6.0 + 4.0 * u(rng));
    p.utility_high = 3e-3 * u(rng);
    p.utility_low = 3e-3 * u(rng);
    const auto nu = net_utilities(p, {});
    const auto r = sne_rates(nu, 1e-5 * u(rng), p);
    const double cap = p.rate_cap();
    CHECK(r.small >= 0.0);
    CHECK(r.small <= r.big);
    CHECK(r.big <= cap * (1 + 1e-12));
    ++checked;
  }
  CHECK(checked == 10000);
}

TEST_CASE("very high fee gives the low-fee equilibrium") {
  const SystemParams p;
  const auto o = sne_select(net_utilities(p, {}), FeeMenu{1.0, p.system_cost_per_byte()}, p);
  CHECK(o.profile.kind == SneKind::LowFeeSNE);
}

TEST_CASE("payoff of idle users without tax") {
  SystemParams p;
  p.utility_high = 1e-8;
  p.utility_low = 1e-8;
  const auto o = solve_users(p, FeeMenu{1e-5, 5e-6}, TaxVector{});
  CHECK(o.profile.kind == SneKind::NoGeneration);
  REQUIRE(o.payoff.has_value());
  CHECK(o.payoff->high == 0.0);
  CHECK(o.payoff->low == 0.0);
  CHECK(best_response_check(o, FeeMenu{1e-5, 5e-6}, TaxVector{}, p).ok);
}

TEST_CASE("best response") {
  const SystemParams p = SystemParams::calibrated();
  const FeeMenu menu{1.19778e-5, 5e-6};
  SneOutcome o = solve_users(p, menu, TaxVector{});
  CHECK(best_response_check(o, menu, TaxVector{}, p).ok);

  // Doubling the interior rates (type L here; type H sits at the cap) leaves
  // room to gain by cutting back.
  REQUIRE(o.profile.rates.low.low_fee > 0.0);
  SneOutcome twice = o;
  twice.profile.rates.low.low_fee *= 1.4;
  CHECK_FALSE(best_response_check(twice, menu, TaxVector{}, p).ok);
}
