#include <cmath>

#include "doctest.h"
#include "fwt/baseline_existing.hpp"
#include "fwt/harness.hpp"
#include "fwt/mechanism.hpp"

using namespace fwt;

TEST_CASE("taxed regime closed form at the defaults") {
  const SystemParams p = SystemParams::calibrated();
  const Mechanism m = optimal_mechanism(p);
  CHECK(m.regime == 2);
  CHECK(m.menu.rho_high == doctest::Approx(1.8e-3 / 150 - 5e-5 / 2250).epsilon(1e-12));
  CHECK(m.menu.rho_high == doctest::Approx(1.19778e-5).epsilon(1e-5));
  CHECK(m.menu.rho_low == doctest::Approx(5e-6));
  CHECK(m.g1 == doctest::Approx(0.075));
  CHECK(m.g2 == doctest::Approx(0.075 - 0.01 * std::sqrt(5.0)).epsilon(1e-12));
}

TEST_CASE("untaxed regime") {
  SystemParams p = SystemParams::calibrated();
  p.utility_high = 7e-4;
  p.utility_low = 5e-4;
  const Mechanism m = optimal_mechanism(p);
  CHECK(m.regime == 1);
  CHECK(m.row_sums.high == 0.0);
  CHECK(m.row_sums.low == 0.0);
  CHECK(m.menu.rho_high == doctest::Approx(5e-6 + p.impatience / (150 * 15)));
  CHECK(m.menu.rho_low == doctest::Approx(5e-6));
}

TEST_CASE("hetero costs") {
  const SystemParams p = SystemParams::calibrated();
  const auto same = optimal_mechanism_hetero(p, HeteroCostParams::from_ratio(5e-10, 1.0));
  const auto base = optimal_mechanism(p);
  CHECK(same.menu.rho_high == base.menu.rho_high);
  CHECK(same.menu.rho_low == base.menu.rho_low);
  CHECK(same.row_sums.high == base.row_sums.high);
  const auto ten = optimal_mechanism_hetero(p, HeteroCostParams::from_ratio(5e-10, 10.0));
  CHECK(ten.menu.rho_low == doctest::Approx(2.75e-5));
}

TEST_CASE("sufficient fee") {
  SystemParams p = SystemParams::calibrated();
  const Mechanism m = optimal_mechanism(p);
  const SneOutcome o = solve_users(p, m.menu, m.tax);
  CHECK(o.profile.kind == SneKind::LowFeeSNE);
  const auto r = sufficient_fee_check(o, m.menu, p);
  CHECK(r.ok);
  CHECK(*r.avg_fee.high == p.system_cost_per_byte());

  const FeeMenu cheap{1e-5, p.storage_cost_per_byte};
  const SneOutcome c = solve_users(p, cheap, {});
  CHECK(c.profile.kind == SneKind::LowFeeSNE);
  CHECK_FALSE(sufficient_fee_check(c, cheap, p).ok);

  SneOutcome none;
  CHECK(sufficient_fee_check(none, cheap, p).ok);
  CHECK(social_welfare(none, cheap, {}, p).total == 0.0);
}

TEST_CASE("fairness split equalizes payoffs") {
  const SystemParams p = SystemParams::calibrated();
  const Mechanism m = optimal_mechanism(p);
  CHECK_FALSE(m.split_fell_back);
  const SneOutcome o = solve_users(p, m.menu, m.tax);
  CHECK(jain_index(o.payoff->high, p.n_users_high, o.payoff->low, p.n_users_low) ==
        doctest::Approx(1.0).epsilon(1e-9));
  CHECK(m.tax.row_sum(UserType::High, p) == doctest::Approx(m.row_sums.high).epsilon(1e-12));
  CHECK(m.tax.row_sum(UserType::Low, p) == doctest::Approx(m.row_sums.low).epsilon(1e-12));
}

TEST_CASE("welfare ignores how row sums are split") {
  const SystemParams p = SystemParams::calibrated();
  const Mechanism fair = optimal_mechanism(p, TaxSplit::Fairness);
  const Mechanism uni = optimal_mechanism(p, TaxSplit::Uniform);
  const SneOutcome o = solve_users(p, fair.menu, fair.tax);
  const double a = social_welfare(o, fair.menu, fair.tax, p).total;
  const double b = social_welfare(o, uni.menu, uni.tax, p).total;
  CHECK(a == doctest::Approx(b).epsilon(1e-12));
  CHECK(a == doctest::Approx(welfare_from_rates(o.profile, o.waiting, p)).epsilon(1e-12));
}

TEST_CASE("oracle") {
  SystemParams p = SystemParams::calibrated();
  const SneOutcome o = solve_users(p, optimal_mechanism(p).menu, optimal_mechanism(p).tax);
  const double w = social_welfare(o, optimal_mechanism(p).menu, optimal_mechanism(p).tax, p).total;
  const auto orc = unconstrained_optimum_oracle(p, 30);
  CHECK(orc.welfare <= w * 1.01);
  CHECK(orc.welfare >= w * 0.99);

  p.utility_high = 1e-9;
  p.utility_low = 1e-9;
  CHECK(unconstrained_optimum_oracle(p, 10).welfare == 0.0);
}

TEST_CASE("tax comparison") {
  SystemParams p = SystemParams::calibrated();
  p.impatience = 1e-3;
  p.utility_high = 3e-3;
  p.utility_low = 3e-3;
  const auto c = tax_comparison(p);
  CHECK(c.delta >= 0.0);
  CHECK(c.predicted_high_lower == c.observed_high_lower);

  p.utility_high = 7e-4;
  p.utility_low = 5e-4;
  CHECK_THROWS_AS(tax_comparison(p), std::domain_error);
}

TEST_CASE("existing surrogate directions") {
  SystemParams p = SystemParams::calibrated();
  double prev = 1e300;
  for (double g : {1e-5, 1e-4, 1e-3}) {
    p.impatience = g;
    const double fee = existing_equilibrium(p).avg_fee_per_byte;
    CHECK(fee <= prev);
    prev = fee;
  }

  SystemParams one = SystemParams::calibrated();
  one.n_users_high = 1;
  one.n_users_low = 1;
  one.utility_low = 0.0;
  CHECK(existing_equilibrium(one).avg_fee_per_byte == doctest::Approx(one.storage_cost_per_byte));
}
