#include <cmath>
#include <sstream>

#include "doctest.h"
#include "fwt/harness.hpp"
#include "fwt/sim.hpp"

using namespace fwt;

TEST_CASE("jain index") {
  CHECK(jain_index(std::vector<double>{3, 3, 3}) == doctest::Approx(1.0));
  CHECK(jain_index(std::vector<double>{1, 0}) == doctest::Approx(0.5));
  CHECK(std::isnan(jain_index(std::vector<double>{0, 0})));
  CHECK(jain_index(2.0, 3, 2.0, 5) == doctest::Approx(1.0));
  CHECK(jain_index(1.0, 1, 0.0, 1) == doctest::Approx(0.5));
}

TEST_CASE("sweep rows match solve") {
  const SystemParams base = SystemParams::calibrated();
  for (SweepAxis axis : {SweepAxis::Gamma, SweepAxis::RHigh, SweepAxis::NUsers}) {
    SweepOptions opt;
    opt.axis = axis;
    opt.steps = 5;
    const auto rows = sweep(base, opt);
    REQUIRE(rows.size() == 5);
    for (const auto& row : rows) {
      const SystemParams p = sweep_params(base, axis, row.value, opt.high_fraction);
      const SolveResult s = solve(p);
      CHECK(row.error.empty());
      CHECK(row.fwt_welfare == doctest::Approx(s.welfare.total).epsilon(1e-12));
      CHECK(row.fwt_sufficient == s.fee.ok);
    }
  }
}

TEST_CASE("sweep csv header") {
  std::ostringstream os;
  write_sweep_csv(os, {});
  CHECK(os.str().rfind("axis,value,fwt_avg_fee,", 0) == 0);
}

TEST_CASE("simulation is deterministic") {
  SimConfig c;
  c.params = SystemParams::calibrated();
  const SolveResult s = solve(c.params);
  c.menu = s.mechanism.menu;
  c.tax = s.mechanism.tax;
  c.profile = s.outcome.profile;
  c.horizon = 200.0;
  c.replications = 3;
  c.seed = 42;
  const SimReport a = run(c);
  const SimReport b = run(c);
  REQUIRE(a.replications.size() == b.replications.size());
  for (std::size_t i = 0; i < a.replications.size(); ++i) {
    CHECK(a.replications[i].waiting_rate == b.replications[i].waiting_rate);
    CHECK(a.replications[i].payoff == b.replications[i].payoff);
    CHECK(a.replications[i].blocks == b.replications[i].blocks);
  }
  CHECK(a.welfare.mean == b.welfare.mean);
  CHECK(a.conservation_ok());

  c.seed = 43;
  CHECK(run(c).welfare.mean != a.welfare.mean);
}

TEST_CASE("blocks respect fee priority") {
  SimConfig c;
  c.params.n_users_high = 1;
  c.params.n_users_low = 1;
  c.params.n_miners = 1;
  c.menu = {2e-9, 1e-9};
  c.profile.rates.high = {3.0, 2.0};
  c.profile.rates.low = {2.0, 3.0};
  c.horizon = 500.0;
  c.replications = 1;
  c.record_log = true;
  const SimReport r = run(c);
  CHECK_FALSE(r.log.empty());
  CHECK(audit_priority(r.log) == -1);

  std::ostringstream os;
  write_event_log(os, r.log);
  CHECK(os.str().rfind("time,event_type,user_id,tx_index,fee_per_byte,block_id,winner_miner", 0) == 0);
}

TEST_CASE("sim config validation") {
  SimConfig c;
  c.horizon = -1.0;
  CHECK_FALSE(validate_sim_config(c).empty());
}
