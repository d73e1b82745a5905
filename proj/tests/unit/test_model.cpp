#include <sstream>

#include "doctest.h"
#include "fwt/config.hpp"
#include "fwt/model.hpp"

using namespace fwt;

TEST_CASE("defaults validate") {
  const SystemParams p = SystemParams::calibrated();
  CHECK(validate_params(p).ok());
  CHECK(p.system_cost_per_byte() == doctest::Approx(5e-6));
  CHECK(p.alpha(0) == doctest::Approx(1e-4));
}

TEST_CASE("validation messages") {
  SystemParams p;
  p.block_rate = 0.0;
  auto v = validate_params(p);
  REQUIRE_FALSE(v.ok());
  CHECK(v.joined().find("block_rate must be positive") != std::string::npos);

  SystemParams q;
  q.n_miners = 2;
  q.mining_power = {0.4, 0.5};
  v = validate_params(q);
  REQUIRE_FALSE(v.ok());
  CHECK(v.joined().find("mining power must sum to 1") != std::string::npos);
}

TEST_CASE("rate constraints") {
  const SystemParams p;
  CHECK(validate_rates({0.05, 0.025}, p).ok());
  CHECK_FALSE(validate_rates({0.05, 0.05}, p).ok());
  CHECK_FALSE(validate_rates({-1e-3, 0.0}, p).ok());
}

TEST_CASE("config round trip") {
  SystemParams p = SystemParams::calibrated();
  p.impatience = 1.2345678901234567e-4;
  p.utility_low = 3.3e-4;
  std::stringstream ss;
  write_config(ss, p);
  const SystemParams q = read_config(ss);
  CHECK(q.n_users_high == p.n_users_high);
  CHECK(q.n_miners == p.n_miners);
  CHECK(q.impatience == p.impatience);
  CHECK(q.utility_low == p.utility_low);
  CHECK(q.storage_cost_per_byte == p.storage_cost_per_byte);
  CHECK(q.mining_power == p.mining_power);

  SystemParams r;
  r.n_miners = 3;
  r.mining_power = {0.2, 0.3, 0.5};
  std::stringstream s2;
  write_config(s2, r);
  CHECK(read_config(s2).mining_power == r.mining_power);
}

TEST_CASE("config rejects unknown keys") {
  SystemParams p;
  CHECK_THROWS_AS(apply_param(p, "no_such_key=1"), std::invalid_argument);
  CHECK_THROWS_AS(apply_param(p, "impatience=abc"), std::invalid_argument);
  apply_param(p, "impatience=1e-4");
  CHECK(p.impatience == 1e-4);
}
