// One line per acceptance criterion. Exit status is the number of red lines.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>

#include "fwt/harness.hpp"

using namespace fwt;

namespace {

int red = 0;

void line(int id, bool pass, const std::string& what) {
  std::printf("criterion %d: %s  %s\n", id, pass ? "PASS" : "FAIL", what.c_str());
  std::fflush(stdout);
  if (!pass) ++red;
}

std::string secs(double s) {
  char buf[32];
  std::snprintf(buf, sizeof buf, " [%.2fs]", s);
  return buf;
}

}  // namespace

int main() {
  const SystemParams base = SystemParams::calibrated();
  const std::uint64_t seed = 1;

  {
    const auto r = check_sufficient_fee(base, 20);
    line(1, r.pass && r.seconds < 10.0, r.summary + secs(r.seconds));
  }
  {
    const auto r = check_optimum(12, seed, 50, 0.01);
    const int c1 = r.data.value("regime1_draws", 0), c2 = r.data.value("regime2_draws", 0);
    line(2, r.pass && r.cases >= 10 && c1 > 0 && c2 > 0 && r.seconds < 300.0,
         r.summary + secs(r.seconds));
  }
  {
    const auto r = check_waiting_rates(10, seed, 1e5);
    bool hand = false, slow = false;
    for (const auto& row : r.data["profiles"]) {
      if (row["profile"] == "two-class N=2" && row["analytic"].is_number() &&
          std::abs(row["analytic"].get<double>() - (1.0 / 13 + 15.0 / 143)) < 1e-12 && row["pass"])
        hand = true;
      if (row["seconds"].get<double>() > 120.0) slow = true;
    }
    line(3, r.pass && hand && !slow && r.data.value("finite_profiles", 0) >= 5,
         r.summary + (hand ? ", two-class example 0.181818 matched" : ", two-class example missing") +
             secs(r.seconds));
  }
  {
    const auto m = check_miner_ne(1000, seed);
    const auto u = check_user_ne(base, 200, 5);
    const double s = m.seconds + u.seconds;
    line(4, m.pass && u.pass && s < 300.0,
         "miners: " + m.summary + "; users: " + u.summary + secs(s));
  }
  {
    const auto r = check_fairness(base, 20);
    line(5, r.pass, r.summary + secs(r.seconds));
  }
  {
    const auto r = check_tax_ordering(1e-7);
    line(6, r.pass, r.summary + secs(r.seconds));
  }
  {
    const auto r = check_qualitative(base, 10);
    line(7, r.pass, r.summary + secs(r.seconds));
  }
  {
    const auto r = check_conservation(10, seed);
    line(8, r.pass, r.summary + secs(r.seconds));
  }
  std::printf("%d of 8 criteria red\n", red);
  return red;
}
