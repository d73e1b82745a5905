#include "fwt/harness.hpp"

#include <chrono>
#include <cmath>
#include <future>
#include <iomanip>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "fwt/json_io.hpp"
#include "fwt/miner_game.hpp"
#include "fwt/sim.hpp"

namespace fwt {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(n == 1 ? lo : lo + (hi - lo) * i / (n - 1));
  return v;
}

std::vector<double> logspace(double lo, double hi, int n) {
  std::vector<double> v;
  for (double e : linspace(std::log10(lo), std::log10(hi), n)) v.push_back(std::pow(10.0, e));
  return v;
}

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(6) << x;
  return os.str();
}

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// R_L / R_H is held at its base value on the R_H axis.
SystemParams with_r_high(SystemParams p, double r_high) {
  const double ratio = p.utility_high > 0.0 ? p.utility_low / p.utility_high : 0.5;
  p.utility_high = r_high;
  p.utility_low = r_high * ratio;
  return p;
}

}  // namespace

double jain_index(const std::vector<double>& u) {
  if (u.empty()) throw std::invalid_argument("jain index of an empty vector");
  double s = 0.0, s2 = 0.0;
  for (double x : u) {
    s += x;
    s2 += x * x;
  }
  if (s2 == 0.0) return kNaN;
  return s * s / (static_cast<double>(u.size()) * s2);
}

double jain_index(double uh, std::int64_t nh, double ul, std::int64_t nl) {
  const double a = static_cast<double>(nh), b = static_cast<double>(nl);
  const double s2 = a * uh * uh + b * ul * ul;
  if (s2 == 0.0) return kNaN;
  const double s = a * uh + b * ul;
  return s * s / ((a + b) * s2);
}

std::optional<double> population_avg_fee(const SneOutcome& o, const FeeMenu& menu,
                                         const SystemParams& p) {
  double num = 0.0, den = 0.0;
  for (UserType t : {UserType::High, UserType::Low}) {
    const double n = static_cast<double>(p.count(t));
    const RatePair& r = o.profile.rates[t];
    num += n * (r.high_fee * menu.rho_high + r.low_fee * menu.rho_low);
    den += n * r.total();
  }
  if (den <= 0.0) return std::nullopt;
  return num / den;
}

SolveResult solve(const SystemParams& p, TaxSplit split,
                  const std::optional<HeteroCostParams>& hetero) {
  SolveResult r;
  r.hetero = hetero;
  r.mechanism = hetero ? optimal_mechanism_hetero(p, *hetero, split) : optimal_mechanism(p, split);
  r.system_cost_per_byte =
      hetero ? static_cast<double>(p.n_miners) * hetero->mean_cost() : p.system_cost_per_byte();
  r.outcome = solve_users(p, r.mechanism.menu, r.mechanism.tax);
  r.welfare = social_welfare(r.outcome, r.mechanism.menu, r.mechanism.tax, p, r.system_cost_per_byte);
  r.fee = sufficient_fee_check(r.outcome, r.mechanism.menu, p, r.system_cost_per_byte);
  return r;
}

nlohmann::json to_json(const SolveResult& r) {
  nlohmann::json j;
  j["mechanism"] = to_json(r.mechanism);
  j["equilibrium"] = to_json(r.outcome);
  j["welfare"] = to_json(r.welfare);
  j["sufficient_fee"] = to_json(r.fee);
  j["system_cost_per_byte"] = r.system_cost_per_byte;
  if (r.hetero) {
    j["hetero"] = {{"cost_low", r.hetero->cost_low},
                   {"cost_high", r.hetero->cost_high},
                   {"high_cost_fraction", r.hetero->high_cost_fraction}};
  }
  return j;
}

SweepAxis parse_axis(const std::string& s) {
  if (s == "gamma") return SweepAxis::Gamma;
  if (s == "r_high") return SweepAxis::RHigh;
  if (s == "n_users") return SweepAxis::NUsers;
  if (s == "cost_ratio") return SweepAxis::CostRatio;
  throw std::invalid_argument("unknown sweep axis '" + s + "'");
}

const char* to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::Gamma: return "gamma";
    case SweepAxis::RHigh: return "r_high";
    case SweepAxis::NUsers: return "n_users";
    case SweepAxis::CostRatio: return "cost_ratio";
  }
  return "?";
}

std::pair<double, double> default_range(SweepAxis a, bool paper_scale) {
  switch (a) {
    case SweepAxis::Gamma: return {1e-5, 1e-3};
    case SweepAxis::RHigh: return {5e-4, 3e-3};
    case SweepAxis::NUsers: return paper_scale ? std::pair{153000.0, 537000.0} : std::pair{100.0, 1000.0};
    case SweepAxis::CostRatio: return {1.0, 10.0};
  }
  return {0.0, 0.0};
}

SystemParams sweep_params(const SystemParams& base, SweepAxis axis, double value,
                          double high_fraction) {
  SystemParams p = base;
  switch (axis) {
    case SweepAxis::Gamma: p.impatience = value; break;
    case SweepAxis::RHigh: p = with_r_high(base, value); break;
    case SweepAxis::NUsers: {
      const auto n = static_cast<std::int64_t>(std::llround(value));
      p.n_users_high = std::clamp<std::int64_t>(std::llround(static_cast<double>(n) * high_fraction), 1, n - 1);
      p.n_users_low = n - p.n_users_high;
      break;
    }
    case SweepAxis::CostRatio: break;
  }
  return p;
}

SweepRow sweep_point(const SystemParams& base, const SweepOptions& opt, double value) {
  SweepRow row;
  row.axis = to_string(opt.axis);
  row.value = value;
  try {
    const SystemParams p = sweep_params(base, opt.axis, value, opt.high_fraction);
    const auto v = validate_params(p);
    if (!v.ok()) throw std::invalid_argument(v.joined());

    std::optional<HeteroCostParams> hc;
    ExistingOutcome ex;
    if (opt.axis == SweepAxis::CostRatio) {
      hc = HeteroCostParams::from_ratio(p.storage_cost_per_byte, value);
      ex = existing_equilibrium_hetero(p, *hc, opt.fee_grid);
    } else {
      ExistingOptions eo;
      eo.fee_grid = opt.fee_grid;
      ex = existing_equilibrium(p, eo);
    }
    const SolveResult fwt = solve(p, opt.split, hc);

    row.system_cost_per_byte = fwt.system_cost_per_byte;
    row.fwt_avg_fee = population_avg_fee(fwt.outcome, fwt.mechanism.menu, p).value_or(kNaN);
    row.existing_avg_fee = ex.avg_fee_per_byte;
    row.fwt_welfare = fwt.welfare.total;
    row.existing_welfare = ex.welfare;
    row.improvement_pct = ex.welfare != 0.0
                              ? 100.0 * (fwt.welfare.total - ex.welfare) / std::abs(ex.welfare)
                              : kNaN;
    row.fwt_payoff = fwt.welfare.user_payoff;
    row.existing_payoff = ex.payoff;
    row.fwt_jain = jain_index(row.fwt_payoff.high, p.n_users_high, row.fwt_payoff.low, p.n_users_low);
    row.existing_jain =
        jain_index(ex.payoff.high, p.n_users_high, ex.payoff.low, p.n_users_low);
    row.fwt_sufficient = fwt.fee.ok;
    row.existing_sufficient =
        sufficient_fee_check(ex.outcome, ex.menu, p, fwt.system_cost_per_byte).ok;
    if (!ex.converged) row.error = "existing did not converge";
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  return row;
}

std::vector<SweepRow> sweep(const SystemParams& base, const SweepOptions& opt) {
  if (opt.steps < 1) throw std::invalid_argument("steps must be positive");
  const auto [dlo, dhi] = default_range(opt.axis, opt.paper_scale);
  const double lo = opt.lo.value_or(dlo), hi = opt.hi.value_or(dhi);
  std::vector<std::future<SweepRow>> jobs;
  for (double v : linspace(lo, hi, opt.steps))
    jobs.push_back(std::async(std::launch::async, [&base, &opt, v] { return sweep_point(base, opt, v); }));
  std::vector<SweepRow> rows;
  for (auto& j : jobs) rows.push_back(j.get());
  return rows;
}

const char* sweep_csv_header() {
  return "axis,value,fwt_avg_fee,existing_avg_fee,system_cost_per_byte,fwt_welfare,"
         "existing_welfare,improvement_pct,fwt_payoff_high,fwt_payoff_low,existing_payoff_high,"
         "existing_payoff_low,fwt_jain,existing_jain,fwt_sufficient,existing_sufficient,error";
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << sweep_csv_header() << '\n';
  const auto old = os.precision(12);
  for (const auto& r : rows) {
    std::string err = r.error;
    for (char& ch : err)
      if (ch == ',' || ch == '\n') ch = ';';
    os << r.axis << ',' << r.value << ',' << r.fwt_avg_fee << ',' << r.existing_avg_fee << ','
       << r.system_cost_per_byte << ',' << r.fwt_welfare << ',' << r.existing_welfare << ','
       << r.improvement_pct << ',' << r.fwt_payoff.high << ',' << r.fwt_payoff.low << ','
       << r.existing_payoff.high << ',' << r.existing_payoff.low << ',' << r.fwt_jain << ','
       << r.existing_jain << ',' << (r.fwt_sufficient ? 1 : 0) << ','
       << (r.existing_sufficient ? 1 : 0) << ',' << err << '\n';
  }
  os.precision(old);
}

void CheckReport::fail(const std::string& what) {
  pass = false;
  ++failures;
  if (failures_detail.size() < 10) failures_detail.push_back(what);
}

const std::vector<std::string>& check_suites() {
  static const std::vector<std::string> s{"miner_ne",       "user_ne",     "lemma1",
                                          "prop2",          "fairness",    "corollary2",
                                          "sufficient_fee", "conservation", "qualitative"};
  return s;
}

CheckReport check_miner_ne(int pools, std::uint64_t seed) {
  Timer timer;
  CheckReport r;
  r.suite = "miner_ne";
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pool_size(0, 20), miners(1, 5), fee_level(0, 6);
  std::uniform_real_distribution<double> size(50.0, 500.0), unit(0.0, 1.0);
  int full_pool_cases = 0, tied_cases = 0, tied_profitable = 0;
  for (int k = 0; k < pools; ++k) {
    SystemParams p;
    p.n_miners = miners(rng);
    p.mining_power.clear();
    double tot = 0.0;
    for (std::int64_t m = 0; m < p.n_miners; ++m) tot += p.mining_power.emplace_back(unit(rng) + 1e-3);
    for (double& a : p.mining_power) a /= tot;
    // Renormalize the last share so the sum is 1 to the last bit.
    double head = 0.0;
    for (std::size_t m = 0; m + 1 < p.mining_power.size(); ++m) head += p.mining_power[m];
    p.mining_power.back() = 1.0 - head;

    // Odd pools: equal sizes and coarse fee levels, so ties and the C_s
    // boundary occur; checked against the whole pool as well. Even pools:
    // random sizes and continuous fees.
    const bool equal_sizes = k % 2 == 1;
    TxPool pool;
    const int n = pool_size(rng);
    for (int i = 0; i < n; ++i) {
      PendingTx tx;
      tx.user_id = i % 4;
      tx.tx_index = i;
      tx.size_bytes = equal_sizes ? 150.0 : size(rng);
      tx.fee_per_byte = equal_sizes ? p.storage_cost_per_byte * 0.5 * fee_level(rng)
                                    : p.storage_cost_per_byte * 3.0 * unit(rng);
      tx.gen_time = std::floor(unit(rng) * 10.0);
      pool.add(tx);
    }
    const MinerSelection sel = equilibrium_selection(pool, p);
    ++r.cases;
    const auto rep = check_miner_nash(sel, pool, p, 0.0, DeviationSet::HighestFee);
    if (!rep.ok) r.fail("pool " + std::to_string(k) + ": miner " + std::to_string(rep.miner) + " gains " + fmt(rep.gain));
    if (equal_sizes) {
      ++full_pool_cases;
      const auto full = check_miner_nash(sel, pool, p, 0.0, DeviationSet::FullPool);
      if (!full.ok) r.fail("pool " + std::to_string(k) + " (full pool): gain " + fmt(full.gain));
    } else {
      // Diagnostic only: the same sizes with fees snapped to coarse levels.
      // A larger transaction tied at the top fee pays more than the earliest.
      TxPool tied;
      for (const PendingTx& tx : pool.txs()) {
        PendingTx t = tx;
        t.fee_per_byte = p.storage_cost_per_byte * 0.5 * std::floor(tx.fee_per_byte / (0.5 * p.storage_cost_per_byte));
        tied.add(t);
      }
      ++tied_cases;
      if (!check_miner_nash(equilibrium_selection(tied, p), tied, p, 0.0, DeviationSet::HighestFee).ok)
        ++tied_profitable;
    }
  }
  r.data["tied_unequal_size_pools"] = tied_cases;
  r.data["tied_unequal_size_profitable_deviation"] = tied_profitable;
  r.data["full_pool_cases"] = full_pool_cases;
  r.summary = std::to_string(r.cases) + " random pools, " + std::to_string(r.failures) + " violations";
  r.seconds = timer.seconds();
  return r;
}

CheckReport check_user_ne(const SystemParams& base, int grid, int per_axis) {
  Timer timer;
  CheckReport r;
  r.suite = "user_ne";
  PerType<int> by_kind_fail{0, 0};
  nlohmann::json fails = nlohmann::json::array();
  int high_cases = 0, low_cases = 0, none_cases = 0;
  for (double gamma : logspace(1e-5, 1e-3, per_axis)) {
    for (double rh : linspace(5e-4, 3e-3, per_axis)) {
      SystemParams p = with_r_high(base, rh);
      p.impatience = gamma;
      const double lo = p.system_cost_per_byte();
      const double span = std::max(p.utility_high / p.mean_tx_size - lo, lo);
      for (int k = 1; k <= per_axis; ++k) {
        const FeeMenu menu{lo + span * k / per_axis, lo};
        const SneOutcome out = solve_users(p, menu, TaxVector{});
        const auto br = best_response_check(out, menu, TaxVector{}, p, grid, 1e-9);
        ++r.cases;
        const SneKind kind = out.profile.kind;
        (kind == SneKind::HighFeeSNE ? high_cases : kind == SneKind::LowFeeSNE ? low_cases : none_cases)++;
        if (!br.ok) {
          (kind == SneKind::HighFeeSNE ? by_kind_fail.high : by_kind_fail.low)++;
          r.fail(std::string(to_string(kind)) + " gamma=" + fmt(gamma) + " R_H=" + fmt(rh) +
                 " rho_high=" + fmt(menu.rho_high) + ": type " + to_string(br.type) + " gains " +
                 fmt(br.gain) + " at (" + fmt(br.best.high_fee) + ", " + fmt(br.best.low_fee) + ")");
          if (fails.size() < 200) {
            fails.push_back({{"gamma", gamma}, {"r_high", rh}, {"rho_high", menu.rho_high},
                             {"sne_kind", to_string(kind)}, {"type", to_string(br.type)},
                             {"gain", br.gain}, {"best_rate_high", br.best.high_fee},
                             {"best_rate_low", br.best.low_fee}});
          }
        }
      }
    }
  }
  // The taxed equilibria the optimal mechanism induces, on the 20x20 grid.
  int mech_cases = 0, mech_failures = 0;
  for (double gamma : linspace(1e-5, 1e-3, 20)) {
    for (double rh : linspace(5e-4, 3e-3, 20)) {
      SystemParams p = with_r_high(base, rh);
      p.impatience = gamma;
      const Mechanism m = optimal_mechanism(p);
      const SneOutcome out = solve_users(p, m.menu, m.tax);
      ++mech_cases;
      ++r.cases;
      if (!best_response_check(out, m.menu, m.tax, p, grid, 1e-9).ok) {
        ++mech_failures;
        r.fail("optimal mechanism gamma=" + fmt(gamma) + " R_H=" + fmt(rh) + ": profitable deviation");
      }
    }
  }
  r.data = {{"high_fee_cases", high_cases}, {"low_fee_cases", low_cases},
            {"mechanism_cases", mech_cases}, {"mechanism_failures", mech_failures},
            {"no_generation_cases", none_cases}, {"high_fee_failures", by_kind_fail.high},
            {"other_failures", by_kind_fail.low}, {"failing_points", fails}};
  r.summary = std::to_string(r.cases) + " equilibria, " + std::to_string(r.failures) +
              " with a profitable deviation (" + std::to_string(by_kind_fail.high) + " high-fee, " +
              std::to_string(mech_failures) + " of " + std::to_string(mech_cases) +
              " under the optimal mechanism)";
  r.seconds = timer.seconds();
  return r;
}

CheckReport check_waiting_rates(int replications, std::uint64_t seed, double blocks) {
  Timer timer;
  CheckReport r;
  r.suite = "lemma1";
  struct Profile {
    std::string name;
    SystemParams p;
    FeeMenu menu;
    StrategyProfile s;
  };
  std::vector<Profile> profiles;
  auto small = [](std::int64_t nh, std::int64_t nl) {
    SystemParams p;
    p.n_users_high = nh;
    p.n_users_low = nl;
    p.n_miners = 1;
    return p;
  };
  const FeeMenu served{2e-9, 1e-9};
  {
    Profile x{"two-class N=2", small(1, 1), served, {}};
    x.s.rates.high = {1.0, 1.0};
    x.s.rates.low = {1.0, 1.0};
    profiles.push_back(x);
  }
  {
    Profile x{"single class N=2", small(1, 1), served, {}};
    x.s.rates.high = {1.0, 0.0};
    x.s.rates.low = {1.0, 0.0};
    profiles.push_back(x);
  }
  {
    Profile x{"asymmetric N=5", small(3, 2), served, {}};
    x.s.rates.high = {2.0, 0.5};
    x.s.rates.low = {0.5, 1.5};
    profiles.push_back(x);
  }
  {
    Profile x{"heavy load N=2", small(1, 1), served, {}};
    x.s.rates.high = {3.0, 2.0};
    x.s.rates.low = {2.0, 3.0};
    profiles.push_back(x);
  }
  {
    SystemParams p = SystemParams::calibrated();
    const Mechanism m = optimal_mechanism(p);
    const SneOutcome o = solve_users(p, m.menu, m.tax);
    profiles.push_back({"optimal mechanism equilibrium", p, m.menu, o.profile});
  }
  {
    Profile x{"low fee unserved", small(1, 1), {1e-9, 1e-10}, {}};
    x.s.rates.high = {1.0, 1.0};
    x.s.rates.low = {1.0, 0.0};
    profiles.push_back(x);
  }
  {
    Profile x{"no generation", small(1, 1), {1e-10, 5e-11}, {}};
    profiles.push_back(x);
  }

  nlohmann::json rows = nlohmann::json::array();
  int finite_profiles = 0;
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    const auto& pr = profiles[i];
    Timer t;
    const auto checks = validate_waiting_rates(pr.p, pr.menu, pr.s, 0.02, seed + i, replications, blocks);
    bool finite = false;
    for (const auto& c : checks) {
      ++r.cases;
      if (std::isfinite(c.analytic) && c.analytic > 0.0) finite = true;
      rows.push_back({{"profile", pr.name}, {"type", to_string(c.type)}, {"analytic", number(c.analytic)},
                      {"measured", c.measured.mean}, {"ci95", c.measured.half_width},
                      {"pass", c.pass}, {"note", c.note}, {"seconds", t.seconds()}});
      if (!c.pass)
        r.fail(pr.name + " type " + to_string(c.type) + ": analytic " + fmt(c.analytic) +
               " measured " + fmt(c.measured.mean) + " +- " + fmt(c.measured.half_width));
    }
    if (finite) ++finite_profiles;
  }
  r.data = {{"profiles", rows}, {"finite_profiles", finite_profiles}};
  r.summary = std::to_string(profiles.size()) + " profiles (" + std::to_string(finite_profiles) +
              " stable), " + std::to_string(r.failures) + " mismatches";
  r.seconds = timer.seconds();
  return r;
}

CheckReport check_optimum(int draws, std::uint64_t seed, int points, double rel_tol) {
  Timer timer;
  CheckReport r;
  r.suite = "prop2";
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  nlohmann::json rows = nlohmann::json::array();
  PerType<int> per_case{0, 0};
  for (int d = 0; d < draws; ++d) {
    SystemParams p;
    p.impatience = std::pow(10.0, -5.0 + 2.0 * unit(rng));
    const double threshold = p.mean_tx_size * p.system_cost_per_byte() + p.impatience / p.block_rate;
    // Every third draw lands in the no-generation case.
    if (d % 3 == 2) {
      p.utility_high = threshold * (0.3 + 0.7 * unit(rng));
    } else {
      p.utility_high = 5e-4 + 2.5e-3 * unit(rng);
      if (p.utility_high <= threshold) p.utility_high = threshold * 1.5;
    }
    p.utility_low = p.utility_high * (0.2 + 0.8 * unit(rng));

    const SolveResult s = solve(p);
    const OracleResult o = unconstrained_optimum_oracle(p, points);
    const double w = s.welfare.total;
    const double scale = std::max(std::abs(w), std::abs(o.welfare));
    const double gap = std::abs(w - o.welfare);
    const bool ok = scale == 0.0 || gap <= rel_tol * scale;
    (s.mechanism.regime == 1 ? per_case.high : per_case.low)++;
    ++r.cases;
    rows.push_back({{"gamma", p.impatience}, {"r_high", p.utility_high}, {"r_low", p.utility_low},
                    {"regime", s.mechanism.regime}, {"welfare", w}, {"oracle", o.welfare},
                    {"relative_gap", scale > 0.0 ? gap / scale : 0.0}});
    if (!ok)
      r.fail("draw " + std::to_string(d) + " regime " + std::to_string(s.mechanism.regime) +
             ": welfare " + fmt(w) + " oracle " + fmt(o.welfare));
  }
  if (per_case.high == 0 || per_case.low == 0) r.fail("draws did not span both cases");
  r.data = {{"draws", rows}, {"regime1_draws", per_case.high}, {"regime2_draws", per_case.low}};
  r.summary = std::to_string(r.cases) + " draws (" + std::to_string(per_case.high) + " regime 1, " +
              std::to_string(per_case.low) + " regime 2), " + std::to_string(r.failures) +
              " beyond " + fmt(100 * rel_tol) + "%";
  r.seconds = timer.seconds();
  return r;
}

CheckReport check_fairness(const SystemParams& base, int per_axis) {
  Timer timer;
  CheckReport r;
  r.suite = "fairness";
  int all_zero = 0;
  double worst = 0.0;
  for (double gamma : linspace(1e-5, 1e-3, per_axis)) {
    for (double rh : linspace(5e-4, 3e-3, per_axis)) {
      SystemParams p = with_r_high(base, rh);
      p.impatience = gamma;
      const SolveResult s = solve(p);
      ++r.cases;
      const double j = jain_index(s.welfare.user_payoff.high, p.n_users_high,
                                  s.welfare.user_payoff.low, p.n_users_low);
      if (std::isnan(j)) {
        // Nobody generates: every payoff is exactly zero, hence equal.
        if (s.welfare.user_payoff.high == 0.0 && s.welfare.user_payoff.low == 0.0) {
          ++all_zero;
          continue;
        }
        r.fail("gamma=" + fmt(gamma) + " R_H=" + fmt(rh) + ": index undefined");
        continue;
      }
      worst = std::max(worst, std::abs(j - 1.0));
      if (std::abs(j - 1.0) > 1e-9)
        r.fail("gamma=" + fmt(gamma) + " R_H=" + fmt(rh) + ": index " + fmt(j));
    }
  }
  r.data = {{"all_zero_points", all_zero}, {"max_deviation", worst}};
  r.summary = std::to_string(r.cases) + " grid points, max |J-1| = " + fmt(worst) + ", " +
              std::to_string(all_zero) + " with all payoffs zero";
  r.seconds = timer.seconds();
  return r;
}

CheckReport check_sufficient_fee(const SystemParams& base, int per_axis) {
  Timer timer;
  CheckReport r;
  r.suite = "sufficient_fee";
  for (double gamma : linspace(1e-5, 1e-3, per_axis)) {
    for (double rh : linspace(5e-4, 3e-3, per_axis)) {
      SystemParams p = with_r_high(base, rh);
      p.impatience = gamma;
      const SolveResult s = solve(p);
      ++r.cases;
      if (!s.fee.ok) r.fail("gamma=" + fmt(gamma) + " R_H=" + fmt(rh));
    }
  }
  r.summary = std::to_string(r.cases) + " grid points, " + std::to_string(r.failures) + " below M C_s";
  r.seconds = timer.seconds();
  return r;
}

CheckReport check_tax_ordering(double step) {
  Timer timer;
  CheckReport r;
  r.suite = "corollary2";
  SystemParams p;
  p.impatience = 1e-3;
  p.utility_high = 3e-3;
  p.utility_low = p.utility_high;
  const double delta0 = tax_comparison(p).delta;
  // Gaps from 0 to twice the threshold at R_L = R_H.
  const int n = static_cast<int>(std::ceil(2.0 * delta0 / step));
  int flips = 0;
  std::optional<bool> prev;
  nlohmann::json crossing = nullptr;
  double prev_gap = 0.0, prev_delta = 0.0;
  for (int i = 0; i <= n; ++i) {
    p.utility_low = p.utility_high - step * i;
    const TaxComparison c = tax_comparison(p);
    ++r.cases;
    if (c.predicted_high_lower != c.observed_high_lower)
      r.fail("R_L=" + fmt(p.utility_low) + ": predicted " + std::to_string(c.predicted_high_lower) +
             " observed " + std::to_string(c.observed_high_lower));
    if (prev && *prev != c.observed_high_lower) {
      ++flips;
      // The flip must sit where gap - delta changes sign.
      const bool bracketed = (prev_gap - prev_delta) * (c.utility_gap - c.delta) <= 0.0;
      if (!bracketed) r.fail("flip at R_L=" + fmt(p.utility_low) + " not bracketing delta");
      crossing = {{"gap_before", prev_gap}, {"gap_after", c.utility_gap},
                  {"delta_before", prev_delta}, {"delta_after", c.delta}};
    }
    prev = c.observed_high_lower;
    prev_gap = c.utility_gap;
    prev_delta = c.delta;
  }
  if (flips != 1) r.fail("expected exactly one sign flip, saw " + std::to_string(flips));
  r.data = {{"delta_at_equal_utility", delta0}, {"step", step}, {"crossing", crossing}};
  r.summary = std::to_string(r.cases) + " values of R_L at step " + fmt(step) + ", " +
              std::to_string(flips) + " flip(s), delta ~ " + fmt(delta0);
  r.seconds = timer.seconds();
  return r;
}

CheckReport check_conservation(int replications, std::uint64_t seed) {
  Timer timer;
  CheckReport r;
  r.suite = "conservation";
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  // Simulated ledgers.
  std::vector<SimConfig> configs;
  {
    SimConfig c;
    c.params = SystemParams::calibrated();
    const Mechanism m = optimal_mechanism(c.params);
    c.menu = m.menu;
    c.tax = m.tax;
    c.profile = solve_users(c.params, m.menu, m.tax).profile;
    c.horizon = 500.0;
    configs.push_back(c);
  }
  {
    SimConfig c;
    c.params.n_users_high = 3;
    c.params.n_users_low = 4;
    c.params.n_miners = 5;
    c.params.mining_power = {0.1, 0.2, 0.3, 0.15, 0.25};
    c.menu = {3e-6, 1e-6};
    c.tax = {1e-5 * unit(rng), 1e-5 * unit(rng), 1e-5 * unit(rng), 1e-5 * unit(rng)};
    c.profile.rates.high = {1.0, 0.5};
    c.profile.rates.low = {0.3, 1.2};
    c.horizon = 2000.0;
    configs.push_back(c);
  }
  for (std::size_t i = 0; i < configs.size(); ++i) {
    configs[i].seed = seed + i;
    configs[i].replications = replications;
    const SimReport rep = run(configs[i]);
    for (std::size_t k = 0; k < rep.replications.size(); ++k) {
      const Ledger& l = rep.replications[k].ledger;
      ++r.cases;
      if (!l.fees_balance()) r.fail("config " + std::to_string(i) + " rep " + std::to_string(k) + ": fees");
      if (!l.taxes_balance()) r.fail("config " + std::to_string(i) + " rep " + std::to_string(k) + ": taxes");
    }
  }

  // Analytic welfare with the rates held fixed and only the tax entries changed.
  double worst = 0.0;
  for (double gamma : linspace(1e-5, 1e-3, 5)) {
    for (double rh : linspace(5e-4, 3e-3, 5)) {
      SystemParams p = with_r_high(SystemParams::calibrated(), rh);
      p.impatience = gamma;
      const Mechanism m = optimal_mechanism(p);
      const SneOutcome o = solve_users(p, m.menu, m.tax);
      const double w0 = social_welfare(o, m.menu, m.tax, p).total;
      const double nh = static_cast<double>(p.n_users_high), nl = static_cast<double>(p.n_users_low);
      std::vector<TaxVector> splits{uniform_taxes(m.row_sums, p)};
      for (int k = 0; k < 3; ++k) {
        TaxVector t;
        t.p_hh = 1e-5 * unit(rng);
        t.p_hl = (m.row_sums.high - (nh - 1.0) * t.p_hh) / nl;
        t.p_ll = 1e-5 * unit(rng);
        t.p_lh = (m.row_sums.low - (nl - 1.0) * t.p_ll) / nh;
        splits.push_back(t);
      }
      for (const TaxVector& t : splits) {
        const double w = social_welfare(o, m.menu, t, p).total;
        const double dev = std::abs(w - w0) / std::max(std::abs(w0), 1e-300);
        ++r.cases;
        worst = std::max(worst, w0 == 0.0 ? std::abs(w) : dev);
        if ((w0 == 0.0 && w != 0.0) || (w0 != 0.0 && dev > 1e-12))
          r.fail("gamma=" + fmt(gamma) + " R_H=" + fmt(rh) + ": welfare moved by " + fmt(dev));
      }
    }
  }
  r.data = {{"max_relative_welfare_change", worst}};
  r.summary = std::to_string(r.cases) + " ledgers and splits, max welfare change " + fmt(worst);
  r.seconds = timer.seconds();
  return r;
}

CheckReport check_qualitative(const SystemParams& base, int steps) {
  Timer timer;
  CheckReport r;
  r.suite = "qualitative";
  nlohmann::json info = nlohmann::json::object();
  bool gap_region = false;
  for (SweepAxis axis : {SweepAxis::Gamma, SweepAxis::RHigh, SweepAxis::NUsers, SweepAxis::CostRatio}) {
    SweepOptions opt;
    opt.axis = axis;
    opt.steps = steps;
    const auto rows = sweep(base, opt);
    nlohmann::json imp = nlohmann::json::array();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& row = rows[i];
      ++r.cases;
      if (!row.error.empty()) r.fail(row.axis + "=" + fmt(row.value) + ": " + row.error);
      if (!(row.fwt_welfare >= row.existing_welfare))
        r.fail(row.axis + "=" + fmt(row.value) + ": FWT welfare below Existing");
      if (!row.existing_sufficient && row.fwt_sufficient) gap_region = true;
      imp.push_back(row.improvement_pct);
      if (i == 0) continue;
      const auto& prev = rows[i - 1];
      if (axis == SweepAxis::Gamma && row.existing_avg_fee > prev.existing_avg_fee)
        r.fail("Existing fee rises with gamma at " + fmt(row.value));
      if (axis == SweepAxis::RHigh && row.existing_avg_fee < prev.existing_avg_fee)
        r.fail("Existing fee falls with R_H at " + fmt(row.value));
      if (axis == SweepAxis::CostRatio) {
        if (row.existing_avg_fee != rows[0].existing_avg_fee)
          r.fail("Existing fee moves with the cost ratio at " + fmt(row.value));
      }
    }
    if (axis == SweepAxis::CostRatio) {
      for (const auto& row : rows) {
        const HeteroCostParams hc = HeteroCostParams::from_ratio(base.storage_cost_per_byte, row.value);
        const double bound = static_cast<double>(base.n_miners) * hc.mean_cost();
        if (std::abs(row.fwt_avg_fee - bound) > 1e-12 * bound)
          r.fail("FWT fee " + fmt(row.fwt_avg_fee) + " off the hetero bound " + fmt(bound));
      }
    }
    if (axis == SweepAxis::NUsers) {
      bool decreasing = true;
      for (std::size_t i = 1; i < rows.size(); ++i) {
        decreasing = decreasing && rows[i].fwt_payoff.high <= rows[i - 1].fwt_payoff.high &&
                     rows[i].existing_payoff.high <= rows[i - 1].existing_payoff.high;
      }
      info["payoffs_decrease_in_n"] = decreasing;
    }
    info[std::string("improvement_pct_") + to_string(axis)] = imp;
  }
  if (!gap_region) r.fail("no point where Existing misses and FWT meets the sufficient fee");
  info["insufficiency_region_found"] = gap_region;
  r.data = info;
  r.summary = std::to_string(r.cases) + " sweep points over 4 axes, " + std::to_string(r.failures) + " violations";
  r.seconds = timer.seconds();
  return r;
}

nlohmann::json simulate(const SystemParams& p, const SimulateOptions& opt, SimReport* report) {
  SimConfig c;
  c.params = p;
  c.seed = opt.seed;
  c.warmup = opt.warmup;
  c.replications = opt.replications;
  c.horizon = opt.horizon > 0.0 ? opt.horizon : 1e5 / p.block_rate / (1.0 - opt.warmup);
  c.record_log = opt.record_log;
  nlohmann::json j;
  if (opt.scheme == "fwt") {
    const SolveResult r = solve(p, opt.split);
    c.menu = r.mechanism.menu;
    c.tax = r.mechanism.tax;
    c.profile = r.outcome.profile;
    j["analytic"] = {{"waiting_rate", {{"high", number(r.outcome.waiting.high)},
                                       {"low", number(r.outcome.waiting.low)}}},
                     {"welfare", number(r.welfare.total)}};
  } else if (opt.scheme == "existing") {
    const ExistingOutcome ex = existing_equilibrium(p);
    c.menu = ex.menu;
    c.profile = ex.outcome.profile;
    j["analytic"] = {{"waiting_rate", {{"high", number(ex.outcome.waiting.high)},
                                       {"low", number(ex.outcome.waiting.low)}}},
                     {"welfare", number(ex.welfare)}};
  } else {
    throw std::invalid_argument("scheme must be fwt or existing");
  }
  const std::string err = validate_sim_config(c);
  if (!err.empty()) throw std::invalid_argument(err);
  SimReport rep = run(c);
  j["scheme"] = opt.scheme;
  j["seed"] = opt.seed;
  j["horizon"] = c.horizon;
  j["report"] = to_json(rep);
  if (opt.record_log) j["priority_audit_first_violation"] = audit_priority(rep.log);
  if (report) *report = std::move(rep);
  return j;
}

CheckReport run_check(const std::string& suite, std::optional<int> budget, std::uint64_t seed,
                      const SystemParams& base) {
  if (suite == "miner_ne") return check_miner_ne(budget.value_or(1000), seed);
  if (suite == "user_ne") return check_user_ne(base, budget.value_or(200));
  if (suite == "lemma1") return check_waiting_rates(budget.value_or(10), seed);
  if (suite == "prop2") return check_optimum(budget.value_or(12), seed);
  if (suite == "fairness") return check_fairness(base, budget.value_or(20));
  if (suite == "sufficient_fee") return check_sufficient_fee(base, budget.value_or(20));
  if (suite == "corollary2") return check_tax_ordering(budget ? 1e-6 / *budget : 1e-7);
  if (suite == "conservation") return check_conservation(budget.value_or(10), seed);
  if (suite == "qualitative") return check_qualitative(base, budget.value_or(10));
  throw std::invalid_argument("unknown check suite '" + suite + "'");
}

nlohmann::json to_json(const CheckReport& r) {
  return {{"suite", r.suite},     {"pass", r.pass},         {"cases", r.cases},
          {"failures", r.failures}, {"summary", r.summary}, {"failure_detail", r.failures_detail},
          {"data", r.data},       {"seconds", r.seconds}};
}

}  // namespace fwt
