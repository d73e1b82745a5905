#include "fwt/mechanism.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fwt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double cost_or_default(std::optional<double> c, const SystemParams& p) {
  return c ? *c : p.system_cost_per_byte();
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
  return v;
}

Mechanism build(const SystemParams& p, double cost, TaxSplit split) {
  const double sbar = p.mean_tx_size;
  const double mu = p.block_rate;
  const double gamma = p.impatience;
  const double nh = static_cast<double>(p.n_users_high);
  const double nl = static_cast<double>(p.n_users_low);

  Mechanism m;
  m.split = split;
  if (p.utility_high <= sbar * cost + gamma / mu) {
    m.regime = 1;
    m.menu = {cost + gamma / (sbar * mu), cost};
    m.row_sums = {0.0, 0.0};
  } else {
    m.regime = 2;
    m.menu = {p.utility_high / sbar - gamma / (sbar * mu), cost};
    const PerType<double> g = optimal_rates(p, cost);
    m.g1 = g.high;
    m.g2 = g.low;
    const double x = mu - nh * m.g1 - nl * m.g2;
    const double base = p.utility_high - m.menu.rho_low * sbar;
    const double base_l = p.utility_low - m.menu.rho_low * sbar;
    m.row_sums.high = base - gamma * (mu - (nh - 1.0) * m.g1 - nl * m.g2) / (x * x);
    m.row_sums.low = base_l - gamma * (mu - nh * m.g1 - (nl - 1.0) * m.g2) / (x * x);
  }

  // Row sums fix the equilibrium; any entries with those sums will do here.
  const TaxVector uni = uniform_taxes(m.row_sums, p);
  const SneOutcome out = sne_select(net_utilities(p, uni), m.menu, p);
  m.tax = split_taxes(m.row_sums, out, m.menu, p, split, &m.split_fell_back);
  return m;
}

}  // namespace

const char* to_string(TaxSplit s) {
  return s == TaxSplit::Fairness ? "fairness" : "uniform";
}

SufficientFeeResult sufficient_fee_check(const SneOutcome& outcome, const FeeMenu& menu,
                                         const SystemParams& p,
                                         std::optional<double> system_cost_per_byte) {
  const double cost = cost_or_default(system_cost_per_byte, p);
  SufficientFeeResult r;
  for (UserType t : {UserType::High, UserType::Low}) {
    const RatePair& rp = outcome.profile.rates[t];
    const double tot = rp.total();
    if (tot <= 0.0) continue;
    // written as an offset from rho_low so a single-fee mix returns that fee exactly
    const double avg = menu.rho_low + rp.high_fee * (menu.rho_high - menu.rho_low) / tot;
    r.avg_fee[t] = avg;
    if (!(avg >= cost)) r.ok = false;
  }
  return r;
}

WelfareBreakdown social_welfare(const SneOutcome& outcome, const FeeMenu& menu,
                                const TaxVector& tax, const SystemParams& p,
                                std::optional<double> system_cost_per_byte) {
  const double cost = cost_or_default(system_cost_per_byte, p);
  const double cs = p.storage_cost_per_byte;
  WelfareBreakdown w;
  w.avg_fee = sufficient_fee_check(outcome, menu, p, cost).avg_fee;
  for (UserType t : {UserType::High, UserType::Low}) {
    const double n = static_cast<double>(p.count(t));
    const RatePair& r = outcome.profile.rates[t];
    w.user_payoff[t] = user_payoff(t, outcome, menu, tax, p);
    // idle users still collect taxes
    if (r.total() > 0.0 || std::isfinite(w.user_payoff[t])) w.user_sum += n * w.user_payoff[t];
    if (menu.rho_high >= cs) w.miner_sum += n * r.high_fee * p.mean_tx_size * (menu.rho_high - cost);
    if (menu.rho_low >= cs) w.miner_sum += n * r.low_fee * p.mean_tx_size * (menu.rho_low - cost);
  }
  w.total = w.user_sum + w.miner_sum;
  return w;
}

double welfare_from_rates(const StrategyProfile& s, const PerType<double>& waiting,
                          const SystemParams& p, std::optional<double> system_cost_per_byte) {
  const double cost = cost_or_default(system_cost_per_byte, p);
  double total = 0.0;
  for (UserType t : {UserType::High, UserType::Low}) {
    const double n = static_cast<double>(p.count(t));
    const double rate = s.rates[t].total();
    if (rate <= 0.0) continue;
    total += n * rate * (p.utility(t) - p.mean_tx_size * cost);
    if (p.impatience > 0.0) {
      if (std::isinf(waiting[t])) return -kInf;
      total -= p.impatience * n * waiting[t];
    }
  }
  return total;
}

PerType<double> optimal_rates(const SystemParams& p, double system_cost_per_byte) {
  const double mu = p.block_rate;
  const double gamma = p.impatience;
  const double nh = static_cast<double>(p.n_users_high);
  const double nl = static_cast<double>(p.n_users_low);
  const double n = nh + nl;
  const double cap = mu / n;
  const double k = p.mean_tx_size * system_cost_per_byte;

  PerType<double> g;
  if (p.utility_high <= k + gamma / mu) return g;
  g.high = std::min(cap, (mu - std::sqrt(gamma * mu / (p.utility_high - k))) / nh);
  if (p.utility_low > k + gamma * n * n / (nl * nl * mu)) {
    g.low = cap - std::sqrt(gamma * mu / (p.utility_low - k)) / nl;
  }
  return g;
}

Mechanism optimal_mechanism(const SystemParams& p, TaxSplit split) {
  return build(p, p.system_cost_per_byte(), split);
}

Mechanism optimal_mechanism_hetero(const SystemParams& p, const HeteroCostParams& hc,
                                   TaxSplit split) {
  return build(p, static_cast<double>(p.n_miners) * hc.mean_cost(), split);
}

TaxVector uniform_taxes(const PerType<double>& row_sums, const SystemParams& p) {
  const double d = static_cast<double>(p.n_users() - 1);
  if (d <= 0.0) return {};
  return {row_sums.high / d, row_sums.high / d, row_sums.low / d, row_sums.low / d};
}

TaxVector split_taxes(const PerType<double>& row_sums, const SneOutcome& outcome,
                      const FeeMenu& menu, const SystemParams& p, TaxSplit split,
                      bool* fell_back) {
  if (fell_back) *fell_back = false;
  if (split == TaxSplit::Uniform) return uniform_taxes(row_sums, p);

  const double nh = static_cast<double>(p.n_users_high);
  const double nl = static_cast<double>(p.n_users_low);
  const double lh = outcome.rate_total(UserType::High);
  const double ll = outcome.rate_total(UserType::Low);

  // Payoff of each type with zero tax inflow; inflows are then chosen so both
  // types end up equal.
  PerType<double> base;
  const TaxVector outflow_only = uniform_taxes(row_sums, p);
  for (UserType t : {UserType::High, UserType::Low}) {
    const TaxFlows f = tax_flows(t, outcome.profile, outflow_only, p);
    base[t] = user_payoff(t, outcome, menu, outflow_only, p) - f.inflow;
  }

  Eigen::Matrix<double, 3, 4> a;
  a << nh - 1.0, nl, 0.0, 0.0,
       0.0, 0.0, nh, nl - 1.0,
       (nh - 1.0) * lh, -nh * lh, nl * ll, -(nl - 1.0) * ll;
  Eigen::Vector3d b(row_sums.high, row_sums.low, base.low - base.high);

  bool ok = std::isfinite(b(2));
  Eigen::Vector4d x = Eigen::Vector4d::Zero();
  if (ok) {
    x = a.completeOrthogonalDecomposition().solve(b);
    const double scale = std::max({std::abs(b(0)), std::abs(b(1)), std::abs(b(2)), 1e-300});
    ok = x.allFinite() && (a * x - b).cwiseAbs().maxCoeff() <= 1e-9 * scale;
  }
  if (!ok) {
    if (fell_back) *fell_back = true;
    return uniform_taxes(row_sums, p);
  }
  return {x(0), x(1), x(2), x(3)};
}

OracleResult unconstrained_optimum_oracle(const SystemParams& p, int points_per_axis) {
  if (points_per_axis < 2) throw std::invalid_argument("oracle needs at least 2 points per axis");
  const std::vector<double> rho = linspace(0.0, 1.5 * p.utility_high / p.mean_tx_size, points_per_axis);
  const std::vector<double> q = linspace(-p.utility_high, p.utility_high, points_per_axis);

  OracleResult best;
  best.welfare = 0.0;  // generating nothing is always feasible
  for (double qh : q) {
    for (double ql : q) {
      const PerType<double> rs{qh, ql};
      const NetUtilities nu = net_utilities(p, uniform_taxes(rs, p));
      for (std::size_t i = 1; i < rho.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
          const FeeMenu menu{rho[i], rho[j]};
          const SneOutcome out = sne_select(nu, menu, p);
          ++best.evaluated;
          const double w = welfare_from_rates(out.profile, out.waiting, p);
          if (w > best.welfare) {
            best.welfare = w;
            best.menu = menu;
            best.row_sums = rs;
          }
        }
      }
    }
  }
  return best;
}

TaxComparison tax_comparison(const SystemParams& p) {
  const Mechanism m = optimal_mechanism(p, TaxSplit::Uniform);
  if (m.regime != 2)
    throw std::domain_error("tax comparison needs R_H above the generation threshold");
  const double x = p.block_rate - static_cast<double>(p.n_users_high) * m.g1 -
                   static_cast<double>(p.n_users_low) * m.g2;
  TaxComparison c;
  c.delta = p.impatience * (m.g1 - m.g2) / (x * x);
  c.row_sums = m.row_sums;
  c.utility_gap = p.utility_high - p.utility_low;
  c.predicted_high_lower = c.utility_gap < c.delta;
  c.observed_high_lower = m.row_sums.high < m.row_sums.low;
  return c;
}

}  // namespace fwt
