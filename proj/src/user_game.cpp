#include "fwt/user_game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fwt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Square roots in the equilibrium formulas take sums of nonnegative terms;
// anything meaningfully negative means the wrong branch was entered.
double guarded_sqrt(double x, double scale) {
  if (x >= 0.0) return std::sqrt(x);
  if (x >= -1e-15 * std::max(1.0, std::abs(scale))) return 0.0;
  throw std::domain_error("negative square-root argument in equilibrium rates");
}

// Largest symmetric rate of `n` identical users with per-tx margin `margin`
// sharing `capacity`, before the mu/N cap.
double symmetric_rate(double margin, std::int64_t n, double capacity, double gamma) {
  const double nn = static_cast<double>(n);
  const double lin = gamma * (nn - 1.0);
  const double disc = lin * lin + 4.0 * nn * margin * gamma * capacity;
  return capacity / nn - (lin + guarded_sqrt(disc, lin * lin)) / (2.0 * nn * nn * margin);
}

bool served(double rho, const SystemParams& p) { return rho >= p.storage_cost_per_byte; }

}  // namespace

const char* to_string(FeeLevel f) {
  switch (f) {
    case FeeLevel::High: return "high";
    case FeeLevel::Low: return "low";
    case FeeLevel::None: return "none";
  }
  return "?";
}

double waiting_rate(const RatePair& own, const ClassLoad& others, const FeeMenu& menu,
                    const SystemParams& p) {
  if (own.high_fee <= 0.0 && own.low_fee <= 0.0) return 0.0;
  const bool high_served = served(menu.rho_high, p);
  const bool low_served = served(menu.rho_low, p);
  if (own.high_fee > 0.0 && !high_served) return kInf;
  if (own.low_fee > 0.0 && !low_served) return kInf;

  const double mu = p.block_rate;
  const double load_high = high_served ? others.high + own.high_fee : 0.0;
  const double load_all = load_high + (low_served ? others.low + own.low_fee : 0.0);

  double w = 0.0;
  if (own.high_fee > 0.0) {
    if (load_high >= mu) return kInf;
    w += own.high_fee / (mu - load_high);
  }
  if (own.low_fee > 0.0) {
    if (load_high >= mu || load_all >= mu) return kInf;
    w += mu * own.low_fee / ((mu - load_high) * (mu - load_all));
  }
  return w;
}

double waiting_rate(UserType t, const StrategyProfile& s, const FeeMenu& menu,
                    const SystemParams& p) {
  ClassLoad others = class_load(s, p);
  others.high -= s.rates[t].high_fee;
  others.low -= s.rates[t].low_fee;
  return waiting_rate(s.rates[t], others, menu, p);
}

NetUtilities net_utilities(const SystemParams& p, const TaxVector& tax) {
  NetUtilities nu;
  nu.h.high = p.utility_high - tax.row_sum(UserType::High, p);
  nu.h.low = p.utility_low - tax.row_sum(UserType::Low, p);
  nu.bigger = nu.h.high >= nu.h.low ? UserType::High : UserType::Low;
  return nu;
}

SneRates sne_rates_from_margins(double margin_big, double margin_small, std::int64_t n_big,
                                std::int64_t n_small, const SystemParams& p) {
  const double mu = p.block_rate;
  const double gamma = p.impatience;
  const double nb = static_cast<double>(n_big);
  const double ns = static_cast<double>(n_small);
  const double cap = mu / (nb + ns);

  if (margin_big <= gamma / mu) return {};

  if (gamma == 0.0) {
    // Waiting is free: every user with a positive margin runs at the cap.
    return margin_small > 0.0 ? SneRates{cap, cap, SneBranch::BothGenerate}
                              : SneRates{cap, 0.0, SneBranch::OnlyBigGenerates};
  }

  const double a1 = std::min(symmetric_rate(margin_big, n_big, mu, gamma), cap);
  if (margin_small <= gamma / (mu - nb * a1)) return {a1, 0.0, SneBranch::OnlyBigGenerates};

  // Both types generate; a2 is the residual capacity mu - total load implied
  // by the summed first-order conditions.
  const double n = nb + ns;
  const double weighted = nb * margin_big + ns * margin_small;
  const double lin = gamma * (n - 1.0);
  const double a2 =
      (lin + guarded_sqrt(lin * lin + 4.0 * gamma * mu * weighted, lin * lin)) / (2.0 * weighted);
  const double excess_big = margin_big * a2 - gamma;
  const double excess_small = margin_small * a2 - gamma;
  const double big =
      std::min(cap, (mu - a2) * excess_big / (nb * excess_big + ns * excess_small));

  const double residual = mu - nb * big;
  const double small = std::max(0.0, symmetric_rate(margin_small, n_small, residual, gamma));
  return {big, small, SneBranch::BothGenerate};
}

SneRates sne_rates(const NetUtilities& nu, double rho, const SystemParams& p) {
  const double fee = p.mean_tx_size * rho;
  return sne_rates_from_margins(nu.h_big() - fee, nu.h_small() - fee, nu.n_big(p), nu.n_small(p),
                                p);
}

double high_fee_incentive(const NetUtilities& nu, double rho_low, const SystemParams& p) {
  const SneRates r = sne_rates(nu, rho_low, p);
  const double mu = p.block_rate;
  const double gamma = p.impatience;
  const double load = static_cast<double>(nu.n_big(p)) * r.big +
                      static_cast<double>(nu.n_small(p)) * r.small;
  const double slack = mu - load;
  auto value = [&](double rate, double h) {
    return h - gamma / mu - gamma * rate * (2.0 * mu - load) / (mu * slack * slack);
  };
  return std::max(value(r.big, nu.h_big()), value(r.small, nu.h_small()));
}

SneOutcome sne_select(const NetUtilities& nu, const FeeMenu& menu, const SystemParams& p) {
  SneOutcome out;
  out.nu = nu;
  out.incentive = -kInf;

  double rho = 0.0;
  if (served(menu.rho_low, p)) {
    out.incentive = high_fee_incentive(nu, menu.rho_low, p);
    const bool high = out.incentive > p.mean_tx_size * menu.rho_high;
    out.fee_used = high ? FeeLevel::High : FeeLevel::Low;
    rho = high ? menu.rho_high : menu.rho_low;
  } else if (served(menu.rho_high, p)) {
    out.fee_used = FeeLevel::High;
    rho = menu.rho_high;
  } else {
    out.fee_used = FeeLevel::None;
  }

  if (out.fee_used != FeeLevel::None) {
    const SneRates r = sne_rates(nu, rho, p);
    auto put = [&](UserType t, double rate) {
      RatePair& pair = out.profile.rates[t];
      (out.fee_used == FeeLevel::High ? pair.high_fee : pair.low_fee) = rate;
    };
    put(nu.bigger, r.big);
    put(other(nu.bigger), r.small);
    out.profile.kind = out.fee_used == FeeLevel::High ? SneKind::HighFeeSNE : SneKind::LowFeeSNE;
    if (r.big <= 0.0 && r.small <= 0.0) out.profile.kind = SneKind::NoGeneration;
  }

  for (UserType t : {UserType::High, UserType::Low}) {
    out.waiting[t] = waiting_rate(t, out.profile, menu, p);
  }
  return out;
}

TaxFlows tax_flows(UserType t, const StrategyProfile& s, const TaxVector& tax,
                   const SystemParams& p) {
  const UserType o = other(t);
  TaxFlows f;
  f.outflow = s.rates[t].total() * tax.row_sum(t, p);
  f.inflow = static_cast<double>(p.count(t) - 1) * s.rates[t].total() * tax.rate(t, t) +
             static_cast<double>(p.count(o)) * s.rates[o].total() * tax.rate(o, t);
  return f;
}

double deviation_payoff(UserType t, const RatePair& own, const StrategyProfile& s,
                        const FeeMenu& menu, const TaxVector& tax, const SystemParams& p) {
  const UserType o = other(t);
  const bool high_served = served(menu.rho_high, p);
  const bool low_served = served(menu.rho_low, p);
  auto served_rate = [&](const RatePair& r) {
    return (high_served ? r.high_fee : 0.0) + (low_served ? r.low_fee : 0.0);
  };

  ClassLoad others = class_load(s, p);
  others.high -= s.rates[t].high_fee;
  others.low -= s.rates[t].low_fee;

  const double utility = p.utility(t);
  const double q = tax.row_sum(t, p);
  const double sbar = p.mean_tx_size;

  double u = 0.0;
  if (high_served) u += own.high_fee * (utility - sbar * menu.rho_high - q);
  if (low_served) u += own.low_fee * (utility - sbar * menu.rho_low - q);

  const double w = waiting_rate(own, others, menu, p);
  if (p.impatience > 0.0) {
    if (std::isinf(w)) return -kInf;
    u -= p.impatience * w;
  }

  u += static_cast<double>(p.count(t) - 1) * served_rate(s.rates[t]) * tax.rate(t, t) +
       static_cast<double>(p.count(o)) * served_rate(s.rates[o]) * tax.rate(o, t);
  return u;
}

double user_payoff(UserType t, const SneOutcome& outcome, const FeeMenu& menu,
                   const TaxVector& tax, const SystemParams& p) {
  return deviation_payoff(t, outcome.profile.rates[t], outcome.profile, menu, tax, p);
}

SneOutcome solve_users(const SystemParams& p, const FeeMenu& menu, const TaxVector& tax) {
  SneOutcome out = sne_select(net_utilities(p, tax), menu, p);
  PerType<double> u;
  for (UserType t : {UserType::High, UserType::Low}) u[t] = user_payoff(t, out, menu, tax, p);
  out.payoff = u;
  return out;
}

BestResponseReport best_response_check(const SneOutcome& outcome, const FeeMenu& menu,
                                       const TaxVector& tax, const SystemParams& p, int grid,
                                       double eps) {
  if (grid < 1) throw std::invalid_argument("grid must be positive");
  const double cap = p.rate_cap();
  BestResponseReport worst;
  worst.gain = -kInf;

  for (UserType t : {UserType::High, UserType::Low}) {
    const double base = user_payoff(t, outcome, menu, tax, p);
    const double tol = eps * (std::isfinite(base) ? std::max(1.0, std::abs(base)) : 1.0);
    BestResponseReport r;
    r.type = t;
    r.sne_payoff = base;
    r.tolerance = tol;
    r.gain = -kInf;
    for (int i = 0; i <= grid; ++i) {
      for (int j = 0; i + j <= grid; ++j) {
        const RatePair dev{cap * i / grid, cap * j / grid};
        const double gain =
            deviation_payoff(t, dev, outcome.profile, menu, tax, p) - base;
        if (gain > r.gain) {
          r.gain = gain;
          r.best = dev;
        }
      }
    }
    r.ok = r.gain <= tol;
    if (!r.ok && worst.ok) {
      worst = r;
    } else if (r.ok == worst.ok && r.gain > worst.gain) {
      worst = r;
    }
  }
  return worst;
}

}  // namespace fwt
