#include "fwt/baseline_existing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "fwt/mechanism.hpp"

namespace fwt {

namespace {

struct Point {
  SneOutcome out;
  FeeMenu menu;
  double price = 0.0;
};

Point evaluate(const SystemParams& p, double fee) {
  Point pt;
  pt.menu = {fee, fee};
  const NetUtilities nu = net_utilities(p, TaxVector{});
  const SneRates r = sne_rates(nu, fee, p);
  pt.out.nu = nu;
  pt.out.fee_used = FeeLevel::High;
  pt.out.profile.rates[nu.bigger].high_fee = r.big;
  pt.out.profile.rates[other(nu.bigger)].high_fee = r.small;
  pt.out.profile.kind =
      r.big <= 0.0 && r.small <= 0.0 ? SneKind::NoGeneration : SneKind::HighFeeSNE;
  if (pt.out.profile.kind == SneKind::NoGeneration) pt.out.fee_used = FeeLevel::None;
  for (UserType t : {UserType::High, UserType::Low})
    pt.out.waiting[t] = waiting_rate(t, pt.out.profile, pt.menu, p);

  const double mu = p.block_rate;
  double load = 0.0;
  double own = 0.0;
  for (UserType t : {UserType::High, UserType::Low}) {
    const double lam = pt.out.rate_total(t);
    load += static_cast<double>(p.count(t)) * lam;
    own += static_cast<double>(p.count(t)) * lam * lam;
  }
  const double others = load > 0.0 ? load - own / load : 0.0;
  pt.price = others < mu ? p.storage_cost_per_byte +
                               p.impatience / p.mean_tx_size * others / ((mu - others) * (mu - others))
                         : std::numeric_limits<double>::infinity();
  return pt;
}

}  // namespace

ExistingOutcome existing_equilibrium(const SystemParams& p, const ExistingOptions& opt) {
  if (opt.fee_grid < 2) throw std::invalid_argument("fee grid needs at least 2 points");
  SystemParams q = p;
  const double c = opt.acceptance_cost.value_or(p.storage_cost_per_byte);
  q.storage_cost_per_byte = c;
  const double cost = opt.system_cost_per_byte.value_or(p.system_cost_per_byte());

  const double top = std::max(c, 2.0 * p.utility_high / p.mean_tx_size);
  const auto n = static_cast<std::size_t>(opt.fee_grid);

  ExistingOutcome best;
  best.acceptance_cost = c;
  best.grid_points = n;
  best.welfare = -std::numeric_limits<double>::infinity();
  bool found = false;
  for (std::size_t k = 0; k < n && !found; ++k) {
    const double fee = c + (top - c) * static_cast<double>(k) / static_cast<double>(n - 1);
    Point pt = evaluate(q, fee);
    const double w = welfare_from_rates(pt.out.profile, pt.out.waiting, q, cost);
    found = pt.price <= fee;
    if (found || w > best.welfare) {
      best.outcome = pt.out;
      best.menu = pt.menu;
      best.grid_index = k;
      best.welfare = w;
    }
    best.iterations = static_cast<int>(k) + 1;
  }
  best.converged = found;

  PerType<double> u;
  for (UserType t : {UserType::High, UserType::Low})
    u[t] = user_payoff(t, best.outcome, best.menu, TaxVector{}, q);
  best.outcome.payoff = u;
  best.payoff = u;
  best.avg_fee_per_byte = best.menu.rho_high;
  return best;
}

ExistingOutcome existing_equilibrium_hetero(const SystemParams& p, const HeteroCostParams& hc,
                                            int fee_grid) {
  ExistingOptions opt;
  opt.fee_grid = fee_grid;
  opt.acceptance_cost = hc.cost_low;
  opt.system_cost_per_byte = static_cast<double>(p.n_miners) * hc.mean_cost();
  return existing_equilibrium(p, opt);
}

}  // namespace fwt
