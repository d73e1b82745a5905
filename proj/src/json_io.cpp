#include "fwt/json_io.hpp"

#include <cmath>

namespace fwt {

namespace {

template <class F>
json per_type(F f) {
  return json{{"high", f(UserType::High)}, {"low", f(UserType::Low)}};
}

json optional_number(const std::optional<double>& x) { return x ? number(*x) : json(nullptr); }

std::string i128(__int128 v) {
  if (v == 0) return "0";
  const bool neg = v < 0;
  std::string s;
  while (v != 0) {
    const int d = static_cast<int>(v % 10);
    s.insert(s.begin(), static_cast<char>('0' + (neg ? -d : d)));
    v /= 10;
  }
  return neg ? "-" + s : s;
}

}  // namespace

json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json to_json(const SystemParams& p) {
  json j{{"n_users_high", p.n_users_high},
         {"n_users_low", p.n_users_low},
         {"n_miners", p.n_miners},
         {"block_rate", p.block_rate},
         {"impatience", p.impatience},
         {"mean_tx_size", p.mean_tx_size},
         {"storage_cost_per_byte", p.storage_cost_per_byte},
         {"utility_high", p.utility_high},
         {"utility_low", p.utility_low}};
  j["mining_power"] = p.mining_power.empty() ? json("uniform") : json(p.mining_power);
  return j;
}

json to_json(const FeeMenu& m) { return {{"rho_high", m.rho_high}, {"rho_low", m.rho_low}}; }

json to_json(const TaxVector& t) {
  return {{"P_HH", t.p_hh}, {"P_HL", t.p_hl}, {"P_LH", t.p_lh}, {"P_LL", t.p_ll}};
}

json to_json(const SneOutcome& o) {
  json j;
  j["sne_kind"] = to_string(o.profile.kind);
  j["fee_used"] = to_string(o.fee_used);
  j["rates"] = per_type([&](UserType t) {
    const RatePair& r = o.profile.rates[t];
    return json{{"rate_high", r.high_fee}, {"rate_low", r.low_fee}};
  });
  j["waiting_rate"] = per_type([&](UserType t) { return number(o.waiting[t]); });
  j["payoff"] = o.payoff ? per_type([&](UserType t) { return number((*o.payoff)[t]); }) : json(nullptr);
  j["net_utility"] = per_type([&](UserType t) { return o.nu.h[t]; });
  j["bigger_type"] = to_string(o.nu.bigger);
  j["high_fee_incentive"] = number(o.incentive);
  return j;
}

json to_json(const Mechanism& m) {
  return {{"rho_high", m.menu.rho_high},
          {"rho_low", m.menu.rho_low},
          {"P_HH", m.tax.p_hh},
          {"P_HL", m.tax.p_hl},
          {"P_LH", m.tax.p_lh},
          {"P_LL", m.tax.p_ll},
          {"q_H", m.row_sums.high},
          {"q_L", m.row_sums.low},
          {"regime", m.regime},
          {"g1", m.g1},
          {"g2", m.g2},
          {"tax_split", to_string(m.split)},
          {"split_fell_back", m.split_fell_back},
          {"negative_tax_entry", m.has_negative_entry()}};
}

json to_json(const WelfareBreakdown& w) {
  return {{"total", number(w.total)},
          {"user_sum", number(w.user_sum)},
          {"miner_sum", number(w.miner_sum)},
          {"user_payoff", per_type([&](UserType t) { return number(w.user_payoff[t]); })},
          {"avg_fee_per_byte", per_type([&](UserType t) { return optional_number(w.avg_fee[t]); })}};
}

json to_json(const SufficientFeeResult& f) {
  return {{"ok", f.ok},
          {"avg_fee_per_byte", per_type([&](UserType t) { return optional_number(f.avg_fee[t]); })}};
}

json to_json(const ExistingOutcome& e) {
  json j = to_json(e.outcome);
  j["avg_fee_per_byte"] = e.avg_fee_per_byte;
  j["converged"] = e.converged;
  j["iterations"] = e.iterations;
  j["acceptance_cost"] = e.acceptance_cost;
  j["grid_index"] = e.grid_index;
  j["grid_points"] = e.grid_points;
  j["welfare"] = number(e.welfare);
  return j;
}

json to_json(const Estimate& e) {
  return {{"mean", number(e.mean)}, {"ci95_half_width", number(e.half_width)}, {"n", e.n}};
}

json to_json(const SimReport& r) {
  json j;
  j["waiting_rate"] = per_type([&](UserType t) { return to_json(r.waiting_rate[t]); });
  j["censored_waiting_rate"] = per_type([&](UserType t) { return to_json(r.censored_waiting_rate[t]); });
  j["payoff"] = per_type([&](UserType t) { return to_json(r.payoff[t]); });
  j["welfare"] = to_json(r.welfare);
  j["conservation_ok"] = r.conservation_ok();
  json reps = json::array();
  for (const auto& x : r.replications) {
    reps.push_back({{"blocks", x.blocks},
                    {"empty_blocks", x.empty_blocks},
                    {"generated_high_fee", x.generated_high},
                    {"generated_low_fee", x.generated_low},
                    {"included_high_fee", x.included_high},
                    {"included_low_fee", x.included_low},
                    {"censored_high_fee", x.censored_high},
                    {"censored_low_fee", x.censored_low},
                    {"welfare", x.welfare},
                    {"fees_paid_atto", i128(x.ledger.fees_paid)},
                    {"fees_received_atto", i128(x.ledger.fees_received)},
                    {"tax_out_atto", i128(x.ledger.tax_out)},
                    {"tax_in_atto", i128(x.ledger.tax_in)}});
  }
  j["replications"] = reps;
  return j;
}

}  // namespace fwt
