#pragma once

#include "json.hpp"

#include "fwt/baseline_existing.hpp"
#include "fwt/mechanism.hpp"
#include "fwt/model.hpp"
#include "fwt/sim.hpp"
#include "fwt/user_game.hpp"

namespace fwt {

using nlohmann::json;

json to_json(const SystemParams& p);
json to_json(const FeeMenu& m);
json to_json(const TaxVector& t);
json to_json(const SneOutcome& o);
json to_json(const Mechanism& m);
json to_json(const WelfareBreakdown& w);
json to_json(const SufficientFeeResult& f);
json to_json(const ExistingOutcome& e);
json to_json(const Estimate& e);
json to_json(const SimReport& r);

/// Infinite or NaN values become null.
json number(double x);

}  // namespace fwt
