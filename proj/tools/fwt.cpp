// fwt: solve, sweep, simulate and check the fee-and-waiting-tax model.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fwt/baseline_existing.hpp"
#include "fwt/config.hpp"
#include "fwt/harness.hpp"
#include "fwt/json_io.hpp"
#include "fwt/sim.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kCheckFailed = 1;
constexpr int kInvalid = 2;

struct InvalidInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void emit(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(out);
  if (!f) throw InvalidInput("cannot write " + out);
  f << text;
}

fwt::HeteroCostParams parse_hetero(const std::string& spec, double cost_low) {
  const auto eq = spec.find('=');
  const std::string key = eq == std::string::npos ? "ratio" : spec.substr(0, eq);
  const std::string val = eq == std::string::npos ? spec : spec.substr(eq + 1);
  if (key != "ratio") throw InvalidInput("--hetero expects ratio=x");
  double ratio = 0.0;
  try {
    ratio = std::stod(val);
  } catch (const std::exception&) {
    throw InvalidInput("bad hetero ratio '" + val + "'");
  }
  auto hc = fwt::HeteroCostParams::from_ratio(cost_low, ratio);
  const auto v = fwt::validate_hetero(hc);
  if (!v.ok()) throw InvalidInput(v.joined());
  return hc;
}

fwt::TaxSplit parse_split(const std::string& s) {
  if (s == "fairness") return fwt::TaxSplit::Fairness;
  if (s == "uniform") return fwt::TaxSplit::Uniform;
  throw InvalidInput("--tax-split must be fairness or uniform");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fee and waiting tax mechanism: solver, sweeps, simulator and checks"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_path;
  std::vector<std::string> params;
  std::uint64_t seed = 1;
  bool paper_scale = false;
  app.add_option("--config", config_path, "flat key = value parameter file");
  app.add_option("--param", params, "override one parameter, key=value")->take_all();
  app.add_option("--out", out_path, "output file (default stdout)");
  app.add_option("--seed", seed, "root seed for randomized commands");
  app.add_flag("--paper-scale", paper_scale, "full-network user counts");

  auto* solve_cmd = app.add_subcommand("solve", "optimal mechanism, equilibrium and welfare as JSON");
  std::string hetero_spec, split_name = "fairness";
  bool with_existing = false;
  solve_cmd->add_option("--hetero", hetero_spec, "heterogeneous storage costs, ratio=x");
  solve_cmd->add_option("--tax-split", split_name, "fairness or uniform");
  solve_cmd->add_flag("--existing", with_existing, "also report the Existing surrogate");

  auto* sweep_cmd = app.add_subcommand("sweep", "parameter sweep as CSV");
  std::string axis_name;
  std::optional<double> lo, hi;
  int steps = 10;
  double high_fraction = 0.5;
  int fee_grid = 200;
  sweep_cmd->add_option("axis", axis_name, "gamma, r_high, n_users or cost_ratio")->required();
  sweep_cmd->add_option("--lo", lo, "lower end of the axis");
  sweep_cmd->add_option("--hi", hi, "upper end of the axis");
  sweep_cmd->add_option("--steps", steps, "number of points");
  sweep_cmd->add_option("--high-fraction", high_fraction, "share of type-H users on the n_users axis");
  sweep_cmd->add_option("--tax-split", split_name, "fairness or uniform");
  sweep_cmd->add_option("--fee-grid", fee_grid, "Existing fee grid points");

  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo run of an equilibrium profile");
  std::string scheme = "fwt", event_log;
  double horizon = 0.0, warmup = 0.1;
  int replications = 10;
  sim_cmd->add_option("--scheme", scheme, "fwt or existing");
  sim_cmd->add_option("--horizon", horizon, "simulated time (default 1e5 blocks after warmup)");
  sim_cmd->add_option("--warmup", warmup, "fraction of the horizon discarded");
  sim_cmd->add_option("--replications", replications, "independent replications");
  sim_cmd->add_option("--event-log", event_log, "CSV event log of replication 0");
  sim_cmd->add_option("--tax-split", split_name, "fairness or uniform");

  auto* check_cmd = app.add_subcommand("check", "run an oracle suite; exit 1 on failure");
  std::string suite;
  std::optional<int> budget;
  check_cmd->add_option("suite", suite, "suite name or all")->required();
  check_cmd->add_option("--budget", budget, "sample budget (meaning depends on the suite)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }

  try {
    fwt::SystemParams p;
    try {
      if (!config_path.empty()) p = fwt::read_config_file(config_path);
      for (const auto& kv : params) fwt::apply_param(p, kv);
    } catch (const std::invalid_argument& e) {
      throw InvalidInput(e.what());
    }
    if (paper_scale && solve_cmd->parsed()) {
      p.n_users_high = 76500;
      p.n_users_low = 76500;
    } else if (paper_scale && !sweep_cmd->parsed()) {
      std::cerr << "note: --paper-scale only affects solve and sweep\n";
    }
    const auto v = fwt::validate_params(p);
    if (!v.ok()) throw InvalidInput("invalid parameters: " + v.joined());
    const fwt::TaxSplit split = parse_split(split_name);

    if (solve_cmd->parsed()) {
      std::optional<fwt::HeteroCostParams> hc;
      if (!hetero_spec.empty()) hc = parse_hetero(hetero_spec, p.storage_cost_per_byte);
      const auto r = fwt::solve(p, split, hc);
      nlohmann::json j = fwt::to_json(r);
      j["params"] = fwt::to_json(p);
      if (with_existing) {
        const auto ex = hc ? fwt::existing_equilibrium_hetero(p, *hc) : fwt::existing_equilibrium(p);
        j["existing"] = fwt::to_json(ex);
      }
      emit(out_path, j.dump(2) + "\n");
      return kOk;
    }

    if (sweep_cmd->parsed()) {
      fwt::SweepOptions opt;
      try {
        opt.axis = fwt::parse_axis(axis_name);
      } catch (const std::invalid_argument& e) {
        throw InvalidInput(e.what());
      }
      opt.lo = lo;
      opt.hi = hi;
      opt.steps = steps;
      opt.paper_scale = paper_scale;
      opt.high_fraction = high_fraction;
      opt.split = split;
      opt.fee_grid = fee_grid;
      if (steps < 1 || fee_grid < 2 || !(high_fraction > 0.0 && high_fraction < 1.0))
        throw InvalidInput("steps >= 1, fee-grid >= 2 and 0 < high-fraction < 1 required");
      std::ostringstream os;
      fwt::write_sweep_csv(os, fwt::sweep(p, opt));
      emit(out_path, os.str());
      return kOk;
    }

    if (sim_cmd->parsed()) {
      fwt::SimulateOptions opt;
      opt.scheme = scheme;
      opt.horizon = horizon;
      opt.warmup = warmup;
      opt.replications = replications;
      opt.seed = seed;
      opt.split = split;
      opt.record_log = !event_log.empty();
      if (scheme != "fwt" && scheme != "existing") throw InvalidInput("--scheme must be fwt or existing");
      fwt::SimReport rep;
      const nlohmann::json j = fwt::simulate(p, opt, &rep);
      if (opt.record_log) {
        std::ofstream f(event_log);
        if (!f) throw InvalidInput("cannot write " + event_log);
        fwt::write_event_log(f, rep.log);
      }
      emit(out_path, j.dump(2) + "\n");
      return kOk;
    }

    if (check_cmd->parsed()) {
      std::vector<std::string> suites;
      if (suite == "all") {
        suites = fwt::check_suites();
      } else {
        bool known = false;
        for (const auto& s : fwt::check_suites()) known = known || s == suite;
        if (!known) throw InvalidInput("unknown check suite '" + suite + "'");
        suites.push_back(suite);
      }
      nlohmann::json j = nlohmann::json::array();
      bool all_pass = true;
      for (const auto& s : suites) {
        const auto r = fwt::run_check(s, budget, seed, p);
        all_pass = all_pass && r.pass;
        std::cerr << (r.pass ? "PASS " : "FAIL ") << s << ": " << r.summary << '\n';
        for (const auto& f : r.failures_detail) std::cerr << "  " << f << '\n';
        j.push_back(fwt::to_json(r));
      }
      emit(out_path, (suites.size() == 1 ? j[0] : j).dump(2) + "\n");
      return all_pass ? kOk : kCheckFailed;
    }
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  }
  return kOk;
}
