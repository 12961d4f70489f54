// Command-line front end: grid / scenario / run / sweep / trace.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "bbs/config.hpp"
#include "bbs/harness.hpp"
#include "bbs/mechanism.hpp"
#include "bbs/scenario.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string mechanisms;
  std::string sweep_axis;
};

bbs::ExperimentConfig make_config(const CommonOpts& opts) {
  bbs::Config raw;
  if (!opts.config_path.empty()) raw = bbs::Config::load(opts.config_path);
  if (opts.seed_set) raw.set("seed", std::to_string(opts.seed));
  if (!opts.out_dir.empty()) raw.set("out", opts.out_dir);
  if (!opts.mechanisms.empty()) raw.set("mechanisms", opts.mechanisms);
  if (!opts.sweep_axis.empty()) raw.set("sweep.axis", opts.sweep_axis);
  return bbs::load_experiment_config(raw);
}

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_sweep) {
  cmd->add_option("--config", opts.config_path, "configuration file");
  cmd->add_option("--out", opts.out_dir, "output directory");
  cmd->add_option("--seed", opts.seed, "master seed override")
      ->each([&](const std::string&) { opts.seed_set = true; });
  cmd->add_option("--mechanisms", opts.mechanisms,
                  "comma list: bbs,wta,mw,rev_full,rev_ic,prop_share");
  if (with_sweep) {
    cmd->add_option("--sweep", opts.sweep_axis, "sweep axis: budget | lambda");
  }
}

void ensure_out(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (!dir.empty() && !fs::is_directory(dir)) {
    throw std::runtime_error("cannot create output directory '" + dir + "'");
  }
}

int cmd_grid(const CommonOpts& opts) {
  bbs::ExperimentConfig cfg = make_config(opts);
  const auto& g = cfg.scenario.grid;
  bbs::AoiGrid grid = bbs::AoiGrid::manhattan(g.avenues, g.streets, g.avenue_len_m,
                                              g.street_len_m, g.spacing_m);
  std::cout << "points=" << grid.point_count()
            << " avenues=" << grid.avenues() << " streets=" << grid.streets()
            << " intersections=" << grid.intersection_count() << "\n";
  if (!opts.out_dir.empty()) {
    ensure_out(opts.out_dir);
    std::ofstream out(fs::path(opts.out_dir) / "grid.csv");
    if (!out) throw std::runtime_error("cannot write grid.csv");
    grid.write_points(out);
  }
  return 0;
}

int cmd_scenario(const CommonOpts& opts) {
  bbs::ExperimentConfig cfg = make_config(opts);
  bbs::Scenario s = bbs::build_scenario(cfg.scenario, cfg.master_seed);
  std::cout << "users=" << s.population.users.size()
            << " arrivals=" << s.arrivals.size() << " points="
            << s.grid.point_count() << "\n";
  if (!opts.out_dir.empty()) {
    ensure_out(opts.out_dir);
    std::ofstream out(fs::path(opts.out_dir) / "scenario.txt");
    if (!out) throw std::runtime_error("cannot write scenario.txt");
    bbs::write_scenario(s, out);
  }
  return 0;
}

int cmd_run(const CommonOpts& opts) {
  bbs::ExperimentConfig cfg = make_config(opts);
  cfg.sweep_values = {cfg.sweep_axis == "budget" ? cfg.mechanism.total_budget
                                                 : cfg.scenario.rate};
  cfg.replications = 1;
  std::string out_dir = cfg.out_dir;
  cfg.out_dir.clear();
  bbs::ExperimentResult result = bbs::run_experiment(cfg);
  for (const bbs::RunRecord& r : result.runs) {
    std::cout << "mechanism=" << r.mechanism << " utility=" << r.utility
              << " participation=" << r.participation
              << " payments=" << bbs::format_number(r.payments);
    if (r.mean_error) std::cout << " mean_error=" << bbs::format_number(*r.mean_error);
    if (r.final_e_star) std::cout << " e_star=" << bbs::format_number(*r.final_e_star);
    std::cout << "\n";
  }
  if (!out_dir.empty()) {
    ensure_out(out_dir);
    std::ofstream out(fs::path(out_dir) / "runs.csv");
    if (!out) throw std::runtime_error("cannot write runs.csv");
    bbs::write_runs_csv(result.runs, out);
  }
  return 0;
}

int cmd_sweep(const CommonOpts& opts) {
  bbs::ExperimentConfig cfg = make_config(opts);
  if (cfg.out_dir.empty()) cfg.out_dir = "out";
  bbs::ExperimentResult result = bbs::run_experiment(cfg);
  std::cout << "sweep_points=" << cfg.sweep_values.size()
            << " replications=" << cfg.replications
            << " rows=" << result.metrics.size() << " out=" << cfg.out_dir << "\n";
  return 0;
}

int cmd_trace(const CommonOpts& opts) {
  bbs::ExperimentConfig cfg = make_config(opts);
  std::uint64_t run_seed = bbs::derive_seed(cfg.master_seed, {0x101, 0, 0});
  bbs::Scenario s = bbs::build_scenario(cfg.scenario, bbs::derive_seed(run_seed, {0x102}));
  bbs::MechanismConfig mc = cfg.mechanism;
  mc.horizon = cfg.scenario.horizon;
  mc.ability_exponent = cfg.scenario.ability_exponent;
  mc.world_seed = bbs::derive_seed(run_seed, {0x103});
  mc.seed = bbs::derive_seed(run_seed, {0x104, 0});
  auto expected = static_cast<long long>(
      std::llround(cfg.scenario.rate * cfg.scenario.horizon));
  mc.expected_bidders = static_cast<int>(std::min<long long>(
      std::max<long long>(expected, 1),
      static_cast<long long>(cfg.scenario.population)));
  bbs::MechanismOutcome o =
      bbs::run_bbs(s.arrivals, mc, s.grid, s.params.profile);
  std::cout << "events=" << o.events.size() << " stages=" << o.stages.size()
            << " utility=" << o.total_utility
            << " payments=" << bbs::format_number(o.total_payments()) << "\n";
  std::string out_dir = cfg.out_dir.empty() ? "out" : cfg.out_dir;
  ensure_out(out_dir);
  std::ofstream events(fs::path(out_dir) / "events.csv");
  std::ofstream stages(fs::path(out_dir) / "stages.csv");
  if (!events || !stages) throw std::runtime_error("cannot write trace files");
  bbs::write_event_trace(o, events);
  bbs::write_stage_trace(o, stages);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"budgeted online crowd-sensing contest simulator"};
  app.require_subcommand(1);

  CommonOpts grid_opts, scenario_opts, run_opts, sweep_opts, trace_opts;
  add_common(app.add_subcommand("grid", "build the road grid and export it"),
             grid_opts, false);
  add_common(app.add_subcommand("scenario", "generate a seeded scenario"),
             scenario_opts, false);
  add_common(app.add_subcommand("run", "one seeded run of the selected mechanisms"),
             run_opts, false);
  add_common(app.add_subcommand("sweep", "full sweep with replications"), sweep_opts,
             true);
  add_common(app.add_subcommand("trace", "event and stage trace of one run"),
             trace_opts, false);

  try {
    app.parse(argc, argv);
    if (app.got_subcommand("grid")) return cmd_grid(grid_opts);
    if (app.got_subcommand("scenario")) return cmd_scenario(scenario_opts);
    if (app.got_subcommand("run")) return cmd_run(run_opts);
    if (app.got_subcommand("sweep")) return cmd_sweep(sweep_opts);
    if (app.got_subcommand("trace")) return cmd_trace(trace_opts);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    nlohmann::json err;
    err["error"] = e.what();
    std::cerr << err.dump() << "\n";
    return 1;
  }
  return 0;
}
