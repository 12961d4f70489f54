#include "bbs/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

namespace bbs {

namespace {

constexpr std::uint64_t kRunTag = 0x101;
constexpr std::uint64_t kScenarioTag = 0x102;
constexpr std::uint64_t kWorldTag = 0x103;
constexpr std::uint64_t kMechTag = 0x104;

int mechanism_index(const std::string& tag) {
  for (std::size_t k = 0; k < kAllMechanisms.size(); ++k) {
    if (kAllMechanisms[k] == tag) return static_cast<int>(k);
  }
  throw std::invalid_argument("harness: unknown mechanism '" + tag + "'");
}

struct Stats {
  double mean = 0.0;
  double std_dev = 0.0;
};

Stats stats_of(const std::vector<double>& xs) {
  Stats s;
  if (xs.empty()) return s;
  for (double x : xs) s.mean += x;
  s.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double acc = 0.0;
    for (double x : xs) acc += (x - s.mean) * (x - s.mean);
    s.std_dev = std::sqrt(acc / static_cast<double>(xs.size() - 1));
  }
  return s;
}

std::string opt_cell(const std::optional<double>& v) {
  return v ? format_number(*v) : std::string();
}

}  // namespace

std::string format_number(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::uint64_t child_seed(std::uint64_t master, int sweep_index, int replication,
                         int mech_index) {
  return derive_seed(master, {kMechTag, static_cast<std::uint64_t>(sweep_index),
                              static_cast<std::uint64_t>(replication),
                              static_cast<std::uint64_t>(mech_index)});
}

ExperimentConfig load_experiment_config(const Config& cfg) {
  ExperimentConfig ec;
  ec.scenario.grid.avenues = cfg.get_int("grid.avenues", ec.scenario.grid.avenues);
  ec.scenario.grid.streets = cfg.get_int("grid.streets", ec.scenario.grid.streets);
  ec.scenario.grid.avenue_len_m =
      cfg.get_double("grid.avenue_len_m", ec.scenario.grid.avenue_len_m);
  ec.scenario.grid.street_len_m =
      cfg.get_double("grid.street_len_m", ec.scenario.grid.street_len_m);
  ec.scenario.grid.spacing_m = cfg.get_double("grid.spacing_m", ec.scenario.grid.spacing_m);
  ec.scenario.population = cfg.get_int("population.count", ec.scenario.population);
  ec.scenario.ability_exponent =
      cfg.get_double("population.ability_exponent", ec.scenario.ability_exponent);
  ec.scenario.heterogeneous_ranges =
      cfg.get_bool("population.heterogeneous_ranges", ec.scenario.heterogeneous_ranges);
  ec.scenario.range_min_m = cfg.get_double("population.range_min_m", ec.scenario.range_min_m);
  ec.scenario.range_max_m = cfg.get_double("population.range_max_m", ec.scenario.range_max_m);
  ec.scenario.fixed_range_m =
      cfg.get_double("population.fixed_range_m", ec.scenario.fixed_range_m);
  ec.scenario.rate = cfg.get_double("arrivals.rate", ec.scenario.rate);
  ec.scenario.horizon = cfg.get_int("arrivals.horizon", ec.scenario.horizon);
  ec.scenario.profile.walk_scale_m =
      cfg.get_double("profile.walk_scale_m", ec.scenario.profile.walk_scale_m);
  ec.scenario.profile.noise_scale =
      cfg.get_double("profile.noise_scale", ec.scenario.profile.noise_scale);

  ec.mechanism.total_budget = cfg.get_double("mechanism.budget", ec.mechanism.total_budget);
  ec.mechanism.horizon = ec.scenario.horizon;
  ec.mechanism.initial_effort =
      cfg.get_double("mechanism.initial_effort", ec.mechanism.initial_effort);
  ec.mechanism.initial_min_prize =
      cfg.get_double("mechanism.initial_min_prize", ec.mechanism.initial_min_prize);
  ec.mechanism.threshold_branch_probability = cfg.get_double(
      "mechanism.threshold_probability", ec.mechanism.threshold_branch_probability);
  ec.mechanism.effort_floor = cfg.get_double("mechanism.effort_floor", ec.mechanism.effort_floor);
  ec.mechanism.ability_exponent = ec.scenario.ability_exponent;

  std::string routing = cfg.get_str("mechanism.routing", "per_user");
  if (routing == "per_user") {
    ec.mechanism.routing = RoutingMode::per_user;
  } else if (routing == "per_run") {
    ec.mechanism.routing = RoutingMode::per_run;
  } else {
    throw std::runtime_error("config: mechanism.routing must be per_user or per_run");
  }

  std::string vbar = cfg.get_str("mechanism.v_bar", "fixed_point");
  if (vbar == "fixed_point") {
    ec.mechanism.v_bar_mode = VBarMode::fixed_point;
  } else if (vbar == "fixed") {
    ec.mechanism.v_bar_mode = VBarMode::fixed_m1;
  } else {
    throw std::runtime_error("config: mechanism.v_bar must be fixed or fixed_point");
  }

  std::string sampling = cfg.get_str("mechanism.secretary_sample", "one_over_e");
  if (sampling == "one_over_e") {
    ec.mechanism.secretary_sample = SecretarySampleMode::one_over_e;
  } else if (sampling == "first_stage") {
    ec.mechanism.secretary_sample = SecretarySampleMode::first_stage;
  } else {
    throw std::runtime_error(
        "config: mechanism.secretary_sample must be one_over_e or first_stage");
  }

  std::string policy = cfg.get_str("mechanism.policy", "grid_search");
  if (policy == "grid_search") {
    ec.mechanism.policy = GridSearch{cfg.get_int("mechanism.policy_max_prizes", 10)};
  } else if (policy == "equal_split") {
    ec.mechanism.policy = EqualSplit{cfg.get_int("mechanism.policy_prizes", 5)};
  } else if (policy == "geometric") {
    ec.mechanism.policy = Geometric{cfg.get_double("mechanism.policy_ratio", 0.5),
                                    cfg.get_int("mechanism.policy_prizes", 5)};
  } else {
    throw std::runtime_error("config: unknown mechanism.policy '" + policy + "'");
  }

  ec.mw_prizes = cfg.get_int("mechanism.mw_prizes", ec.mw_prizes);
  ec.sweep_axis = cfg.get_str("sweep.axis", ec.sweep_axis);
  if (ec.sweep_axis != "budget" && ec.sweep_axis != "lambda") {
    throw std::runtime_error("config: sweep.axis must be budget or lambda");
  }
  ec.sweep_values = cfg.get_double_list("sweep.values", ec.sweep_values);
  ec.replications = cfg.get_int("replications", ec.replications);
  if (ec.replications < 1) throw std::runtime_error("config: replications must be >= 1");
  ec.mechanisms = cfg.get_str_list("mechanisms", ec.mechanisms);
  for (const std::string& m : ec.mechanisms) mechanism_index(m);
  ec.out_dir = cfg.get_str("out", ec.out_dir);
  ec.master_seed = cfg.get_u64("seed", ec.master_seed);
  return ec;
}

std::optional<double> mean_winner_error(const MechanismOutcome& outcome) {
  double sum = 0.0;
  int n = 0;
  for (std::uint32_t user : outcome.winners) {
    auto it = outcome.errors.find(user);
    if (it != outcome.errors.end()) {
      sum += it->second;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / n;
}

std::optional<double> final_e_star(const MechanismOutcome& outcome) {
  for (auto it = outcome.stages.rbegin(); it != outcome.stages.rend(); ++it) {
    if (it->recomputed) return it->e_star;
  }
  return std::nullopt;
}

std::map<std::string, MechanismOutcome> run_all_mechanisms(
    const Scenario& scenario, const ExperimentConfig& cfg, std::uint64_t run_seed,
    std::uint64_t world_seed, double budget) {
  std::map<std::string, MechanismOutcome> out;
  const auto& arrivals = scenario.arrivals;
  const ProfileModel& model = scenario.params.profile;

  MechanismConfig base = cfg.mechanism;
  base.total_budget = budget;
  base.horizon = scenario.params.horizon;
  base.ability_exponent = scenario.params.ability_exponent;
  base.world_seed = world_seed;
  auto expected = static_cast<long long>(
      std::llround(scenario.params.rate * scenario.params.horizon));
  base.expected_bidders = static_cast<int>(std::clamp<long long>(
      expected, 1, static_cast<long long>(scenario.population.users.size())));

  auto cfg_for = [&](const std::string& tag) {
    MechanismConfig c = base;
    c.seed = derive_seed(run_seed, {kMechTag, static_cast<std::uint64_t>(
                                                  mechanism_index(tag))});
    return c;
  };

  MechanismOutcome bbs_out;
  MechanismOutcome wta_out;
  MechanismOutcome mw_out;
  if (!arrivals.empty()) {
    bbs_out = run_bbs(arrivals, cfg_for("bbs"), scenario.grid, model);
    wta_out = winner_take_all(arrivals, budget, cfg_for("wta"), scenario.grid, model);
    mw_out = multiple_winners(arrivals, budget, std::max(2, cfg.mw_prizes),
                              cfg_for("mw"), scenario.grid, model);
  }

  // Union pool for the omniscient buyer: per user the highest-effort
  // submission seen under any all-pay mechanism. Profiles share the walk
  // stream, so the higher effort covers a superset.
  std::vector<Submission> union_pool;
  std::vector<Submission> bbs_pool;
  std::map<std::uint32_t, const Arrival*> by_user;
  for (const Arrival& a : arrivals) by_user[a.user.id] = &a;
  std::map<std::uint32_t, Submission> best;
  for (const MechanismOutcome* o : {&bbs_out, &wta_out, &mw_out}) {
    for (const auto& [user, profile] : o->profiles) {
      double effort = o->efforts.at(user);
      auto it = best.find(user);
      if (it == best.end() || effort > it->second.effort) {
        Submission s{user, effort, by_user.at(user)->user.theta,
                     o->errors.count(user) ? o->errors.at(user) : 0.0, profile};
        best[user] = std::move(s);
      }
    }
  }
  for (auto& [user, s] : best) union_pool.push_back(s);
  for (const auto& [user, profile] : bbs_out.profiles) {
    bbs_pool.push_back({user, bbs_out.efforts.at(user), by_user.at(user)->user.theta,
                        bbs_out.errors.count(user) ? bbs_out.errors.at(user) : 0.0,
                        profile});
  }

  // Fixed services for the plain proportional-share rule: every arrival's
  // zero-effort submission (no contest incentive behind it).
  std::vector<Submission> fixed_pool;
  SplitMix64 world(world_seed);
  SplitMix64 profile_root = world.split(kProfileStreamTag);
  SplitMix64 noise_root = world.split(kNoiseStreamTag);
  for (const Arrival& a : arrivals) {
    SplitMix64 prng = profile_root.split(a.user.id);
    SensingProfile p = realize_profile(a.user, 0.0, scenario.grid, model, prng);
    SplitMix64 nrng = noise_root.split(a.user.id);
    double err = measurement_error(0.0, model.noise_scale, nrng);
    fixed_pool.push_back({a.user.id, 0.0, a.user.theta, err, std::move(p)});
  }

  // The omniscient buyer also sees the free fixed services. A user's contest
  // submission covers a superset of their own fixed service (same walk
  // stream), so only users without one add anything.
  for (const Submission& s : fixed_pool) {
    if (!best.count(s.user)) union_pool.push_back(s);
  }

  for (const std::string& tag : cfg.mechanisms) {
    if (tag == "bbs") {
      out[tag] = bbs_out;
    } else if (tag == "wta") {
      out[tag] = wta_out;
    } else if (tag == "mw") {
      out[tag] = mw_out;
    } else if (tag == "rev_full") {
      out[tag] = offline_reverse_auction(union_pool, scenario.grid.point_count(),
                                         budget, ReverseVariant::full_knowledge,
                                         cfg.mechanism.policy);
    } else if (tag == "rev_ic") {
      out[tag] = offline_reverse_auction(bbs_pool, scenario.grid.point_count(), budget,
                                         ReverseVariant::incentive_compatible,
                                         cfg.mechanism.policy);
    } else if (tag == "prop_share") {
      out[tag] = offline_reverse_auction(fixed_pool, scenario.grid.point_count(),
                                         budget, ReverseVariant::incentive_compatible,
                                         cfg.mechanism.policy);
    }
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  std::ofstream metrics_file, runs_file, manifest_file;
  if (!cfg.out_dir.empty()) {
    std::error_code ec;
    fs::create_directories(cfg.out_dir, ec);
    metrics_file.open(fs::path(cfg.out_dir) / "metrics.csv");
    runs_file.open(fs::path(cfg.out_dir) / "runs.csv");
    manifest_file.open(fs::path(cfg.out_dir) / "manifest.json");
    if (!metrics_file || !runs_file || !manifest_file) {
      throw std::runtime_error("harness: cannot write to '" + cfg.out_dir + "'");
    }
  }

  ExperimentResult result;
  for (std::size_t sweep = 0; sweep < cfg.sweep_values.size(); ++sweep) {
    double value = cfg.sweep_values[sweep];
    std::map<std::string, std::vector<RunRecord>> per_mechanism;
    for (int rep = 0; rep < cfg.replications; ++rep) {
      ScenarioParams params = cfg.scenario;
      double budget = cfg.mechanism.total_budget;
      if (cfg.sweep_axis == "budget") {
        budget = value;
      } else {
        params.rate = value;
      }
      std::uint64_t run_seed = derive_seed(
          cfg.master_seed, {kRunTag, static_cast<std::uint64_t>(sweep),
                            static_cast<std::uint64_t>(rep)});
      std::uint64_t scenario_seed = derive_seed(run_seed, {kScenarioTag});
      std::uint64_t world_seed = derive_seed(run_seed, {kWorldTag});
      Scenario scenario = build_scenario(params, scenario_seed);
      auto outcomes = run_all_mechanisms(scenario, cfg, run_seed, world_seed, budget);
      for (const std::string& tag : cfg.mechanisms) {
        const MechanismOutcome& o = outcomes.at(tag);
        RunRecord rec{value,
                      rep,
                      tag,
                      o.total_utility,
                      o.participation(),
                      o.total_payments(),
                      mean_winner_error(o),
                      final_e_star(o)};
        per_mechanism[tag].push_back(rec);
        result.runs.push_back(rec);
      }
    }
    for (const std::string& tag : cfg.mechanisms) {
      const auto& recs = per_mechanism[tag];
      std::vector<double> util, part, pay, err, estar;
      for (const RunRecord& r : recs) {
        util.push_back(static_cast<double>(r.utility));
        part.push_back(static_cast<double>(r.participation));
        pay.push_back(r.payments);
        if (r.mean_error) err.push_back(*r.mean_error);
        if (r.final_e_star) estar.push_back(*r.final_e_star);
      }
      Stats u = stats_of(util), p = stats_of(part), m = stats_of(pay);
      Stats e = stats_of(err), s = stats_of(estar);
      MetricRow row{value,
                    tag,
                    u.mean,
                    u.std_dev,
                    p.mean,
                    p.std_dev,
                    m.mean,
                    m.std_dev,
                    err.empty() ? std::nullopt : std::optional<double>(e.mean),
                    err.empty() ? std::nullopt : std::optional<double>(e.std_dev),
                    estar.empty() ? std::nullopt : std::optional<double>(s.mean),
                    estar.empty() ? std::nullopt : std::optional<double>(s.std_dev)};
      result.metrics.push_back(row);
    }
  }

  if (!cfg.out_dir.empty()) {
    write_metrics_csv(result.metrics, metrics_file);
    write_runs_csv(result.runs, runs_file);

    nlohmann::ordered_json manifest;
    manifest["seed"] = cfg.master_seed;
    manifest["sweep_axis"] = cfg.sweep_axis;
    manifest["sweep_values"] = cfg.sweep_values;
    manifest["replications"] = cfg.replications;
    manifest["mechanisms"] = cfg.mechanisms;
    manifest["scenario"] = {{"avenues", cfg.scenario.grid.avenues},
                            {"streets", cfg.scenario.grid.streets},
                            {"avenue_len_m", cfg.scenario.grid.avenue_len_m},
                            {"street_len_m", cfg.scenario.grid.street_len_m},
                            {"spacing_m", cfg.scenario.grid.spacing_m},
                            {"population", cfg.scenario.population},
                            {"ability_exponent", cfg.scenario.ability_exponent},
                            {"rate", cfg.scenario.rate},
                            {"horizon", cfg.scenario.horizon}};
    manifest["mechanism"] = {
        {"budget", cfg.mechanism.total_budget},
        {"threshold_probability", cfg.mechanism.threshold_branch_probability},
        {"routing", cfg.mechanism.routing == RoutingMode::per_user ? "per_user" : "per_run"},
        {"v_bar", cfg.mechanism.v_bar_mode == VBarMode::fixed_point ? "fixed_point" : "fixed"},
        {"mw_prizes", cfg.mw_prizes}};
    manifest["outputs"] = {"metrics.csv", "runs.csv"};
    manifest_file << manifest.dump(2) << "\n";
  }
  return result;
}

std::vector<std::vector<StageRecord>> threshold_trace(const ExperimentConfig& cfg) {
  std::vector<std::vector<StageRecord>> traces;
  for (int rep = 0; rep < cfg.replications; ++rep) {
    std::uint64_t run_seed =
        derive_seed(cfg.master_seed, {kRunTag, 0, static_cast<std::uint64_t>(rep)});
    std::uint64_t scenario_seed = derive_seed(run_seed, {kScenarioTag});
    std::uint64_t world_seed = derive_seed(run_seed, {kWorldTag});
    Scenario scenario = build_scenario(cfg.scenario, scenario_seed);
    MechanismConfig mc = cfg.mechanism;
    mc.horizon = cfg.scenario.horizon;
    mc.ability_exponent = cfg.scenario.ability_exponent;
    mc.world_seed = world_seed;
    mc.seed = derive_seed(run_seed, {kMechTag, 0});
    auto expected = static_cast<long long>(
        std::llround(cfg.scenario.rate * cfg.scenario.horizon));
    mc.expected_bidders = static_cast<int>(std::clamp<long long>(
        expected, 1, static_cast<long long>(cfg.scenario.population)));
    MechanismOutcome o = run_bbs(scenario.arrivals, mc, scenario.grid,
                                 scenario.params.profile);
    traces.push_back(o.stages);
  }
  return traces;
}

std::optional<double> last_two_stage_change(const std::vector<StageRecord>& stages) {
  if (stages.size() < 2) return std::nullopt;
  double prev = stages[stages.size() - 2].e_star;
  double last = stages[stages.size() - 1].e_star;
  if (prev == 0.0) return std::nullopt;
  return std::abs(last - prev) / std::abs(prev);
}

void write_metrics_csv(const std::vector<MetricRow>& rows, std::ostream& out) {
  out << "sweep,mechanism,utility_mean,utility_std,participation_mean,"
         "participation_std,payments_mean,payments_std,error_mean,error_std,"
         "e_star_mean,e_star_std\n";
  for (const MetricRow& r : rows) {
    out << format_number(r.sweep_value) << ',' << r.mechanism << ','
        << format_number(r.utility_mean) << ',' << format_number(r.utility_std) << ','
        << format_number(r.participation_mean) << ','
        << format_number(r.participation_std) << ',' << format_number(r.payments_mean)
        << ',' << format_number(r.payments_std) << ',' << opt_cell(r.error_mean) << ','
        << opt_cell(r.error_std) << ',' << opt_cell(r.e_star_mean) << ','
        << opt_cell(r.e_star_std) << '\n';
  }
}

void write_runs_csv(const std::vector<RunRecord>& rows, std::ostream& out) {
  out << "sweep,replication,mechanism,utility,participation,payments,mean_error,"
         "final_e_star\n";
  for (const RunRecord& r : rows) {
    out << format_number(r.sweep_value) << ',' << r.replication << ',' << r.mechanism
        << ',' << r.utility << ',' << r.participation << ','
        << format_number(r.payments) << ',' << opt_cell(r.mean_error) << ','
        << opt_cell(r.final_e_star) << '\n';
  }
}

}  // namespace bbs
