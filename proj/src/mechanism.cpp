#include "bbs/mechanism.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace bbs {

namespace {

constexpr std::uint64_t kRouteStream = 0x52;

}  // namespace

double MechanismOutcome::total_payments() const {
  double sum = 0.0;
  for (const auto& [user, p] : payments) sum += p;
  return sum;
}

int MechanismOutcome::participation() const {
  int n = 0;
  for (const auto& [user, e] : efforts) {
    if (e > 0.0) ++n;
  }
  return n;
}

const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::bid: return "bid";
    case EventKind::observe: return "observe";
    case EventKind::select: return "select";
  }
  return "?";
}

const char* to_string(Branch branch) {
  return branch == Branch::threshold ? "threshold" : "secretary";
}

ArrivalRouter::ArrivalRouter(RoutingMode mode, double threshold_probability,
                             SplitMix64 rng)
    : mode_(mode), p_(threshold_probability), rng_(rng) {
  if (!(p_ >= 0.0 && p_ <= 1.0)) {
    throw std::invalid_argument("router: probability outside [0,1]");
  }
  if (mode_ == RoutingMode::per_run) {
    run_branch_ = rng_.bernoulli(p_) ? Branch::threshold : Branch::secretary;
  }
}

Branch ArrivalRouter::route() {
  if (mode_ == RoutingMode::per_run) return run_branch_;
  return rng_.bernoulli(p_) ? Branch::threshold : Branch::secretary;
}

std::optional<double> threshold_gate_payment(const ThresholdState& threshold,
                                             std::uint64_t marginal,
                                             double stage_remaining) {
  double offered = threshold.effort_threshold * static_cast<double>(marginal);
  if (offered < threshold.minimal_prize) return std::nullopt;
  if (offered > stage_remaining) return std::nullopt;
  return offered;
}

SecretaryDecision secretary_stopping_rule(const std::vector<double>& values,
                                          std::size_t sample_size) {
  SecretaryDecision d;
  if (values.empty()) return d;
  sample_size = std::max<std::size_t>(1, sample_size);  // never take the first
  double best_sampled = -1.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (k < sample_size) {
      best_sampled = std::max(best_sampled, values[k]);
      continue;
    }
    if (values[k] > best_sampled) {
      d.selected = true;
      d.index = k;
      return d;
    }
  }
  return d;
}

MechanismOutcome run_bbs(const std::vector<Arrival>& arrivals,
                         const MechanismConfig& cfg, const AoiGrid& grid,
                         const ProfileModel& model) {
  if (cfg.horizon < 1) throw std::invalid_argument("bbs: horizon must be at least 1");
  if (!(cfg.total_budget > 0.0)) throw std::invalid_argument("bbs: budget must be positive");
  for (std::size_t k = 0; k < arrivals.size(); ++k) {
    if (arrivals[k].t < 1 || arrivals[k].t > cfg.horizon) {
      throw std::invalid_argument("bbs: arrival outside the horizon");
    }
    if (k > 0 && arrivals[k].t < arrivals[k - 1].t) {
      throw std::invalid_argument("bbs: arrivals must be sorted by time");
    }
  }

  const double B = cfg.total_budget;
  const int T = cfg.horizon;
  int doublings = static_cast<int>(std::floor(std::log2(static_cast<double>(T))));

  StageState stage;
  stage.stage_end = static_cast<double>(T) / std::pow(2.0, doublings);
  stage.stage_budget = B / std::pow(2.0, doublings);
  stage.threshold = {cfg.initial_effort, cfg.initial_min_prize};

  MechanismOutcome out;
  SamplePool pool(grid.point_count());
  CoverageAccumulator sample_cov(grid.point_count());
  CoverageAccumulator all_cov(grid.point_count());
  CoverageAccumulator winner_cov(grid.point_count());

  int n_bidders = cfg.expected_bidders > 0 ? cfg.expected_bidders
                                           : static_cast<int>(arrivals.size());
  n_bidders = std::max(1, n_bidders);
  SequentialAuction auction(n_bidders, cfg.ability_exponent, cfg.v_bar_mode,
                            cfg.effort_floor);

  // The contest users play is announced once for the whole period, over the
  // whole budget (the prize sum is tied to B). Stage budgets only cap what
  // each stage may grant; the threshold pair is what gets relearned.
  const PrizeStructure prizes = opening_prize_structure(cfg.policy, B, n_bidders);

  SplitMix64 root(cfg.seed);
  ArrivalRouter router(cfg.routing, cfg.threshold_branch_probability,
                       root.split(kRouteStream));
  SplitMix64 world(cfg.world_seed != 0 ? cfg.world_seed : cfg.seed);
  SplitMix64 profile_root = world.split(kProfileStreamTag);
  SplitMix64 noise_root = world.split(kNoiseStreamTag);

  // Secretary bookkeeping.
  double secretary_share = cfg.routing == RoutingMode::per_user
                               ? 1.0 - cfg.threshold_branch_probability
                               : 1.0;
  std::size_t secretary_sample_target;
  if (cfg.secretary_sample == SecretarySampleMode::one_over_e) {
    secretary_sample_target = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::floor(cfg.secretary_sample_fraction *
                                               secretary_share *
                                               static_cast<double>(n_bidders))));
  } else {
    secretary_sample_target = 1;  // time-based phase below, first user always sampled
  }
  double first_stage_end = stage.stage_end;
  std::size_t secretary_seen = 0;
  double best_sampled_value = -1.0;
  bool secretary_done = false;

  std::size_t next_arrival = 0;
  for (int t = 1; t <= T; ++t) {
    while (next_arrival < arrivals.size() && arrivals[next_arrival].t == t) {
      const Arrival& a = arrivals[next_arrival];
      ++next_arrival;
      Branch branch = router.route();

      // Contest size the bidder believes in: bidders seen plus those still
      // expected over the remaining horizon, never more than the registered
      // population still outstanding.
      int rate_based = static_cast<int>(std::llround(
          static_cast<double>(n_bidders) * static_cast<double>(T - t) / T));
      int outstanding = n_bidders - auction.history().observed() - 1;
      int expected_later = std::max(0, std::min(outstanding, rate_based));
      double effort = auction.submit(a.user.id, a.user.theta, prizes, expected_later);
      out.v_bar_warning = out.v_bar_warning || auction.v_bar_warning();
      out.efforts[a.user.id] = effort;

      SensingProfile profile;  // empty when the user stays out
      if (effort > 0.0) {
        SplitMix64 profile_rng = profile_root.split(a.user.id);
        profile = realize_profile(a.user, effort, grid, model, profile_rng);
        SplitMix64 noise_rng = noise_root.split(a.user.id);
        out.errors[a.user.id] = measurement_error(effort, model.noise_scale, noise_rng);
        out.profiles[a.user.id] = profile;
        all_cov.add(profile);
      }

      if (branch == Branch::threshold) {
        std::uint64_t marginal = sample_cov.marginal(profile);
        std::optional<double> grant = threshold_gate_payment(
            stage.threshold, marginal, stage.stage_budget - stage.spent);
        double payment = 0.0;
        if (grant) {
          payment = std::min(*grant, B - stage.spent);
          stage.spent += payment;
          out.payments[a.user.id] = payment;
          out.winners.push_back(a.user.id);
          winner_cov.add(profile);
        }
        pool.add(a.user.id, profile, effort);
        sample_cov.add(profile);
        out.events.push_back({t, EventKind::bid, a.user.id, branch, effort, marginal,
                              payment, B - stage.spent});
      } else {
        std::uint64_t marginal = sample_cov.marginal(profile);
        auto value = static_cast<double>(marginal);
        ++secretary_seen;
        bool in_sample_phase;
        if (cfg.secretary_sample == SecretarySampleMode::one_over_e) {
          in_sample_phase = secretary_seen <= secretary_sample_target;
        } else {
          in_sample_phase = secretary_seen == 1 ||
                            t <= static_cast<int>(std::floor(first_stage_end));
        }
        if (in_sample_phase) {
          best_sampled_value = std::max(best_sampled_value, value);
          out.events.push_back({t, EventKind::observe, a.user.id, branch, effort,
                                marginal, 0.0, B - stage.spent});
        } else if (!secretary_done && value > best_sampled_value) {
          secretary_done = true;
          double payment = std::min(B, B - stage.spent);
          stage.spent += payment;
          out.payments[a.user.id] = payment;
          out.winners.push_back(a.user.id);
          winner_cov.add(profile);
          out.secretary = SecretaryRecord{a.user.id, payment, t};
          out.events.push_back({t, EventKind::select, a.user.id, branch, effort,
                                marginal, payment, B - stage.spent});
        } else {
          out.events.push_back({t, EventKind::observe, a.user.id, branch, effort,
                                marginal, 0.0, B - stage.spent});
        }
      }
    }

    if (t == static_cast<int>(std::floor(stage.stage_end))) {
      double threshold_budget = std::min(2.0 * stage.stage_budget, B);
      ThresholdResult res = get_effort_threshold(pool, threshold_budget, cfg.policy);
      bool recomputed = res.computed;
      if (recomputed) {
        stage.threshold = res.state;
      }
      stage.stage_budget = std::min(2.0 * stage.stage_budget, B);
      stage.stage_end *= 2.0;
      ++stage.quantile;
      out.stages.push_back({stage.quantile, t, stage.threshold.effort_threshold,
                            stage.threshold.minimal_prize, stage.stage_budget,
                            recomputed ? static_cast<int>(res.winners.size()) : 0,
                            recomputed ? res.winner_utility : 0, recomputed});
    }
  }

  out.total_utility = all_cov.covered_count();
  out.winner_utility = winner_cov.covered_count();
  return out;
}

void write_event_trace(const MechanismOutcome& outcome, std::ostream& out) {
  out << "t,event_kind,user,branch,effort,marginal_utility,payment,budget_remaining\n";
  char buf[224];
  for (const TraceEvent& e : outcome.events) {
    std::snprintf(buf, sizeof(buf), "%d,%s,%u,%s,%.10g,%llu,%.10g,%.10g\n", e.t,
                  to_string(e.kind), e.user, to_string(e.branch), e.effort,
                  static_cast<unsigned long long>(e.marginal), e.payment,
                  e.budget_remaining);
    out << buf;
  }
}

void write_stage_trace(const MechanismOutcome& outcome, std::ostream& out) {
  out << "stage,e_star,m_star,winners,utility\n";
  char buf[160];
  for (const StageRecord& s : outcome.stages) {
    std::snprintf(buf, sizeof(buf), "%d,%.10g,%.10g,%d,%llu\n", s.stage, s.e_star,
                  s.m_star, s.winners, static_cast<unsigned long long>(s.utility));
    out << buf;
  }
}

}  // namespace bbs
