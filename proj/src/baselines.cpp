#include "bbs/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace bbs {

BaselineOutcome run_contest(const std::vector<Arrival>& arrivals,
                            const PrizeStructure& prizes, const MechanismConfig& cfg,
                            const AoiGrid& grid, const ProfileModel& model) {
  if (arrivals.empty()) throw std::invalid_argument("contest: empty population");

  BaselineOutcome out;
  CoverageAccumulator all_cov(grid.point_count());
  SequentialAuction auction(static_cast<int>(arrivals.size()), cfg.ability_exponent,
                            cfg.v_bar_mode, cfg.effort_floor);
  SplitMix64 world(cfg.world_seed != 0 ? cfg.world_seed : cfg.seed);
  SplitMix64 profile_root = world.split(kProfileStreamTag);
  SplitMix64 noise_root = world.split(kNoiseStreamTag);

  for (const Arrival& a : arrivals) {
    double effort = auction.submit(a.user.id, a.user.theta, prizes);
    out.v_bar_warning = out.v_bar_warning || auction.v_bar_warning();
    out.efforts[a.user.id] = effort;
    if (effort > 0.0) {
      SplitMix64 profile_rng = profile_root.split(a.user.id);
      SensingProfile profile = realize_profile(a.user, effort, grid, model, profile_rng);
      SplitMix64 noise_rng = noise_root.split(a.user.id);
      out.errors[a.user.id] = measurement_error(effort, model.noise_scale, noise_rng);
      all_cov.add(profile);
      out.profiles[a.user.id] = std::move(profile);
    }
  }

  // Rank all bidders by effort, ties in favor of the smaller id.
  std::vector<std::uint32_t> ranked;
  ranked.reserve(arrivals.size());
  for (const Arrival& a : arrivals) ranked.push_back(a.user.id);
  std::sort(ranked.begin(), ranked.end(), [&](std::uint32_t l, std::uint32_t r) {
    double el = out.efforts.at(l);
    double er = out.efforts.at(r);
    if (el != er) return el > er;
    return l < r;
  });

  CoverageAccumulator winner_cov(grid.point_count());
  int paid = std::min<int>(prizes.count(), static_cast<int>(ranked.size()));
  for (int r = 1; r <= paid; ++r) {
    std::uint32_t user = ranked[static_cast<std::size_t>(r - 1)];
    out.payments[user] = prizes.prize(r);
    out.winners.push_back(user);
    auto it = out.profiles.find(user);
    if (it != out.profiles.end()) winner_cov.add(it->second);
  }

  for (const Arrival& a : arrivals) {
    out.events.push_back({a.t, EventKind::bid, a.user.id, Branch::threshold,
                          out.efforts.at(a.user.id), 0,
                          out.payments.count(a.user.id) ? out.payments.at(a.user.id) : 0.0,
                          0.0});
  }
  out.total_utility = all_cov.covered_count();
  out.winner_utility = winner_cov.covered_count();
  return out;
}

BaselineOutcome winner_take_all(const std::vector<Arrival>& arrivals, double budget,
                                const MechanismConfig& cfg, const AoiGrid& grid,
                                const ProfileModel& model) {
  return run_contest(arrivals, PrizeStructure({budget}, budget), cfg, grid, model);
}

BaselineOutcome multiple_winners(const std::vector<Arrival>& arrivals, double budget,
                                 int num_prizes, const MechanismConfig& cfg,
                                 const AoiGrid& grid, const ProfileModel& model) {
  if (num_prizes < 2) throw std::invalid_argument("multiple_winners: need at least two prizes");
  int L = std::min<int>(num_prizes, static_cast<int>(arrivals.size()));
  L = std::max(L, 1);
  return run_contest(arrivals,
                     PrizeStructure(std::vector<double>(static_cast<std::size_t>(L),
                                                        budget / L),
                                    budget),
                     cfg, grid, model);
}

BaselineOutcome offline_reverse_auction(const std::vector<Submission>& submissions,
                                        std::size_t grid_point_count, double budget,
                                        ReverseVariant variant,
                                        const PrizePolicy& policy) {
  if (!(budget > 0.0)) throw std::invalid_argument("reverse: budget must be positive");
  BaselineOutcome out;
  for (const Submission& s : submissions) {
    if (!(s.theta > 0.0)) throw std::invalid_argument("reverse: nonpositive ability");
    out.efforts[s.user] = s.effort;
    if (!s.profile.empty() || s.effort > 0.0) {
      out.profiles[s.user] = s.profile;
      out.errors[s.user] = s.error;
    }
  }

  CoverageAccumulator winner_cov(grid_point_count);

  if (variant == ReverseVariant::full_knowledge) {
    double remaining = budget;
    std::set<std::uint32_t> taken;
    for (;;) {
      int best = -1;
      std::uint64_t best_marginal = 0;
      double best_cost = 0.0;
      double best_ratio = -1.0;
      for (std::size_t k = 0; k < submissions.size(); ++k) {
        const Submission& s = submissions[k];
        if (taken.count(s.user)) continue;
        std::uint64_t m = winner_cov.marginal(s.profile);
        if (m == 0) continue;
        double cost = s.effort / s.theta;
        if (cost > remaining) continue;
        double ratio = cost <= 0.0 ? std::numeric_limits<double>::infinity()
                                   : static_cast<double>(m) / cost;
        bool better = best < 0 || ratio > best_ratio ||
                      (ratio == best_ratio &&
                       (m > best_marginal ||
                        (m == best_marginal &&
                         s.user < submissions[static_cast<std::size_t>(best)].user)));
        if (better) {
          best = static_cast<int>(k);
          best_marginal = m;
          best_cost = cost;
          best_ratio = ratio;
        }
      }
      if (best < 0) break;
      const Submission& s = submissions[static_cast<std::size_t>(best)];
      taken.insert(s.user);
      remaining -= best_cost;
      out.payments[s.user] = best_cost;
      out.winners.push_back(s.user);
      winner_cov.add(s.profile);
    }
    out.total_utility = winner_cov.covered_count();
    out.winner_utility = winner_cov.covered_count();
    return out;
  }

  // Incentive-compatible variant: the threshold procedure over the whole
  // population, then gated payments in admission order.
  SamplePool pool(grid_point_count);
  for (const Submission& s : submissions) pool.add(s.user, s.profile, s.effort);
  ThresholdResult res = get_effort_threshold(pool, budget, policy);
  if (res.computed) {
    double spent = 0.0;
    for (std::size_t k = 0; k < res.winners.size(); ++k) {
      double offered = res.state.effort_threshold *
                       static_cast<double>(res.winner_marginals[k]);
      if (offered < res.state.minimal_prize) continue;
      if (offered > budget - spent) continue;
      std::uint32_t user = res.winners[k];
      spent += offered;
      out.payments[user] = offered;
      out.winners.push_back(user);
      for (const Submission& s : submissions) {
        if (s.user == user) {
          winner_cov.add(s.profile);
          break;
        }
      }
    }
    out.stages.push_back({1, 0, res.state.effort_threshold, res.state.minimal_prize,
                          budget, static_cast<int>(res.winners.size()),
                          res.winner_utility, true});
  }
  out.total_utility = winner_cov.covered_count();
  out.winner_utility = winner_cov.covered_count();
  return out;
}

}  // namespace bbs
