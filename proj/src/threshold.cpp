#include "bbs/threshold.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace bbs {

namespace {

// argmax over pool entries outside `taken` of marginal utility; ties by
// smaller user id. Returns index into entries or -1 when none remain.
int pick_argmax(const SamplePool& pool, const CoverageAccumulator& acc,
                const std::set<std::uint32_t>& taken, std::uint64_t* marginal_out) {
  int best = -1;
  std::uint64_t best_marginal = 0;
  std::uint32_t best_user = 0;
  const auto& entries = pool.entries();
  for (std::size_t k = 0; k < entries.size(); ++k) {
    if (taken.count(entries[k].user)) continue;
    std::uint64_t m = acc.marginal(entries[k].profile);
    if (best < 0 || m > best_marginal ||
        (m == best_marginal && entries[k].user < best_user)) {
      best = static_cast<int>(k);
      best_marginal = m;
      best_user = entries[k].user;
    }
  }
  if (best >= 0 && marginal_out) *marginal_out = best_marginal;
  return best;
}

}  // namespace

void SamplePool::add(std::uint32_t user, SensingProfile profile, double effort) {
  for (const SampleEntry& e : entries_) {
    if (e.user == user) throw std::invalid_argument("pool: duplicate user id");
  }
  profile.normalize();
  entries_.push_back({user, std::move(profile), effort});
}

PrizeStructure optimal_prize_structure(const SamplePool& pool, double budget,
                                       const PrizePolicy& policy) {
  if (!(budget > 0.0)) throw std::invalid_argument("prizes: budget must be positive");
  if (pool.empty()) return PrizeStructure({budget}, budget);

  if (const auto* eq = std::get_if<EqualSplit>(&policy)) {
    int L = eq->num_prizes;
    if (L < 1) throw std::invalid_argument("prizes: need at least one prize");
    return PrizeStructure(std::vector<double>(static_cast<std::size_t>(L), budget / L),
                          budget);
  }
  if (const auto* geo = std::get_if<Geometric>(&policy)) {
    int L = geo->num_prizes;
    double r = geo->ratio;
    if (L < 1) throw std::invalid_argument("prizes: need at least one prize");
    if (!(r > 0.0 && r <= 1.0)) throw std::invalid_argument("prizes: ratio outside (0,1]");
    double denom = (r == 1.0) ? static_cast<double>(L)
                              : (1.0 - std::pow(r, L)) / (1.0 - r);
    double m1 = budget / denom;
    std::vector<double> prizes(static_cast<std::size_t>(L));
    for (int l = 0; l < L; ++l) prizes[static_cast<std::size_t>(l)] = m1 * std::pow(r, l);
    return PrizeStructure(std::move(prizes), budget);
  }
  const auto& gs = std::get<GridSearch>(policy);
  if (gs.max_prizes < 1) throw std::invalid_argument("prizes: need at least one prize");
  // Ties go to the wider structure: equal admitted utility with more open
  // slots admits more participants later.
  int best_l = 1;
  std::uint64_t best_score = 0;
  for (int L = 1; L <= gs.max_prizes; ++L) {
    PrizeStructure candidate(std::vector<double>(static_cast<std::size_t>(L), budget / L),
                             budget);
    ThresholdResult r = get_effort_threshold(pool, budget, candidate);
    if (L == 1 || r.winner_utility >= best_score) {
      best_score = r.winner_utility;
      best_l = L;
    }
  }
  return PrizeStructure(
      std::vector<double>(static_cast<std::size_t>(best_l), budget / best_l), budget);
}

PrizeStructure opening_prize_structure(const PrizePolicy& policy, double budget,
                                       int expected_bidders) {
  if (!(budget > 0.0)) throw std::invalid_argument("prizes: budget must be positive");
  int L = 1;
  if (const auto* eq = std::get_if<EqualSplit>(&policy)) {
    L = eq->num_prizes;
  } else if (const auto* geo = std::get_if<Geometric>(&policy)) {
    SamplePool one(1);
    one.add(0, SensingProfile{}, 0.0);
    return optimal_prize_structure(one, budget, policy);
  } else {
    L = std::min(std::get<GridSearch>(policy).max_prizes, std::max(1, expected_bidders));
  }
  L = std::max(1, L);
  return PrizeStructure(std::vector<double>(static_cast<std::size_t>(L), budget / L),
                        budget);
}

std::vector<GreedyPick> proportional_share_sorted(const SamplePool& pool,
                                                  const PrizeStructure& prizes) {
  CoverageAccumulator acc(pool.grid_point_count());
  std::set<std::uint32_t> taken;
  std::vector<GreedyPick> order;
  int slots = std::min<int>(prizes.count(), static_cast<int>(pool.size()));
  for (int k = 1; k <= slots; ++k) {
    std::uint64_t marginal = 0;
    int idx = pick_argmax(pool, acc, taken, &marginal);
    if (idx < 0) break;
    const SampleEntry& e = pool.entries()[static_cast<std::size_t>(idx)];
    double prize = prizes.prize(k);
    order.push_back({e.user, marginal, prize, static_cast<double>(marginal) / prize});
    acc.add(e.profile);
    taken.insert(e.user);
  }
  return order;
}

ThresholdResult get_effort_threshold(const SamplePool& pool, double budget,
                                     const PrizePolicy& policy) {
  return get_effort_threshold(pool, budget, optimal_prize_structure(pool, budget, policy));
}

ThresholdResult get_effort_threshold(const SamplePool& pool, double budget,
                                     const PrizeStructure& prizes) {
  if (!(budget > 0.0)) throw std::invalid_argument("threshold: budget must be positive");
  ThresholdResult res{false, {0.0, 0.0}, {}, {}, 0, prizes};
  if (pool.empty()) return res;

  CoverageAccumulator acc(pool.grid_point_count());
  std::set<std::uint32_t> taken;
  int k = 1;
  while (k <= prizes.count()) {
    std::uint64_t marginal = 0;
    int idx = pick_argmax(pool, acc, taken, &marginal);
    if (idx < 0 || marginal == 0) break;
    const SampleEntry& e = pool.entries()[static_cast<std::size_t>(idx)];
    double m_k = prizes.prize(k);
    double union_utility = static_cast<double>(acc.covered_count() + marginal);
    // Proportional-share admission gate.
    if (!(m_k * union_utility <=
          static_cast<double>(marginal) * budget * (1.0 + 1e-12) + 1e-12)) {
      break;
    }
    res.winners.push_back(e.user);
    res.winner_marginals.push_back(marginal);
    acc.add(e.profile);
    taken.insert(e.user);
    ++k;
  }

  res.winner_utility = acc.covered_count();
  if (res.winner_utility == 0) return res;  // keep-previous signal
  res.computed = true;
  res.state.effort_threshold = budget / static_cast<double>(res.winner_utility);
  res.state.minimal_prize = prizes.min_prize();
  return res;
}

}  // namespace bbs
