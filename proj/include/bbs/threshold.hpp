// Effort-threshold learning from a sampled pool of submissions.
//
// Picks a prize structure for the stage budget, greedily admits sampled
// users by marginal utility per prize slot while the proportional-share
// gate  M_k <= U_i * B' / U(J + i)  holds, and returns the pair
// (e* = B'/U(J), M* = M_L) used to gate online payments.
#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "bbs/bidding.hpp"
#include "bbs/coverage.hpp"

namespace bbs {

struct SampleEntry {
  std::uint32_t user;
  SensingProfile profile;
  double effort;
};

class SamplePool {
 public:
  explicit SamplePool(std::size_t grid_point_count)
      : grid_points_(grid_point_count) {}

  // Throws std::invalid_argument on duplicate user ids.
  void add(std::uint32_t user, SensingProfile profile, double effort);

  const std::vector<SampleEntry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  std::size_t grid_point_count() const { return grid_points_; }

 private:
  std::size_t grid_points_;
  std::vector<SampleEntry> entries_;
};

struct EqualSplit {
  int num_prizes = 1;
};
struct Geometric {
  double ratio = 0.5;
  int num_prizes = 1;
};
// Evaluate L in 1..max_prizes under an equal split, score by the utility the
// greedy admits on the sample, keep the best (ties -> smaller L).
struct GridSearch {
  int max_prizes = 10;
};
using PrizePolicy = std::variant<EqualSplit, Geometric, GridSearch>;

// Deterministic given (pool, budget, policy). Empty pool degenerates to a
// single prize equal to the whole budget.
PrizeStructure optimal_prize_structure(const SamplePool& pool, double budget,
                                       const PrizePolicy& policy);

// Sample-free structure announced before any threshold recompute: the
// policy's own shape, with the grid search falling back to its widest
// admissible equal split (at most one prize per expected bidder).
PrizeStructure opening_prize_structure(const PrizePolicy& policy, double budget,
                                       int expected_bidders);

struct ThresholdState {
  double effort_threshold;  // currency per unit of marginal utility
  double minimal_prize;
};

struct GreedyPick {
  std::uint32_t user;
  std::uint64_t marginal;  // against the winners picked before it
  double prize;            // prize slot it would occupy
  double ratio;            // marginal / prize
};

// Lazily re-sorted greedy order, one pick per prize slot; ties by smaller id.
std::vector<GreedyPick> proportional_share_sorted(const SamplePool& pool,
                                                  const PrizeStructure& prizes);

struct ThresholdResult {
  // False when the admitted utility is zero (empty or zero-coverage sample):
  // the caller keeps its previous threshold.
  bool computed = false;
  ThresholdState state{0.0, 0.0};
  std::vector<std::uint32_t> winners;             // admission order
  std::vector<std::uint64_t> winner_marginals;    // marginal at admission
  std::uint64_t winner_utility = 0;               // U(J)
  PrizeStructure prizes;
};

ThresholdResult get_effort_threshold(const SamplePool& pool, double budget,
                                     const PrizePolicy& policy);
ThresholdResult get_effort_threshold(const SamplePool& pool, double budget,
                                     const PrizeStructure& prizes);

}  // namespace bbs
