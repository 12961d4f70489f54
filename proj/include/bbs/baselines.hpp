// Comparison mechanisms: winner-take-all and multiple-winners contests, the
// omniscient reverse auction, and the offline proportional-share rule.
#pragma once

#include <cstdint>
#include <vector>

#include "bbs/mechanism.hpp"

namespace bbs {

using BaselineOutcome = MechanismOutcome;

// Shared contest core: sequential bids against a fixed prize structure,
// ranks by effort (ties -> smaller id), rank r <= L paid M_r.
BaselineOutcome run_contest(const std::vector<Arrival>& arrivals,
                            const PrizeStructure& prizes, const MechanismConfig& cfg,
                            const AoiGrid& grid, const ProfileModel& model);

// Single prize equal to the whole budget.
BaselineOutcome winner_take_all(const std::vector<Arrival>& arrivals, double budget,
                                const MechanismConfig& cfg, const AoiGrid& grid,
                                const ProfileModel& model);

// num_prizes equal prizes of budget/L; clamped to the bidder count.
BaselineOutcome multiple_winners(const std::vector<Arrival>& arrivals, double budget,
                                 int num_prizes, const MechanismConfig& cfg,
                                 const AoiGrid& grid, const ProfileModel& model);

// A submission with a known private cost effort/theta.
struct Submission {
  std::uint32_t user;
  double effort;
  double theta;
  double error;
  SensingProfile profile;
};

enum class ReverseVariant { full_knowledge, incentive_compatible };

// full_knowledge: offline greedy by marginal utility per cost, paying cost,
// until the budget is exhausted (zero-cost submissions first).
// incentive_compatible: the threshold procedure applied once to the whole
// population as its sample, payments e* * U_i gated against M* and the
// remaining budget.
BaselineOutcome offline_reverse_auction(const std::vector<Submission>& submissions,
                                        std::size_t grid_point_count, double budget,
                                        ReverseVariant variant,
                                        const PrizePolicy& policy);

}  // namespace bbs
