// Budgeted behavior-based online mechanism (BBS).
//
// Arrivals are processed once, irrevocably. Each arrival is routed either to
// the threshold branch (bid, submit, get paid e* * marginal when the gate
// M* <= e* * U_i <= B' - spent passes, and always join the sample) or to the
// secretary branch (optimal stopping over observed marginal values, the
// winner offered the remaining budget). The stage budget B' and stage end T'
// double at every boundary t = floor(T'), where the threshold pair (e*, M*)
// is relearned from the sample.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bbs/bidding.hpp"
#include "bbs/coverage.hpp"
#include "bbs/rng.hpp"
#include "bbs/scenario.hpp"
#include "bbs/threshold.hpp"

namespace bbs {

enum class RoutingMode { per_user, per_run };
enum class SecretarySampleMode { one_over_e, first_stage };
enum class Branch { threshold, secretary };

// Named world streams: every mechanism run on the same scenario derives a
// user's walk and noise draws from these, so submissions pair across runs.
inline constexpr std::uint64_t kProfileStreamTag = 0x50;
inline constexpr std::uint64_t kNoiseStreamTag = 0x4e;

struct MechanismConfig {
  double total_budget = 20.0;
  int horizon = 32;
  double initial_effort = 0.1;     // starting e*
  double initial_min_prize = 0.1;  // starting M*
  double threshold_branch_probability = 1.0 / 3.0;
  RoutingMode routing = RoutingMode::per_user;
  PrizePolicy policy = GridSearch{};
  VBarMode v_bar_mode = VBarMode::fixed_point;
  SecretarySampleMode secretary_sample = SecretarySampleMode::one_over_e;
  double secretary_sample_fraction = 0.36787944117144233;  // 1/e
  double ability_exponent = 0.5;
  // Bidder count fed to the best-response function; 0 means "use the actual
  // arrival count" (only sensible offline).
  int expected_bidders = 0;
  // Bids below this are treated as staying out (no submission).
  double effort_floor = 1e-9;
  std::uint64_t seed = 0;
  // Stream for profile walks and measurement noise. Shared across mechanisms
  // that face the same arrivals so the same (user, effort) yields the same
  // submission; 0 falls back to `seed`.
  std::uint64_t world_seed = 0;
};

struct StageState {
  double stage_budget;   // B'
  double stage_end;      // T'
  int quantile = 0;      // stage index
  double spent = 0.0;    // total granted so far (global)
  ThresholdState threshold{0.0, 0.0};
};

enum class EventKind { bid, observe, select };

struct TraceEvent {
  int t;
  EventKind kind;
  std::uint32_t user;
  Branch branch;
  double effort;
  std::uint64_t marginal;
  double payment;
  double budget_remaining;
};

struct StageRecord {
  int stage;
  int t;
  double e_star;
  double m_star;
  double stage_budget;  // after doubling
  int winners;          // admitted in the recompute (0 when kept)
  std::uint64_t utility;  // U(J) of the recompute (0 when kept)
  bool recomputed;
};

struct SecretaryRecord {
  std::uint32_t user;
  double payment;
  int t;
};

struct MechanismOutcome {
  std::map<std::uint32_t, double> payments;
  std::map<std::uint32_t, double> efforts;          // every processed arrival
  std::map<std::uint32_t, double> errors;           // submitters only
  std::map<std::uint32_t, SensingProfile> profiles;  // submitters only
  std::vector<std::uint32_t> winners;               // paid users, grant order
  std::uint64_t total_utility = 0;   // coverage of all received submissions
  std::uint64_t winner_utility = 0;  // coverage of paid users' submissions
  std::vector<TraceEvent> events;
  std::vector<StageRecord> stages;
  std::optional<SecretaryRecord> secretary;
  bool v_bar_warning = false;

  double total_payments() const;
  int participation() const;  // submissions with positive effort
};

const char* to_string(EventKind kind);
const char* to_string(Branch branch);

// Payment gate for a threshold-routed arrival: pay e* * marginal iff
// M* <= e* * marginal <= stage budget minus what was already granted.
std::optional<double> threshold_gate_payment(const ThresholdState& threshold,
                                             std::uint64_t marginal,
                                             double stage_remaining);

// OneBBS run over a sorted arrival stream. Throws std::invalid_argument when
// an arrival lies past the horizon.
MechanismOutcome run_bbs(const std::vector<Arrival>& arrivals,
                         const MechanismConfig& cfg, const AoiGrid& grid,
                         const ProfileModel& model);

// Branch router; per_run mode draws one coin up front and reuses it.
class ArrivalRouter {
 public:
  ArrivalRouter(RoutingMode mode, double threshold_probability, SplitMix64 rng);
  Branch route();

 private:
  RoutingMode mode_;
  double p_;
  SplitMix64 rng_;
  Branch run_branch_ = Branch::threshold;
};

// Classical stopping rule over an observed value sequence: reject a sample
// prefix, then accept the first value exceeding the best sampled one. The
// offline helper mirrors the online branch for direct testing.
struct SecretaryDecision {
  bool selected = false;
  std::size_t index = 0;  // into the observed stream
};
SecretaryDecision secretary_stopping_rule(const std::vector<double>& values,
                                          std::size_t sample_size);

// Event/stage trace CSV export.
void write_event_trace(const MechanismOutcome& outcome, std::ostream& out);
void write_stage_trace(const MechanismOutcome& outcome, std::ostream& out);

}  // namespace bbs
