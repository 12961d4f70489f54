// Sequential all-pay auction bidding.
//
// Users arrive in order, observe prior effort submissions, and choose an
// effort bid. A user of ability theta pays e/theta for effort e; the top L
// efforts win the prizes M_1 >= ... >= M_L. With ability CDF F(x) = x^c the
// best response has a closed form: bid zero below a lower ability threshold,
// exactly tie an observed bid in a middle band, and play the interior
// solution  v_bar * [theta (1 - d_i)]^(1/d_i),  d_i = (1-c)^(n-i)  above the
// upper threshold. A numeric maximizer of the underlying objective is kept
// as an independent oracle.
#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace bbs {

// Ability CDF F(x) = x^c on [0,1], 0 < c < 1.
struct AbilityDistribution {
  explicit AbilityDistribution(double exponent);
  double c;
};

double ability_cdf(const AbilityDistribution& dist, double x);
// Inverse CDF: u^(1/c); used for sampling abilities.
double ability_quantile(const AbilityDistribution& dist, double u);

// Ordered prize vector M_1 >= ... >= M_L > 0 with sum <= budget.
class PrizeStructure {
 public:
  PrizeStructure(std::vector<double> prizes, double budget);

  int count() const { return static_cast<int>(prizes_.size()); }
  // 1-based rank; ranks beyond L pay zero.
  double prize(int rank) const;
  double top() const { return prizes_.front(); }
  double min_prize() const { return prizes_.back(); }
  double budget() const { return budget_; }
  const std::vector<double>& prizes() const { return prizes_; }

 private:
  std::vector<double> prizes_;
  double budget_;
};

struct ObservedBid {
  std::uint32_t user;
  double effort;
  int order_index;
};

// Efforts observed so far, newest last; answers "k-th largest so far".
class BidHistory {
 public:
  BidHistory() = default;
  explicit BidHistory(int total_bidders) : total_bidders_(total_bidders) {}

  void record(std::uint32_t user, double effort);
  const std::vector<ObservedBid>& bids() const { return bids_; }
  int observed() const { return static_cast<int>(bids_.size()); }
  int total_bidders() const { return total_bidders_; }

  // k-th largest observed effort (1-based); 0 when fewer than k bids.
  double kth_best(int k) const;
  double best() const { return kth_best(1); }
  // Top k efforts, descending.
  std::vector<double> top(int k) const;

 private:
  std::vector<ObservedBid> bids_;
  std::vector<double> sorted_desc_;
  int total_bidders_ = 0;
};

// CDF of the j-th best of n_opponents i.i.d. draws, where each opponent
// falls at or below the level with probability p:
//   sum_{i=n-j+1}^{n} C(n,i) p^i (1-p)^(n-i).
double order_stat_cdf(int rank, int n_opponents, double p);

// v_bar = sum_l win_probs[l] * (M_l - M_{l+1}), with M_{L+1} = 0.
double expected_prize_value(const PrizeStructure& ps, std::span<const double> win_probs);

// Probability that bidders i+1..n all bid zero: (e/v)^(1 - (1-c)^(n-i)).
double zero_bid_mass_product(int n, int i, double c, double e_over_v);

// Interior best response for bidder i < n. Throws std::domain_error for the
// last bidder (i == n), whose best response is the boundary matching rule.
double interior_bid(int n, int i, double c, double v_bar, double theta);

// Payoff of bidding e for bidder i: v_bar*(e/v_bar)^(1-d_i) - e/theta.
double bid_objective(int n, int i, double c, double v_bar, double theta, double e);

// First-order-condition residual (1-d)(e/v)^(-d) - 1/theta at effort e > 0.
double foc_residual(int n, int i, double c, double v_bar, double theta, double e);

// Closed-form best response. Total over its domain: never throws for valid
// (n, i, theta, history); always >= 0 and <= v_bar.
double best_response_bid(int n, int i, double c, double v_bar, double theta,
                         const BidHistory& history, int num_prizes);

// Grid + golden-section maximizer of bid_objective on [e_Lth, v_bar],
// returning 0 when the best constrained payoff is negative. Independent
// check of best_response_bid.
double numeric_best_response_oracle(int n, int i, double c, double v_bar,
                                    double theta, const BidHistory& history,
                                    int num_prizes);

enum class VBarMode { fixed_m1, fixed_point };

struct VBarResult {
  double value = 0.0;
  int iterations = 0;
  bool converged = true;
};

// Expected prize value for bidder i of ability theta. fixed_m1 returns M_1.
// fixed_point starts from M_1 and re-evaluates the rank win probabilities at
// the candidate bid (per-opponent level recovered by inverting the interior
// bid map) until the value settles; relative tolerance 1e-9, at most 100
// rounds, last iterate with converged=false on fallthrough.
VBarResult solve_v_bar(const PrizeStructure& ps, int n, int i, double c,
                       double theta, VBarMode mode, double tol = 1e-9,
                       int max_iter = 100);

// Drives one sequential auction: position bookkeeping, per-user expected
// prize value, the closed-form bid, and a minimum-effort floor below which a
// bid is treated as staying out (no submission).
class SequentialAuction {
 public:
  SequentialAuction(int total_bidders, double ability_exponent, VBarMode mode,
                    double effort_floor);

  // Computes the floored bid for the next arrival and records it. The
  // two-argument form derives the contest size from the construction-time
  // bidder count; pass `expected_later` for an online estimate (bidders seen
  // so far plus those still expected).
  double submit(std::uint32_t user, double theta, const PrizeStructure& ps);
  double submit(std::uint32_t user, double theta, const PrizeStructure& ps,
                int expected_later);

  const BidHistory& history() const { return history_; }
  bool v_bar_warning() const { return v_bar_warning_; }
  double last_v_bar() const { return last_v_bar_; }

 private:
  int total_bidders_;
  double c_;
  VBarMode mode_;
  double floor_;
  BidHistory history_;
  bool v_bar_warning_ = false;
  double last_v_bar_ = 0.0;
};

}  // namespace bbs
