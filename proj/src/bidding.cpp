#include "bbs/bidding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bbs {

namespace {

void check_position(int n, int i) {
  if (n < 1) throw std::domain_error("bidding: need at least one bidder");
  if (i < 1 || i > n) throw std::domain_error("bidding: position out of range");
}

void check_exponent(double c) {
  if (!(c > 0.0 && c < 1.0)) throw std::domain_error("bidding: exponent must be in (0,1)");
}

}  // namespace

AbilityDistribution::AbilityDistribution(double exponent) : c(exponent) {
  check_exponent(c);
}

double ability_cdf(const AbilityDistribution& dist, double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("ability_cdf: x outside [0,1]");
  return std::pow(x, dist.c);
}

double ability_quantile(const AbilityDistribution& dist, double u) {
  if (!(u >= 0.0 && u <= 1.0)) throw std::domain_error("ability_quantile: u outside [0,1]");
  return std::pow(u, 1.0 / dist.c);
}

PrizeStructure::PrizeStructure(std::vector<double> prizes, double budget)
    : prizes_(std::move(prizes)), budget_(budget) {
  if (prizes_.empty()) throw std::invalid_argument("prizes: empty");
  if (!(budget_ > 0.0)) throw std::invalid_argument("prizes: budget must be positive");
  double sum = 0.0;
  double prev = prizes_.front();
  for (double m : prizes_) {
    if (!(m > 0.0)) throw std::invalid_argument("prizes: every prize must be positive");
    if (m > prev * (1.0 + 1e-12)) throw std::invalid_argument("prizes: not descending");
    prev = m;
    sum += m;
  }
  if (sum > budget_ * (1.0 + 1e-9) + 1e-9) {
    throw std::invalid_argument("prizes: sum exceeds budget");
  }
}

double PrizeStructure::prize(int rank) const {
  if (rank < 1) throw std::domain_error("prizes: rank must be positive");
  if (rank > count()) return 0.0;
  return prizes_[static_cast<std::size_t>(rank - 1)];
}

void BidHistory::record(std::uint32_t user, double effort) {
  if (!(effort >= 0.0)) throw std::invalid_argument("history: negative effort");
  bids_.push_back({user, effort, static_cast<int>(bids_.size())});
  sorted_desc_.insert(
      std::upper_bound(sorted_desc_.begin(), sorted_desc_.end(), effort,
                       std::greater<double>()),
      effort);
}

double BidHistory::kth_best(int k) const {
  if (k < 1) throw std::domain_error("history: rank must be positive");
  if (static_cast<std::size_t>(k) > sorted_desc_.size()) return 0.0;
  return sorted_desc_[static_cast<std::size_t>(k - 1)];
}

std::vector<double> BidHistory::top(int k) const {
  if (k < 0) throw std::domain_error("history: negative count");
  auto take = std::min<std::size_t>(static_cast<std::size_t>(k), sorted_desc_.size());
  return {sorted_desc_.begin(), sorted_desc_.begin() + static_cast<std::ptrdiff_t>(take)};
}

double order_stat_cdf(int rank, int n_opponents, double p) {
  if (n_opponents < 1) throw std::domain_error("order_stat_cdf: no opponents");
  if (rank < 1 || rank > n_opponents) throw std::domain_error("order_stat_cdf: rank out of range");
  if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("order_stat_cdf: p outside [0,1]");
  if (rank == 1) return std::pow(p, n_opponents);
  if (p == 0.0) return 0.0;
  if (p == 1.0) return 1.0;
  // Binomial tail: at least n-rank+1 of n opponents at or below the level.
  double total = 0.0;
  double lp = std::log(p);
  double lq = std::log1p(-p);
  double lg_n = std::lgamma(static_cast<double>(n_opponents) + 1.0);
  for (int i = n_opponents - rank + 1; i <= n_opponents; ++i) {
    double lt = lg_n - std::lgamma(static_cast<double>(i) + 1.0) -
                std::lgamma(static_cast<double>(n_opponents - i) + 1.0) +
                static_cast<double>(i) * lp + static_cast<double>(n_opponents - i) * lq;
    total += std::exp(lt);
  }
  return std::min(total, 1.0);
}

double expected_prize_value(const PrizeStructure& ps, std::span<const double> win_probs) {
  if (static_cast<int>(win_probs.size()) != ps.count()) {
    throw std::invalid_argument("expected_prize_value: one probability per prize rank");
  }
  double v = 0.0;
  for (int l = 1; l <= ps.count(); ++l) {
    double w = win_probs[static_cast<std::size_t>(l - 1)];
    if (!(w >= 0.0 && w <= 1.0)) {
      throw std::domain_error("expected_prize_value: probability outside [0,1]");
    }
    v += w * (ps.prize(l) - ps.prize(l + 1));
  }
  return v;
}

double zero_bid_mass_product(int n, int i, double c, double e_over_v) {
  check_position(n, i);
  check_exponent(c);
  if (!(e_over_v >= 0.0)) throw std::domain_error("zero_bid_mass_product: negative ratio");
  if (e_over_v > 1.0) throw std::domain_error("zero_bid_mass_product: bid exceeds value");
  double exponent = 1.0 - std::pow(1.0 - c, n - i);
  if (exponent == 0.0) return 1.0;  // i == n, empty product
  return std::pow(e_over_v, exponent);
}

double interior_bid(int n, int i, double c, double v_bar, double theta) {
  check_position(n, i);
  check_exponent(c);
  if (i == n) throw std::domain_error("interior_bid: last bidder uses the boundary rule");
  if (!(v_bar > 0.0)) throw std::domain_error("interior_bid: value must be positive");
  if (!(theta >= 0.0 && theta <= 1.0)) throw std::domain_error("interior_bid: theta outside [0,1]");
  double d = std::pow(1.0 - c, n - i);
  return v_bar * std::pow(theta * (1.0 - d), 1.0 / d);
}

double bid_objective(int n, int i, double c, double v_bar, double theta, double e) {
  check_position(n, i);
  check_exponent(c);
  if (theta <= 0.0) return e > 0.0 ? -std::numeric_limits<double>::infinity() : 0.0;
  if (e == 0.0) return 0.0;
  double d = std::pow(1.0 - c, n - i);
  // i == n: the future-bidder mass is an empty product.
  double mass = (i == n) ? 1.0 : std::pow(e / v_bar, 1.0 - d);
  return v_bar * mass - e / theta;
}

double foc_residual(int n, int i, double c, double v_bar, double theta, double e) {
  check_position(n, i);
  check_exponent(c);
  if (!(e > 0.0)) throw std::domain_error("foc_residual: effort must be positive");
  if (!(theta > 0.0)) throw std::domain_error("foc_residual: theta must be positive");
  double d = std::pow(1.0 - c, n - i);
  return (1.0 - d) * std::exp(-d * std::log(e / v_bar)) - 1.0 / theta;
}

double best_response_bid(int n, int i, double c, double v_bar, double theta,
                         const BidHistory& history, int num_prizes) {
  check_position(n, i);
  check_exponent(c);
  if (num_prizes < 1) throw std::domain_error("best_response_bid: need a prize");
  if (!(theta >= 0.0 && theta <= 1.0)) {
    throw std::domain_error("best_response_bid: theta outside [0,1]");
  }
  if (!(v_bar >= 0.0)) throw std::domain_error("best_response_bid: negative value");
  if (v_bar == 0.0 || theta == 0.0) return 0.0;

  double e_lth = history.kth_best(num_prizes);

  if (i == n) {
    // Backward-induction base case: the last bidder matches the bid that
    // secures a prize iff the win is worth the cost; ties favor the entrant.
    return theta * v_bar >= e_lth ? e_lth : 0.0;
  }

  double d = std::pow(1.0 - c, n - i);
  // Both ability thresholds collapse while a prize slot is still open
  // (e_Lth = 0): any bid meets the constraint, so the interior solution
  // stands and low types enter with small bids.
  if (e_lth <= 0.0) return interior_bid(n, i, c, v_bar, theta);

  double e_1st = history.best();
  double lower = std::pow(e_lth / v_bar, d);
  double upper = std::pow(e_1st / v_bar, d) / c;

  if (theta < lower) return 0.0;
  if (theta >= upper) return interior_bid(n, i, c, v_bar, theta);

  // Middle band: exactly tie the cheapest observed prize-rank bid that is
  // still profitable at this ability.
  std::vector<double> candidates = history.top(num_prizes);
  std::sort(candidates.begin(), candidates.end());
  for (double e : candidates) {
    if (theta >= std::pow(e / v_bar, d)) return e;
  }
  return 0.0;
}

double numeric_best_response_oracle(int n, int i, double c, double v_bar,
                                    double theta, const BidHistory& history,
                                    int num_prizes) {
  check_position(n, i);
  check_exponent(c);
  if (theta <= 0.0 || v_bar <= 0.0) return 0.0;
  double lo = history.kth_best(num_prizes);
  double hi = v_bar;
  if (lo >= hi) {
    return bid_objective(n, i, c, v_bar, theta, lo) >= 0.0 ? lo : 0.0;
  }

  // Dense scan, then golden-section refinement around the best grid point.
  const int kGrid = 2000;
  double best_e = lo;
  double best_f = bid_objective(n, i, c, v_bar, theta, lo);
  for (int k = 1; k <= kGrid; ++k) {
    double e = lo + (hi - lo) * static_cast<double>(k) / kGrid;
    double f = bid_objective(n, i, c, v_bar, theta, e);
    if (f > best_f) {
      best_f = f;
      best_e = e;
    }
  }
  double a = std::max(lo, best_e - (hi - lo) / kGrid);
  double b = std::min(hi, best_e + (hi - lo) / kGrid);
  const double kInvPhi = 0.6180339887498949;
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = bid_objective(n, i, c, v_bar, theta, x1);
  double f2 = bid_objective(n, i, c, v_bar, theta, x2);
  for (int it = 0; it < 200 && (b - a) > 1e-14 * std::max(1.0, hi); ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = bid_objective(n, i, c, v_bar, theta, x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = bid_objective(n, i, c, v_bar, theta, x1);
    }
  }
  double e_star = 0.5 * (a + b);
  double f_star = bid_objective(n, i, c, v_bar, theta, e_star);
  if (best_f > f_star) {
    e_star = best_e;
    f_star = best_f;
  }
  return f_star >= 0.0 ? e_star : 0.0;
}

VBarResult solve_v_bar(const PrizeStructure& ps, int n, int i, double c,
                       double theta, VBarMode mode, double tol, int max_iter) {
  check_position(n, i);
  check_exponent(c);
  if (!(theta >= 0.0 && theta <= 1.0)) throw std::domain_error("solve_v_bar: theta outside [0,1]");
  if (mode == VBarMode::fixed_m1) return {ps.top(), 0, true};

  int opponents = n - 1;
  double d = (i < n) ? std::pow(1.0 - c, n - i) : 1.0;
  auto value_at_level = [&](double p) {
    std::vector<double> probs(static_cast<std::size_t>(ps.count()));
    for (int l = 1; l <= ps.count(); ++l) {
      double w;
      if (opponents == 0 || l > opponents) {
        w = 1.0;  // fewer opponents than the rank: that prize is certain
      } else {
        w = order_stat_cdf(l, opponents, p);
      }
      probs[static_cast<std::size_t>(l - 1)] = w;
    }
    return expected_prize_value(ps, probs);
  };

  double v = ps.top();
  for (int it = 1; it <= max_iter; ++it) {
    double p;
    if (v <= 0.0) {
      p = 0.0;
    } else if (i == n) {
      p = std::pow(std::clamp(theta, 0.0, 1.0), c);
    } else {
      double e = interior_bid(n, i, c, v, theta);
      double level = std::clamp(std::pow(e / v, d) / (1.0 - d), 0.0, 1.0);
      p = std::pow(level, c);
    }
    double next = value_at_level(p);
    bool settled = std::abs(next - v) <= tol * std::max(std::abs(v), 1e-300);
    v = next;
    if (settled) return {v, it, true};
    if (v <= 0.0) return {0.0, it, true};
  }
  return {v, max_iter, false};
}

SequentialAuction::SequentialAuction(int total_bidders, double ability_exponent,
                                     VBarMode mode, double effort_floor)
    : total_bidders_(std::max(1, total_bidders)),
      c_(ability_exponent),
      mode_(mode),
      floor_(effort_floor),
      history_(std::max(1, total_bidders)) {
  check_exponent(c_);
  if (!(floor_ >= 0.0)) throw std::invalid_argument("auction: negative effort floor");
}

double SequentialAuction::submit(std::uint32_t user, double theta,
                                 const PrizeStructure& ps) {
  return submit(user, theta, ps,
                std::max(0, total_bidders_ - history_.observed() - 1));
}

double SequentialAuction::submit(std::uint32_t user, double theta,
                                 const PrizeStructure& ps, int expected_later) {
  int position = history_.observed() + 1;
  int contest_size = position + std::max(0, expected_later);
  VBarResult v = solve_v_bar(ps, contest_size, position, c_, theta, mode_);
  v_bar_warning_ = v_bar_warning_ || !v.converged;
  last_v_bar_ = v.value;
  double bid = 0.0;
  if (v.value > 0.0) {
    bid = best_response_bid(contest_size, position, c_, v.value, theta, history_,
                            ps.count());
  }
  if (bid < floor_) bid = 0.0;
  history_.record(user, bid);
  return bid;
}

}  // namespace bbs
