#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "bbs/bidding.hpp"
#include "bbs/rng.hpp"

using namespace bbs;

namespace {

// Independent golden-section maximizer of an arbitrary unimodal function,
// used to cross-check interior_bid without going through the oracle module.
template <typename F>
double golden_max(F f, double lo, double hi) {
  const double phi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - phi * (b - a);
  double x2 = a + phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 300; ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = f(x1);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

TEST_CASE("ability cdf") {
  CHECK(ability_cdf(AbilityDistribution(0.5), 0.25) == doctest::Approx(0.5));
  CHECK(ability_cdf(AbilityDistribution(0.3), 1.0) == doctest::Approx(1.0));
  CHECK(ability_cdf(AbilityDistribution(0.9), 1.0) == doctest::Approx(1.0));
  // cross-check by log-domain computation
  double direct = ability_cdf(AbilityDistribution(0.3), 0.5);
  double log_domain = std::exp(0.3 * std::log(0.5));
  CHECK(direct == doctest::Approx(log_domain).epsilon(1e-12));
  CHECK(direct == doctest::Approx(0.81225).epsilon(1e-4));
  CHECK_THROWS_AS(ability_cdf(AbilityDistribution(0.5), -0.1), std::domain_error);
  CHECK_THROWS_AS(ability_cdf(AbilityDistribution(0.5), 1.1), std::domain_error);
  CHECK_THROWS_AS(AbilityDistribution(1.0), std::domain_error);
  CHECK_THROWS_AS(AbilityDistribution(0.0), std::domain_error);
}

TEST_CASE("order statistic cdf examples") {
  CHECK(order_stat_cdf(1, 2, 0.5) == doctest::Approx(0.25));

  // exhaustive enumeration over two opponents at level probability 1/2:
  // independent below/above outcomes, second best below iff at least one below
  double enumerated = 0.0;
  for (int a = 0; a <= 1; ++a) {
    for (int b = 0; b <= 1; ++b) {
      int below = a + b;
      if (below >= 1) enumerated += 0.25;
    }
  }
  CHECK(enumerated == doctest::Approx(0.75));
  CHECK(order_stat_cdf(2, 2, 0.5) == doctest::Approx(enumerated));

  // Monte Carlo cross-check of the maximum of three draws
  SplitMix64 rng(99);
  const int kSamples = 1'000'000;
  int hits = 0;
  for (int s = 0; s < kSamples; ++s) {
    bool all_below = true;
    for (int k = 0; k < 3; ++k) all_below = all_below && rng.bernoulli(0.9);
    if (all_below) ++hits;
  }
  double estimate = static_cast<double>(hits) / kSamples;
  double sigma = std::sqrt(0.729 * 0.271 / kSamples);
  CHECK(std::abs(estimate - 0.729) <= 3 * sigma);
  CHECK(order_stat_cdf(1, 3, 0.9) == doctest::Approx(0.729));
}

TEST_CASE("order statistic cdf domain and monotonicity") {
  CHECK_THROWS_AS(order_stat_cdf(0, 3, 0.5), std::domain_error);
  CHECK_THROWS_AS(order_stat_cdf(4, 3, 0.5), std::domain_error);
  CHECK_THROWS_AS(order_stat_cdf(1, 3, 1.5), std::domain_error);

  SplitMix64 rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    int n = 1 + static_cast<int>(rng.uniform_below(12));
    double p1 = rng.next_double();
    double p2 = rng.next_double();
    if (p1 > p2) std::swap(p1, p2);
    int j = 1 + static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(n)));
    CHECK(order_stat_cdf(j, n, p1) <= order_stat_cdf(j, n, p2) + 1e-12);
    if (j < n) {
      CHECK(order_stat_cdf(j, n, p1) <= order_stat_cdf(j + 1, n, p1) + 1e-12);
    }
  }
}

TEST_CASE("expected prize value") {
  PrizeStructure ps({5.0, 3.0}, 10.0);
  std::vector<double> ones{1.0, 1.0};
  std::vector<double> zeros{0.0, 0.0};
  std::vector<double> mixed{0.5, 0.8};
  CHECK(expected_prize_value(ps, ones) == doctest::Approx(5.0));
  CHECK(expected_prize_value(ps, zeros) == doctest::Approx(0.0));
  CHECK(expected_prize_value(ps, mixed) == doctest::Approx(3.4));
  std::vector<double> wrong{1.0};
  CHECK_THROWS_AS(expected_prize_value(ps, wrong), std::invalid_argument);
}

TEST_CASE("prize structure validation") {
  CHECK_THROWS_AS(PrizeStructure({}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(PrizeStructure({1.0, 2.0}, 10.0), std::invalid_argument);
  CHECK_THROWS_AS(PrizeStructure({3.0, -1.0}, 10.0), std::invalid_argument);
  CHECK_THROWS_AS(PrizeStructure({6.0, 5.0}, 10.0), std::invalid_argument);
  PrizeStructure ok({4.0, 3.0, 3.0}, 10.0);
  CHECK(ok.prize(1) == 4.0);
  CHECK(ok.prize(4) == 0.0);
  CHECK(ok.min_prize() == 3.0);
}

TEST_CASE("zero bid mass product") {
  CHECK(zero_bid_mass_product(5, 5, 0.4, 0.7) == doctest::Approx(1.0));
  // multiply the per-opponent factors (e/v)^(c (1-c)^k) explicitly
  double per_factor = std::pow(0.5, 0.5 * 1.0) * std::pow(0.5, 0.5 * 0.5);
  CHECK(zero_bid_mass_product(3, 1, 0.5, 0.5) == doctest::Approx(per_factor).epsilon(1e-12));
  CHECK(zero_bid_mass_product(3, 1, 0.5, 0.5) == doctest::Approx(0.59460).epsilon(1e-4));
  CHECK(zero_bid_mass_product(2, 1, 0.5, 0.25) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK_THROWS_AS(zero_bid_mass_product(3, 1, 0.5, 1.2), std::domain_error);
}

TEST_CASE("zero bid product telescoping identity") {
  for (int n = 2; n <= 10; ++n) {
    for (int i = 1; i < n; ++i) {
      for (double c = 0.1; c < 0.95; c += 0.1) {
        for (double r : {0.05, 0.3, 0.6, 0.9, 1.0}) {
          double product = 1.0;
          for (int k = 0; k <= n - i - 1; ++k) {
            product *= std::pow(r, c * std::pow(1.0 - c, k));
          }
          CHECK(zero_bid_mass_product(n, i, c, r) ==
                doctest::Approx(product).epsilon(1e-12));
        }
      }
    }
  }
}

TEST_CASE("interior bid closed form") {
  // d = 0.5, bid = (0.8 * 0.5)^2
  CHECK(interior_bid(2, 1, 0.5, 1.0, 0.8) == doctest::Approx(0.16).epsilon(1e-12));
  // independent golden-section maximization of the objective
  double oracle = golden_max(
      [&](double e) { return bid_objective(2, 1, 0.5, 1.0, 0.8, e); }, 0.0, 1.0);
  CHECK(interior_bid(2, 1, 0.5, 1.0, 0.8) == doctest::Approx(oracle).epsilon(1e-6));

  CHECK(interior_bid(3, 1, 0.5, 2.0, 1.0) == doctest::Approx(0.6328125).epsilon(1e-9));
  double oracle2 = golden_max(
      [&](double e) { return bid_objective(3, 1, 0.5, 2.0, 1.0, e); }, 0.0, 2.0);
  CHECK(interior_bid(3, 1, 0.5, 2.0, 1.0) == doctest::Approx(oracle2).epsilon(1e-4));

  // vanishing ability
  CHECK(interior_bid(2, 1, 0.5, 1.0, 1e-12) < 1e-20);
  CHECK_THROWS_AS(interior_bid(3, 3, 0.5, 1.0, 0.5), std::domain_error);
}

TEST_CASE("interior bid is monotone in theta and value") {
  SplitMix64 rng(31337);
  for (int trial = 0; trial < 300; ++trial) {
    int n = 2 + static_cast<int>(rng.uniform_below(5));
    int i = 1 + static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(n - 1)));
    double c = 0.2 + 0.6 * rng.next_double();
    double v = 0.5 + 4.0 * rng.next_double();
    double t1 = rng.next_double();
    double t2 = rng.next_double();
    if (t1 > t2) std::swap(t1, t2);
    CHECK(interior_bid(n, i, c, v, t1) <= interior_bid(n, i, c, v, t2) + 1e-15);
    CHECK(interior_bid(n, i, c, v, t1) <= interior_bid(n, i, c, 1.1 * v, t1) + 1e-15);
  }
}

TEST_CASE("first-order condition residual vanishes at the closed form") {
  for (int n = 2; n <= 6; ++n) {
    for (int i = 1; i < n; ++i) {
      for (double c : {0.3, 0.5, 0.7}) {
        for (double theta : {0.3, 0.55, 0.8, 1.0}) {
          double e = interior_bid(n, i, c, 1.7, theta);
          if (e <= 0.0) continue;
          CHECK(std::abs(foc_residual(n, i, c, 1.7, theta, e)) <= 1e-6);
        }
      }
    }
  }
}

TEST_CASE("best response branches") {
  // theta below the lower threshold: stay out
  BidHistory h;
  h.record(1, 0.4);
  h.record(2, 0.2);
  // n=3, i=3 would be the last bidder; use i=2 with one prize
  double d = std::pow(0.5, 1);  // n=3, i=2
  double lower = std::pow(0.4 / 1.0, d);
  CHECK(best_response_bid(3, 2, 0.5, 1.0, lower * 0.9, h, 1) == 0.0);

  // empty history collapses the thresholds: interior branch everywhere
  BidHistory empty;
  CHECK(best_response_bid(4, 2, 0.5, 1.0, 0.7, empty, 2) ==
        doctest::Approx(interior_bid(4, 2, 0.5, 1.0, 0.7)));

  // last bidder matches the required effort iff worth it
  BidHistory last;
  last.record(1, 0.1);
  CHECK(best_response_bid(2, 2, 0.5, 1.0, 0.5, last, 1) == doctest::Approx(0.1));
  CHECK(best_response_bid(2, 2, 0.5, 1.0, 0.05, last, 1) == 0.0);
  // direct payoff comparison at the two candidates {0, 0.1}
  CHECK(1.0 - 0.1 / 0.5 > 0.0);
  CHECK(1.0 - 0.1 / 0.05 < 0.0);
}

TEST_CASE("middle branch ties the cheapest profitable observed bid") {
  BidHistory h;
  h.record(1, 0.5);
  h.record(2, 0.3);
  h.record(3, 0.05);
  int n = 4, i = 3;
  double c = 0.5;
  double d = std::pow(1.0 - c, n - i);  // 0.5
  double v = 1.0;
  // pick theta inside [lower, upper): lower = (0.05)^0.5 ~= 0.2236,
  // upper = (0.5)^0.5 / 0.5 ~= 1.414 -> middle band
  double theta = 0.3;
  REQUIRE(theta >= std::pow(0.05 / v, d));
  REQUIRE(theta < std::pow(0.5 / v, d) / c);
  double bid = best_response_bid(n, i, c, v, theta, h, 3);
  CHECK(bid == doctest::Approx(0.05));
  // a higher ability still in the band ties the same cheapest bid
  CHECK(best_response_bid(n, i, c, v, 0.6, h, 3) == doctest::Approx(0.05));
  // with only two prize slots the cheapest candidate is 0.3
  double bid2 = best_response_bid(n, i, c, v, 0.6, h, 2);
  CHECK(bid2 == doctest::Approx(0.3));
}

TEST_CASE("best response never exceeds the expected prize value") {
  SplitMix64 rng(808);
  for (int trial = 0; trial < 500; ++trial) {
    int n = 2 + static_cast<int>(rng.uniform_below(5));
    int i = 1 + static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(n)));
    double c = 0.25 + 0.5 * rng.next_double();
    double v = 0.2 + 3.0 * rng.next_double();
    int L = 1 + static_cast<int>(rng.uniform_below(3));
    BidHistory h;
    int prior = static_cast<int>(rng.uniform_below(4));
    for (int b = 0; b < prior; ++b) {
      h.record(static_cast<std::uint32_t>(100 + b), v * rng.next_double());
    }
    double theta = rng.next_double();
    double bid = best_response_bid(n, i, c, v, theta, h, L);
    CHECK(bid >= 0.0);
    CHECK(bid <= v * (1.0 + 1e-12));
  }
}

TEST_CASE("oracle agreement on the zero and interior branches") {
  for (int n = 2; n <= 6; ++n) {
    for (double c : {0.3, 0.5, 0.7}) {
      for (int i = 1; i < n; ++i) {
        SplitMix64 rng(derive_seed(11, {static_cast<std::uint64_t>(n),
                                        static_cast<std::uint64_t>(i),
                                        static_cast<std::uint64_t>(c * 10)}));
        for (int variant = 0; variant < 3; ++variant) {
          BidHistory h;
          int prior = variant;  // 0, 1, 2 observed bids
          for (int b = 0; b < prior; ++b) {
            h.record(static_cast<std::uint32_t>(50 + b), 0.6 * rng.next_double());
          }
          int L = 1 + static_cast<int>(rng.uniform_below(2));
          for (int g = 1; g <= 50; ++g) {
            double theta = static_cast<double>(g) / 50.0;
            double v = 1.3;
            double closed = best_response_bid(n, i, c, v, theta, h, L);
            double d = std::pow(1.0 - c, n - i);
            double e_lth = h.kth_best(L);
            bool middle_band = false;
            if (e_lth > 0.0) {
              double lower_t = std::pow(e_lth / v, d);
              double upper = std::pow(h.best() / v, d) / c;
              middle_band = theta >= lower_t && theta < upper;
            }
            if (middle_band) continue;  // matching band is checked separately
            double oracle = numeric_best_response_oracle(n, i, c, v, theta, h, L);
            if (closed < 1e-8 || oracle < 1e-8) {
              CHECK(std::abs(closed - oracle) <= 1e-8);
            } else {
              CHECK(std::abs(closed - oracle) / oracle <= 1e-4);
            }
          }
        }
      }
    }
  }
}

TEST_CASE("middle-branch matches are individually rational and never beat the oracle") {
  SplitMix64 rng(2718);
  for (int trial = 0; trial < 400; ++trial) {
    int n = 3 + static_cast<int>(rng.uniform_below(4));
    int i = 1 + static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(n - 1)));
    double c = 0.3 + 0.4 * rng.next_double();
    double v = 1.0;
    int L = 1 + static_cast<int>(rng.uniform_below(3));
    BidHistory h;
    int prior = 1 + static_cast<int>(rng.uniform_below(4));
    for (int b = 0; b < prior; ++b) {
      h.record(static_cast<std::uint32_t>(70 + b), 0.8 * rng.next_double());
    }
    double theta = rng.next_double();
    double closed = best_response_bid(n, i, c, v, theta, h, L);
    if (closed == 0.0) continue;
    double payoff = bid_objective(n, i, c, v, theta, closed);
    CHECK(payoff >= -1e-12);
    double oracle = numeric_best_response_oracle(n, i, c, v, theta, h, L);
    double oracle_payoff = bid_objective(n, i, c, v, theta, oracle);
    CHECK(payoff <= oracle_payoff + 1e-9);
  }
}

TEST_CASE("numeric oracle basics") {
  BidHistory h;
  CHECK(numeric_best_response_oracle(3, 1, 0.5, 1.0, 0.0, h, 1) == 0.0);
  // concavity of the objective on the interior branch grid
  for (double c : {0.3, 0.5, 0.7}) {
    int n = 4, i = 2;
    double prev = 0.0, prev2 = 0.0;
    bool have2 = false;
    for (int g = 1; g <= 100; ++g) {
      double e = 0.01 * g;
      double f = bid_objective(n, i, c, 1.0, 0.8, e);
      if (have2) {
        double second_diff = f - 2 * prev + prev2;
        CHECK(second_diff <= 1e-9);
      }
      prev2 = prev;
      prev = f;
      have2 = g >= 2;
    }
  }
}

TEST_CASE("expected prize value fixed point") {
  PrizeStructure ps({4.0, 2.0, 1.0}, 8.0);
  // fixed mode returns the top prize
  VBarResult fixed = solve_v_bar(ps, 5, 2, 0.5, 0.6, VBarMode::fixed_m1);
  CHECK(fixed.value == doctest::Approx(4.0));
  CHECK(fixed.converged);

  // the fixed point settles fast and equals the rank-probability telescope
  VBarResult fp = solve_v_bar(ps, 5, 2, 0.5, 0.6, VBarMode::fixed_point);
  CHECK(fp.converged);
  CHECK(fp.iterations <= 5);
  double p = std::pow(0.6, 0.5);  // inverting the interior map recovers theta
  std::vector<double> probs{order_stat_cdf(1, 4, p), order_stat_cdf(2, 4, p),
                            order_stat_cdf(3, 4, p)};
  CHECK(fp.value == doctest::Approx(expected_prize_value(ps, probs)).epsilon(1e-9));

  // single bidder wins the top prize with certainty
  VBarResult solo = solve_v_bar(ps, 1, 1, 0.5, 0.4, VBarMode::fixed_point);
  CHECK(solo.value == doctest::Approx(4.0));
}

TEST_CASE("sequential auction floors dust bids and tracks history") {
  PrizeStructure ps({2.0, 1.0}, 3.0);
  SequentialAuction auction(6, 0.5, VBarMode::fixed_point, 1e-9);
  double b1 = auction.submit(1, 0.95, ps);
  CHECK(b1 >= 0.0);
  double b2 = auction.submit(2, 0.02, ps);
  CHECK((b2 == 0.0 || b2 >= 1e-9));
  CHECK(auction.history().observed() == 2);
  CHECK_FALSE(auction.v_bar_warning());
}
