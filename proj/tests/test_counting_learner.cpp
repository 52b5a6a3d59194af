#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "scalinglaw/counting_learner.hpp"
#include "test_support.hpp"

namespace scalinglaw {
namespace {

using testing::code_of;
using testing::rel_near;

// Enumerates all 2^i ordered flip sequences. Fair coin, l1: the loss of a
// sequence with k ones is |k/i - 1/2| = |2k - i| / (2i); summing integers
// keeps the oracle exact.
double brute_force_fair_l1(unsigned i) {
  std::uint64_t total = 0;
  for (std::uint64_t seq = 0; seq < (std::uint64_t{1} << i); ++seq) {
    const auto k = static_cast<std::int64_t>(__builtin_popcountll(seq));
    total += static_cast<std::uint64_t>(std::llabs(2 * k - static_cast<std::int64_t>(i)));
  }
  return std::ldexp(static_cast<double>(total) / (2.0 * i), -static_cast<int>(i));
}

// Same enumeration for an arbitrary coin and loss: every sequence weighted by
// its probability, loss from the per-outcome template written out longhand.
double brute_force_general(unsigned i, double p, LossKind loss) {
  double expectation = 0.0;
  for (std::uint64_t seq = 0; seq < (std::uint64_t{1} << i); ++seq) {
    const int k = __builtin_popcountll(seq);
    const double prob = std::pow(p, k) * std::pow(1 - p, int(i) - k);
    double q1 = double(k) / i, q0 = 1 - q1;
    double l = 0;
    if (loss == LossKind::l1) {
      l = std::abs(q0 - (1 - p)) * (1 - p) + std::abs(q1 - p) * p;
    } else if (loss == LossKind::l2_norm) {
      const double norm = std::sqrt((q0 - (1 - p)) * (q0 - (1 - p)) + (q1 - p) * (q1 - p));
      l = norm * (1 - p) + norm * p;
    } else {
      const double eps = 1.0 / (i + 2.0);
      q1 = std::min(std::max(q1, eps), 1 - eps);
      q0 = 1 - q1;
      l = (1 - p) * std::abs(std::log(1 - p) - std::log(q0)) + p * std::abs(std::log(p) - std::log(q1));
    }
    expectation += prob * l;
  }
  return expectation;
}

// 2^-(2n+1) C(2n, n) via long-double log-gamma.
double lgamma_oracle(std::uint64_t i) {
  const long double n = static_cast<long double>(i / 2);
  return static_cast<double>(
      std::exp(std::lgammal(2 * n + 1) - 2 * std::lgammal(n + 1) - (2 * n + 1) * std::numbers::ln2_v<long double>));
}

TEST(ExactExpectedLoss, SmallValues) {
  EXPECT_EQ(exact_expected_loss_fair_l1(1), 0.5);
  EXPECT_EQ(exact_expected_loss_fair_l1(2), 0.25);
  EXPECT_EQ(exact_expected_loss_fair_l1(3), 0.25);
  EXPECT_EQ(exact_expected_loss_fair_l1(4), 0.1875);
  EXPECT_EQ(code_of([] { exact_expected_loss_fair_l1(0); }), ErrorCode::invalid_argument);
}

TEST(ExactExpectedLoss, AgreesWithBruteForceAndBinomialSum) {
  const CoinDistribution fair(0.5);
  for (unsigned i = 1; i <= 20; ++i) {
    const double closed = exact_expected_loss_fair_l1(i);
    EXPECT_NEAR(closed, brute_force_fair_l1(i), 1e-12) << i;
    EXPECT_NEAR(expected_loss_binomial_sum(i, fair, LossKind::l1), closed, 1e-12) << i;
  }
}

TEST(ExactExpectedLoss, EvenOddPairsAreEqual) {
  for (std::uint64_t i = 2; i <= 4096; i += 2)
    ASSERT_EQ(exact_expected_loss_fair_l1(i), exact_expected_loss_fair_l1(i + 1)) << i;
}

TEST(ExactExpectedLoss, SeriesMatchesLogGammaAboveExactRange) {
  for (std::uint64_t i : {64u, 65u, 66u, 67u, 100u, 101u, 1000u, 4097u, 10000u, 123456u})
    EXPECT_TRUE(rel_near(exact_expected_loss_fair_l1(i), lgamma_oracle(i), 1e-12)) << i;
  // The exact branch and the series agree across the switch-over.
  EXPECT_TRUE(rel_near(exact_expected_loss_fair_l1(64), lgamma_oracle(64), 1e-13));
}

TEST(ExactExpectedLoss, Asymptote) {
  const double at_1e4 = exact_expected_loss_fair_l1(10000);
  EXPECT_NEAR(at_1e4, 0.0039894, 1e-7);
  const double product = at_1e4 * std::sqrt(2 * std::numbers::pi * 1e4);
  EXPECT_GE(product, 0.98);
  EXPECT_LE(product, 1.02);
  const double i = std::ldexp(1.0, 20);
  const double big = exact_expected_loss_fair_l1(1u << 20) * std::sqrt(2 * std::numbers::pi * i);
  EXPECT_GE(big, 0.999);
  EXPECT_LE(big, 1.001);
}

TEST(BinomialSum, WorkedExamples) {
  EXPECT_NEAR(expected_loss_binomial_sum(2, CoinDistribution(0.5), LossKind::l1), 0.25, 1e-15);
  EXPECT_NEAR(expected_loss_binomial_sum(2, CoinDistribution(0.6), LossKind::l1),
              0.16 * 0.6 + 0.48 * 0.1 + 0.36 * 0.4, 1e-15);
  EXPECT_NEAR(expected_loss_binomial_sum(2, CoinDistribution(0.6), LossKind::l1), 0.288, 1e-15);
  EXPECT_NEAR(expected_loss_binomial_sum(2, CoinDistribution(0.5), LossKind::l2_norm),
              0.25 * std::sqrt(2.0), 1e-15);
  // |KL| at i=2: k=0 and k=2 clamp the estimate to 1/4 and 3/4.
  const double tail = 0.5 * std::abs(std::log(0.5) - std::log(0.75)) + 0.5 * std::abs(std::log(0.5) - std::log(0.25));
  EXPECT_NEAR(expected_loss_binomial_sum(2, CoinDistribution(0.5), LossKind::abs_kl), 0.5 * tail, 1e-15);
}

TEST(BinomialSum, MatchesSequenceEnumeration) {
  for (double p : {0.1, 0.3, 0.5, 0.77}) {
    const CoinDistribution coin(p);
    for (LossKind loss : {LossKind::l1, LossKind::l2_norm, LossKind::abs_kl})
      for (unsigned i = 1; i <= 14; ++i)
        EXPECT_NEAR(expected_loss_binomial_sum(i, coin, loss), brute_force_general(i, p, loss), 1e-13)
            << p << " " << loss_kind_name(loss) << " " << i;
  }
}

TEST(BinomialSum, LargeIMatchesClosedForm) {
  const CoinDistribution fair(0.5);
  for (std::uint64_t i : {65u, 100u, 1001u, 5000u})
    EXPECT_TRUE(rel_near(expected_loss_binomial_sum(i, fair, LossKind::l1), exact_expected_loss_fair_l1(i), 1e-10))
        << i;
}

TEST(CoinDistribution, RejectsDegenerateCoins) {
  EXPECT_EQ(code_of([] { CoinDistribution(0.0); }), ErrorCode::invalid_argument);
  EXPECT_EQ(code_of([] { CoinDistribution(1.0); }), ErrorCode::invalid_argument);
}

TEST(MonteCarlo, FairCoinTwoFlips) {
  const auto mc = monte_carlo_expected_loss(2, CoinDistribution(0.5), LossKind::l1, 1000000, 3);
  ASSERT_TRUE(mc.standard_error.has_value());
  EXPECT_LE(std::abs(mc.estimate - 0.25), 3 * *mc.standard_error);
  const auto again = monte_carlo_expected_loss(2, CoinDistribution(0.5), LossKind::l1, 1000000, 3);
  EXPECT_EQ(mc.estimate, again.estimate);
  EXPECT_EQ(*mc.standard_error, *again.standard_error);
}

TEST(MonteCarlo, SingleTrial) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto mc = monte_carlo_expected_loss(2, CoinDistribution(0.5), LossKind::l1, 1, seed);
    EXPECT_TRUE(mc.estimate == 0.0 || mc.estimate == 0.5);
    EXPECT_FALSE(mc.standard_error.has_value());
  }
}

TEST(MonteCarlo, ConsistentWithBinomialSum) {
  for (double p : {0.3, 0.5, 0.8}) {
    for (std::uint64_t i : {10u, 100u, 1000u}) {
      const CoinDistribution coin(p);
      const double exact = expected_loss_binomial_sum(i, coin, LossKind::l1);
      int within = 0;
      for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto mc = monte_carlo_expected_loss(i, coin, LossKind::l1, 2000, seed);
        if (std::abs(mc.estimate - exact) <= 4 * *mc.standard_error) ++within;
      }
      EXPECT_GE(within, 99) << p << " " << i;
    }
  }
}

TEST(ExpectedLossCurve, ClosedFormAndMismatch) {
  const std::vector<std::uint64_t> sizes{2, 4};
  const auto curve = expected_loss_curve(sizes, CoinDistribution(0.5), LossKind::l1, ClosedForm{});
  ASSERT_EQ(curve.size(), 2u);
  EXPECT_EQ(curve[0].loss_value, 0.25);
  EXPECT_EQ(curve[1].loss_value, 0.1875);
  EXPECT_EQ(curve[0].split_tag, "closed_form");
  EXPECT_EQ(curve[0].metric_name, "counting-l1");
  EXPECT_EQ(code_of([&] { expected_loss_curve(sizes, CoinDistribution(0.6), LossKind::l1, ClosedForm{}); }),
            ErrorCode::method_mismatch);
  EXPECT_EQ(code_of([&] { expected_loss_curve(sizes, CoinDistribution(0.5), LossKind::abs_kl, ClosedForm{}); }),
            ErrorCode::method_mismatch);
  const auto mc = expected_loss_curve(sizes, CoinDistribution(0.5), LossKind::l1, MonteCarlo{1, 5});
  EXPECT_EQ(mc[0].seed, 5);
}

TEST(ExpectedLossCurve, ExponentRecovery) {
  std::vector<std::uint64_t> sizes;
  for (std::uint64_t i = 16; i <= 16384; i *= 2) sizes.push_back(i);
  const auto curve = expected_loss_curve(sizes, CoinDistribution(0.5), LossKind::l1, ClosedForm{});
  const auto fit = fit_zero_floor(curve);
  EXPECT_GE(fit.beta, -0.52);
  EXPECT_LE(fit.beta, -0.48);
}

TEST(MeasureLossExponent, OtherLosses) {
  std::vector<std::uint64_t> sizes;
  for (std::uint64_t i = 16; i <= 4096; i *= 2) sizes.push_back(i);
  const auto l2 = measure_loss_exponent(sizes, CoinDistribution(0.5), LossKind::l2_norm);
  EXPECT_NEAR(l2.fit.beta, -0.5, 0.02);
  EXPECT_TRUE(l2.power_law_like);
  const auto kl = measure_loss_exponent(sizes, CoinDistribution(0.3), LossKind::abs_kl);
  EXPECT_EQ(kl.power_law_like, kl.fit.rrmse <= 0.02);
  EXPECT_LT(kl.fit.beta, 0.0);
}

TEST(CountingLearnerAdapter, TrainAndEvaluate) {
  const CountingLearner learner;
  const std::vector<std::uint8_t> shard{1, 0, 1, 1};
  const auto state = learner.train(shard, 1.0, 0);
  EXPECT_EQ(state.i, 4u);
  EXPECT_EQ(state.heads, 3u);
  const std::vector<std::uint8_t> validation{1, 0};
  EXPECT_DOUBLE_EQ(learner.evaluate(state, validation), 0.25);
  const std::vector<std::uint8_t> all_ones{1, 1, 1};
  EXPECT_DOUBLE_EQ(learner.evaluate(state, all_ones), 0.25);
  EXPECT_EQ(learner.param_count(123.0), 1u);
  EXPECT_EQ(code_of([&] { learner.train({}, 1.0, 0); }), ErrorCode::empty_shard);
}

}  // namespace
}  // namespace scalinglaw
