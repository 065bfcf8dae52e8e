#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "specshare/rates.hpp"
#include "support/ppp_oracle.hpp"

using namespace specshare;

TEST(InstRate, Values) {
  EXPECT_DOUBLE_EQ(inst_rate(0.0), 0.0);
  EXPECT_DOUBLE_EQ(inst_rate(1.0), 1.0);
  EXPECT_DOUBLE_EQ(inst_rate(3.0), 2.0);
  EXPECT_THROW(inst_rate(-0.5), UsageError);
}

TEST(SbsAvgRate, Examples) {
  const std::vector<double> one{2.5}, same{1.5, 1.5, 1.5}, two{1.0, 3.0}, none;
  EXPECT_DOUBLE_EQ(sbs_avg_rate(one).rate, 2.5);
  EXPECT_DOUBLE_EQ(sbs_avg_rate(same).rate, 1.5);
  EXPECT_DOUBLE_EQ(sbs_avg_rate(two).rate, 2.0);
  EXPECT_TRUE(sbs_avg_rate(two).matched);
  EXPECT_EQ(sbs_avg_rate(none).rate, 0.0);
  EXPECT_FALSE(sbs_avg_rate(none).matched);
}

TEST(OpRate, Examples) {
  const std::vector<double> rates{1, 2, 3}, ones{1, 1, 1}, zeros{0, 0, 0};
  const std::vector<int> single{1}, all{0, 1, 2};
  EXPECT_DOUBLE_EQ(op_rate(single, rates, ones), 2.0);
  EXPECT_DOUBLE_EQ(op_rate(all, rates, ones), 6.0);
  EXPECT_DOUBLE_EQ(op_rate(all, rates, zeros), 0.0);
}

TEST(ParentOpRate, Examples) {
  const std::vector<double> four{4}, two_four{2, 4}, zeroed{0, 0}, none;
  EXPECT_DOUBLE_EQ(parent_op_rate(four, 1), 4.0);
  EXPECT_DOUBLE_EQ(parent_op_rate(two_four, 2), 3.0);
  // siblings colliding on one RB arrive here already zeroed
  EXPECT_DOUBLE_EQ(parent_op_rate(zeroed, 1), 0.0);
  EXPECT_DOUBLE_EQ(parent_op_rate(none, 0), 0.0);
}

namespace {

// Literal double sum over (RB, parent) pairs with an explicit matching matrix.
double naive_welfare(const std::vector<ChildRate>& ch, const std::vector<double>& w, int num_rbs) {
  const int K = static_cast<int>(w.size());
  std::vector<std::vector<int>> x(num_rbs, std::vector<int>(K, 0));
  std::vector<double> child_sum(K, 0.0);
  for (const auto& c : ch) {
    if (c.rb >= 0) x[c.rb][c.parent] = 1;
    if (c.rb >= 0) child_sum[c.parent] += c.rate;
  }
  double s = 0;
  for (int l = 0; l < num_rbs; ++l)
    for (int k = 0; k < K; ++k) {
      int held = 0;
      for (int m = 0; m < num_rbs; ++m) held += x[m][k];
      if (x[l][k]) s += w[k] * child_sum[k] / held;
    }
  return s;
}

}  // namespace

TEST(SocialWelfare, EmptyAndSingle) {
  const std::vector<double> w{1.0};
  const std::vector<int> cap{1}, quota{1};
  EXPECT_EQ(social_welfare(std::vector<ChildRate>{}, w, cap, quota), 0.0);
  const std::vector<ChildRate> one{{0, 0, 2.75}};
  EXPECT_DOUBLE_EQ(social_welfare(one, w, cap, quota), parent_op_rate(std::vector<double>{2.75}, 1));
}

TEST(SocialWelfare, MatchesNaiveDoubleSum) {
  specshare::Rng rng(21);
  std::uniform_real_distribution<double> rate(0.0, 5.0), weight(0.2, 3.0);
  std::uniform_int_distribution<int> pick_rb(-1, 3);
  for (int trial = 0; trial < 500; ++trial) {
    const std::vector<double> w{weight(rng), weight(rng), weight(rng)};
    const std::vector<int> cap{6, 6, 6, 6}, quota{4, 4, 4};
    std::vector<ChildRate> ch;
    for (int k = 0; k < 3; ++k)
      for (int s = 0; s < 3; ++s) ch.push_back({k, pick_rb(rng), rate(rng)});
    EXPECT_NEAR(social_welfare(ch, w, cap, quota), naive_welfare(ch, w, 4), 1e-9);
  }
}

TEST(SocialWelfare, TwoOperatorsTwoRbsByHand) {
  // parent 0 holds RBs 0 and 1 with child rates 1.5 and 2.5; parent 1 holds RB 1 with 3.0
  const std::vector<ChildRate> ch{{0, 0, 1.5}, {0, 1, 2.5}, {1, 1, 3.0}};
  const std::vector<double> w{2.0, 0.5};
  const std::vector<int> cap{2, 2}, quota{2, 1};
  const RateReport rep = rate_report(ch, w, cap, quota);
  EXPECT_DOUBLE_EQ(rep.per_parent_op_rate[0], 2.0);
  EXPECT_DOUBLE_EQ(rep.per_parent_op_rate[1], 3.0);
  EXPECT_EQ(rep.parent_rb_count[0], 2);
  // x_00 w_0 R_0 + x_10 w_0 R_0 + x_11 w_1 R_1
  EXPECT_DOUBLE_EQ(rep.social_welfare, 2.0 * 2.0 + 2.0 * 2.0 + 0.5 * 3.0);
}

TEST(SocialWelfare, InfeasibleMatchingsAreRejected) {
  const std::vector<double> w{1.0, 1.0};
  const std::vector<ChildRate> crowded{{0, 0, 1.0}, {1, 0, 1.0}};
  EXPECT_THROW(social_welfare(crowded, w, std::vector<int>{1}, std::vector<int>{1, 1}), UsageError);
  const std::vector<ChildRate> greedy{{0, 0, 1.0}, {0, 1, 1.0}};
  EXPECT_THROW(social_welfare(greedy, w, std::vector<int>{2, 2}, std::vector<int>{1, 1}), UsageError);
}

namespace {

// The same integral in its original variable, by composite Simpson on
// s = sqrt(t), which removes the square-root cusp at t = 0.
double expected_rate_in_t(double c) {
  const double s_max = std::sqrt(2.0 * std::log(1.0 + 60.0 / c) + 2.0);
  const int n = 400000;
  const double h = s_max / n;
  auto f = [c](double s) { return 2.0 * s * std::exp(-c * std::sqrt(std::expm1(s * s))); };
  double s = f(0) + f(s_max);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4 : 2) * f(i * h);
  return s * h / 3.0 / std::numbers::ln2;
}

}  // namespace

TEST(ExpectedRatePpp, AgreesWithIntegralInOriginalVariable) {
  for (double c : {0.05, 0.4, 1.0, 3.0, 12.0}) {
    // choose r so that lambda pi^2 r^2 E[sqrt p'] / (2 sqrt p) = c with unit powers
    const double lambda = 0.01;
    const double r = std::sqrt(2.0 * c / (lambda * std::numbers::pi * std::numbers::pi));
    EXPECT_NEAR(expected_rate_ppp(lambda, 1.0, 1.0, r) / expected_rate_in_t(c), 1.0, 1e-6) << "c=" << c;
  }
}

TEST(ExpectedRatePpp, Monotonicity) {
  const double base = expected_rate_ppp(0.05, 0.01, 0.08, 5.0);
  EXPECT_LT(expected_rate_ppp(0.06, 0.01, 0.08, 5.0), base);
  EXPECT_LT(expected_rate_ppp(0.05, 0.01, 0.09, 5.0), base);
  EXPECT_GT(expected_rate_ppp(0.05, 0.02, 0.08, 5.0), base);
  // four times the power halves c
  EXPECT_GT(expected_rate_ppp(0.05, 0.04, 0.08, 5.0), base);
  EXPECT_LT(expected_rate_ppp(1e3, 0.01, 0.08, 5.0), 1e-4);
}

TEST(ExpectedRatePpp, DomainErrors) {
  EXPECT_THROW(expected_rate_ppp(0.0, 0.01, 0.1, 5.0), DomainError);
  EXPECT_THROW(expected_rate_ppp(-1.0, 0.01, 0.1, 5.0), DomainError);
  EXPECT_THROW(expected_rate_ppp(0.05, 0.0, 0.1, 5.0), DomainError);
}

TEST(ExpectedRatePpp, CloseToPoissonFieldSimulation) {
  // one moderate point here; the acceptance binary runs three at full size
  const std::vector<double> levels{0.0025, 0.005, 0.0075, 0.01};
  double mean_sqrt = 0;
  for (double p : levels) mean_sqrt += std::sqrt(p) / 4;
  const double lambda = 0.02, r = 3.0;
  double formula = 0;
  for (double p : levels) formula += expected_rate_ppp(lambda, p, mean_sqrt, r) / 4;
  specshare::Rng rng(99);
  const oracle::Estimate mc = oracle::ppp_rate_disk(lambda, r, levels, 60.0, 20000, rng);
  EXPECT_NEAR(mc.mean / formula, 1.0, 0.05) << "mc " << mc.mean << " +- " << mc.stderr_ << " formula " << formula;
}

TEST(ExpectedRatePpp, RateDoesNotDependOnReceiverLocation) {
  // Slivnyak: the Poisson field looks the same from any point. A receiver
  // 10 m inside a 60 m square and one at its centre see the same mean rate
  // up to the (small) share of interference lost beyond the near edge.
  const std::vector<double> levels{0.0025, 0.005, 0.0075, 0.01};
  specshare::Rng rng(5);
  const auto centre = oracle::ppp_rate_square(0.05, 2.0, levels, 60.0, 30.0, 30.0, 20000, rng);
  const auto edge = oracle::ppp_rate_square(0.05, 2.0, levels, 60.0, 10.0, 30.0, 20000, rng);
  const double se = std::hypot(centre.stderr_, edge.stderr_);
  EXPECT_LT(std::abs(centre.mean - edge.mean), 4 * se + 0.01 * centre.mean)
      << centre.mean << " vs " << edge.mean << " se " << se;
}
