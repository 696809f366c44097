#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <map>
#include <vector>

#include "cnp/errors.hpp"
#include "cnp/kdpp.hpp"
#include "oracles.hpp"

namespace {

using cnp::kdpp::WeightVector;

std::map<std::uint32_t, double> empirical(const WeightVector& w, std::size_t k, int draws,
                                          std::uint64_t seed) {
  cnp::Rng rng(seed);
  std::map<std::uint32_t, double> freq;
  for (int i = 0; i < draws; ++i) {
    const auto subset = cnp::kdpp::sample_k_subset(w, k, rng);
    freq[cnp::oracle::to_mask(subset)] += 1.0 / draws;
  }
  return freq;
}

TEST(WeightVector, RejectsBadInput) {
  EXPECT_THROW(WeightVector({}), cnp::InvalidInput);
  EXPECT_THROW(WeightVector({1.0, -0.5}), cnp::InvalidInput);
  EXPECT_THROW(WeightVector({1.0, std::nan("")}), cnp::InvalidInput);
  EXPECT_THROW(WeightVector({1.0, std::numeric_limits<double>::infinity()}), cnp::InvalidInput);
  EXPECT_THROW(WeightVector({0.0, 0.0}), cnp::InvalidInput);
  EXPECT_NO_THROW(WeightVector({0.0, 1.0}));
}

TEST(EspTable, SmallExamples) {
  EXPECT_DOUBLE_EQ(cnp::kdpp::build_esp_table(WeightVector({1, 1, 1}), 2).normalizer(), 3.0);
  EXPECT_DOUBLE_EQ(cnp::kdpp::build_esp_table(WeightVector({1, 2, 3}), 2).normalizer(), 11.0);
  EXPECT_DOUBLE_EQ(cnp::kdpp::build_esp_table(WeightVector({0.3, 2, 7}), 0).normalizer(), 1.0);
}

TEST(EspTable, MatchesEnumerationAtEveryOrder) {
  cnp::Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> w(6);
    for (double& x : w) x = 0.05 + 3.0 * cnp::uniform01(rng);
    const auto table = cnp::kdpp::build_esp_table(WeightVector(w), 6);
    for (std::size_t n = 0; n <= 6; ++n) {
      for (std::size_t k = 0; k <= 6; ++k) {
        const std::span<const double> prefix(w.data(), n);
        EXPECT_NEAR(table.at(n, k), cnp::oracle::esp(prefix, k), 1e-12 * (1 + table.at(n, k)));
      }
    }
  }
}

TEST(EspTable, RejectsBadOrderAndZeroWeights) {
  EXPECT_THROW(cnp::kdpp::build_esp_table(WeightVector({1, 2}), 3), cnp::InvalidInput);
  EXPECT_THROW(cnp::kdpp::build_esp_table(WeightVector({1, 0}), 1), cnp::InvalidInput);
}

TEST(SampleKSubset, UniformWeightsGiveUniformSubsets) {
  const auto freq = empirical(WeightVector({1, 1, 1}), 2, 90000, 1);
  ASSERT_EQ(freq.size(), 3u);
  for (const auto& [mask, f] : freq) EXPECT_NEAR(f, 1.0 / 3.0, 0.01);
}

TEST(SampleKSubset, WeightedThreeArmExample) {
  const auto freq = empirical(WeightVector({1, 1, 2}), 2, 200000, 2);
  EXPECT_NEAR(freq.at(0b011), 0.2, 0.006);
  EXPECT_NEAR(freq.at(0b101), 0.4, 0.006);
  EXPECT_NEAR(freq.at(0b110), 0.4, 0.006);
}

TEST(SampleKSubset, FullSetWhenKEqualsN) {
  cnp::Rng rng(4);
  for (int i = 0; i < 100; ++i) {
    const auto s = cnp::kdpp::sample_k_subset(WeightVector({0.1, 5, 2, 0.7}), 4, rng);
    EXPECT_EQ(s, (std::vector<cnp::ArmIndex>{0, 1, 2, 3}));
  }
}

TEST(SampleKSubset, AlwaysReturnsKSortedDistinctArms) {
  cnp::Rng rng(8);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t n = 1 + cnp::uniform_index(rng, 10);
    const std::size_t k = 1 + cnp::uniform_index(rng, n);
    std::vector<double> w(n);
    for (double& x : w) x = std::exp(-20.0 * cnp::uniform01(rng));
    const auto s = cnp::kdpp::sample_k_subset(WeightVector(w), k, rng);
    ASSERT_EQ(s.size(), k);
    for (std::size_t j = 0; j < k; ++j) {
      ASSERT_LT(s[j], n);
      if (j > 0) {
        ASSERT_LT(s[j - 1], s[j]);
      }
    }
  }
}

TEST(SampleKSubset, MatchesEnumerationOnRandomInstances) {
  cnp::Rng rng(33);
  for (int trial = 0; trial < 5; ++trial) {
    const std::size_t n = 3 + cnp::uniform_index(rng, 4);
    const std::size_t k = 1 + cnp::uniform_index(rng, std::min<std::size_t>(n, 4));
    std::vector<double> w(n);
    for (double& x : w) x = 0.1 + cnp::uniform01(rng);
    const auto exact = cnp::oracle::subset_distribution(w, k);
    const auto freq = empirical(WeightVector(w), k, 50000, 100 + trial);
    double tv = 0.0;
    for (const auto& [mask, p] : exact) {
      const auto it = freq.find(mask);
      tv += std::abs(p - (it == freq.end() ? 0.0 : it->second));
    }
    EXPECT_LT(tv / 2, 0.02) << "n=" << n << " k=" << k;
  }
}

TEST(SampleKSubset, UnderflowingTableFallsBackToLogDomain) {
  const WeightVector w({1e-300, 1e-300, 1e-300, 1e-300});
  const auto freq = empirical(w, 3, 40000, 5);
  ASSERT_EQ(freq.size(), 4u);
  for (const auto& [mask, f] : freq) EXPECT_NEAR(f, 0.25, 0.01);
}

TEST(SampleKSubset, DegenerateWeightsTakeAllPositiveArms) {
  cnp::Rng rng(6);
  int zero_arm_two = 0;
  for (int i = 0; i < 20000; ++i) {
    const auto s = cnp::kdpp::sample_k_subset(WeightVector({1, 0, 0, 0.5}), 3, rng);
    ASSERT_EQ(s.size(), 3u);
    ASSERT_EQ(s.front(), 0u);
    ASSERT_EQ(s.back(), 3u);
    zero_arm_two += s[1] == 2;
  }
  EXPECT_NEAR(zero_arm_two / 20000.0, 0.5, 0.015);
}

TEST(Marginals, ThreeArmExample) {
  const WeightVector w({1, 1, 2});
  EXPECT_NEAR(cnp::kdpp::marginal_inclusion(w, 2, 2), 0.8, 1e-12);
  EXPECT_NEAR(cnp::kdpp::marginal_inclusion(w, 2, 0), 0.6, 1e-12);
  EXPECT_NEAR(cnp::kdpp::marginal_inclusion(w, 2, 1), 0.6, 1e-12);
}

TEST(Marginals, UniformWeightsGiveKOverN) {
  const auto m = cnp::kdpp::marginals(WeightVector(std::vector<double>(7, 0.4)), 3);
  for (double x : m) EXPECT_NEAR(x, 3.0 / 7.0, 1e-12);
}

TEST(Marginals, MatchEnumerationAndSumToK) {
  cnp::Rng rng(44);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + cnp::uniform_index(rng, 8);
    const std::size_t k = 1 + cnp::uniform_index(rng, n);
    std::vector<double> w(n);
    for (double& x : w) x = std::exp(-8.0 * cnp::uniform01(rng));
    const auto m = cnp::kdpp::marginals(WeightVector(w), k);
    const auto ref = cnp::oracle::inclusion_marginals(w, k);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_NEAR(m[i], ref[i], 1e-9 * ref[i]);
      EXPECT_NEAR(m[i], cnp::kdpp::marginal_inclusion(WeightVector(w), k, i), 1e-15);
      sum += m[i];
    }
    EXPECT_NEAR(sum, static_cast<double>(k), 1e-9);
  }
}

TEST(Marginals, DegenerateWeights) {
  const auto m = cnp::kdpp::marginals(WeightVector({1, 0, 0, 0.5}), 3);
  EXPECT_DOUBLE_EQ(m[0], 1.0);
  EXPECT_DOUBLE_EQ(m[3], 1.0);
  EXPECT_DOUBLE_EQ(m[1], 0.5);
  EXPECT_DOUBLE_EQ(m[2], 0.5);
  const auto sparse = cnp::kdpp::marginals(WeightVector({1, 0, 0.5, 0.5}), 2);
  EXPECT_DOUBLE_EQ(sparse[1], 0.0);
  EXPECT_NEAR(sparse[0] + sparse[2] + sparse[3], 2.0, 1e-12);
}

TEST(Marginals, RejectOutOfRangeArm) {
  EXPECT_THROW(cnp::kdpp::marginal_inclusion(WeightVector({1, 1}), 1, 2), cnp::InvalidInput);
}

TEST(Stabilize, EqualEstimatesGiveUnitWeights) {
  const std::vector<double> est(5, 123.4);
  const auto w = cnp::kdpp::stabilize(est, 0.7);
  for (double x : w.values()) EXPECT_DOUBLE_EQ(x, 1.0);
}

TEST(Stabilize, ShiftedExample) {
  const std::vector<double> est{10, 11, 12};
  const auto w = cnp::kdpp::stabilize(est, 1.0);
  EXPECT_DOUBLE_EQ(w[0], 1.0);
  EXPECT_NEAR(w[1], std::exp(-1.0), 1e-15);
  EXPECT_NEAR(w[2], std::exp(-2.0), 1e-15);
  const auto shifted = cnp::oracle::subset_distribution(w.values(), 2);
  const auto unshifted = cnp::oracle::subset_distribution_from_losses(est, 1.0, 2);
  for (const auto& [mask, p] : unshifted) EXPECT_NEAR(shifted.at(mask), p, 1e-12);
}

TEST(Stabilize, HugeGapConcentratesAwayFromTheBadArm) {
  const std::vector<double> est{0, 1e6, 0};
  const auto w = cnp::kdpp::stabilize(est, 1.0);
  EXPECT_EQ(w[1], 0.0);
  cnp::Rng rng(2);
  for (int i = 0; i < 1000; ++i) {
    EXPECT_EQ(cnp::kdpp::sample_k_subset(w, 2, rng), (std::vector<cnp::ArmIndex>{0, 2}));
  }
  EXPECT_EQ(cnp::kdpp::sample_k_subset(w, 3, rng).size(), 3u);
}

TEST(Stabilize, RejectsNonFiniteEstimates) {
  const std::vector<double> est{0, std::numeric_limits<double>::infinity()};
  EXPECT_THROW(cnp::kdpp::stabilize(est, 1.0), cnp::InvalidInput);
}

}  // namespace
