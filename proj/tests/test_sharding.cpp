#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "scalinglaw/random.hpp"
#include "scalinglaw/sharding.hpp"
#include "test_support.hpp"

namespace scalinglaw {
namespace {

using testing::code_of;
using testing::read_golden;

TEST(SplitMix64, ReferenceStream) {
  SplitMix64 rng(1234567);
  const std::uint64_t expected[] = {6457827717110365317ULL, 3203168211198807973ULL,
                                    9817491932198370423ULL, 4593380528125082431ULL,
                                    16408922859458223821ULL};
  for (auto e : expected) EXPECT_EQ(rng.next(), e);
}

TEST(SplitMix64, BoundedStaysInRange) {
  SplitMix64 rng(9);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) ++counts[rng.bounded(7)];
  for (int c : counts) EXPECT_NEAR(c, 10000, 500);
  for (int i = 0; i < 1000; ++i) EXPECT_EQ(rng.bounded(1), 0u);
}

TEST(PlanShards, GeometricSchedule) {
  const auto plan = plan_shards({1000000, 0.001, 2.0, 0.5, 0.05, 7});
  const std::vector<std::uint64_t> expected{1000, 2000, 4000, 8000, 16000, 32000, 64000, 128000, 256000};
  EXPECT_EQ(plan.shard_sizes, expected);
  EXPECT_EQ(plan.validation_size, 50000u);
  EXPECT_EQ(plan.shuffle_seed, 7u);
  EXPECT_TRUE(plan.nested);
}

TEST(PlanShards, NmtScaleDataset) {
  const auto plan = plan_shards({4500000, 0.001, 2.0, 0.95, 0.05, 0});
  EXPECT_EQ(plan.shard_sizes.front(), 4500u);
  EXPECT_EQ(plan.shard_sizes.size(), 10u);
  EXPECT_EQ(plan.shard_sizes.back(), 4500u << 9);
  EXPECT_LE(plan.validation_size + plan.shard_sizes.back(), plan.total_size);
}

TEST(PlanShards, Errors) {
  EXPECT_EQ(code_of([] { plan_shards({1000, 0.0001, 2.0, 0.5, 0.05, 0}); }), ErrorCode::too_small_dataset);
  EXPECT_EQ(code_of([] { plan_shards({1000, 0.5, 2.0, 0.4, 0.05, 0}); }), ErrorCode::invalid_fractions);
  EXPECT_EQ(code_of([] { plan_shards({1000, 0.01, 2.0, 0.99, 0.05, 0}); }), ErrorCode::invalid_fractions);
  EXPECT_EQ(code_of([] { plan_shards({1000, 0.01, 1.0, 0.5, 0.05, 0}); }), ErrorCode::invalid_fractions);
  EXPECT_EQ(code_of([] { plan_shards({1000, 0.01, 2.0, 0.5, 0.0, 0}); }), ErrorCode::invalid_fractions);
}

TEST(PlanShards, RatiosStayNearTwo) {
  for (std::uint64_t total : {12345u, 1000000u, 777777u}) {
    const auto plan = plan_shards({total, 0.001, 2.0, 0.5, 0.05, 0});
    for (std::size_t k = 1; k < plan.shard_sizes.size(); ++k) {
      const double r = double(plan.shard_sizes[k]) / double(plan.shard_sizes[k - 1]);
      EXPECT_GE(r, 1.8);
      EXPECT_LE(r, 2.2);
    }
  }
}

TEST(ShardPlan, ValidateRejectsOverlap) {
  ShardPlan plan{10, 7, {2, 4}, 0, true};
  EXPECT_EQ(code_of([&] { plan.validate(); }), ErrorCode::invalid_plan);
  plan = {10, 2, {4, 4}, 0, true};
  EXPECT_EQ(code_of([&] { plan.validate(); }), ErrorCode::invalid_plan);
  plan = {10, 2, {3, 6}, 0, false};
  EXPECT_EQ(code_of([&] { plan.validate(); }), ErrorCode::invalid_plan);
}

TEST(AssignIndices, GoldenTenRecords) {
  const ShardPlan plan{10, 2, {2, 4}, 42, true};
  const auto a = assign_indices(plan, 10);
  std::ostringstream csv;
  csv << "index,role,shard_rank\n";
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    const auto& r = a.records[i];
    csv << i << ','
        << (r.role == RecordRole::validation ? "validation" : r.role == RecordRole::shard ? "shard" : "unused")
        << ',';
    if (r.role == RecordRole::shard) csv << r.shard_rank;
    csv << '\n';
  }
  EXPECT_EQ(csv.str(), read_golden("assign_total10_seed42.csv"));
  // Shard 0 is the first two entries of the largest shard's order.
  const auto s1 = a.shard_indices(1);
  const auto s0 = a.shard_indices(0);
  EXPECT_TRUE(std::equal(s0.begin(), s0.end(), s1.begin()));
}

TEST(AssignIndices, GoldenPermutation) {
  const auto order = seeded_permutation(1000, 7);
  std::ostringstream text;
  for (std::size_t i = 0; i < order.size(); ++i) text << (i ? " " : "") << order[i];
  text << '\n';
  EXPECT_EQ(text.str(), read_golden("permutation_n1000_seed7.txt"));
}

TEST(AssignIndices, ContractProperties) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto plan = plan_shards({5000 + seed * 37, 0.01, 2.0, 0.6, 0.1, seed});
    const auto a = assign_indices(plan, plan.total_size);
    EXPECT_EQ(a.order, assign_indices(plan, plan.total_size).order);

    const std::set<std::uint64_t> validation(a.validation_indices().begin(), a.validation_indices().end());
    std::set<std::uint64_t> previous;
    for (std::size_t k = 0; k < plan.shard_sizes.size(); ++k) {
      const std::set<std::uint64_t> shard(a.shard_indices(k).begin(), a.shard_indices(k).end());
      EXPECT_EQ(shard.size(), plan.shard_sizes[k]);
      for (auto idx : previous) EXPECT_TRUE(shard.count(idx));
      for (auto idx : shard) EXPECT_FALSE(validation.count(idx));
      previous = shard;
    }
    // Each index lands in exactly one of validation / largest shard / unused.
    std::vector<std::uint64_t> sorted = a.order;
    std::sort(sorted.begin(), sorted.end());
    for (std::uint64_t i = 0; i < sorted.size(); ++i) ASSERT_EQ(sorted[i], i);
    std::size_t n_val = 0, n_shard = 0, n_unused = 0;
    for (const auto& r : a.records) {
      n_val += r.role == RecordRole::validation;
      n_shard += r.role == RecordRole::shard;
      n_unused += r.role == RecordRole::unused;
    }
    EXPECT_EQ(n_val, plan.validation_size);
    EXPECT_EQ(n_shard, plan.shard_sizes.back());
    EXPECT_EQ(n_val + n_shard + n_unused, plan.total_size);
  }
}

TEST(AssignIndices, NonNestedShardsAreDisjoint) {
  const ShardPlan plan{100, 10, {5, 10, 20}, 3, false};
  const auto a = assign_indices(plan, 100);
  std::set<std::uint64_t> seen(a.validation_indices().begin(), a.validation_indices().end());
  for (std::size_t k = 0; k < 3; ++k)
    for (auto idx : a.shard_indices(k)) EXPECT_TRUE(seen.insert(idx).second);
  EXPECT_EQ(seen.size(), 45u);
}

TEST(AssignIndices, ShuffleOnlyMatches) {
  const ShardPlan plan{500, 50, {10, 20, 40, 80}, 3, true};
  const auto full = assign_indices(plan, 500);
  const auto light = shuffle_for_plan(plan, 500);
  EXPECT_EQ(light.order, full.order);
  EXPECT_TRUE(light.records.empty());
  EXPECT_TRUE(std::ranges::equal(light.shard_indices(3), full.shard_indices(3)));
  EXPECT_EQ(code_of([&] { shuffle_for_plan(plan, 501); }), ErrorCode::size_mismatch);
}

TEST(AssignIndices, SizeMismatch) {
  const ShardPlan plan{10, 2, {2, 4}, 42, true};
  EXPECT_EQ(code_of([&] { assign_indices(plan, 11); }), ErrorCode::size_mismatch);
}

TEST(AssignIndices, ShardAttributeRates) {
  // Records i with i % 10 < 3 carry the attribute: q = 0.3.
  const ShardPlan base{20000, 1000, {100, 200, 400, 800, 1600, 3200, 6400}, 0, true};
  const double q = 0.3;
  std::vector<int> within(base.shard_sizes.size(), 0);
  const int seeds = 200;
  for (int s = 0; s < seeds; ++s) {
    ShardPlan plan = base;
    plan.shuffle_seed = static_cast<std::uint64_t>(s);
    const auto a = assign_indices(plan, plan.total_size);
    for (std::size_t k = 0; k < plan.shard_sizes.size(); ++k) {
      const auto idx = a.shard_indices(k);
      const double rate =
          double(std::count_if(idx.begin(), idx.end(), [](std::uint64_t i) { return i % 10 < 3; })) /
          double(idx.size());
      if (std::abs(rate - q) <= 4 * std::sqrt(q * (1 - q) / double(idx.size()))) ++within[k];
    }
  }
  for (int w : within) EXPECT_GE(w, seeds * 99 / 100);
}

}  // namespace
}  // namespace scalinglaw
