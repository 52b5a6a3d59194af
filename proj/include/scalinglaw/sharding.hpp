#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace scalinglaw {

/// Geometric shard schedule with a validation set disjoint from every shard.
///
/// Sizes are effective record counts supplied by the caller; when only part
/// of a record is observable (truncated sequences), count only that part
/// before planning.
struct ShardPlan {
  std::uint64_t total_size = 0;
  std::uint64_t validation_size = 0;
  std::vector<std::uint64_t> shard_sizes;  // strictly ascending
  std::uint64_t shuffle_seed = 0;
  bool nested = true;

  /// Throws invalid_plan when an invariant is broken.
  void validate() const;

  friend bool operator==(const ShardPlan&, const ShardPlan&) = default;
};

struct ShardPlanRequest {
  std::uint64_t total_size = 0;
  double smallest_fraction = 0.001;
  double ratio = 2.0;
  double max_fraction = 0.5;
  double validation_fraction = 0.05;
  std::uint64_t seed = 0;
};

/// Shard k has size round(round(total * smallest) * ratio^k), for every k
/// whose size stays at or below total * max_fraction.
ShardPlan plan_shards(const ShardPlanRequest& request);

enum class RecordRole : std::uint8_t { unused, validation, shard };

struct RecordAssignment {
  RecordRole role = RecordRole::unused;
  std::uint32_t shard_rank = 0;  // smallest shard containing the record
};

struct ShardAssignment {
  ShardPlan plan;
  /// Seeded permutation of [0, total_size). Validation takes the first
  /// validation_size entries; shards follow.
  std::vector<std::uint64_t> order;
  std::vector<RecordAssignment> records;  // empty from shuffle_for_plan

  std::span<const std::uint64_t> validation_indices() const;
  std::span<const std::uint64_t> shard_indices(std::size_t rank) const;
};

/// Fisher-Yates shuffle of [0, n): for i = n-1 down to 1, swap entry i with
/// entry SplitMix64(seed).bounded(i + 1).
std::vector<std::uint64_t> seeded_permutation(std::uint64_t n, std::uint64_t seed);

/// Throws size_mismatch unless record_count == plan.total_size.
ShardAssignment assign_indices(const ShardPlan& plan, std::uint64_t record_count);

/// Same permutation as assign_indices but skips the per-record table;
/// validation_indices() and shard_indices() still work.
ShardAssignment shuffle_for_plan(const ShardPlan& plan, std::uint64_t record_count);

}  // namespace scalinglaw
