#include "scalinglaw/sharding.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "scalinglaw/error.hpp"
#include "scalinglaw/random.hpp"

namespace scalinglaw {

void ShardPlan::validate() const {
  if (total_size == 0) throw Error(ErrorCode::invalid_plan, "total_size must be positive");
  if (validation_size == 0)
    throw Error(ErrorCode::invalid_plan, "validation_size must be positive");
  if (shard_sizes.empty()) throw Error(ErrorCode::invalid_plan, "plan has no shards");
  if (shard_sizes.front() == 0) throw Error(ErrorCode::invalid_plan, "shard sizes must be positive");
  for (std::size_t k = 1; k < shard_sizes.size(); ++k)
    if (shard_sizes[k] <= shard_sizes[k - 1])
      throw Error(ErrorCode::invalid_plan, "shard sizes must be strictly ascending",
                  "index=" + std::to_string(k));
  const std::uint64_t used =
      nested ? shard_sizes.back()
             : std::accumulate(shard_sizes.begin(), shard_sizes.end(), std::uint64_t{0});
  if (used > total_size || validation_size > total_size - used)
    throw Error(ErrorCode::invalid_plan, "validation set and shards do not fit in the dataset");
}

ShardPlan plan_shards(const ShardPlanRequest& request) {
  const auto& r = request;
  if (!(r.smallest_fraction > 0.0) || !(r.smallest_fraction < r.max_fraction) ||
      !(r.validation_fraction > 0.0) || !(r.max_fraction <= 1.0 - r.validation_fraction))
    throw Error(ErrorCode::invalid_fractions,
                "need 0 < smallest < max <= 1 - validation and validation > 0");
  if (!(r.ratio > 1.0) || !std::isfinite(r.ratio))
    throw Error(ErrorCode::invalid_fractions, "ratio must exceed 1");
  if (r.total_size == 0) throw Error(ErrorCode::too_small_dataset, "dataset is empty");

  const double total = static_cast<double>(r.total_size);
  const double base = std::round(total * r.smallest_fraction);
  if (base < 1.0)
    throw Error(ErrorCode::too_small_dataset, "smallest shard rounds to zero records",
                "total_size=" + std::to_string(r.total_size));
  const double validation = std::round(total * r.validation_fraction);
  if (validation < 1.0)
    throw Error(ErrorCode::too_small_dataset, "validation set rounds to zero records");

  ShardPlan plan;
  plan.total_size = r.total_size;
  plan.validation_size = static_cast<std::uint64_t>(validation);
  plan.shuffle_seed = r.seed;
  plan.nested = true;
  const double limit = total * r.max_fraction;
  for (int k = 0;; ++k) {
    const double size = std::round(base * std::pow(r.ratio, k));
    if (size > limit) break;
    const auto s = static_cast<std::uint64_t>(size);
    if (!plan.shard_sizes.empty() && s <= plan.shard_sizes.back())
      throw Error(ErrorCode::invalid_fractions, "ratio too small: rounded shard sizes repeat");
    plan.shard_sizes.push_back(s);
  }
  if (plan.shard_sizes.empty())
    throw Error(ErrorCode::too_small_dataset, "smallest shard exceeds max_fraction");
  plan.validate();
  return plan;
}

std::vector<std::uint64_t> seeded_permutation(std::uint64_t n, std::uint64_t seed) {
  std::vector<std::uint64_t> order(n);
  std::iota(order.begin(), order.end(), std::uint64_t{0});
  SplitMix64 rng(seed);
  for (std::uint64_t i = n; i-- > 1;) std::swap(order[i], order[rng.bounded(i + 1)]);
  return order;
}

std::span<const std::uint64_t> ShardAssignment::validation_indices() const {
  return std::span(order).first(plan.validation_size);
}

std::span<const std::uint64_t> ShardAssignment::shard_indices(std::size_t rank) const {
  std::uint64_t offset = plan.validation_size;
  if (!plan.nested)
    for (std::size_t k = 0; k < rank; ++k) offset += plan.shard_sizes[k];
  return std::span(order).subspan(offset, plan.shard_sizes.at(rank));
}

ShardAssignment shuffle_for_plan(const ShardPlan& plan, std::uint64_t record_count) {
  plan.validate();
  if (record_count != plan.total_size)
    throw Error(ErrorCode::size_mismatch, "record count differs from the plan's total_size",
                "records=" + std::to_string(record_count) +
                    " total_size=" + std::to_string(plan.total_size));
  ShardAssignment a;
  a.plan = plan;
  a.order = seeded_permutation(record_count, plan.shuffle_seed);
  return a;
}

ShardAssignment assign_indices(const ShardPlan& plan, std::uint64_t record_count) {
  ShardAssignment a = shuffle_for_plan(plan, record_count);
  a.records.assign(record_count, RecordAssignment{});
  for (std::uint64_t idx : a.validation_indices()) a.records[idx].role = RecordRole::validation;
  // Walk shards largest first so each record ends up tagged with its smallest shard.
  for (std::size_t k = plan.shard_sizes.size(); k-- > 0;) {
    for (std::uint64_t idx : a.shard_indices(k)) {
      a.records[idx].role = RecordRole::shard;
      a.records[idx].shard_rank = static_cast<std::uint32_t>(k);
    }
  }
  return a;
}

}  // namespace scalinglaw
