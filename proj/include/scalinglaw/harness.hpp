#pragma once

// Measurement loop: train a learner on every shard of a plan across a grid of
// capacities and seeds, evaluate on the held-out validation set, and reduce
// the results to learning-curve observations.

#include <algorithm>
#include <concepts>
#include <cstdint>
#include <exception>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scalinglaw/curve_model.hpp"
#include "scalinglaw/error.hpp"
#include "scalinglaw/fitting.hpp"
#include "scalinglaw/random.hpp"
#include "scalinglaw/sharding.hpp"

namespace scalinglaw {

template <class L>
concept Learner = requires(const L& learner, std::span<const typename L::record_type> records,
                           const typename L::state_type& state, double capacity,
                           std::uint64_t seed) {
  { learner.train(records, capacity, seed) } -> std::convertible_to<typename L::state_type>;
  { learner.evaluate(state, records) } -> std::convertible_to<double>;
  { learner.param_count(capacity) } -> std::convertible_to<std::uint64_t>;
  { learner.metric_name() } -> std::convertible_to<std::string>;
};

/// How the losses of repeated seeds in one grid cell collapse.
enum class SeedReduction { min, median };

struct SweepConfig {
  std::vector<double> capacity_grid{1.0};
  unsigned seeds_per_cell = 1;
  SeedReduction reduction = SeedReduction::min;
  std::uint64_t seed = 0;
  /// Restrict shard k's grid to capacities whose param_count lies within
  /// 0.5x-2x of shard k-1's frontier point (full grid when none qualify).
  bool adaptive = false;
  ObservationPolicy policy;

  void validate() const {
    if (capacity_grid.empty()) throw Error(ErrorCode::invalid_argument, "capacity grid is empty");
    if (seeds_per_cell == 0) throw Error(ErrorCode::invalid_argument, "seeds_per_cell must be >= 1");
  }
};

struct SweepResult {
  std::vector<CurveObservation> cells;      // one per (shard, capacity)
  std::vector<CurveObservation> composite;  // best cell per shard
};

/// Seed handed to the learner for one grid cell.
inline std::uint64_t cell_seed(std::uint64_t sweep_seed, std::size_t shard, std::size_t capacity,
                               std::size_t repeat) {
  return substream_seed(sweep_seed, {shard, capacity, repeat});
}

/// Per shard, the record with the fewest model_params whose loss is within
/// 1% (relative) of that shard's minimum loss. Output is sorted by shard size.
inline std::vector<CurveObservation> capacity_frontier(std::span<const CurveObservation> observations) {
  std::map<std::uint64_t, std::vector<const CurveObservation*>> by_shard;
  for (const auto& o : observations) {
    if (!o.model_params)
      throw Error(ErrorCode::missing_model_params, "frontier needs model_params",
                  "shard_size=" + std::to_string(o.shard_size));
    by_shard[o.shard_size].push_back(&o);
  }
  std::vector<CurveObservation> frontier;
  for (const auto& [size, records] : by_shard) {
    double best_loss = std::numeric_limits<double>::infinity();
    for (const auto* r : records) best_loss = std::min(best_loss, r->loss_value);
    const CurveObservation* chosen = nullptr;
    for (const auto* r : records) {
      if (r->loss_value > best_loss * 1.01) continue;
      if (!chosen || *r->model_params < *chosen->model_params ||
          (*r->model_params == *chosen->model_params && r->loss_value < chosen->loss_value))
        chosen = r;
    }
    frontier.push_back(*chosen);
  }
  return frontier;
}

namespace detail {

inline double reduce_losses(std::vector<double> losses, SeedReduction reduction) {
  std::sort(losses.begin(), losses.end());
  if (reduction == SeedReduction::min) return losses.front();
  const std::size_t n = losses.size();
  return n % 2 == 1 ? losses[n / 2] : 0.5 * (losses[n / 2 - 1] + losses[n / 2]);
}

template <class Record>
std::vector<Record> gather(std::span<const Record> data, std::span<const std::uint64_t> indices) {
  std::vector<Record> out;
  out.reserve(indices.size());
  for (std::uint64_t idx : indices) out.push_back(data[idx]);
  return out;
}

}  // namespace detail

/// Trains and evaluates every (shard, capacity, seed) cell. Fully
/// deterministic: cell seeds come from (config.seed, shard, capacity, repeat)
/// and cells are visited in that order.
template <Learner L>
SweepResult run_sweep(const L& learner, const ShardPlan& plan, const SweepConfig& config,
                      std::span<const typename L::record_type> data) {
  using Record = typename L::record_type;
  config.validate();
  const ShardAssignment assignment = shuffle_for_plan(plan, data.size());
  const std::vector<Record> validation =
      detail::gather(data, assignment.validation_indices());

  SweepResult result;
  std::optional<std::uint64_t> previous_frontier;
  for (std::size_t k = 0; k < plan.shard_sizes.size(); ++k) {
    const auto indices = assignment.shard_indices(k);
    if (indices.empty())
      throw Error(ErrorCode::empty_shard, "shard has no records", "shard=" + std::to_string(k));
    const std::vector<Record> shard = detail::gather(data, indices);

    std::vector<std::size_t> grid;
    for (std::size_t c = 0; c < config.capacity_grid.size(); ++c) {
      if (config.adaptive && previous_frontier) {
        const double params = static_cast<double>(learner.param_count(config.capacity_grid[c]));
        const double anchor = static_cast<double>(*previous_frontier);
        if (params < 0.5 * anchor || params > 2.0 * anchor) continue;
      }
      grid.push_back(c);
    }
    if (grid.empty())
      for (std::size_t c = 0; c < config.capacity_grid.size(); ++c) grid.push_back(c);

    std::vector<CurveObservation> shard_cells;
    for (std::size_t c : grid) {
      const double capacity = config.capacity_grid[c];
      std::vector<double> losses;
      losses.reserve(config.seeds_per_cell);
      for (unsigned s = 0; s < config.seeds_per_cell; ++s) {
        const std::string where = "shard=" + std::to_string(plan.shard_sizes[k]) +
                                  " capacity=" + std::to_string(capacity) +
                                  " repeat=" + std::to_string(s);
        try {
          const auto state = learner.train(std::span<const Record>(shard), capacity,
                                           cell_seed(config.seed, k, c, s));
          losses.push_back(learner.evaluate(state, std::span<const Record>(validation)));
        } catch (const std::exception& e) {
          throw Error(ErrorCode::learner_failure, e.what(), where);
        }
      }
      CurveObservation obs;
      obs.shard_size = plan.shard_sizes[k];
      obs.loss_value = detail::reduce_losses(std::move(losses), config.reduction);
      obs.metric_name = learner.metric_name();
      obs.model_params = learner.param_count(capacity);
      obs.split_tag = "cell";
      shard_cells.push_back(validate_observation(std::move(obs), config.policy));
    }

    auto best = select_composite(shard_cells);
    best.front().split_tag = "composite";
    result.composite.push_back(best.front());
    previous_frontier = *capacity_frontier(shard_cells).front().model_params;
    result.cells.insert(result.cells.end(), shard_cells.begin(), shard_cells.end());
  }
  return result;
}

/// Repeats run_sweep over independent reshuffles of the plan (replicate r
/// uses shuffle seed and sweep seed derived from r) and averages the
/// composite loss per shard. For learners whose loss depends only on which
/// records land in a shard, this is the Monte Carlo estimate of the expected
/// learning curve.
template <Learner L>
std::vector<CurveObservation> run_replicated_sweep(const L& learner, const ShardPlan& plan,
                                                   const SweepConfig& config,
                                                   std::span<const typename L::record_type> data,
                                                   std::size_t replicates) {
  if (replicates == 0) throw Error(ErrorCode::invalid_argument, "replicates must be >= 1");
  std::vector<double> sums(plan.shard_sizes.size(), 0.0);
  std::vector<CurveObservation> mean;
  for (std::size_t r = 0; r < replicates; ++r) {
    ShardPlan replicate_plan = plan;
    replicate_plan.shuffle_seed = substream_seed(plan.shuffle_seed, {r});
    SweepConfig replicate_config = config;
    replicate_config.seed = substream_seed(config.seed, {r});
    const SweepResult sweep = run_sweep(learner, replicate_plan, replicate_config, data);
    for (std::size_t k = 0; k < sums.size(); ++k) sums[k] += sweep.composite[k].loss_value;
    if (r == 0) mean = sweep.composite;
  }
  for (std::size_t k = 0; k < sums.size(); ++k) {
    mean[k].loss_value = sums[k] / static_cast<double>(replicates);
    mean[k].model_params.reset();
    mean[k].seed.reset();
    mean[k].clamped = false;
    mean[k].split_tag = "replicated-composite";
    mean[k] = validate_observation(std::move(mean[k]), config.policy);
  }
  return mean;
}

}  // namespace scalinglaw
