#include "scalinglaw/regions.hpp"

#include <algorithm>
#include <cmath>

#include "scalinglaw/error.hpp"

namespace scalinglaw {

namespace {

constexpr std::string_view kCliffCaveat =
    "an accuracy cliff in the small-data region is indistinguishable from a true plateau";

void check_inputs(std::span<const CurveObservation> obs, const SegmentOptions& options) {
  if (obs.size() < 3)
    throw Error(ErrorCode::insufficient_data, "segmentation needs at least 3 observations");
  for (std::size_t i = 1; i < obs.size(); ++i)
    if (obs[i].shard_size <= obs[i - 1].shard_size)
      throw Error(ErrorCode::invalid_argument,
                  "observations must be strictly ascending in shard_size",
                  "index=" + std::to_string(i));
  for (const auto& o : obs)
    if (!(o.loss_value > 0.0))
      throw Error(ErrorCode::non_positive_loss, "segmentation needs positive losses");
  auto in_open_half = [](double v) { return v > 0.0 && v < 0.5; };
  if (!in_open_half(options.plateau_tolerance))
    throw Error(ErrorCode::invalid_argument, "plateau_tolerance must lie in (0, 0.5)");
  if (!in_open_half(options.floor_improvement_threshold))
    throw Error(ErrorCode::invalid_argument, "floor_improvement_threshold must lie in (0, 0.5)");
}

}  // namespace

GuessBaseline guess_baseline(MetricKind kind, int class_count, int k) {
  if (class_count < 2)
    throw Error(ErrorCode::invalid_argument, "InvalidClassCount: K must be at least 2");
  GuessBaseline b;
  b.kind = kind;
  b.class_count = class_count;
  switch (kind) {
    case MetricKind::cross_entropy:
      b.k = 0;
      b.value = std::log(static_cast<double>(class_count));
      return b;
    case MetricKind::top_k_error:
      if (k < 1 || k >= class_count)
        throw Error(ErrorCode::invalid_argument, "InvalidClassCount: need 1 <= k < K");
      b.k = k;
      b.value = 1.0 - static_cast<double>(k) / static_cast<double>(class_count);
      return b;
    case MetricKind::custom:
      break;
  }
  throw Error(ErrorCode::invalid_argument, "custom baselines need an explicit value");
}

GuessBaseline custom_baseline(double value) {
  if (!(value > 0.0) || !std::isfinite(value))
    throw Error(ErrorCode::invalid_argument, "baseline value must be positive");
  GuessBaseline b;
  b.kind = MetricKind::custom;
  b.value = value;
  return b;
}

std::string_view region_name(Region region) noexcept {
  switch (region) {
    case Region::small_data: return "small_data";
    case Region::power_law: return "power_law";
    case Region::irreducible: return "irreducible";
  }
  return "unknown";
}

double improvement_per_doubling_between(const CurveObservation& earlier,
                                        const CurveObservation& later) {
  const double doublings = std::log2(static_cast<double>(later.shard_size) /
                                     static_cast<double>(earlier.shard_size));
  return 1.0 - std::pow(later.loss_value / earlier.loss_value, 1.0 / doublings);
}

std::vector<Region> label_regions(std::span<const CurveObservation> obs,
                                  const GuessBaseline& baseline, const SegmentOptions& options) {
  check_inputs(obs, options);
  const std::size_t n = obs.size();
  const double plateau_level = (1.0 - options.plateau_tolerance) * baseline.value;

  std::size_t plateau_end = 0;
  while (plateau_end < n && obs[plateau_end].loss_value >= plateau_level) ++plateau_end;

  // Point j is flat when the step into it improved less than the threshold.
  std::size_t floor_begin = n;
  while (floor_begin > plateau_end + 1 &&
         improvement_per_doubling_between(obs[floor_begin - 2], obs[floor_begin - 1]) <
             options.floor_improvement_threshold)
    --floor_begin;

  std::vector<Region> labels(n, Region::power_law);
  std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(plateau_end),
            Region::small_data);
  std::fill(labels.begin() + static_cast<std::ptrdiff_t>(floor_begin), labels.end(),
            Region::irreducible);
  return labels;
}

RegionSegmentation segment(std::span<const CurveObservation> obs, const GuessBaseline& baseline,
                           const SegmentOptions& options) {
  RegionSegmentation result;
  result.labels = label_regions(obs, baseline, options);

  std::vector<CurveObservation> power_law;
  bool has_floor = false;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    if (result.labels[i] == Region::power_law) power_law.push_back(obs[i]);
    has_floor = has_floor || result.labels[i] == Region::irreducible;
  }
  if (power_law.size() < 2)
    throw Error(ErrorCode::no_power_law_region,
                "fewer than 2 observations between the small-data plateau and the floor",
                "power_law_points=" + std::to_string(power_law.size()));

  result.power_law_min_size = power_law.front().shard_size;
  result.power_law_max_size = power_law.back().shard_size;
  if (has_floor && power_law.size() >= 4) {
    result.fit = fit_with_floor(power_law, FitMethod::free());
  } else {
    result.fit = fit_zero_floor(power_law);
    if (has_floor) result.caveats.emplace_back("too few power-law points for a free-floor fit");
  }
  if (result.labels.front() == Region::small_data) result.caveats.emplace_back(kCliffCaveat);
  return result;
}

}  // namespace scalinglaw
