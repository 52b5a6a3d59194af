#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scalinglaw/curve_model.hpp"
#include "scalinglaw/fitting.hpp"

namespace scalinglaw {

enum class MetricKind {
  cross_entropy,         // natural-log cross-entropy over K classes
  top_k_error,           // top-k classification error over K classes
  custom,                // caller-supplied value (CER, WER, ...)
};

/// Loss of a model that guesses at random: ln(K) or 1 - k/K.
struct GuessBaseline {
  MetricKind kind = MetricKind::custom;
  int class_count = 0;
  int k = 0;
  double value = 0.0;
};

/// Throws invalid_argument (InvalidClassCount) unless K >= 2 and, for top-k,
/// 1 <= k < K.
GuessBaseline guess_baseline(MetricKind kind, int class_count, int k = 1);
GuessBaseline custom_baseline(double value);

enum class Region { small_data, power_law, irreducible };

std::string_view region_name(Region region) noexcept;

struct SegmentOptions {
  double plateau_tolerance = 0.05;
  double floor_improvement_threshold = 0.01;  // relative improvement per doubling
};

struct RegionSegmentation {
  std::vector<Region> labels;
  std::uint64_t power_law_min_size = 0;
  std::uint64_t power_law_max_size = 0;
  std::optional<FitReport> fit;
  std::vector<std::string> caveats;
};

/// Relative reduction of loss per doubling of data between two points.
double improvement_per_doubling_between(const CurveObservation& earlier,
                                        const CurveObservation& later);

/// Labels only. The small-data region is the leading run of points within
/// plateau_tolerance of the baseline; the irreducible region is the trailing
/// run whose per-doubling improvement is below the threshold; the rest is
/// power law. Labels are monotone by construction.
std::vector<Region> label_regions(std::span<const CurveObservation> sorted_observations,
                                  const GuessBaseline& baseline, const SegmentOptions& options = {});

/// label_regions plus a fit on the power-law points (free floor when an
/// irreducible run exists and at least 4 points remain, zero floor
/// otherwise). Throws no_power_law_region with fewer than 2 power-law points.
RegionSegmentation segment(std::span<const CurveObservation> sorted_observations,
                           const GuessBaseline& baseline, const SegmentOptions& options = {});

}  // namespace scalinglaw
