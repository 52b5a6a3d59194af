#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "scalinglaw/curve_model.hpp"
#include "scalinglaw/error.hpp"
#include "scalinglaw/fitting.hpp"
#include "scalinglaw/projection.hpp"
#include "scalinglaw/regions.hpp"
#include "scalinglaw/sharding.hpp"

namespace scalinglaw::io {

using Json = nlohmann::ordered_json;

inline constexpr std::string_view kObservationsHeader =
    "shard_size,loss_value,metric_name,model_params,seed,split_tag";

/// Shortest decimal string that parses back to the same double.
std::string format_double(double value);
double parse_double(std::string_view text);

// Observations CSV. Text fields holding commas or quotes are quoted
// RFC 4180 style.
void write_observations_csv(std::ostream& out, std::span<const CurveObservation> observations);
std::string observations_to_csv(std::span<const CurveObservation> observations);
std::vector<CurveObservation> read_observations_csv(std::istream& in,
                                                    const ObservationPolicy& policy = {});
std::vector<CurveObservation> observations_from_csv(std::string_view text,
                                                    const ObservationPolicy& policy = {});

Json shard_plan_to_json(const ShardPlan& plan);
/// Validates the plan's invariants.
ShardPlan shard_plan_from_json(const Json& doc);

/// Keys in the order fit_kind, alpha, beta, gamma, rrmse, n_observations,
/// ci (only when present), residuals, warnings.
Json fit_report_to_json(const FitReport& report);
FitReport fit_report_from_json(const Json& doc);

Json projection_to_json(const ProjectionResult& result);
Json segmentation_to_json(const RegionSegmentation& segmentation, const GuessBaseline& baseline);

/// Single-line machine-readable error: {"code", "message", "context"}.
Json error_to_json(const Error& error);

/// Reads a whole file; throws io_error.
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace scalinglaw::io
