#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scalinglaw/curve_model.hpp"

namespace scalinglaw {

struct ProjectionOptions {
  /// Data size of the reference point for relative compute (>= 1).
  double reference_size = 1.0;
  /// Largest shard actually measured; defaults to reference_size.
  std::optional<double> largest_observed;
};

/// Projected requirements for a target loss. When infeasible
/// (target <= gamma) only target_loss and feasible are set.
struct ProjectionResult {
  double target_loss = 0.0;
  bool feasible = false;
  std::optional<double> required_data;
  std::optional<double> required_params;
  /// (params * data) / (reference params * reference data); compute is
  /// modelled as one pass over the data.
  std::optional<double> relative_compute;
  std::optional<double> extrapolation_factor;  // max(1, required_data / largest observed)
  std::vector<std::string> warnings;
};

/// Projections reaching more than this far beyond observed data carry a warning.
inline constexpr double kExtrapolationWarningFactor = 100.0;

ProjectionResult project(const PowerLawCurve& learning, const std::optional<ModelSizeCurve>& sizing,
                         double target_loss, const ProjectionOptions& options = {});

/// 1 - 2^beta: relative reduction of the above-floor loss per data doubling.
double improvement_per_doubling(const PowerLawCurve& learning);

/// 2^(-1/beta): data growth that halves the above-floor loss.
double data_factor_to_halve_loss(const PowerLawCurve& learning);

struct NamedCurve {
  std::string name;
  PowerLawCurve curve;
};

struct DomainRank {
  std::string name;
  double improvement_per_doubling = 0.0;
};

/// Descending by improvement per doubling; ties in name order.
std::vector<DomainRank> compare_domains(std::span<const NamedCurve> curves);

}  // namespace scalinglaw
