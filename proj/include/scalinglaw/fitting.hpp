#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scalinglaw/curve_model.hpp"

namespace scalinglaw {

enum class FitKind { free_floor, zero_floor, fixed_floor, model_size };

std::string_view fit_kind_name(FitKind kind) noexcept;
std::optional<FitKind> parse_fit_kind(std::string_view name) noexcept;

/// Which fit to run; `fixed_gamma` only matters for FitKind::fixed_floor.
struct FitMethod {
  FitKind kind = FitKind::zero_floor;
  double fixed_gamma = 0.0;

  static FitMethod zero() { return {FitKind::zero_floor, 0.0}; }
  static FitMethod free() { return {FitKind::free_floor, 0.0}; }
  static FitMethod fixed(double gamma) { return {FitKind::fixed_floor, gamma}; }
  static FitMethod model_size() { return {FitKind::model_size, 0.0}; }
};

struct FitOptions {
  /// Observations with shard_size above this are dropped before fitting.
  std::optional<std::uint64_t> max_size_cutoff;
};

struct ParameterInterval {
  double low = 0.0;
  double high = 0.0;
};

struct ConfidenceIntervals {
  double confidence = 0.95;
  ParameterInterval alpha;
  ParameterInterval beta;
  ParameterInterval gamma;
  std::size_t resamples_requested = 0;
  std::size_t resamples_used = 0;
  std::size_t degenerate_resamples = 0;
};

/// Result of a curve fit. For FitKind::model_size, alpha/beta are the
/// model-size parameters, gamma is 0 and rrmse is measured on parameter counts.
struct FitReport {
  FitKind kind = FitKind::zero_floor;
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double rrmse = 0.0;
  std::vector<double> residuals;      // (predicted - observed) / observed
  std::vector<double> log_residuals;  // log(predicted) - log(observed)
  std::optional<ConfidenceIntervals> ci;
  std::size_t n_observations = 0;
  bool degenerate_floor = false;
  std::vector<std::string> warnings;

  PowerLawCurve learning_curve() const { return {alpha, beta, gamma}; }
  ModelSizeCurve size_curve() const { return {alpha, beta}; }
  double predict(double m) const;
};

/// Ordinary least squares of log(loss) on log(shard_size).
FitReport fit_zero_floor(std::span<const CurveObservation> observations,
                         const FitOptions& options = {});

/// Power law plus constant. A fixed floor subtracts gamma and reuses the
/// zero-floor fit; a free floor searches gamma in [0, (1 - 1e-6) * min(loss)]
/// for the value minimizing rrmse.
FitReport fit_with_floor(std::span<const CurveObservation> observations, const FitMethod& floor,
                         const FitOptions& options = {});

/// Log-log OLS of model_params on shard_size.
FitReport fit_model_size(std::span<const CurveObservation> observations,
                         const FitOptions& options = {});

/// Dispatches on method.kind.
FitReport fit(std::span<const CurveObservation> observations, const FitMethod& method,
              const FitOptions& options = {});

struct BootstrapOptions {
  std::size_t n_resamples = 1000;
  double confidence = 0.95;
  std::uint64_t seed = 0;
};

/// Point fit plus percentile bootstrap intervals. Resample r draws from its
/// own substream (seed, r), so results do not depend on evaluation order.
/// Resamples with too few distinct sizes are skipped and counted.
FitReport bootstrap_ci(std::span<const CurveObservation> observations, const FitMethod& method,
                       const BootstrapOptions& bootstrap, const FitOptions& options = {});

/// Best model per shard size: minimum loss, ties to fewer model_params
/// (records without params sort last), then lower seed. Output is sorted by
/// shard_size.
std::vector<CurveObservation> select_composite(std::span<const CurveObservation> observations);

/// Relative RMSE of predictions against observed values.
double relative_rmse(std::span<const double> predicted, std::span<const double> observed);

}  // namespace scalinglaw
