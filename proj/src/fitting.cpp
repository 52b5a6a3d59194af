#include "scalinglaw/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <tuple>

#include "scalinglaw/error.hpp"
#include "scalinglaw/random.hpp"

namespace scalinglaw {

namespace {

constexpr double kFloorBracketMargin = 1e-6;
// A floor this close (relative) to the bracket edge leaves the smallest loss
// with almost no power-law component.
constexpr double kDegenerateFloorBand = 1e-2;
constexpr int kFloorGridPoints = 61;
constexpr int kGoldenIterations = 200;

struct LineFit {
  double intercept;
  double slope;
};

// OLS y = intercept + slope * x with centered sums.
LineFit least_squares_line(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  double mean_x = 0.0, mean_y = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mean_x += x[i];
    mean_y += y[i];
  }
  mean_x /= n;
  mean_y /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mean_x;
    sxx += dx * dx;
    sxy += dx * (y[i] - mean_y);
  }
  const double slope = sxy / sxx;
  return {mean_y - slope * mean_x, slope};
}

std::size_t distinct_sizes(std::span<const CurveObservation> obs) {
  std::set<std::uint64_t> sizes;
  for (const auto& o : obs) sizes.insert(o.shard_size);
  return sizes.size();
}

std::size_t required_distinct_sizes(FitKind kind) {
  return kind == FitKind::free_floor ? 4 : 2;
}

std::vector<CurveObservation> apply_cutoff(std::span<const CurveObservation> obs,
                                           const FitOptions& options) {
  std::vector<CurveObservation> kept;
  kept.reserve(obs.size());
  for (const auto& o : obs)
    if (!options.max_size_cutoff || o.shard_size <= *options.max_size_cutoff) kept.push_back(o);
  return kept;
}

void require_sizes(std::span<const CurveObservation> obs, FitKind kind) {
  const std::size_t need = required_distinct_sizes(kind);
  const std::size_t have = distinct_sizes(obs);
  if (have < need)
    throw Error(ErrorCode::insufficient_data,
                "fit needs at least " + std::to_string(need) + " distinct shard sizes",
                "distinct_sizes=" + std::to_string(have));
}

void require_positive_losses(std::span<const CurveObservation> obs, double floor) {
  for (const auto& o : obs)
    if (!(o.loss_value - floor > 0.0) || !std::isfinite(o.loss_value))
      throw Error(ErrorCode::non_positive_loss,
                  floor == 0.0 ? "loss must be positive for log-space fitting"
                               : "loss must exceed the fixed floor",
                  "shard_size=" + std::to_string(o.shard_size));
}

// Zero-floor fit of (loss - floor), returning (alpha, beta).
LineFit log_log_fit(std::span<const CurveObservation> obs, double floor) {
  std::vector<double> x, y;
  x.reserve(obs.size());
  y.reserve(obs.size());
  for (const auto& o : obs) {
    x.push_back(std::log(static_cast<double>(o.shard_size)));
    y.push_back(std::log(o.loss_value - floor));
  }
  return least_squares_line(x, y);
}

void fill_residuals(FitReport& report, std::span<const double> sizes,
                    std::span<const double> observed) {
  std::vector<double> predicted;
  predicted.reserve(sizes.size());
  report.residuals.clear();
  report.log_residuals.clear();
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const double p = report.predict(sizes[i]);
    predicted.push_back(p);
    report.residuals.push_back((p - observed[i]) / observed[i]);
    report.log_residuals.push_back(std::log(p) - std::log(observed[i]));
  }
  report.rrmse = relative_rmse(predicted, observed);
  report.n_observations = sizes.size();
}

void finish_learning_report(FitReport& report, std::span<const CurveObservation> obs) {
  std::vector<double> sizes, observed;
  bool any_clamped = false;
  for (const auto& o : obs) {
    sizes.push_back(static_cast<double>(o.shard_size));
    observed.push_back(o.loss_value);
    any_clamped = any_clamped || o.clamped;
  }
  fill_residuals(report, sizes, observed);
  if (any_clamped) report.warnings.emplace_back("clamped_losses");
  if (report.beta == 0.0) report.warnings.emplace_back("zero_exponent");
  if (report.beta > 0.0) report.warnings.emplace_back("increasing_curve");
}

double conditional_rrmse(std::span<const CurveObservation> obs, double gamma) {
  const LineFit line = log_log_fit(obs, gamma);
  const double alpha = std::exp(line.intercept);
  double sum = 0.0;
  for (const auto& o : obs) {
    const double predicted = alpha * std::pow(static_cast<double>(o.shard_size), line.slope) + gamma;
    const double r = (predicted - o.loss_value) / o.loss_value;
    sum += r * r;
  }
  return std::sqrt(sum / static_cast<double>(obs.size()));
}

// Log-spaced scan over the bracket, then golden-section refinement around the
// best grid cell.
double search_floor(std::span<const CurveObservation> obs, double upper) {
  std::vector<double> grid;
  grid.reserve(kFloorGridPoints + 1);
  grid.push_back(0.0);
  for (int j = 0; j < kFloorGridPoints; ++j) {
    const double exponent = -6.0 + 6.0 * j / (kFloorGridPoints - 1);
    grid.push_back(upper * std::pow(10.0, exponent));
  }
  grid.back() = upper;

  std::size_t best = 0;
  double best_value = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double value = conditional_rrmse(obs, grid[j]);
    if (value < best_value) {
      best_value = value;
      best = j;
    }
  }

  double lo = grid[best == 0 ? 0 : best - 1];
  double hi = grid[std::min(best + 1, grid.size() - 1)];
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - inv_phi * (hi - lo);
  double d = lo + inv_phi * (hi - lo);
  double fc = conditional_rrmse(obs, c);
  double fd = conditional_rrmse(obs, d);
  for (int it = 0; it < kGoldenIterations && (hi - lo) > 1e-15 * upper; ++it) {
    if (fc < fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = conditional_rrmse(obs, c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = conditional_rrmse(obs, d);
    }
  }
  const double refined = fc < fd ? c : d;
  const double refined_value = std::min(fc, fd);
  return refined_value <= best_value ? refined : grid[best];
}

double quantile_sorted(const std::vector<double>& sorted, double prob) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * prob;
  const auto lower = static_cast<std::size_t>(std::floor(h));
  const std::size_t upper = std::min(lower + 1, sorted.size() - 1);
  return sorted[lower] + (h - static_cast<double>(lower)) * (sorted[upper] - sorted[lower]);
}

ParameterInterval percentile_interval(std::vector<double> values, double confidence,
                                      double point) {
  std::sort(values.begin(), values.end());
  ParameterInterval interval{quantile_sorted(values, (1.0 - confidence) / 2.0),
                             quantile_sorted(values, (1.0 + confidence) / 2.0)};
  // Percentile intervals can miss a skewed point estimate; widen to include it.
  interval.low = std::min(interval.low, point);
  interval.high = std::max(interval.high, point);
  return interval;
}

}  // namespace

std::string_view fit_kind_name(FitKind kind) noexcept {
  switch (kind) {
    case FitKind::free_floor: return "free-floor";
    case FitKind::zero_floor: return "zero-floor";
    case FitKind::fixed_floor: return "fixed-floor";
    case FitKind::model_size: return "model-size";
  }
  return "unknown";
}

std::optional<FitKind> parse_fit_kind(std::string_view name) noexcept {
  for (FitKind k : {FitKind::free_floor, FitKind::zero_floor, FitKind::fixed_floor,
                    FitKind::model_size})
    if (fit_kind_name(k) == name) return k;
  return std::nullopt;
}

double FitReport::predict(double m) const { return alpha * std::pow(m, beta) + gamma; }

double relative_rmse(std::span<const double> predicted, std::span<const double> observed) {
  if (predicted.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double r = (predicted[i] - observed[i]) / observed[i];
    sum += r * r;
  }
  return std::sqrt(sum / static_cast<double>(predicted.size()));
}

FitReport fit_zero_floor(std::span<const CurveObservation> observations,
                         const FitOptions& options) {
  const auto obs = apply_cutoff(observations, options);
  require_sizes(obs, FitKind::zero_floor);
  require_positive_losses(obs, 0.0);
  const LineFit line = log_log_fit(obs, 0.0);
  FitReport report;
  report.kind = FitKind::zero_floor;
  report.alpha = std::exp(line.intercept);
  report.beta = line.slope;
  report.gamma = 0.0;
  finish_learning_report(report, obs);
  return report;
}

FitReport fit_with_floor(std::span<const CurveObservation> observations, const FitMethod& floor,
                         const FitOptions& options) {
  if (floor.kind == FitKind::zero_floor) return fit_zero_floor(observations, options);
  if (floor.kind == FitKind::model_size)
    throw Error(ErrorCode::invalid_argument, "fit_with_floor needs a floor mode");

  const auto obs = apply_cutoff(observations, options);
  FitReport report;
  if (floor.kind == FitKind::fixed_floor) {
    if (!(floor.fixed_gamma >= 0.0) || !std::isfinite(floor.fixed_gamma))
      throw Error(ErrorCode::invalid_argument, "fixed floor must be non-negative");
    require_sizes(obs, FitKind::fixed_floor);
    require_positive_losses(obs, floor.fixed_gamma);
    const LineFit line = log_log_fit(obs, floor.fixed_gamma);
    report.kind = FitKind::fixed_floor;
    report.alpha = std::exp(line.intercept);
    report.beta = line.slope;
    report.gamma = floor.fixed_gamma;
  } else {
    require_sizes(obs, FitKind::free_floor);
    require_positive_losses(obs, 0.0);
    double min_loss = std::numeric_limits<double>::infinity();
    for (const auto& o : obs) min_loss = std::min(min_loss, o.loss_value);
    const double upper = (1.0 - kFloorBracketMargin) * min_loss;
    const double gamma = search_floor(obs, upper);
    const LineFit line = log_log_fit(obs, gamma);
    report.kind = FitKind::free_floor;
    report.alpha = std::exp(line.intercept);
    report.beta = line.slope;
    report.gamma = gamma;
    if (upper - gamma <= kDegenerateFloorBand * upper) {
      report.degenerate_floor = true;
      report.warnings.emplace_back("degenerate_floor");
    }
  }
  finish_learning_report(report, obs);
  return report;
}

FitReport fit_model_size(std::span<const CurveObservation> observations,
                         const FitOptions& options) {
  const auto obs = apply_cutoff(observations, options);
  for (const auto& o : obs)
    if (!o.model_params)
      throw Error(ErrorCode::missing_model_params, "observation lacks model_params",
                  "shard_size=" + std::to_string(o.shard_size));
  require_sizes(obs, FitKind::model_size);

  std::vector<double> x, y, sizes, params;
  for (const auto& o : obs) {
    const double m = static_cast<double>(o.shard_size);
    const double p = static_cast<double>(*o.model_params);
    sizes.push_back(m);
    params.push_back(p);
    x.push_back(std::log(m));
    y.push_back(std::log(p));
  }
  const LineFit line = least_squares_line(x, y);
  FitReport report;
  report.kind = FitKind::model_size;
  report.alpha = std::exp(line.intercept);
  report.beta = line.slope;
  report.gamma = 0.0;
  fill_residuals(report, sizes, params);
  return report;
}

FitReport fit(std::span<const CurveObservation> observations, const FitMethod& method,
              const FitOptions& options) {
  switch (method.kind) {
    case FitKind::zero_floor: return fit_zero_floor(observations, options);
    case FitKind::model_size: return fit_model_size(observations, options);
    case FitKind::free_floor:
    case FitKind::fixed_floor: return fit_with_floor(observations, method, options);
  }
  throw Error(ErrorCode::invalid_argument, "unknown fit kind");
}

FitReport bootstrap_ci(std::span<const CurveObservation> observations, const FitMethod& method,
                       const BootstrapOptions& bootstrap, const FitOptions& options) {
  if (bootstrap.n_resamples < 100)
    throw Error(ErrorCode::invalid_argument, "bootstrap needs at least 100 resamples");
  if (!(bootstrap.confidence > 0.0 && bootstrap.confidence < 1.0))
    throw Error(ErrorCode::invalid_argument, "confidence must lie in (0, 1)");

  const auto obs = apply_cutoff(observations, options);
  FitReport report = fit(obs, method);
  const std::size_t need = required_distinct_sizes(method.kind);

  std::vector<double> alphas, betas, gammas;
  std::size_t degenerate = 0;
  std::vector<CurveObservation> resample(obs.size());
  for (std::size_t r = 0; r < bootstrap.n_resamples; ++r) {
    SplitMix64 rng(substream_seed(bootstrap.seed, {r}));
    for (auto& slot : resample) slot = obs[rng.bounded(obs.size())];
    if (distinct_sizes(resample) < need) {
      ++degenerate;
      continue;
    }
    const FitReport refit = fit(resample, method);
    alphas.push_back(refit.alpha);
    betas.push_back(refit.beta);
    gammas.push_back(refit.gamma);
  }
  if (alphas.size() < 2)
    throw Error(ErrorCode::insufficient_data, "too few usable bootstrap resamples",
                "degenerate=" + std::to_string(degenerate));

  ConfidenceIntervals ci;
  ci.confidence = bootstrap.confidence;
  ci.alpha = percentile_interval(std::move(alphas), bootstrap.confidence, report.alpha);
  ci.beta = percentile_interval(std::move(betas), bootstrap.confidence, report.beta);
  ci.gamma = percentile_interval(std::move(gammas), bootstrap.confidence, report.gamma);
  ci.resamples_requested = bootstrap.n_resamples;
  ci.resamples_used = bootstrap.n_resamples - degenerate;
  ci.degenerate_resamples = degenerate;
  if (degenerate > 0) report.warnings.emplace_back("degenerate_resamples");
  report.ci = ci;
  return report;
}

std::vector<CurveObservation> select_composite(std::span<const CurveObservation> observations) {
  auto better = [](const CurveObservation& a, const CurveObservation& b) {
    const auto params_key = [](const CurveObservation& o) {
      return o.model_params.value_or(std::numeric_limits<std::uint64_t>::max());
    };
    const auto seed_key = [](const CurveObservation& o) {
      return o.seed.value_or(std::numeric_limits<std::int64_t>::max());
    };
    return std::make_tuple(a.loss_value, params_key(a), seed_key(a)) <
           std::make_tuple(b.loss_value, params_key(b), seed_key(b));
  };
  std::vector<CurveObservation> best;
  for (const auto& o : observations) {
    auto it = std::find_if(best.begin(), best.end(),
                           [&](const CurveObservation& b) { return b.shard_size == o.shard_size; });
    if (it == best.end())
      best.push_back(o);
    else if (better(o, *it))
      *it = o;
  }
  std::sort(best.begin(), best.end(),
            [](const auto& a, const auto& b) { return a.shard_size < b.shard_size; });
  return best;
}

}  // namespace scalinglaw
