#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace scalinglaw {

/// Generalization-error learning curve  loss(m) = alpha * m^beta + gamma.
///
/// alpha is the above-floor loss at m = 1, beta the (usually negative)
/// exponent and gamma the irreducible-error floor. Data size m is real-valued
/// here; integer shard sizes only exist at the sharding boundary.
class PowerLawCurve {
 public:
  /// Throws Error(invalid_curve) unless alpha > 0, gamma >= 0 and beta is
  /// finite and nonzero.
  PowerLawCurve(double alpha, double beta, double gamma = 0.0);

  double alpha() const noexcept { return alpha_; }
  double beta() const noexcept { return beta_; }
  double gamma() const noexcept { return gamma_; }

  friend bool operator==(const PowerLawCurve&, const PowerLawCurve&) = default;

 private:
  double alpha_;
  double beta_;
  double gamma_;
};

/// Best-fit model size  params(m) = alpha * m^beta.
class ModelSizeCurve {
 public:
  ModelSizeCurve(double alpha, double beta);

  double alpha() const noexcept { return alpha_; }
  double beta() const noexcept { return beta_; }

  friend bool operator==(const ModelSizeCurve&, const ModelSizeCurve&) = default;

 private:
  double alpha_;
  double beta_;
};

/// One measured point of a learning curve.
struct CurveObservation {
  std::uint64_t shard_size = 0;  // samples, tokens, hours... unit is the caller's
  double loss_value = 0.0;
  std::string metric_name;
  std::optional<std::uint64_t> model_params;
  std::optional<std::int64_t> seed;
  std::string split_tag;
  bool clamped = false;  // loss was raised to the clamp epsilon at ingestion

  friend bool operator==(const CurveObservation&, const CurveObservation&) = default;
};

struct ObservationPolicy {
  double clamp_epsilon = 1e-12;
  bool clamp_zero_losses = true;
};

/// Checks an observation at ingestion. Negative or non-finite losses and
/// shard_size 0 are rejected; zero losses are raised to clamp_epsilon and
/// flagged when the policy allows it.
CurveObservation validate_observation(CurveObservation obs, const ObservationPolicy& policy = {});

double evaluate(const PowerLawCurve& curve, double m);

/// Real-valued data size at which the curve reaches target_loss.
/// Throws invalid_curve for beta >= 0 and infeasible_target when
/// target_loss <= gamma.
double invert_for_data(const PowerLawCurve& curve, double target_loss);

double evaluate_model_size(const ModelSizeCurve& curve, double m);

}  // namespace scalinglaw
