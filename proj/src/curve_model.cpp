#include "scalinglaw/curve_model.hpp"

#include <cmath>

#include "scalinglaw/error.hpp"

namespace scalinglaw {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "InvalidArgument";
    case ErrorCode::invalid_curve: return "InvalidCurve";
    case ErrorCode::infeasible_target: return "InfeasibleTarget";
    case ErrorCode::insufficient_data: return "InsufficientData";
    case ErrorCode::non_positive_loss: return "NonPositiveLoss";
    case ErrorCode::missing_model_params: return "MissingModelParams";
    case ErrorCode::no_power_law_region: return "NoPowerLawRegion";
    case ErrorCode::invalid_fractions: return "InvalidFractions";
    case ErrorCode::too_small_dataset: return "TooSmallDataset";
    case ErrorCode::invalid_plan: return "InvalidPlan";
    case ErrorCode::size_mismatch: return "SizeMismatch";
    case ErrorCode::method_mismatch: return "MethodMismatch";
    case ErrorCode::learner_failure: return "LearnerFailure";
    case ErrorCode::empty_shard: return "EmptyShard";
    case ErrorCode::parse_error: return "ParseError";
    case ErrorCode::io_error: return "IoError";
  }
  return "Unknown";
}

PowerLawCurve::PowerLawCurve(double alpha, double beta, double gamma)
    : alpha_(alpha), beta_(beta), gamma_(gamma) {
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw Error(ErrorCode::invalid_curve, "alpha must be positive and finite");
  if (!std::isfinite(beta) || beta == 0.0)
    throw Error(ErrorCode::invalid_curve, "beta must be finite and nonzero");
  if (!(gamma >= 0.0) || !std::isfinite(gamma))
    throw Error(ErrorCode::invalid_curve, "gamma must be non-negative and finite");
}

ModelSizeCurve::ModelSizeCurve(double alpha, double beta) : alpha_(alpha), beta_(beta) {
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw Error(ErrorCode::invalid_curve, "model-size alpha must be positive and finite");
  if (!std::isfinite(beta))
    throw Error(ErrorCode::invalid_curve, "model-size beta must be finite");
}

CurveObservation validate_observation(CurveObservation obs, const ObservationPolicy& policy) {
  if (obs.shard_size == 0)
    throw Error(ErrorCode::invalid_argument, "shard_size must be at least 1");
  if (!std::isfinite(obs.loss_value) || obs.loss_value < 0.0)
    throw Error(ErrorCode::non_positive_loss, "loss_value must be finite and non-negative",
                "shard_size=" + std::to_string(obs.shard_size));
  if (obs.loss_value == 0.0) {
    if (!policy.clamp_zero_losses)
      throw Error(ErrorCode::non_positive_loss, "zero loss_value",
                  "shard_size=" + std::to_string(obs.shard_size));
    obs.loss_value = policy.clamp_epsilon;
    obs.clamped = true;
  }
  if (obs.model_params && *obs.model_params == 0)
    throw Error(ErrorCode::invalid_argument, "model_params must be positive");
  return obs;
}

double evaluate(const PowerLawCurve& curve, double m) {
  return curve.alpha() * std::pow(m, curve.beta()) + curve.gamma();
}

double invert_for_data(const PowerLawCurve& curve, double target_loss) {
  if (curve.beta() >= 0.0)
    throw Error(ErrorCode::invalid_curve, "inversion needs a decreasing curve (beta < 0)");
  if (!(target_loss > curve.gamma()))
    throw Error(ErrorCode::infeasible_target, "target loss is at or below the irreducible floor");
  return std::pow((target_loss - curve.gamma()) / curve.alpha(), 1.0 / curve.beta());
}

double evaluate_model_size(const ModelSizeCurve& curve, double m) {
  return curve.alpha() * std::pow(m, curve.beta());
}

}  // namespace scalinglaw
