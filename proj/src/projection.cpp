#include "scalinglaw/projection.hpp"

#include <algorithm>
#include <cmath>

#include "scalinglaw/error.hpp"

namespace scalinglaw {

namespace {

void require_decreasing(const PowerLawCurve& learning) {
  if (learning.beta() >= 0.0)
    throw Error(ErrorCode::invalid_curve, "learning curve must decrease (beta < 0)");
}

}  // namespace

ProjectionResult project(const PowerLawCurve& learning, const std::optional<ModelSizeCurve>& sizing,
                         double target_loss, const ProjectionOptions& options) {
  require_decreasing(learning);
  if (!(options.reference_size >= 1.0))
    throw Error(ErrorCode::invalid_argument, "reference size must be at least 1");
  if (!(target_loss > 0.0) || !std::isfinite(target_loss))
    throw Error(ErrorCode::invalid_argument, "target loss must be positive");

  ProjectionResult result;
  result.target_loss = target_loss;
  result.feasible = target_loss > learning.gamma();
  if (!result.feasible) {
    result.warnings.emplace_back("target at or below irreducible error");
    return result;
  }

  const double data = invert_for_data(learning, target_loss);
  result.required_data = data;
  const double largest = options.largest_observed.value_or(options.reference_size);
  result.extrapolation_factor = std::max(1.0, data / largest);
  if (*result.extrapolation_factor > kExtrapolationWarningFactor)
    result.warnings.emplace_back("extrapolates more than 100x beyond observed data");

  if (sizing) {
    const double params = evaluate_model_size(*sizing, data);
    const double reference_params = evaluate_model_size(*sizing, options.reference_size);
    result.required_params = params;
    result.relative_compute = (params * data) / (reference_params * options.reference_size);
  }
  return result;
}

double improvement_per_doubling(const PowerLawCurve& learning) {
  require_decreasing(learning);
  return 1.0 - std::exp2(learning.beta());
}

double data_factor_to_halve_loss(const PowerLawCurve& learning) {
  require_decreasing(learning);
  return std::exp2(-1.0 / learning.beta());
}

std::vector<DomainRank> compare_domains(std::span<const NamedCurve> curves) {
  std::vector<DomainRank> ranking;
  ranking.reserve(curves.size());
  for (const auto& c : curves) ranking.push_back({c.name, improvement_per_doubling(c.curve)});
  std::sort(ranking.begin(), ranking.end(), [](const DomainRank& a, const DomainRank& b) {
    if (a.improvement_per_doubling != b.improvement_per_doubling)
      return a.improvement_per_doubling > b.improvement_per_doubling;
    return a.name < b.name;
  });
  return ranking;
}

}  // namespace scalinglaw
