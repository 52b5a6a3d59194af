#include "scalinglaw/counting_learner.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "scalinglaw/error.hpp"
#include "scalinglaw/random.hpp"

namespace scalinglaw {

namespace {

constexpr std::uint64_t kExactLimit = 64;

__extension__ typedef unsigned __int128 uint128;

// C(n, k) for n <= 64; every intermediate fits in 128 bits.
std::uint64_t binomial_exact(std::uint64_t n, std::uint64_t k) {
  k = std::min(k, n - k);
  uint128 c = 1;
  for (std::uint64_t j = 0; j < k; ++j) c = c * (n - j) / (j + 1);
  return static_cast<std::uint64_t>(c);
}

// ln(C(2n, n) / 4^n) from the Stirling series of ln Gamma; used for n > 32.
double log_central_binomial_over_4n(double n) {
  const double inv = 1.0 / n;
  const double inv2 = inv * inv;
  const double series =
      inv * (-1.0 / 8.0 + inv2 * (1.0 / 192.0 + inv2 * (-1.0 / 640.0 + inv2 * (17.0 / 14336.0))));
  return -0.5 * std::log(std::numbers::pi * n) + series;
}

double log_binomial(std::uint64_t n, std::uint64_t k) {
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

std::vector<double> binomial_pmf(std::uint64_t i, double p) {
  std::vector<double> pmf(i + 1);
  if (i <= kExactLimit) {
    for (std::uint64_t k = 0; k <= i; ++k)
      pmf[k] = static_cast<double>(binomial_exact(i, k)) * std::pow(p, static_cast<double>(k)) *
               std::pow(1.0 - p, static_cast<double>(i - k));
    return pmf;
  }
  const double log_p = std::log(p);
  const double log_q = std::log1p(-p);
  for (std::uint64_t k = 0; k <= i; ++k)
    pmf[k] = std::exp(log_binomial(i, k) + static_cast<double>(k) * log_p +
                      static_cast<double>(i - k) * log_q);
  return pmf;
}

void require_positive_i(std::uint64_t i) {
  if (i == 0) throw Error(ErrorCode::invalid_argument, "training-set size i must be at least 1");
}

}  // namespace

CoinDistribution::CoinDistribution(double p) : p_(p) {
  if (!(p > 0.0 && p < 1.0))
    throw Error(ErrorCode::invalid_argument, "coin probability must lie in (0, 1)");
}

std::string_view loss_kind_name(LossKind kind) noexcept {
  switch (kind) {
    case LossKind::l1: return "l1";
    case LossKind::l2_norm: return "l2_norm";
    case LossKind::abs_kl: return "abs_kl";
  }
  return "unknown";
}

double total_loss(const CountingEstimate& estimate, double true_p, LossKind loss) {
  const double q = estimate.probability_of_one();
  const double truth[2] = {1.0 - true_p, true_p};
  double predicted[2] = {1.0 - q, q};
  switch (loss) {
    case LossKind::l1:
      return std::abs(predicted[0] - truth[0]) * truth[0] +
             std::abs(predicted[1] - truth[1]) * truth[1];
    case LossKind::l2_norm: {
      const double norm = std::hypot(predicted[0] - truth[0], predicted[1] - truth[1]);
      return norm * truth[0] + norm * truth[1];
    }
    case LossKind::abs_kl: {
      const double eps = 1.0 / (static_cast<double>(estimate.i) + 2.0);
      const double clamped = std::clamp(q, eps, 1.0 - eps);
      predicted[0] = 1.0 - clamped;
      predicted[1] = clamped;
      double sum = 0.0;
      for (int x = 0; x < 2; ++x)
        if (truth[x] > 0.0) sum += truth[x] * std::abs(std::log(truth[x]) - std::log(predicted[x]));
      return sum;
    }
  }
  throw Error(ErrorCode::invalid_argument, "unknown loss kind");
}

double exact_expected_loss_fair_l1(std::uint64_t i) {
  require_positive_i(i);
  // Both parities reduce to C(2n, n) / 2^(2n+1) with n = floor(i / 2), so i
  // and i + 1 (i even) take the same path and give the same bits.
  const std::uint64_t n = i / 2;
  if (2 * n <= kExactLimit)
    return std::ldexp(static_cast<double>(binomial_exact(2 * n, n)), -static_cast<int>(2 * n + 1));
  return 0.5 * std::exp(log_central_binomial_over_4n(static_cast<double>(n)));
}

double expected_loss_binomial_sum(std::uint64_t i, const CoinDistribution& coin, LossKind loss) {
  require_positive_i(i);
  const auto pmf = binomial_pmf(i, coin.p());
  double sum = 0.0;
  for (std::uint64_t k = 0; k <= i; ++k)
    sum += pmf[k] * total_loss(CountingEstimate{i, k}, coin.p(), loss);
  return sum;
}

MonteCarloEstimate monte_carlo_expected_loss(std::uint64_t i, const CoinDistribution& coin,
                                             LossKind loss, std::uint64_t trials,
                                             std::uint64_t seed) {
  require_positive_i(i);
  if (trials == 0) throw Error(ErrorCode::invalid_argument, "trials must be at least 1");
  const auto pmf = binomial_pmf(i, coin.p());
  std::vector<double> cdf(pmf.size());
  std::partial_sum(pmf.begin(), pmf.end(), cdf.begin());
  std::vector<double> loss_of_k(i + 1);
  for (std::uint64_t k = 0; k <= i; ++k)
    loss_of_k[k] = total_loss(CountingEstimate{i, k}, coin.p(), loss);

  double sum = 0.0, sum_sq = 0.0;
  for (std::uint64_t t = 0; t < trials; ++t) {
    SplitMix64 rng(substream_seed(seed, {t}));
    const double u = rng.uniform01();
    auto k = static_cast<std::uint64_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    k = std::min(k, i);
    sum += loss_of_k[k];
    sum_sq += loss_of_k[k] * loss_of_k[k];
  }
  const double n = static_cast<double>(trials);
  MonteCarloEstimate result;
  result.estimate = sum / n;
  if (trials > 1) {
    const double variance = std::max(0.0, (sum_sq - n * result.estimate * result.estimate) / (n - 1.0));
    result.standard_error = std::sqrt(variance / n);
  }
  return result;
}

std::string expectation_method_name(const ExpectationMethod& method) {
  if (std::holds_alternative<ClosedForm>(method)) return "closed_form";
  if (std::holds_alternative<BinomialSum>(method)) return "binomial_sum";
  return "monte_carlo";
}

std::vector<CurveObservation> expected_loss_curve(std::span<const std::uint64_t> i_values,
                                                  const CoinDistribution& coin, LossKind loss,
                                                  const ExpectationMethod& method) {
  if (i_values.empty()) throw Error(ErrorCode::invalid_argument, "i_values is empty");
  for (std::size_t j = 1; j < i_values.size(); ++j)
    if (i_values[j] <= i_values[j - 1])
      throw Error(ErrorCode::invalid_argument, "i_values must be strictly ascending");
  if (std::holds_alternative<ClosedForm>(method) && (coin.p() != 0.5 || loss != LossKind::l1))
    throw Error(ErrorCode::method_mismatch, "closed form only covers the fair coin with l1 loss");

  std::vector<CurveObservation> curve;
  curve.reserve(i_values.size());
  for (std::uint64_t i : i_values) {
    CurveObservation obs;
    obs.shard_size = i;
    obs.metric_name = "counting-" + std::string(loss_kind_name(loss));
    obs.split_tag = expectation_method_name(method);
    if (std::holds_alternative<ClosedForm>(method)) {
      obs.loss_value = exact_expected_loss_fair_l1(i);
    } else if (std::holds_alternative<BinomialSum>(method)) {
      obs.loss_value = expected_loss_binomial_sum(i, coin, loss);
    } else {
      const auto& mc = std::get<MonteCarlo>(method);
      obs.loss_value = monte_carlo_expected_loss(i, coin, loss, mc.trials, mc.seed).estimate;
      obs.seed = static_cast<std::int64_t>(mc.seed);
    }
    curve.push_back(validate_observation(std::move(obs)));
  }
  return curve;
}

LossExponent measure_loss_exponent(std::span<const std::uint64_t> i_values,
                                   const CoinDistribution& coin, LossKind loss) {
  const auto curve = expected_loss_curve(i_values, coin, loss, BinomialSum{});
  LossExponent result{loss, fit_zero_floor(curve), true};
  if (result.fit.rrmse > 0.02) {
    result.power_law_like = false;
    result.fit.warnings.emplace_back("not power-law-like at tested range");
  }
  return result;
}

CountingEstimate CountingLearner::train(std::span<const std::uint8_t> shard, double /*capacity*/,
                                        std::uint64_t /*seed*/) const {
  if (shard.empty()) throw Error(ErrorCode::empty_shard, "counting learner got an empty shard");
  const auto heads = static_cast<std::uint64_t>(
      std::count_if(shard.begin(), shard.end(), [](std::uint8_t r) { return r != 0; }));
  return {shard.size(), heads};
}

double CountingLearner::evaluate(const CountingEstimate& state,
                                 std::span<const std::uint8_t> validation) const {
  if (validation.empty()) throw Error(ErrorCode::empty_shard, "empty validation set");
  const auto ones =
      std::count_if(validation.begin(), validation.end(), [](std::uint8_t r) { return r != 0; });
  const double p_validation = static_cast<double>(ones) / static_cast<double>(validation.size());
  return total_loss(state, p_validation, loss_);
}

std::uint64_t CountingLearner::param_count(double /*capacity*/) const { return 1; }

std::string CountingLearner::metric_name() const {
  return "counting-" + std::string(loss_kind_name(loss_));
}

}  // namespace scalinglaw
