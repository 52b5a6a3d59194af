#pragma once

// Counting-model coin estimator: the learner predicts P[1] as the fraction of
// ones among i training flips. Its expected loss is known exactly, which
// makes it ground truth for the fitting pipeline.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "scalinglaw/curve_model.hpp"
#include "scalinglaw/fitting.hpp"

namespace scalinglaw {

class CoinDistribution {
 public:
  /// Throws invalid_argument unless 0 < p < 1.
  explicit CoinDistribution(double p);
  double p() const noexcept { return p_; }

 private:
  double p_;
};

enum class LossKind { l1, l2_norm, abs_kl };

std::string_view loss_kind_name(LossKind kind) noexcept;

struct CountingEstimate {
  std::uint64_t i = 0;
  std::uint64_t heads = 0;
  double probability_of_one() const { return static_cast<double>(heads) / static_cast<double>(i); }
};

/// Total loss L = sum_x l(P_hat[x], P_true[x]) * P_true[x] over x in {0, 1}.
///   l1:      l = |P_hat[x] - P_true[x]|
///   l2_norm: l = Euclidean norm of the whole error vector
///   abs_kl:  l = |ln P_true[x] - ln P_hat[x]|, P_hat clamped to
///            [1/(i+2), 1 - 1/(i+2)]
/// `true_p` may be 0 or 1 here (a validation set can be all heads).
double total_loss(const CountingEstimate& estimate, double true_p, LossKind loss);

/// E[L_i] for the fair coin under l1: 2^-(i+1) C(i, i/2) for even i and
/// 2^-i C(i-1, (i-1)/2) for odd i. Exact integer binomials up to i = 64,
/// an asymptotic series for the central binomial above.
double exact_expected_loss_fair_l1(std::uint64_t i);

/// sum_k C(i,k) p^k (1-p)^(i-k) L(k/i).
double expected_loss_binomial_sum(std::uint64_t i, const CoinDistribution& coin, LossKind loss);

struct MonteCarloEstimate {
  double estimate = 0.0;
  std::optional<double> standard_error;  // undefined for a single trial
};

/// Each trial t draws its head count from substream (seed, t) by inversion
/// of the binomial CDF; trials are summed in index order.
MonteCarloEstimate monte_carlo_expected_loss(std::uint64_t i, const CoinDistribution& coin,
                                             LossKind loss, std::uint64_t trials,
                                             std::uint64_t seed);

struct ClosedForm {};
struct BinomialSum {};
struct MonteCarlo {
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
};
using ExpectationMethod = std::variant<ClosedForm, BinomialSum, MonteCarlo>;

std::string expectation_method_name(const ExpectationMethod& method);

/// (i, E[L_i]) records ready for fitting. ClosedForm is only defined for the
/// fair coin with l1 (method_mismatch otherwise).
std::vector<CurveObservation> expected_loss_curve(std::span<const std::uint64_t> i_values,
                                                  const CoinDistribution& coin, LossKind loss,
                                                  const ExpectationMethod& method);

/// Fitted exponent of a counting-learner loss curve. A loss whose log-log
/// fit misses by more than 2% rrmse is flagged as not power-law-like over
/// the tested range.
struct LossExponent {
  LossKind loss;
  FitReport fit;
  bool power_law_like = true;
};

LossExponent measure_loss_exponent(std::span<const std::uint64_t> i_values,
                                   const CoinDistribution& coin, LossKind loss);

/// Learner adapter for the experiment harness: records are coin flips
/// (0 or 1), the capacity knob is ignored and param_count is 1. Validation
/// loss compares the estimate with the validation set's empirical frequency.
class CountingLearner {
 public:
  using record_type = std::uint8_t;
  using state_type = CountingEstimate;

  explicit CountingLearner(LossKind loss = LossKind::l1) : loss_(loss) {}

  CountingEstimate train(std::span<const std::uint8_t> shard, double capacity,
                         std::uint64_t seed) const;
  double evaluate(const CountingEstimate& state, std::span<const std::uint8_t> validation) const;
  std::uint64_t param_count(double capacity) const;
  std::string metric_name() const;

 private:
  LossKind loss_;
};

}  // namespace scalinglaw
