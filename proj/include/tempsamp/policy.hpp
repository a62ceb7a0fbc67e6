#pragma once

// Linear-softmax policy over discretized intervals plus an output-template head.
//
// The interval head scores every bin pair (i, j) with i <= j, so a policy over N
// bins has N(N+1)/2 interval actions. Both heads are softmax(W^T x) of the
// observation x; all gradients and KL terms below are closed form.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace tempsamp {

/// Dense row-major matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  /// this += scale * other, element-wise in storage order.
  void add_scaled(const Matrix& other, double scale);

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct ActionPair {
  std::size_t interval = 0;
  std::size_t templ = 0;
  friend bool operator==(const ActionPair&, const ActionPair&) = default;
};

struct BinPair {
  std::size_t first = 0;
  std::size_t last = 0;
  friend bool operator==(const BinPair&, const BinPair&) = default;
};

/// Gradient with the same shape as the policy's two weight matrices.
struct PolicyGradient {
  Matrix interval;
  Matrix format;

  void add_scaled(const PolicyGradient& other, double scale);
};

inline constexpr std::size_t kNumTemplates = 4;

class IntervalPolicy {
 public:
  /// Zero weights (uniform heads); no reference snapshot yet.
  static IntervalPolicy make(std::size_t feature_dim, std::size_t num_bins,
                             std::size_t num_templates = kNumTemplates);
  /// From explicit weights; validates shapes and finiteness.
  static IntervalPolicy from_weights(std::size_t num_bins, Matrix weights, Matrix format_weights,
                                     std::optional<Matrix> ref_weights = std::nullopt,
                                     std::optional<Matrix> ref_format_weights = std::nullopt);

  static std::size_t num_actions_for(std::size_t num_bins) { return num_bins * (num_bins + 1) / 2; }

  std::size_t feature_dim() const noexcept { return weights_.rows(); }
  std::size_t num_bins() const noexcept { return num_bins_; }
  std::size_t num_actions() const noexcept { return weights_.cols(); }
  std::size_t num_templates() const noexcept { return format_weights_.cols(); }

  /// Row-major enumeration of bin pairs: (0,0), (0,1), ..., (0,N-1), (1,1), ...
  std::size_t action_index(BinPair bins) const;
  BinPair action_bins(std::size_t action) const;

  std::vector<double> action_probs(std::span<const double> observation) const;
  std::vector<double> template_probs(std::span<const double> observation) const;
  std::vector<double> action_log_probs(std::span<const double> observation) const;
  std::vector<double> template_log_probs(std::span<const double> observation) const;

  /// log pi(interval) + log pi(template).
  double log_prob(std::span<const double> observation, ActionPair action) const;

  /// Score function: x (one_hot(a) - p) for each head.
  PolicyGradient grad_log_prob(std::span<const double> observation, ActionPair action) const;

  /// Exact KL(pi || pi_ref) summed over both heads. Throws kMissingReference.
  double kl_to_ref(std::span<const double> observation) const;
  PolicyGradient grad_kl_to_ref(std::span<const double> observation) const;

  PolicyGradient zero_gradient() const;

  /// weights += step * gradient. Throws kNonFinite if any weight stops being finite.
  void apply(const PolicyGradient& gradient, double step);

  void snapshot_reference();
  bool has_reference() const noexcept { return ref_weights_.has_value(); }

  const Matrix& weights() const noexcept { return weights_; }
  const Matrix& format_weights() const noexcept { return format_weights_; }
  const std::optional<Matrix>& ref_weights() const noexcept { return ref_weights_; }
  const std::optional<Matrix>& ref_format_weights() const noexcept { return ref_format_weights_; }

  friend bool operator==(const IntervalPolicy&, const IntervalPolicy&) = default;

 private:
  IntervalPolicy(std::size_t num_bins, Matrix weights, Matrix format_weights)
      : num_bins_(num_bins), weights_(std::move(weights)), format_weights_(std::move(format_weights)) {}

  void check_observation(std::span<const double> observation) const;

  std::size_t num_bins_;
  Matrix weights_;
  Matrix format_weights_;
  std::optional<Matrix> ref_weights_;
  std::optional<Matrix> ref_format_weights_;
};

/// Softmax helpers shared by the policy and its tests.
std::vector<double> logits(const Matrix& weights, std::span<const double> observation);
std::vector<double> log_softmax(std::span<const double> logits);
std::vector<double> softmax(std::span<const double> logits);
/// Exact categorical KL(p || q) from log-probabilities.
double categorical_kl(std::span<const double> log_p, std::span<const double> log_q);

}  // namespace tempsamp
