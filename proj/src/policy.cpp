#include "tempsamp/policy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tempsamp/error.hpp"

namespace tempsamp {

void Matrix::add_scaled(const Matrix& other, double scale) {
  if (other.rows_ != rows_ || other.cols_ != cols_) {
    throw Error(ErrorCode::kDimensionMismatch, "matrix shapes differ");
  }
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += scale * other.data_[k];
}

void PolicyGradient::add_scaled(const PolicyGradient& other, double scale) {
  interval.add_scaled(other.interval, scale);
  format.add_scaled(other.format, scale);
}

std::vector<double> logits(const Matrix& weights, std::span<const double> observation) {
  std::vector<double> z(weights.cols(), 0.0);
  for (std::size_t f = 0; f < weights.rows(); ++f) {
    const double x = observation[f];
    if (x == 0.0) continue;
    for (std::size_t a = 0; a < weights.cols(); ++a) z[a] += weights(f, a) * x;
  }
  return z;
}

std::vector<double> log_softmax(std::span<const double> z) {
  const double peak = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double v : z) sum += std::exp(v - peak);
  const double log_norm = peak + std::log(sum);
  std::vector<double> out(z.size());
  for (std::size_t k = 0; k < z.size(); ++k) out[k] = z[k] - log_norm;
  return out;
}

std::vector<double> softmax(std::span<const double> z) {
  const double peak = *std::max_element(z.begin(), z.end());
  std::vector<double> out(z.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < z.size(); ++k) {
    out[k] = std::exp(z[k] - peak);
    sum += out[k];
  }
  for (double& p : out) p /= sum;
  return out;
}

double categorical_kl(std::span<const double> log_p, std::span<const double> log_q) {
  double kl = 0.0;
  for (std::size_t k = 0; k < log_p.size(); ++k) {
    const double p = std::exp(log_p[k]);
    if (p > 0.0) kl += p * (log_p[k] - log_q[k]);
  }
  return std::max(0.0, kl);
}

namespace {

void check_finite(const Matrix& m, const char* name) {
  for (double v : m.data()) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kNonFinite, std::string(name) + " not finite");
  }
}

// x (one_hot(action) - p)
void add_score_function(Matrix& grad, std::span<const double> observation,
                        std::span<const double> probs, std::size_t action) {
  for (std::size_t f = 0; f < grad.rows(); ++f) {
    const double x = observation[f];
    if (x == 0.0) continue;
    for (std::size_t a = 0; a < grad.cols(); ++a) {
      grad(f, a) += x * ((a == action ? 1.0 : 0.0) - probs[a]);
    }
  }
}

// dKL/dz_k = p_k (log p_k - log q_k - KL); weight gradient is x (dKL/dz).
void add_kl_gradient(Matrix& grad, std::span<const double> observation,
                     std::span<const double> log_p, std::span<const double> log_q) {
  std::vector<double> p(log_p.size());
  double kl = 0.0;
  for (std::size_t k = 0; k < log_p.size(); ++k) {
    p[k] = std::exp(log_p[k]);
    kl += p[k] * (log_p[k] - log_q[k]);
  }
  std::vector<double> dz(log_p.size());
  for (std::size_t k = 0; k < log_p.size(); ++k) dz[k] = p[k] * (log_p[k] - log_q[k] - kl);
  for (std::size_t f = 0; f < grad.rows(); ++f) {
    const double x = observation[f];
    if (x == 0.0) continue;
    for (std::size_t a = 0; a < grad.cols(); ++a) grad(f, a) += x * dz[a];
  }
}

}  // namespace

IntervalPolicy IntervalPolicy::make(std::size_t feature_dim, std::size_t num_bins,
                                    std::size_t num_templates) {
  if (feature_dim == 0 || num_bins == 0 || num_templates == 0) {
    throw Error(ErrorCode::kInvalidArgument, "policy dimensions must be positive");
  }
  return IntervalPolicy(num_bins, Matrix(feature_dim, num_actions_for(num_bins)),
                        Matrix(feature_dim, num_templates));
}

IntervalPolicy IntervalPolicy::from_weights(std::size_t num_bins, Matrix weights,
                                            Matrix format_weights, std::optional<Matrix> ref_weights,
                                            std::optional<Matrix> ref_format_weights) {
  if (num_bins == 0 || weights.cols() != num_actions_for(num_bins)) {
    throw Error(ErrorCode::kDimensionMismatch, "interval weights need N(N+1)/2 columns");
  }
  if (weights.rows() == 0 || format_weights.rows() != weights.rows() || format_weights.cols() == 0) {
    throw Error(ErrorCode::kDimensionMismatch, "format weights must share the feature dimension");
  }
  if (ref_weights.has_value() != ref_format_weights.has_value()) {
    throw Error(ErrorCode::kInvalidArgument, "reference snapshot must cover both heads");
  }
  if (ref_weights && (ref_weights->rows() != weights.rows() || ref_weights->cols() != weights.cols() ||
                      ref_format_weights->rows() != format_weights.rows() ||
                      ref_format_weights->cols() != format_weights.cols())) {
    throw Error(ErrorCode::kDimensionMismatch, "reference weights differ in shape");
  }
  check_finite(weights, "weights");
  check_finite(format_weights, "format_weights");
  IntervalPolicy policy(num_bins, std::move(weights), std::move(format_weights));
  if (ref_weights) {
    check_finite(*ref_weights, "ref_weights");
    check_finite(*ref_format_weights, "ref_format_weights");
    policy.ref_weights_ = std::move(ref_weights);
    policy.ref_format_weights_ = std::move(ref_format_weights);
  }
  return policy;
}

std::size_t IntervalPolicy::action_index(BinPair bins) const {
  if (bins.first > bins.last || bins.last >= num_bins_) {
    throw Error(ErrorCode::kIndexOutOfRange, "invalid bin pair");
  }
  // Pairs before row i: N + (N-1) + ... + (N-i+1).
  const std::size_t i = bins.first;
  return i * num_bins_ - i * (i - 1) / 2 + (bins.last - i);
}

BinPair IntervalPolicy::action_bins(std::size_t action) const {
  if (action >= num_actions()) throw Error(ErrorCode::kIndexOutOfRange, "action out of range");
  std::size_t i = 0;
  std::size_t row = num_bins_;
  while (action >= row) {
    action -= row;
    --row;
    ++i;
  }
  return {i, i + action};
}

void IntervalPolicy::check_observation(std::span<const double> observation) const {
  if (observation.size() != feature_dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "observation has " + std::to_string(observation.size()) + " features, policy expects " +
                    std::to_string(feature_dim()));
  }
}

std::vector<double> IntervalPolicy::action_probs(std::span<const double> observation) const {
  check_observation(observation);
  return softmax(logits(weights_, observation));
}

std::vector<double> IntervalPolicy::template_probs(std::span<const double> observation) const {
  check_observation(observation);
  return softmax(logits(format_weights_, observation));
}

std::vector<double> IntervalPolicy::action_log_probs(std::span<const double> observation) const {
  check_observation(observation);
  return log_softmax(logits(weights_, observation));
}

std::vector<double> IntervalPolicy::template_log_probs(std::span<const double> observation) const {
  check_observation(observation);
  return log_softmax(logits(format_weights_, observation));
}

double IntervalPolicy::log_prob(std::span<const double> observation, ActionPair action) const {
  if (action.interval >= num_actions() || action.templ >= num_templates()) {
    throw Error(ErrorCode::kIndexOutOfRange, "action index out of range");
  }
  return action_log_probs(observation)[action.interval] +
         template_log_probs(observation)[action.templ];
}

PolicyGradient IntervalPolicy::grad_log_prob(std::span<const double> observation,
                                             ActionPair action) const {
  if (action.interval >= num_actions() || action.templ >= num_templates()) {
    throw Error(ErrorCode::kIndexOutOfRange, "action index out of range");
  }
  PolicyGradient grad = zero_gradient();
  add_score_function(grad.interval, observation, action_probs(observation), action.interval);
  add_score_function(grad.format, observation, template_probs(observation), action.templ);
  return grad;
}

double IntervalPolicy::kl_to_ref(std::span<const double> observation) const {
  if (!has_reference()) throw Error(ErrorCode::kMissingReference, "no reference snapshot");
  check_observation(observation);
  return categorical_kl(action_log_probs(observation), log_softmax(logits(*ref_weights_, observation))) +
         categorical_kl(template_log_probs(observation),
                        log_softmax(logits(*ref_format_weights_, observation)));
}

PolicyGradient IntervalPolicy::grad_kl_to_ref(std::span<const double> observation) const {
  if (!has_reference()) throw Error(ErrorCode::kMissingReference, "no reference snapshot");
  check_observation(observation);
  PolicyGradient grad = zero_gradient();
  add_kl_gradient(grad.interval, observation, action_log_probs(observation),
                  log_softmax(logits(*ref_weights_, observation)));
  add_kl_gradient(grad.format, observation, template_log_probs(observation),
                  log_softmax(logits(*ref_format_weights_, observation)));
  return grad;
}

PolicyGradient IntervalPolicy::zero_gradient() const {
  return {Matrix(weights_.rows(), weights_.cols()),
          Matrix(format_weights_.rows(), format_weights_.cols())};
}

void IntervalPolicy::apply(const PolicyGradient& gradient, double step) {
  weights_.add_scaled(gradient.interval, step);
  format_weights_.add_scaled(gradient.format, step);
  check_finite(weights_, "weights");
  check_finite(format_weights_, "format_weights");
}

void IntervalPolicy::snapshot_reference() {
  ref_weights_ = weights_;
  ref_format_weights_ = format_weights_;
}

}  // namespace tempsamp
