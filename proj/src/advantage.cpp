#include "tempsamp/advantage.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tempsamp/error.hpp"

namespace tempsamp {

std::string_view to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::kNone: return "none";
    case Strategy::kDownscale: return "downscale";
    case Strategy::kAnchor: return "anchor";
    case Strategy::kNonLinearShape: return "shape";
  }
  return "none";
}

Strategy parse_strategy(std::string_view name) {
  if (name == "none") return Strategy::kNone;
  if (name == "downscale") return Strategy::kDownscale;
  if (name == "anchor") return Strategy::kAnchor;
  if (name == "shape" || name == "nonlinear_shape") return Strategy::kNonLinearShape;
  throw Error(ErrorCode::kInvalidArgument, "unknown strategy '" + std::string(name) + "'");
}

namespace {

AdvantageVector normalize(std::span<const double> rewards, double sigma_floor) {
  const double n = static_cast<double>(rewards.size());
  double sum = 0.0;
  for (double r : rewards) sum += r;
  const double mean = sum / n;
  double sq = 0.0;
  for (double r : rewards) sq += (r - mean) * (r - mean);
  const double std = std::sqrt(sq / n);

  AdvantageVector out;
  out.group_mean = mean;
  out.group_std = std;
  out.values.assign(rewards.size(), 0.0);
  if (std < sigma_floor) {
    out.degenerate = true;
    return out;
  }
  for (std::size_t i = 0; i < rewards.size(); ++i) out.values[i] = (rewards[i] - mean) / std;
  return out;
}

std::size_t require_off_policy(const RewardGroup& group) {
  auto idx = group.off_policy_index();
  if (!idx) throw Error(ErrorCode::kNoOffPolicyEntry, "group has no off-policy entry");
  return *idx;
}

}  // namespace

AdvantageVector normalize_group(const RewardGroup& group, const ShapingConfig& cfg) {
  return normalize(group.rewards(), cfg.sigma_floor);
}

RewardGroup downscale_offpolicy(const RewardGroup& group, const ShapingConfig& cfg) {
  const std::size_t off = require_off_policy(group);
  std::vector<double> rewards = group.rewards();
  rewards[off] = std::min(rewards[off], cfg.kappa * cfg.r_max);
  return group.with_rewards(std::move(rewards));
}

AdvantageVector anchor_offpolicy(const RewardGroup& group, const ShapingConfig& cfg) {
  const std::size_t off = require_off_policy(group);
  if (group.size() < 3) {
    throw Error(ErrorCode::kTooFewOnPolicy, "anchoring needs at least 2 on-policy entries");
  }
  std::vector<double> on_rewards;
  on_rewards.reserve(group.size() - 1);
  for (std::size_t i = 0; i < group.size(); ++i) {
    if (i != off) on_rewards.push_back(group.rewards()[i]);
  }
  AdvantageVector on = normalize(on_rewards, cfg.sigma_floor);

  AdvantageVector out;
  out.strategy = Strategy::kAnchor;
  out.group_mean = on.group_mean;
  out.group_std = on.group_std;
  out.degenerate = on.degenerate;
  out.values.assign(group.size(), 0.0);
  if (on.degenerate) return out;

  for (std::size_t i = 0, k = 0; i < group.size(); ++i) {
    if (i != off) out.values[i] = on.values[k++];
  }
  const double max_on = *std::max_element(on.values.begin(), on.values.end());
  out.values[off] = cfg.lambda_off * max_on;
  out.anchor_nonpositive = max_on <= 0.0;
  return out;
}

double shape_reward(double r, const ShapingConfig& cfg) {
  if (!(r >= 0.0 && r <= cfg.r_max)) {
    throw Error(ErrorCode::kOutOfRange, "reward " + std::to_string(r) + " outside [0, r_max]");
  }
  if (r >= cfg.tau) return cfg.tau + cfg.alpha1 * std::log1p(r - cfg.tau);
  return cfg.tau - std::expm1(cfg.alpha2 * (cfg.tau - r)) / std::expm1(cfg.alpha2);
}

RewardGroup shape_group(const RewardGroup& group, const ShapingConfig& cfg) {
  std::vector<double> rewards = group.rewards();
  for (double& r : rewards) r = shape_reward(r, cfg);
  return group.with_rewards(std::move(rewards));
}

AdvantageVector compute_advantages(const RewardGroup& group, Strategy strategy,
                                   const ShapingConfig& cfg) {
  AdvantageVector out;
  switch (strategy) {
    case Strategy::kNone:
      out = normalize_group(group, cfg);
      break;
    case Strategy::kDownscale:
      out = normalize_group(downscale_offpolicy(group, cfg), cfg);
      break;
    case Strategy::kAnchor:
      out = anchor_offpolicy(group, cfg);
      break;
    case Strategy::kNonLinearShape:
      out = normalize_group(shape_group(group, cfg), cfg);
      break;
  }
  out.strategy = strategy;
  return out;
}

double sample_skewness(std::span<const double> values, double sigma_floor) {
  if (values.size() < 3) {
    throw Error(ErrorCode::kInvalidArgument, "skewness needs at least 3 values");
  }
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / n;
  double m2 = 0.0;
  double m3 = 0.0;
  for (double v : values) {
    const double d = v - mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= n;
  m3 /= n;
  if (m2 < sigma_floor) throw Error(ErrorCode::kDegenerateSample, "sample variance below floor");
  return m3 / std::pow(m2, 1.5);
}

}  // namespace tempsamp
