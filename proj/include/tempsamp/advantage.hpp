#pragma once

// Group-relative advantages over mixed on/off-policy reward groups.
//
// Joint normalization treats the injected ground-truth solution as one more
// member of the group. The three stabilizers act at different points:
//   Downscale       caps the off-policy reward at kappa * r_max, then normalizes jointly
//   Anchor          normalizes on-policy rewards alone; off-policy gets lambda_off * max(A_on)
//   NonLinearShape  maps every reward through shape_reward, then normalizes jointly
// Standard deviations are population (divide by G).

#include <span>
#include <string_view>
#include <vector>

#include "tempsamp/temporal.hpp"

namespace tempsamp {

enum class Strategy { kNone, kDownscale, kAnchor, kNonLinearShape };

std::string_view to_string(Strategy strategy);
Strategy parse_strategy(std::string_view name);

struct AdvantageVector {
  std::vector<double> values;
  double group_mean = 0.0;
  double group_std = 0.0;
  Strategy strategy = Strategy::kNone;
  /// Set when sigma < sigma_floor; all values are then exactly 0.
  bool degenerate = false;
  /// Anchor only: the maximum on-policy advantage was <= 0, so the literal
  /// anchor gives the ground truth a non-positive advantage.
  bool anchor_nonpositive = false;
};

AdvantageVector normalize_group(const RewardGroup& group, const ShapingConfig& cfg);

RewardGroup downscale_offpolicy(const RewardGroup& group, const ShapingConfig& cfg);

AdvantageVector anchor_offpolicy(const RewardGroup& group, const ShapingConfig& cfg);

/// Piecewise shaping: logarithmic compression at and above tau, exponential
/// expansion below. Throws kOutOfRange outside [0, r_max].
double shape_reward(double r, const ShapingConfig& cfg);

RewardGroup shape_group(const RewardGroup& group, const ShapingConfig& cfg);

AdvantageVector compute_advantages(const RewardGroup& group, Strategy strategy,
                                   const ShapingConfig& cfg);

/// Unadjusted Fisher-Pearson skewness m3 / m2^1.5 with population moments.
/// Throws kInvalidArgument for n < 3 and kDegenerateSample when m2 < sigma_floor.
double sample_skewness(std::span<const double> values, double sigma_floor = 1e-8);

}  // namespace tempsamp
