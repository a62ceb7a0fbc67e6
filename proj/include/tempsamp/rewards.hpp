#pragma once

#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>

#include "tempsamp/structured_output.hpp"
#include "tempsamp/temporal.hpp"

namespace tempsamp {

inline constexpr double kRecallWeight = 0.6;
inline constexpr double kScoreWeight = 0.4;
inline constexpr double kSalientThreshold = 0.5;
inline constexpr double kDefaultFormatWeight = 0.5;

using ClipSet = std::set<int>;

struct RewardBreakdown {
  double task_reward = 0.0;
  double format_reward = 0.0;
  double total = 0.0;
  std::map<std::string, double> components;
};

/// Temporal IoU with the intersection clamped at 0. Identical zero-width
/// intervals score 1; any other zero-width union scores 0.
double iou_reward(const TimeInterval& pred, const TimeInterval& gt);

/// F-beta with beta = 2. Empty sets and P = R = 0 give 0.
double f2_score(const ClipSet& pred_clips, const ClipSet& gt_clips);

/// Weighted MSE with weights gt_i^2; falls back to uniform weights when all gt are 0.
double wmse(std::span<const double> pred_scores, std::span<const double> gt_scores);

/// Clips with score >= threshold.
ClipSet salient_clips(const SaliencyTrack& track, double threshold = kSalientThreshold);

/// 0.6 * F2 + 0.4 / (1 + WMSE).
double timestamp_matching_reward(const SaliencyTrack& pred, const ClipSet& pred_set,
                                 const SaliencyTrack& gt, const ClipSet& gt_set);

/// Scores a parsed highlight answer against a GT track. Listed clips form the
/// predicted track (unlisted clips are 0, indices past the track are dropped from
/// the track but still count against precision); the predicted salient set is
/// the listed clips scoring >= 0.5.
double highlight_reward(const HighlightAnswer& answer, const SaliencyTrack& gt,
                        const ClipSet& gt_set);

/// 1 iff `raw_text` is well-formed under `schema` for `task`.
double format_reward(std::string_view raw_text, Schema schema, Task task = Task::kGrounding);

/// AnswerOnly: total = task. ThinkAnswer: total = (task + w_f * format) / (1 + w_f).
RewardBreakdown combine_rewards(double task, double format, Schema phase,
                                double w_f = kDefaultFormatWeight);

}  // namespace tempsamp
