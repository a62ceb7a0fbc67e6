#include "tempsamp/rewards.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "tempsamp/error.hpp"

namespace tempsamp {

double iou_reward(const TimeInterval& pred, const TimeInterval& gt) {
  const double inter = std::min(pred.end(), gt.end()) - std::max(pred.start(), gt.start());
  const double uni = std::max(pred.end(), gt.end()) - std::min(pred.start(), gt.start());
  if (uni <= 0.0) return pred == gt ? 1.0 : 0.0;
  return std::clamp(std::max(0.0, inter) / uni, 0.0, 1.0);
}

double f2_score(const ClipSet& pred_clips, const ClipSet& gt_clips) {
  if (pred_clips.empty() || gt_clips.empty()) return 0.0;
  std::size_t hits = 0;
  for (int c : pred_clips) hits += gt_clips.count(c);
  if (hits == 0) return 0.0;
  const double p = static_cast<double>(hits) / static_cast<double>(pred_clips.size());
  const double r = static_cast<double>(hits) / static_cast<double>(gt_clips.size());
  return 5.0 * p * r / (4.0 * p + r);
}

double wmse(std::span<const double> pred_scores, std::span<const double> gt_scores) {
  if (pred_scores.size() != gt_scores.size()) {
    throw Error(ErrorCode::kLengthMismatch, "prediction and GT score tracks differ in length");
  }
  if (gt_scores.empty()) throw Error(ErrorCode::kInvalidArgument, "empty score tracks");
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!std::all_of(pred_scores.begin(), pred_scores.end(), in_unit) ||
      !std::all_of(gt_scores.begin(), gt_scores.end(), in_unit)) {
    throw Error(ErrorCode::kOutOfRange, "saliency score outside [0, 1]");
  }

  double weight_sum = 0.0;
  for (double s : gt_scores) weight_sum += s * s;
  const bool uniform = weight_sum <= 0.0;

  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < gt_scores.size(); ++i) {
    const double w = uniform ? 1.0 : gt_scores[i] * gt_scores[i];
    const double d = pred_scores[i] - gt_scores[i];
    num += w * d * d;
    den += w;
  }
  return num / den;
}

ClipSet salient_clips(const SaliencyTrack& track, double threshold) {
  ClipSet out;
  const auto& scores = track.scores();
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i] >= threshold) out.insert(static_cast<int>(i));
  }
  return out;
}

double timestamp_matching_reward(const SaliencyTrack& pred, const ClipSet& pred_set,
                                 const SaliencyTrack& gt, const ClipSet& gt_set) {
  if (pred.clip_len() != gt.clip_len()) {
    throw Error(ErrorCode::kClipLenMismatch, "prediction and GT clip lengths differ");
  }
  const double f2 = f2_score(pred_set, gt_set);
  const double err = wmse(pred.scores(), gt.scores());
  return kRecallWeight * f2 + kScoreWeight * (1.0 / (1.0 + err));
}

double highlight_reward(const HighlightAnswer& answer, const SaliencyTrack& gt,
                        const ClipSet& gt_set) {
  std::vector<double> scores(gt.num_clips(), 0.0);
  ClipSet pred_set;
  for (const auto& c : answer.clips()) {
    if (c.score >= kSalientThreshold) pred_set.insert(c.clip);
    if (static_cast<std::size_t>(c.clip) < scores.size()) scores[c.clip] = c.score;
  }
  const auto pred = SaliencyTrack::make(gt.clip_len(), std::move(scores));
  return timestamp_matching_reward(pred, pred_set, gt, gt_set);
}

double format_reward(std::string_view raw_text, Schema schema, Task task) {
  return parse_output(raw_text, schema, task).well_formed ? 1.0 : 0.0;
}

RewardBreakdown combine_rewards(double task, double format, Schema phase, double w_f) {
  if (!(task >= 0.0 && task <= 1.0)) {
    throw Error(ErrorCode::kOutOfRange, "task reward outside [0, 1]");
  }
  if (format != 0.0 && format != 1.0) {
    throw Error(ErrorCode::kOutOfRange, "format reward must be 0 or 1");
  }
  if (!(w_f >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "format weight must be >= 0");
  RewardBreakdown out;
  out.task_reward = task;
  out.format_reward = format;
  out.total = phase == Schema::kAnswerOnly ? task : (task + w_f * format) / (1.0 + w_f);
  out.total = std::clamp(out.total, 0.0, 1.0);
  return out;
}

}  // namespace tempsamp
