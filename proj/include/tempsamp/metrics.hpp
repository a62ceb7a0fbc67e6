#pragma once

// Grounding and highlight evaluation: R1@mu, mIoU, mAP@{0.5, 0.75}, HIT@1.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "tempsamp/rewards.hpp"
#include "tempsamp/temporal.hpp"

namespace tempsamp {

struct GroundingPrediction {
  std::int64_t instance_id = 0;
  /// Rank 1 first.
  std::vector<TimeInterval> ranked_intervals;
  /// Non-increasing with rank when present.
  std::optional<std::vector<double>> confidences;
};

struct HighlightPrediction {
  std::int64_t instance_id = 0;
  /// Rank 1 first.
  std::vector<ClipScore> ranked_clips;
};

/// GT segments per instance. Grounding instances hold one segment; highlight
/// instances may hold several (see salient_segments).
using GroundingTruths = std::map<std::int64_t, std::vector<TimeInterval>>;
using HighlightTruths = std::map<std::int64_t, SaliencyTrack>;

inline constexpr double kVeryGoodThreshold = 0.9;

/// IoU of the rank-1 interval against its best-matching GT segment.
double rank1_iou(const GroundingPrediction& pred, const GroundingTruths& gts);

double recall_at_1(std::span<const GroundingPrediction> preds, const GroundingTruths& gts,
                   double threshold);

double mean_iou(std::span<const GroundingPrediction> preds, const GroundingTruths& gts);

/// All-point AP for one instance: predictions ordered by confidence (ties broken
/// by earlier start), greedily matched one-to-one to the unmatched GT segment with
/// the highest IoU >= threshold; AP = sum_k (R_k - R_{k-1}) P_k.
double average_precision(const GroundingPrediction& pred, std::span<const TimeInterval> gt_segments,
                         double threshold);

struct MapReport {
  std::map<double, double> per_threshold;
  double mean = 0.0;
};

/// Mean over instances, then over thresholds.
MapReport mean_average_precision(std::span<const GroundingPrediction> preds,
                                 const GroundingTruths& gts,
                                 std::span<const double> thresholds = std::vector<double>{0.5, 0.75});

double hit_at_1(std::span<const HighlightPrediction> preds, const HighlightTruths& gts,
                double very_good_threshold = kVeryGoodThreshold);

/// Maximal runs of clips scoring >= threshold, as time intervals.
std::vector<TimeInterval> salient_segments(const SaliencyTrack& track,
                                           double threshold = kSalientThreshold);

}  // namespace tempsamp
