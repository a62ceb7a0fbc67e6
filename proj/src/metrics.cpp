#include "tempsamp/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "tempsamp/error.hpp"

namespace tempsamp {

namespace {

template <typename Map>
const auto& lookup(const Map& gts, std::int64_t id) {
  auto it = gts.find(id);
  if (it == gts.end()) {
    throw Error(ErrorCode::kMissingGroundTruth, "no ground truth for instance " + std::to_string(id));
  }
  return it->second;
}

void require_non_empty(std::size_t n) {
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "no predictions to evaluate");
}

}  // namespace

double rank1_iou(const GroundingPrediction& pred, const GroundingTruths& gts) {
  const auto& segments = lookup(gts, pred.instance_id);
  if (segments.empty()) {
    throw Error(ErrorCode::kMissingGroundTruth,
                "instance " + std::to_string(pred.instance_id) + " has no GT segments");
  }
  if (pred.ranked_intervals.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "instance " + std::to_string(pred.instance_id) + " has no predictions");
  }
  double best = 0.0;
  for (const auto& gt : segments) best = std::max(best, iou_reward(pred.ranked_intervals.front(), gt));
  return best;
}

double recall_at_1(std::span<const GroundingPrediction> preds, const GroundingTruths& gts,
                   double threshold) {
  require_non_empty(preds.size());
  std::size_t hits = 0;
  for (const auto& p : preds) hits += rank1_iou(p, gts) >= threshold ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(preds.size());
}

double mean_iou(std::span<const GroundingPrediction> preds, const GroundingTruths& gts) {
  require_non_empty(preds.size());
  double sum = 0.0;
  for (const auto& p : preds) sum += rank1_iou(p, gts);
  return sum / static_cast<double>(preds.size());
}

double average_precision(const GroundingPrediction& pred, std::span<const TimeInterval> gt_segments,
                         double threshold) {
  if (gt_segments.empty()) {
    throw Error(ErrorCode::kMissingGroundTruth,
                "instance " + std::to_string(pred.instance_id) + " has no GT segments");
  }
  const std::size_t n = pred.ranked_intervals.size();
  if (!pred.confidences || pred.confidences->size() != n) {
    throw Error(ErrorCode::kUnrankedPredictions,
                "instance " + std::to_string(pred.instance_id) + " lacks one confidence per interval");
  }
  const auto& conf = *pred.confidences;
  for (std::size_t k = 1; k < n; ++k) {
    if (conf[k] > conf[k - 1]) {
      throw Error(ErrorCode::kUnrankedPredictions,
                  "instance " + std::to_string(pred.instance_id) + " confidences increase with rank");
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (conf[a] != conf[b]) return conf[a] > conf[b];
    return pred.ranked_intervals[a].start() < pred.ranked_intervals[b].start();
  });

  std::vector<bool> matched(gt_segments.size(), false);
  const double n_gt = static_cast<double>(gt_segments.size());
  std::size_t tp = 0;
  double ap = 0.0;
  for (std::size_t rank = 0; rank < n; ++rank) {
    const TimeInterval& p = pred.ranked_intervals[order[rank]];
    std::optional<std::size_t> best;
    double best_iou = -1.0;
    for (std::size_t g = 0; g < gt_segments.size(); ++g) {
      if (matched[g]) continue;
      const double iou = iou_reward(p, gt_segments[g]);
      if (iou >= threshold && iou > best_iou) {
        best = g;
        best_iou = iou;
      }
    }
    if (!best) continue;
    matched[*best] = true;
    ++tp;
    // Recall rises by 1/n_gt at each true positive.
    ap += (1.0 / n_gt) * (static_cast<double>(tp) / static_cast<double>(rank + 1));
  }
  return ap;
}

MapReport mean_average_precision(std::span<const GroundingPrediction> preds,
                                 const GroundingTruths& gts, std::span<const double> thresholds) {
  require_non_empty(preds.size());
  if (thresholds.empty()) throw Error(ErrorCode::kInvalidArgument, "no IoU thresholds");
  MapReport report;
  for (double thr : thresholds) {
    double sum = 0.0;
    for (const auto& p : preds) sum += average_precision(p, lookup(gts, p.instance_id), thr);
    report.per_threshold[thr] = sum / static_cast<double>(preds.size());
  }
  double total = 0.0;
  for (double thr : thresholds) total += report.per_threshold[thr];
  report.mean = total / static_cast<double>(thresholds.size());
  return report;
}

double hit_at_1(std::span<const HighlightPrediction> preds, const HighlightTruths& gts,
                double very_good_threshold) {
  require_non_empty(preds.size());
  std::size_t hits = 0;
  for (const auto& p : preds) {
    const SaliencyTrack& track = lookup(gts, p.instance_id);
    if (p.ranked_clips.empty()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "instance " + std::to_string(p.instance_id) + " has no ranked clips");
    }
    for (const auto& c : p.ranked_clips) {
      if (c.clip < 0 || static_cast<std::size_t>(c.clip) >= track.num_clips()) {
        throw Error(ErrorCode::kIndexOutOfRange,
                    "instance " + std::to_string(p.instance_id) + " ranks a clip outside its track");
      }
    }
    hits += track.scores()[p.ranked_clips.front().clip] >= very_good_threshold ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(preds.size());
}

std::vector<TimeInterval> salient_segments(const SaliencyTrack& track, double threshold) {
  std::vector<TimeInterval> out;
  const auto& scores = track.scores();
  std::size_t c = 0;
  while (c < scores.size()) {
    if (scores[c] < threshold) {
      ++c;
      continue;
    }
    const std::size_t first = c;
    while (c < scores.size() && scores[c] >= threshold) ++c;
    out.push_back(TimeInterval::make(static_cast<double>(first) * track.clip_len(),
                                     static_cast<double>(c) * track.clip_len()));
  }
  return out;
}

}  // namespace tempsamp
