#pragma once

// JSON / JSON-lines formats.
//
//   dataset line:    {"instance_id", "duration", "observation": [...], "gt": GT}
//     GT grounding:  {"type": "interval", "start", "end"}
//     GT highlight:  {"type": "highlight", "clip_len", "scores": [...], "salient": [...]}
//   prediction line: {"instance_id", "ranked_intervals": [[s, e], ...], "confidences": [...],
//                     "ranked_clips": [[clip, score], ...]}
//   policy:          {"schema_version", "num_bins", "weights", "format_weights",
//                     "ref_weights", "ref_format_weights"}   (matrices as arrays of rows)
//   run log line:    {"schema_version", "step", "phase", "strategy", "top1_rewards",
//                     "skewness", "kl", "objective", ...}

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "tempsamp/environment.hpp"
#include "tempsamp/metrics.hpp"
#include "tempsamp/policy.hpp"
#include "tempsamp/trainer.hpp"

namespace tempsamp {

using json = nlohmann::json;

inline constexpr int kIoSchemaVersion = 1;

json to_json(const TaskInstance& instance);
TaskInstance instance_from_json(const json& j);

void write_dataset(const std::filesystem::path& path, const std::vector<TaskInstance>& dataset);
std::vector<TaskInstance> read_dataset(const std::filesystem::path& path);

json to_json(const IntervalPolicy& policy);
IntervalPolicy policy_from_json(const json& j);

/// "grpo" (no injection), "mixed", "downscale", "anchor", "shape".
std::string method_name(Strategy strategy, bool inject_off_policy);
/// Sets strategy and injection from a method name; throws kConfigInvalid.
void apply_method(TrainConfig& cfg, const std::string& method);

json to_json(const ShapingConfig& cfg);
ShapingConfig shaping_from_json(const json& j);
json to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const json& j, const ShapingConfig& shaping);
json to_json(const DatasetParams& params);
DatasetParams dataset_params_from_json(const json& j);

json to_json(const StepRecord& record);
json to_json(const Quartiles& q);
json to_json(const RunSummary& summary);

struct Predictions {
  std::vector<GroundingPrediction> grounding;
  std::vector<HighlightPrediction> highlight;
};
/// Reads a prediction file; each line must carry ranked_intervals, ranked_clips, or both.
Predictions read_predictions(const std::filesystem::path& path);
json to_json(const GroundingPrediction& pred);
json to_json(const HighlightPrediction& pred);

/// Dataset lines reduced to metric ground truth.
GroundingTruths grounding_truths(const std::vector<TaskInstance>& dataset);
HighlightTruths highlight_truths(const std::vector<TaskInstance>& dataset);

/// Writes `lines` JSON documents one per line.
void write_jsonl(const std::filesystem::path& path, const std::vector<json>& lines);
std::vector<json> read_jsonl(const std::filesystem::path& path);

}  // namespace tempsamp
