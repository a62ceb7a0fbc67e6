#include "tempsamp/io.hpp"

#include <fstream>
#include <set>

#include "tempsamp/error.hpp"

namespace tempsamp {

namespace {

template <typename T>
T field(const json& j, const std::string& key, const std::string& ctx,
        ErrorCode code = ErrorCode::kSchemaMismatch) {
  if (!j.is_object() || !j.contains(key)) throw Error(code, ctx + "." + key + ": missing field");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(code, ctx + "." + key + ": wrong type");
  }
}

template <typename T>
T field_or(const json& j, const std::string& key, const std::string& ctx, T fallback,
           ErrorCode code = ErrorCode::kConfigInvalid) {
  if (!j.contains(key)) return fallback;
  return field<T>(j, key, ctx, code);
}

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& ctx) {
  if (!j.is_object()) throw Error(ErrorCode::kConfigInvalid, ctx + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw Error(ErrorCode::kConfigInvalid, ctx + "." + key + ": unknown field");
  }
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j, const std::string& ctx) {
  auto rows = field<std::vector<std::vector<double>>>(json{{"m", j}}, "m", ctx);
  if (rows.empty() || rows.front().empty()) throw Error(ErrorCode::kSchemaMismatch, ctx + ": empty matrix");
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != m.cols()) throw Error(ErrorCode::kSchemaMismatch, ctx + ": ragged matrix");
    for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) = rows[r][c];
  }
  return m;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kInvalidArgument, "cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kInvalidArgument, "cannot write " + path.string());
  return out;
}

}  // namespace

json to_json(const TaskInstance& instance) {
  json gt;
  if (const auto* interval = std::get_if<TimeInterval>(&instance.gt())) {
    gt = {{"type", "interval"}, {"start", interval->start()}, {"end", interval->end()}};
  } else {
    const auto& hl = std::get<HighlightGroundTruth>(instance.gt());
    gt = {{"type", "highlight"},
          {"clip_len", hl.track.clip_len()},
          {"scores", hl.track.scores()},
          {"salient", std::vector<int>(hl.salient.begin(), hl.salient.end())}};
  }
  return {{"instance_id", instance.instance_id()},
          {"duration", instance.duration()},
          {"observation", instance.observation()},
          {"gt", gt}};
}

TaskInstance instance_from_json(const json& j) {
  const auto id = field<std::int64_t>(j, "instance_id", "instance");
  const std::string ctx = "instance " + std::to_string(id);
  const auto duration = field<double>(j, "duration", ctx);
  auto observation = field<std::vector<double>>(j, "observation", ctx);
  const json gt = field<json>(j, "gt", ctx);
  const auto type = field<std::string>(gt, "type", ctx + ".gt");
  try {
    if (type == "interval") {
      return TaskInstance::make(id, duration, std::move(observation),
                                TimeInterval::make(field<double>(gt, "start", ctx + ".gt"),
                                                   field<double>(gt, "end", ctx + ".gt")));
    }
    if (type == "highlight") {
      auto track = SaliencyTrack::make(field<double>(gt, "clip_len", ctx + ".gt"),
                                       field<std::vector<double>>(gt, "scores", ctx + ".gt"));
      ClipSet salient;
      if (gt.contains("salient")) {
        for (int c : field<std::vector<int>>(gt, "salient", ctx + ".gt")) salient.insert(c);
      } else {
        salient = salient_clips(track);
      }
      return TaskInstance::make(id, duration, std::move(observation),
                                HighlightGroundTruth{std::move(track), std::move(salient)});
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kSchemaMismatch) throw;
    throw Error(ErrorCode::kSchemaMismatch, ctx + ": " + e.what());
  }
  throw Error(ErrorCode::kSchemaMismatch, ctx + ".gt.type: unknown type '" + type + "'");
}

void write_jsonl(const std::filesystem::path& path, const std::vector<json>& lines) {
  auto out = open_out(path);
  for (const auto& line : lines) out << line.dump() << '\n';
}

std::vector<json> read_jsonl(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::vector<json> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::exception&) {
      throw Error(ErrorCode::kSchemaMismatch,
                  path.string() + ":" + std::to_string(lineno) + ": invalid JSON");
    }
  }
  return out;
}

void write_dataset(const std::filesystem::path& path, const std::vector<TaskInstance>& dataset) {
  std::vector<json> lines;
  lines.reserve(dataset.size());
  for (const auto& inst : dataset) lines.push_back(to_json(inst));
  write_jsonl(path, lines);
}

std::vector<TaskInstance> read_dataset(const std::filesystem::path& path) {
  std::vector<TaskInstance> out;
  for (const auto& j : read_jsonl(path)) out.push_back(instance_from_json(j));
  return out;
}

json to_json(const IntervalPolicy& policy) {
  json j = {{"schema_version", kIoSchemaVersion},
            {"num_bins", policy.num_bins()},
            {"weights", matrix_json(policy.weights())},
            {"format_weights", matrix_json(policy.format_weights())}};
  j["ref_weights"] = policy.ref_weights() ? matrix_json(*policy.ref_weights()) : json(nullptr);
  j["ref_format_weights"] =
      policy.ref_format_weights() ? matrix_json(*policy.ref_format_weights()) : json(nullptr);
  return j;
}

IntervalPolicy policy_from_json(const json& j) {
  const auto num_bins = field<std::size_t>(j, "num_bins", "policy");
  Matrix weights = matrix_from_json(field<json>(j, "weights", "policy"), "policy.weights");
  Matrix format = matrix_from_json(field<json>(j, "format_weights", "policy"), "policy.format_weights");
  std::optional<Matrix> ref, ref_format;
  if (j.contains("ref_weights") && !j["ref_weights"].is_null()) {
    ref = matrix_from_json(j["ref_weights"], "policy.ref_weights");
  }
  if (j.contains("ref_format_weights") && !j["ref_format_weights"].is_null()) {
    ref_format = matrix_from_json(j["ref_format_weights"], "policy.ref_format_weights");
  }
  return IntervalPolicy::from_weights(num_bins, std::move(weights), std::move(format), std::move(ref),
                                      std::move(ref_format));
}

std::string method_name(Strategy strategy, bool inject_off_policy) {
  if (!inject_off_policy) return strategy == Strategy::kNone ? "grpo" : "grpo+" + std::string(to_string(strategy));
  return strategy == Strategy::kNone ? "mixed" : std::string(to_string(strategy));
}

void apply_method(TrainConfig& cfg, const std::string& method) {
  if (method == "grpo") {
    cfg.strategy = Strategy::kNone;
    cfg.inject_off_policy = false;
  } else if (method == "mixed" || method == "none") {
    cfg.strategy = Strategy::kNone;
    cfg.inject_off_policy = true;
  } else if (method == "downscale" || method == "anchor" || method == "shape" ||
             method == "nonlinear_shape") {
    cfg.strategy = parse_strategy(method);
    cfg.inject_off_policy = true;
  } else if (method == "grpo+shape") {
    cfg.strategy = Strategy::kNonLinearShape;
    cfg.inject_off_policy = false;
  } else {
    throw Error(ErrorCode::kConfigInvalid,
                "train.strategy: unknown strategy '" + method +
                    "' (expected grpo, mixed, downscale, anchor, shape)");
  }
}

json to_json(const ShapingConfig& cfg) {
  return {{"tau", cfg.tau},         {"alpha1", cfg.alpha1}, {"alpha2", cfg.alpha2},
          {"lambda_off", cfg.lambda_off}, {"kappa", cfg.kappa},   {"r_max", cfg.r_max},
          {"sigma_floor", cfg.sigma_floor}};
}

ShapingConfig shaping_from_json(const json& j) {
  ShapingConfig cfg;
  if (j.is_null()) return cfg;
  reject_unknown(j, {"tau", "alpha1", "alpha2", "lambda_off", "kappa", "r_max", "sigma_floor"},
                 "shaping");
  cfg.tau = field_or(j, "tau", "shaping", cfg.tau);
  cfg.alpha1 = field_or(j, "alpha1", "shaping", cfg.alpha1);
  cfg.alpha2 = field_or(j, "alpha2", "shaping", cfg.alpha2);
  cfg.lambda_off = field_or(j, "lambda_off", "shaping", cfg.lambda_off);
  cfg.kappa = field_or(j, "kappa", "shaping", cfg.kappa);
  cfg.r_max = field_or(j, "r_max", "shaping", cfg.r_max);
  cfg.sigma_floor = field_or(j, "sigma_floor", "shaping", cfg.sigma_floor);
  return cfg;
}

json to_json(const TrainConfig& cfg) {
  return {{"G", cfg.group_size},
          {"batch_size", cfg.batch_size},
          {"clip_epsilon", cfg.clip_epsilon},
          {"kl_beta", cfg.kl_beta},
          {"learning_rate", cfg.learning_rate},
          {"steps_per_phase", {cfg.steps_phase1, cfg.steps_phase2}},
          {"strategy", method_name(cfg.strategy, cfg.inject_off_policy)},
          {"w_f", cfg.w_f},
          {"seed", cfg.seed},
          {"shaping", to_json(cfg.shaping)}};
}

TrainConfig train_config_from_json(const json& j, const ShapingConfig& shaping) {
  TrainConfig cfg;
  cfg.shaping = shaping;
  if (j.is_null()) return cfg;
  reject_unknown(j, {"G", "batch_size", "clip_epsilon", "kl_beta", "learning_rate",
                     "steps_per_phase", "strategy", "w_f", "seed"},
                 "train");
  // Signed read so that negative values surface as invariant violations.
  const auto g = field_or<std::int64_t>(j, "G", "train", 4);
  if (g < 2) throw Error(ErrorCode::kConfigInvalid, "train.G: G ≥ 2 required");
  cfg.group_size = static_cast<std::size_t>(g);
  const auto batch = field_or<std::int64_t>(j, "batch_size", "train", 8);
  if (batch < 1) throw Error(ErrorCode::kConfigInvalid, "train.batch_size: batch_size ≥ 1 required");
  cfg.batch_size = static_cast<std::size_t>(batch);
  cfg.clip_epsilon = field_or(j, "clip_epsilon", "train", cfg.clip_epsilon);
  cfg.kl_beta = field_or(j, "kl_beta", "train", cfg.kl_beta);
  cfg.learning_rate = field_or(j, "learning_rate", "train", cfg.learning_rate);
  if (j.contains("steps_per_phase")) {
    const auto steps = field<std::vector<std::int64_t>>(j, "steps_per_phase", "train",
                                                        ErrorCode::kConfigInvalid);
    if (steps.size() != 2 || steps[0] < 0 || steps[1] < 0) {
      throw Error(ErrorCode::kConfigInvalid,
                  "train.steps_per_phase: two non-negative step counts required");
    }
    cfg.steps_phase1 = static_cast<std::size_t>(steps[0]);
    cfg.steps_phase2 = static_cast<std::size_t>(steps[1]);
  }
  if (j.contains("strategy")) {
    apply_method(cfg, field<std::string>(j, "strategy", "train", ErrorCode::kConfigInvalid));
  }
  cfg.w_f = field_or(j, "w_f", "train", cfg.w_f);
  cfg.seed = field_or<std::uint64_t>(j, "seed", "train", cfg.seed);
  return cfg;
}

json to_json(const DatasetParams& params) {
  return {{"num_instances", params.num_instances},
          {"num_bins", params.num_bins},
          {"obs_noise", params.obs_noise},
          {"task", std::string(to_string(params.task))},
          {"seed", params.seed},
          {"min_bin_seconds", params.min_bin_seconds},
          {"max_bin_seconds", params.max_bin_seconds}};
}

DatasetParams dataset_params_from_json(const json& j) {
  DatasetParams p;
  if (j.is_null()) return p;
  reject_unknown(j, {"num_instances", "num_bins", "obs_noise", "task", "seed", "min_bin_seconds",
                     "max_bin_seconds"},
                 "dataset");
  const auto n = field_or<std::int64_t>(j, "num_instances", "dataset", 256);
  if (n < 1) throw Error(ErrorCode::kConfigInvalid, "dataset.num_instances: num_instances ≥ 1 required");
  p.num_instances = static_cast<std::size_t>(n);
  const auto bins = field_or<std::int64_t>(j, "num_bins", "dataset", 16);
  if (bins < 2) throw Error(ErrorCode::kConfigInvalid, "dataset.num_bins: N ≥ 2 required");
  p.num_bins = static_cast<std::size_t>(bins);
  p.obs_noise = field_or(j, "obs_noise", "dataset", p.obs_noise);
  if (j.contains("task")) {
    try {
      p.task = parse_task(field<std::string>(j, "task", "dataset", ErrorCode::kConfigInvalid));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kConfigInvalid) throw;
      throw Error(ErrorCode::kConfigInvalid, "dataset.task: expected grounding or highlight");
    }
  }
  p.seed = field_or<std::uint64_t>(j, "seed", "dataset", p.seed);
  p.min_bin_seconds = field_or(j, "min_bin_seconds", "dataset", p.min_bin_seconds);
  p.max_bin_seconds = field_or(j, "max_bin_seconds", "dataset", p.max_bin_seconds);
  return p;
}

json to_json(const StepRecord& record) {
  json groups = json::array();
  for (const auto& g : record.groups) {
    groups.push_back({{"instance_id", g.instance_id},
                      {"rewards", g.rewards},
                      {"task_rewards", g.task_rewards},
                      {"format_rewards", g.format_rewards},
                      {"advantages", g.advantages},
                      {"degenerate", g.degenerate},
                      {"anchor_nonpositive", g.anchor_nonpositive}});
  }
  return {{"schema_version", kIoSchemaVersion},
          {"step", record.step},
          {"phase", std::string(to_string(record.phase))},
          {"strategy", method_name(record.strategy, record.inject_off_policy)},
          {"top1_rewards", record.top1_rewards()},
          {"skewness", record.skewness ? json(*record.skewness) : json(nullptr)},
          {"kl", record.kl},
          {"objective", record.objective},
          {"groups", groups}};
}

json to_json(const Quartiles& q) {
  return {{"min", q.min}, {"q25", q.q25}, {"median", q.median},
          {"q75", q.q75}, {"max", q.max}, {"iqr", q.iqr()}};
}

namespace {
json phase_json(const PhaseSummary& p) {
  return {{"steps", p.steps},
          {"mean_abs_skewness", p.mean_abs_skewness},
          {"skewness_steps", p.skewness_steps},
          {"mean_top1_reward", p.mean_top1_reward},
          {"anchor_nonpositive", p.anchor_nonpositive},
          {"degenerate_groups", p.degenerate_groups}};
}
}  // namespace

json to_json(const RunSummary& summary) {
  return {{"schema_version", RunSummary::kSchemaVersion},
          {"config", to_json(summary.config)},
          {"total_steps", summary.total_steps},
          {"phase1", phase_json(summary.phase1)},
          {"phase2", phase_json(summary.phase2)},
          {"final_window_steps", summary.final_window_steps},
          {"final_top1_reward", to_json(summary.final_top1)},
          {"mean_abs_skewness", summary.mean_abs_skewness}};
}

json to_json(const GroundingPrediction& pred) {
  json intervals = json::array();
  for (const auto& iv : pred.ranked_intervals) intervals.push_back({iv.start(), iv.end()});
  json j = {{"instance_id", pred.instance_id}, {"ranked_intervals", intervals}};
  if (pred.confidences) j["confidences"] = *pred.confidences;
  return j;
}

json to_json(const HighlightPrediction& pred) {
  json clips = json::array();
  for (const auto& c : pred.ranked_clips) clips.push_back({c.clip, c.score});
  return {{"instance_id", pred.instance_id}, {"ranked_clips", clips}};
}

Predictions read_predictions(const std::filesystem::path& path) {
  Predictions out;
  for (const auto& j : read_jsonl(path)) {
    const auto id = field<std::int64_t>(j, "instance_id", "prediction");
    const std::string ctx = "prediction " + std::to_string(id);
    bool any = false;
    if (j.contains("ranked_intervals")) {
      any = true;
      GroundingPrediction p;
      p.instance_id = id;
      for (const auto& pair : field<std::vector<std::vector<double>>>(j, "ranked_intervals", ctx)) {
        if (pair.size() != 2) {
          throw Error(ErrorCode::kSchemaMismatch, ctx + ".ranked_intervals: expected [start, end]");
        }
        try {
          p.ranked_intervals.push_back(TimeInterval::make(pair[0], pair[1]));
        } catch (const Error& e) {
          throw Error(ErrorCode::kSchemaMismatch, ctx + ".ranked_intervals: " + e.what());
        }
      }
      if (j.contains("confidences")) p.confidences = field<std::vector<double>>(j, "confidences", ctx);
      out.grounding.push_back(std::move(p));
    }
    if (j.contains("ranked_clips")) {
      any = true;
      HighlightPrediction p;
      p.instance_id = id;
      for (const auto& pair : field<std::vector<std::vector<double>>>(j, "ranked_clips", ctx)) {
        if (pair.size() != 2) {
          throw Error(ErrorCode::kSchemaMismatch, ctx + ".ranked_clips: expected [clip, score]");
        }
        p.ranked_clips.push_back({static_cast<int>(pair[0]), pair[1]});
      }
      out.highlight.push_back(std::move(p));
    }
    if (!any) {
      throw Error(ErrorCode::kSchemaMismatch, ctx + ": needs ranked_intervals or ranked_clips");
    }
  }
  return out;
}

GroundingTruths grounding_truths(const std::vector<TaskInstance>& dataset) {
  GroundingTruths out;
  for (const auto& inst : dataset) {
    if (const auto* iv = std::get_if<TimeInterval>(&inst.gt())) {
      out[inst.instance_id()] = {*iv};
    } else {
      out[inst.instance_id()] = salient_segments(std::get<HighlightGroundTruth>(inst.gt()).track);
    }
  }
  return out;
}

HighlightTruths highlight_truths(const std::vector<TaskInstance>& dataset) {
  HighlightTruths out;
  for (const auto& inst : dataset) {
    if (const auto* hl = std::get_if<HighlightGroundTruth>(&inst.gt())) {
      out.emplace(inst.instance_id(), hl->track);
    }
  }
  return out;
}

}  // namespace tempsamp
