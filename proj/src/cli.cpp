#include "tempsamp/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "tempsamp/error.hpp"
#include "tempsamp/io.hpp"
#include "tempsamp/metrics.hpp"

namespace tempsamp {

void ExperimentConfig::validate() const {
  train.validate();
  dataset.validate();
  if (out_dir.empty()) throw Error(ErrorCode::kConfigInvalid, "output.out_dir: path required");
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kConfigInvalid, "cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfigInvalid, path.string() + ": invalid JSON (" + e.what() + ")");
  }
  if (!j.is_object()) throw Error(ErrorCode::kConfigInvalid, path.string() + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    if (key != "schema_version" && key != "train" && key != "shaping" && key != "dataset" &&
        key != "output") {
      throw Error(ErrorCode::kConfigInvalid, key + ": unknown section");
    }
  }
  auto section = [&](const char* name) { return j.contains(name) ? j[name] : json(nullptr); };

  ExperimentConfig cfg;
  cfg.train = train_config_from_json(section("train"), shaping_from_json(section("shaping")));
  cfg.dataset = dataset_params_from_json(section("dataset"));
  const json output = section("output");
  if (!output.is_null()) {
    if (!output.is_object() || (output.contains("out_dir") && !output["out_dir"].is_string())) {
      throw Error(ErrorCode::kConfigInvalid, "output.out_dir: expected a string path");
    }
    if (output.contains("out_dir")) cfg.out_dir = output["out_dir"].get<std::string>();
  }
  return cfg;
}

IntervalPolicy initial_policy(const DatasetParams& params) {
  return IntervalPolicy::make(feature_dim_for(params.num_bins), params.num_bins);
}

namespace {

class CollectSink : public StepSink {
 public:
  void on_step(const StepRecord& record) override { records.push_back(record); }
  std::vector<StepRecord> records;
};

class JsonlSink : public StepSink {
 public:
  explicit JsonlSink(const std::filesystem::path& path) : out_(path) {
    if (!out_) throw Error(ErrorCode::kInvalidArgument, "cannot write " + path.string());
  }
  void on_step(const StepRecord& record) override { out_ << to_json(record).dump() << '\n'; }

 private:
  std::ofstream out_;
};

void configure_logging() {
  static bool done = false;
  if (done) return;
  done = true;
  auto logger = spdlog::stderr_color_mt("tempsamp");
  spdlog::set_default_logger(logger);
  spdlog::level::level_enum level = spdlog::level::warn;
  if (const char* env = std::getenv("TEMPSAMP_LOG_LEVEL")) {
    const std::string name = env;
    if (name == "error") level = spdlog::level::err;
    else if (name == "warn") level = spdlog::level::warn;
    else if (name == "info") level = spdlog::level::info;
    else if (name == "debug") level = spdlog::level::debug;
  }
  spdlog::set_level(level);
}

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::kConfigInvalid:
    case ErrorCode::kSchemaMismatch:
    case ErrorCode::kMissingGroundTruth:
    case ErrorCode::kUnrankedPredictions:
    case ErrorCode::kInvalidArgument:
      return kExitValidation;
    default:
      return kExitRuntime;
  }
}

// Command-line overrides; unset options leave the file value in place.
struct Overrides {
  std::optional<std::string> out_dir;
  std::optional<std::string> strategy;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> steps;
  std::optional<std::int64_t> g;
  std::optional<double> tau, alpha1, alpha2, lambda_off, kappa, wf;

  void add_to(CLI::App& app) {
    app.add_option("--out-dir", out_dir, "Output directory");
    app.add_option("--strategy", strategy, "grpo | mixed | downscale | anchor | shape");
    app.add_option("--seed", seed, "Training seed");
    app.add_option("--steps", steps, "Steps: total N (split evenly) or 'P1,P2'");
    app.add_option("--g", g, "Group size G");
    app.add_option("--tau", tau);
    app.add_option("--alpha1", alpha1);
    app.add_option("--alpha2", alpha2);
    app.add_option("--lambda-off", lambda_off);
    app.add_option("--kappa", kappa);
    app.add_option("--wf", wf, "Format reward weight");
  }

  void apply(ExperimentConfig& cfg) const {
    if (out_dir) cfg.out_dir = *out_dir;
    if (strategy) apply_method(cfg.train, *strategy);
    if (seed) cfg.train.seed = *seed;
    if (steps) {
      const auto comma = steps->find(',');
      try {
        if (comma == std::string::npos) {
          const auto total = std::stoull(*steps);
          cfg.train.steps_phase1 = total / 2;
          cfg.train.steps_phase2 = total - total / 2;
        } else {
          cfg.train.steps_phase1 = std::stoull(steps->substr(0, comma));
          cfg.train.steps_phase2 = std::stoull(steps->substr(comma + 1));
        }
      } catch (const std::exception&) {
        throw Error(ErrorCode::kConfigInvalid, "--steps: expected N or P1,P2");
      }
    }
    if (g) {
      if (*g < 2) throw Error(ErrorCode::kConfigInvalid, "train.G: G ≥ 2 required");
      cfg.train.group_size = static_cast<std::size_t>(*g);
    }
    auto& s = cfg.train.shaping;
    if (tau) s.tau = *tau;
    if (alpha1) s.alpha1 = *alpha1;
    if (alpha2) s.alpha2 = *alpha2;
    if (lambda_off) s.lambda_off = *lambda_off;
    if (kappa) s.kappa = *kappa;
    if (wf) cfg.train.w_f = *wf;
  }
};

json experiment_json(const ExperimentConfig& cfg) {
  return {{"train", to_json(cfg.train)},
          {"dataset", to_json(cfg.dataset)},
          {"output", {{"out_dir", cfg.out_dir.string()}}}};
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kInvalidArgument, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

int cmd_train(const std::string& config_path, const Overrides& overrides, std::ostream& out) {
  ExperimentConfig cfg = load_experiment_config(config_path);
  overrides.apply(cfg);
  cfg.validate();

  std::filesystem::create_directories(cfg.out_dir);
  const auto dataset = generate_dataset(cfg.dataset);
  JsonlSink log(cfg.out_dir / "run_log.jsonl");
  StepSink* sinks[] = {&log};
  const TrainResult result = train(cfg.train, dataset, initial_policy(cfg.dataset), sinks);

  json summary = to_json(result.summary);
  summary["experiment"] = experiment_json(cfg);
  write_json(cfg.out_dir / "summary.json", summary);
  write_json(cfg.out_dir / "policy.json", to_json(result.policy));
  out << fmt::format("trained {} steps; final top-1 median {:.4f}, IQR {:.4f}; outputs in {}\n",
                     result.summary.total_steps, result.summary.final_top1.median,
                     result.summary.final_top1.iqr(), cfg.out_dir.string());
  return kExitOk;
}

int cmd_eval(const std::string& preds_path, const std::string& gt_path, const std::string& task_name,
             const std::string& report_path, double very_good, std::ostream& out) {
  const Task task = [&] {
    try {
      return parse_task(task_name);
    } catch (const Error&) {
      throw Error(ErrorCode::kInvalidArgument, "--task: expected grounding or highlight");
    }
  }();
  const auto dataset = read_dataset(gt_path);
  for (const auto& inst : dataset) {
    if (inst.task() != task) {
      throw Error(ErrorCode::kSchemaMismatch, "instance " + std::to_string(inst.instance_id()) +
                                                  " is not a " + std::string(to_string(task)) +
                                                  " instance");
    }
  }
  const Predictions preds = read_predictions(preds_path);
  const GroundingTruths gts = grounding_truths(dataset);

  json report = {{"schema_version", kIoSchemaVersion},
                 {"task", std::string(to_string(task))},
                 {"notes", "AP uses all-point precision; equal confidences rank the earlier start first"}};
  std::vector<std::pair<std::string, double>> row;
  if (task == Task::kGrounding) {
    if (preds.grounding.empty()) throw Error(ErrorCode::kSchemaMismatch, "no ranked_intervals predictions");
    report["num_instances"] = preds.grounding.size();
    for (double mu : {0.3, 0.5, 0.7}) {
      row.emplace_back(fmt::format("r1@{}", mu), recall_at_1(preds.grounding, gts, mu));
    }
    row.emplace_back("miou", mean_iou(preds.grounding, gts));
  } else {
    if (preds.highlight.empty() || preds.grounding.empty()) {
      throw Error(ErrorCode::kSchemaMismatch,
                  "highlight predictions need ranked_clips and ranked_intervals with confidences");
    }
    report["num_instances"] = preds.highlight.size();
    const MapReport map = mean_average_precision(preds.grounding, gts);
    row.emplace_back("map@0.5", map.per_threshold.at(0.5));
    row.emplace_back("map@0.75", map.per_threshold.at(0.75));
    row.emplace_back("map", map.mean);
    row.emplace_back("hit@1", hit_at_1(preds.highlight, highlight_truths(dataset), very_good));
  }
  json metrics = json::object();
  for (const auto& [k, v] : row) metrics[k] = v;
  report["metrics"] = metrics;
  write_json(report_path, report);

  std::filesystem::path csv_path = report_path;
  csv_path.replace_extension(".csv");
  std::ofstream csv(csv_path);
  if (!csv) throw Error(ErrorCode::kInvalidArgument, "cannot write " + csv_path.string());
  for (std::size_t k = 0; k < row.size(); ++k) csv << (k ? "," : "") << row[k].first;
  csv << '\n';
  for (std::size_t k = 0; k < row.size(); ++k) csv << (k ? "," : "") << fmt::format("{}", row[k].second);
  csv << '\n';

  for (const auto& [k, v] : row) out << fmt::format("{:<10} {:.6f}\n", k, v);
  return kExitOk;
}

int cmd_shape(const ShapingConfig& cfg, std::size_t resolution, std::ostream& out) {
  cfg.validate();
  out << "r,shaped\n";
  for (const auto& [r, s] : shape_table(cfg, resolution)) out << fmt::format("{},{}\n", r, s);
  return kExitOk;
}

int cmd_compare(const std::string& config_path, const Overrides& overrides,
                const std::vector<std::string>& strategies, const std::vector<std::uint64_t>& seeds,
                std::ostream& out) {
  ExperimentConfig base = load_experiment_config(config_path);
  overrides.apply(base);
  base.validate();
  if (strategies.empty() || seeds.empty()) {
    throw Error(ErrorCode::kConfigInvalid, "compare: at least one strategy and one seed required");
  }
  // Validate every combination before the first run starts.
  std::vector<ExperimentConfig> runs;
  for (const auto& method : strategies) {
    for (auto seed : seeds) {
      ExperimentConfig cfg = base;
      apply_method(cfg.train, method);
      cfg.train.seed = seed;
      cfg.validate();
      runs.push_back(std::move(cfg));
    }
  }

  std::filesystem::create_directories(base.out_dir);
  const auto dataset = generate_dataset(base.dataset);
  std::ostringstream csv;
  csv << "strategy,seed,top1_min,top1_q25,top1_median,top1_q75,top1_max,top1_iqr,mean_abs_skewness\n";
  json summaries = json::array();
  for (const auto& cfg : runs) {
    const TrainResult result = train(cfg.train, dataset, initial_policy(cfg.dataset));
    const auto& s = result.summary;
    const std::string method = method_name(cfg.train.strategy, cfg.train.inject_off_policy);
    csv << fmt::format("{},{},{},{},{},{},{},{},{}\n", method, cfg.train.seed, s.final_top1.min,
                       s.final_top1.q25, s.final_top1.median, s.final_top1.q75, s.final_top1.max,
                       s.final_top1.iqr(), s.mean_abs_skewness);
    json j = to_json(s);
    j["strategy"] = method;
    summaries.push_back(std::move(j));
    spdlog::info("compare: {} seed {} median {:.4f}", method, cfg.train.seed, s.final_top1.median);
  }
  {
    std::ofstream f(base.out_dir / "compare.csv");
    if (!f) throw Error(ErrorCode::kInvalidArgument, "cannot write compare.csv");
    f << csv.str();
  }
  write_json(base.out_dir / "compare_summary.json",
             {{"schema_version", kIoSchemaVersion},
              {"experiment", experiment_json(base)},
              {"runs", summaries}});
  out << csv.str();
  return kExitOk;
}

int cmd_gen_data(const std::optional<std::string>& config_path, const DatasetParams& flags,
                 bool has_flags_override, const std::string& out_path, std::ostream& out) {
  DatasetParams params = flags;
  if (config_path && !has_flags_override) params = load_experiment_config(*config_path).dataset;
  params.validate();
  const auto dataset = generate_dataset(params);
  write_dataset(out_path, dataset);
  out << fmt::format("wrote {} {} instances to {}\n", dataset.size(), to_string(params.task), out_path);
  return kExitOk;
}

}  // namespace

RunOutput run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto dataset = generate_dataset(cfg.dataset);
  CollectSink sink;
  StepSink* sinks[] = {&sink};
  TrainResult result = train(cfg.train, dataset, initial_policy(cfg.dataset), sinks);
  return {std::move(result), std::move(sink.records)};
}

std::vector<std::pair<double, double>> shape_table(const ShapingConfig& cfg, std::size_t resolution) {
  cfg.validate();
  if (resolution < 2) throw Error(ErrorCode::kConfigInvalid, "--resolution: at least 2 grid points");
  std::vector<double> grid;
  for (std::size_t k = 0; k < resolution; ++k) {
    grid.push_back(cfg.r_max * static_cast<double>(k) / static_cast<double>(resolution - 1));
  }
  if (std::find(grid.begin(), grid.end(), cfg.tau) == grid.end()) {
    grid.insert(std::upper_bound(grid.begin(), grid.end(), cfg.tau), cfg.tau);
  }
  std::vector<std::pair<double, double>> rows;
  for (double r : grid) rows.emplace_back(r, shape_reward(r, cfg));
  return rows;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  configure_logging();
  CLI::App app{"Mixed-policy GRPO on synthetic temporal grounding", "tempsamp"};
  app.require_subcommand(1);

  std::string config_path;
  Overrides train_over;
  auto* train_cmd = app.add_subcommand("train", "Train a policy from a JSON experiment config");
  train_cmd->add_option("--config", config_path, "Experiment config (JSON)")->required();
  train_over.add_to(*train_cmd);

  std::string preds_path, gt_path, task_name = "grounding", report_path = "report.json";
  double very_good = kVeryGoodThreshold;
  auto* eval_cmd = app.add_subcommand("eval", "Score predictions against a dataset file");
  eval_cmd->add_option("--preds", preds_path, "Predictions (JSON lines)")->required();
  eval_cmd->add_option("--gt", gt_path, "Dataset / ground truth (JSON lines)")->required();
  eval_cmd->add_option("--task", task_name, "grounding | highlight");
  eval_cmd->add_option("--report", report_path, "Report path (JSON; CSV written alongside)");
  eval_cmd->add_option("--threshold", very_good, "HIT@1 'very good' score threshold");

  ShapingConfig shaping;
  std::size_t resolution = 101;
  auto* shape_cmd = app.add_subcommand("shape", "Print the reward shaping curve as CSV");
  shape_cmd->add_option("--tau", shaping.tau);
  shape_cmd->add_option("--alpha1", shaping.alpha1);
  shape_cmd->add_option("--alpha2", shaping.alpha2);
  shape_cmd->add_option("--resolution", resolution, "Grid points on [0, r_max]");

  std::string compare_config;
  Overrides compare_over;
  std::vector<std::string> strategies{"grpo", "shape"};
  std::vector<std::uint64_t> seeds{0, 1, 2};
  auto* compare_cmd = app.add_subcommand("compare", "Train every (strategy, seed) pair and tabulate");
  compare_cmd->add_option("--config", compare_config, "Experiment config (JSON)")->required();
  compare_cmd->add_option("--strategies", strategies, "Strategies to compare")->delimiter(',');
  compare_cmd->add_option("--seeds", seeds, "Training seeds")->delimiter(',');
  compare_over.add_to(*compare_cmd);

  std::optional<std::string> gen_config;
  DatasetParams gen;
  std::string gen_task = "grounding", gen_out = "dataset.jsonl";
  auto* gen_cmd = app.add_subcommand("gen-data", "Write a synthetic dataset as JSON lines");
  gen_cmd->add_option("--config", gen_config, "Take dataset parameters from a config");
  auto* o_n = gen_cmd->add_option("--num-instances", gen.num_instances);
  auto* o_b = gen_cmd->add_option("--bins", gen.num_bins);
  auto* o_noise = gen_cmd->add_option("--noise", gen.obs_noise);
  auto* o_task = gen_cmd->add_option("--task", gen_task);
  auto* o_seed = gen_cmd->add_option("--seed", gen.seed);
  gen_cmd->add_option("--out", gen_out, "Output path");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }

  try {
    if (train_cmd->parsed()) return cmd_train(config_path, train_over, out);
    if (eval_cmd->parsed()) {
      return cmd_eval(preds_path, gt_path, task_name, report_path, very_good, out);
    }
    if (shape_cmd->parsed()) return cmd_shape(shaping, resolution, out);
    if (compare_cmd->parsed()) {
      return cmd_compare(compare_config, compare_over, strategies, seeds, out);
    }
    if (gen_cmd->parsed()) {
      const bool flagged = o_n->count() + o_b->count() + o_noise->count() + o_task->count() +
                           o_seed->count() > 0;
      if (o_task->count() > 0 || !gen_config) gen.task = parse_task(gen_task);
      return cmd_gen_data(gen_config, gen, flagged, gen_out, out);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitValidation;
}

}  // namespace tempsamp
