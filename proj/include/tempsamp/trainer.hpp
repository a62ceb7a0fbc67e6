#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "tempsamp/advantage.hpp"
#include "tempsamp/environment.hpp"
#include "tempsamp/policy.hpp"
#include "tempsamp/rewards.hpp"

namespace tempsamp {

struct TrainConfig {
  std::size_t group_size = 4;
  std::size_t batch_size = 8;
  double clip_epsilon = 0.2;
  double kl_beta = 0.04;
  double learning_rate = 0.05;
  /// Phase 1 (answer only) and phase 2 (think + answer, format reward on).
  std::size_t steps_phase1 = 1000;
  std::size_t steps_phase2 = 1000;
  Strategy strategy = Strategy::kNonLinearShape;
  /// Off: every group member is sampled from the policy (plain GRPO).
  bool inject_off_policy = true;
  ShapingConfig shaping;
  double w_f = kDefaultFormatWeight;
  std::uint64_t seed = 0;

  /// Throws kConfigInvalid naming the offending field.
  void validate() const;
  std::size_t total_steps() const noexcept { return steps_phase1 + steps_phase2; }
};

/// Task reward from the answer (either schema's grammar is accepted for
/// extraction), format reward from the phase schema, combined per phase.
RewardBreakdown evaluate_solution(std::string_view raw_text, const TaskInstance& instance,
                                  Schema phase, double w_f);

struct ObjectiveResult {
  double objective = 0.0;
  double kl = 0.0;
  PolicyGradient gradient;
};

/// Clipped surrogate minus beta * KL for one group:
///   (1/G) sum_i min(rho_i A_i, clip(rho_i, 1-eps, 1+eps) A_i) - beta KL(pi || pi_ref)
/// `advantages` and `old_log_probs` align with `sample.solutions`; the off-policy
/// entry is scored through the action its ground truth renders.
ObjectiveResult grpo_objective(const GroupSample& sample, std::span<const double> observation,
                               std::span<const double> advantages, const IntervalPolicy& policy,
                               std::span<const double> old_log_probs, double clip_epsilon,
                               double kl_beta);

/// Actions of every solution in the group, off-policy last.
std::vector<ActionPair> group_actions(const GroupSample& sample);

struct GroupRecord {
  std::int64_t instance_id = 0;
  std::vector<double> rewards;  // combined totals fed to the advantage estimator
  std::vector<double> task_rewards;
  std::vector<double> format_rewards;
  std::vector<double> advantages;
  bool degenerate = false;
  bool anchor_nonpositive = false;
  /// Highest on-policy task reward.
  double top1_reward = 0.0;
};

struct StepRecord {
  std::size_t step = 0;
  Schema phase = Schema::kAnswerOnly;
  Strategy strategy = Strategy::kNone;
  bool inject_off_policy = true;
  std::vector<GroupRecord> groups;
  /// Over the pooled advantages of the batch; empty when they are all tied.
  std::optional<double> skewness;
  double kl = 0.0;
  double objective = 0.0;

  std::vector<double> top1_rewards() const;
};

/// One sampled batch, one gradient-ascent update (pi_old = pi_theta).
/// `rng` supplies batch indices and per-group sampling seeds.
StepRecord train_step(IntervalPolicy& policy, std::span<const TaskInstance> dataset,
                      const TrainConfig& cfg, Schema phase, std::size_t step, std::mt19937_64& rng);

class StepSink {
 public:
  virtual ~StepSink() = default;
  virtual void on_step(const StepRecord& record) = 0;
};

struct Quartiles {
  double min = 0.0;
  double q25 = 0.0;
  double median = 0.0;
  double q75 = 0.0;
  double max = 0.0;
  double iqr() const noexcept { return q75 - q25; }
};

/// Linear-interpolation quantile (Hyndman-Fan type 7) of unsorted values.
double quantile(std::vector<double> values, double q);
Quartiles quartiles(const std::vector<double>& values);

struct PhaseSummary {
  std::size_t steps = 0;
  double mean_abs_skewness = 0.0;
  std::size_t skewness_steps = 0;
  double mean_top1_reward = 0.0;
  std::size_t anchor_nonpositive = 0;
  std::size_t degenerate_groups = 0;
};

struct RunSummary {
  static constexpr int kSchemaVersion = 1;
  TrainConfig config;
  std::size_t total_steps = 0;
  PhaseSummary phase1;
  PhaseSummary phase2;
  /// Top-1 task rewards pooled over the final 20% of steps.
  Quartiles final_top1;
  std::size_t final_window_steps = 0;
  double mean_abs_skewness = 0.0;
};

struct TrainResult {
  IntervalPolicy policy;
  RunSummary summary;
};

/// Phase 1 then phase 2; the reference is re-snapshotted at the start of each
/// non-empty phase. Throws kConfigInvalid for bad configs or an empty dataset.
TrainResult train(const TrainConfig& cfg, std::span<const TaskInstance> dataset,
                  IntervalPolicy initial, std::span<StepSink* const> sinks = {});

}  // namespace tempsamp
