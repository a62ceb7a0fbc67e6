#include "tempsamp/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <spdlog/spdlog.h>

#include "tempsamp/error.hpp"

namespace tempsamp {

void TrainConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::kConfigInvalid, msg); };
  if (group_size < 2) fail("train.G: G ≥ 2 required");
  if (inject_off_policy && (strategy == Strategy::kAnchor) && group_size < 3) {
    fail("train.G: G ≥ 3 required for anchoring (two on-policy samples)");
  }
  if (batch_size < 1) fail("train.batch_size: batch_size ≥ 1 required");
  if (!(clip_epsilon > 0.0 && clip_epsilon < 1.0)) fail("train.clip_epsilon: ε in (0, 1) required");
  if (!(kl_beta >= 0.0) || !std::isfinite(kl_beta)) fail("train.kl_beta: β ≥ 0 required");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    fail("train.learning_rate: learning_rate > 0 required");
  }
  if (!(w_f >= 0.0) || !std::isfinite(w_f)) fail("train.w_f: w_f ≥ 0 required");
  if (!inject_off_policy && (strategy == Strategy::kDownscale || strategy == Strategy::kAnchor)) {
    fail("train.strategy: downscale and anchor need off-policy injection");
  }
  shaping.validate();
}

RewardBreakdown evaluate_solution(std::string_view raw_text, const TaskInstance& instance,
                                  Schema phase, double w_f) {
  const Task task = instance.task();
  ParsedOutput parsed = parse_output(raw_text, Schema::kThinkAnswer, task);
  if (!parsed.well_formed) parsed = parse_output(raw_text, Schema::kAnswerOnly, task);

  double task_reward = 0.0;
  std::map<std::string, double> components;
  if (parsed.answer) {
    if (const auto* gt = std::get_if<TimeInterval>(&instance.gt())) {
      if (const auto* pred = std::get_if<TimeInterval>(&*parsed.answer)) {
        task_reward = iou_reward(*pred, *gt);
        components["iou"] = task_reward;
      }
    } else if (const auto* pred = std::get_if<HighlightAnswer>(&*parsed.answer)) {
      const auto& gt = std::get<HighlightGroundTruth>(instance.gt());
      task_reward = highlight_reward(*pred, gt.track, gt.salient);
      components["r_ts"] = task_reward;
    }
  }
  const double fmt = format_reward(raw_text, phase, task);
  RewardBreakdown out = combine_rewards(task_reward, fmt, phase, w_f);
  out.components = std::move(components);
  return out;
}

std::vector<ActionPair> group_actions(const GroupSample& sample) {
  std::vector<ActionPair> actions = sample.actions;
  if (sample.off_policy_action) actions.push_back(*sample.off_policy_action);
  return actions;
}

ObjectiveResult grpo_objective(const GroupSample& sample, std::span<const double> observation,
                               std::span<const double> advantages, const IntervalPolicy& policy,
                               std::span<const double> old_log_probs, double clip_epsilon,
                               double kl_beta) {
  const std::vector<ActionPair> actions = group_actions(sample);
  const std::size_t g = actions.size();
  if (advantages.size() != g || old_log_probs.size() != g || sample.solutions.size() != g) {
    throw Error(ErrorCode::kDimensionMismatch, "advantages, log-probs and solutions must align");
  }
  const double inv_g = 1.0 / static_cast<double>(g);

  ObjectiveResult out;
  out.gradient = policy.zero_gradient();
  double surrogate = 0.0;
  for (std::size_t i = 0; i < g; ++i) {
    const double a = advantages[i];
    const double ratio = std::exp(policy.log_prob(observation, actions[i]) - old_log_probs[i]);
    const double unclipped = ratio * a;
    const double clipped = std::clamp(ratio, 1.0 - clip_epsilon, 1.0 + clip_epsilon) * a;
    surrogate += std::min(unclipped, clipped);
    // The clipped branch is flat in theta; only the unclipped branch carries gradient.
    if (unclipped <= clipped && a != 0.0) {
      out.gradient.add_scaled(policy.grad_log_prob(observation, actions[i]), unclipped * inv_g);
    }
  }
  out.kl = kl_beta > 0.0 || policy.has_reference() ? policy.kl_to_ref(observation) : 0.0;
  out.objective = surrogate * inv_g - kl_beta * out.kl;
  if (kl_beta > 0.0) out.gradient.add_scaled(policy.grad_kl_to_ref(observation), -kl_beta);
  return out;
}

std::vector<double> StepRecord::top1_rewards() const {
  std::vector<double> out;
  out.reserve(groups.size());
  for (const auto& g : groups) out.push_back(g.top1_reward);
  return out;
}

StepRecord train_step(IntervalPolicy& policy, std::span<const TaskInstance> dataset,
                      const TrainConfig& cfg, Schema phase, std::size_t step,
                      std::mt19937_64& rng) {
  if (dataset.empty()) throw Error(ErrorCode::kConfigInvalid, "dataset: non-empty dataset required");
  if (!policy.has_reference()) throw Error(ErrorCode::kMissingReference, "no reference snapshot");

  StepRecord record;
  record.step = step;
  record.phase = phase;
  record.strategy = cfg.strategy;
  record.inject_off_policy = cfg.inject_off_policy;

  std::uniform_int_distribution<std::size_t> pick(0, dataset.size() - 1);
  std::vector<std::size_t> batch(cfg.batch_size);
  std::vector<std::uint64_t> seeds(cfg.batch_size);
  for (std::size_t b = 0; b < cfg.batch_size; ++b) {
    batch[b] = pick(rng);
    seeds[b] = rng();
  }

  const SampleOptions options{cfg.group_size, phase, cfg.inject_off_policy};
  const double inv_b = 1.0 / static_cast<double>(cfg.batch_size);
  PolicyGradient total = policy.zero_gradient();
  std::vector<double> pooled;

  for (std::size_t b = 0; b < cfg.batch_size; ++b) {
    const TaskInstance& instance = dataset[batch[b]];
    const auto& obs = instance.observation();
    const GroupSample sample = sample_solutions(policy, instance, options, seeds[b]);

    GroupRecord group;
    group.instance_id = instance.instance_id();
    std::vector<Source> sources;
    for (const auto& sol : sample.solutions) {
      const RewardBreakdown r = evaluate_solution(sol.raw_text(), instance, phase, cfg.w_f);
      group.rewards.push_back(r.total);
      group.task_rewards.push_back(r.task_reward);
      group.format_rewards.push_back(r.format_reward);
      sources.push_back(sol.source());
      if (sol.source() == Source::kOnPolicy) {
        group.top1_reward = std::max(group.top1_reward, r.task_reward);
      }
    }

    const RewardGroup rewards = RewardGroup::make(group.rewards, sources);
    const AdvantageVector adv = compute_advantages(rewards, cfg.strategy, cfg.shaping);
    group.advantages = adv.values;
    group.degenerate = adv.degenerate;
    group.anchor_nonpositive = adv.anchor_nonpositive;

    // pi_old == pi_theta: the on-policy log-probs were recorded by the sampler
    // from this same policy; the off-policy entry is evaluated here.
    std::vector<double> old_log_probs = sample.log_probs;
    if (sample.off_policy_action) {
      old_log_probs.push_back(policy.log_prob(obs, *sample.off_policy_action));
    }
    const ObjectiveResult obj = grpo_objective(sample, obs, adv.values, policy, old_log_probs,
                                               cfg.clip_epsilon, cfg.kl_beta);
    total.add_scaled(obj.gradient, inv_b);
    record.objective += obj.objective * inv_b;
    record.kl += obj.kl * inv_b;

    pooled.insert(pooled.end(), adv.values.begin(), adv.values.end());
    record.groups.push_back(std::move(group));
  }

  try {
    record.skewness = sample_skewness(pooled, cfg.shaping.sigma_floor);
  } catch (const Error&) {
    record.skewness.reset();
  }

  policy.apply(total, cfg.learning_rate);
  return record;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw Error(ErrorCode::kInvalidArgument, "quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

Quartiles quartiles(const std::vector<double>& values) {
  return {quantile(values, 0.0), quantile(values, 0.25), quantile(values, 0.5),
          quantile(values, 0.75), quantile(values, 1.0)};
}

TrainResult train(const TrainConfig& cfg, std::span<const TaskInstance> dataset,
                  IntervalPolicy initial, std::span<StepSink* const> sinks) {
  cfg.validate();
  if (dataset.empty()) throw Error(ErrorCode::kConfigInvalid, "dataset: non-empty dataset required");
  for (const auto& inst : dataset) {
    if (inst.observation().size() != initial.feature_dim()) {
      throw Error(ErrorCode::kDimensionMismatch, "dataset observations do not match the policy");
    }
  }

  TrainResult result{std::move(initial), {}};
  RunSummary& summary = result.summary;
  summary.config = cfg;
  summary.total_steps = cfg.total_steps();

  const std::size_t window =
      static_cast<std::size_t>(std::ceil(0.2 * static_cast<double>(cfg.total_steps())));
  const std::size_t window_start = cfg.total_steps() - window;
  summary.final_window_steps = window;
  std::vector<double> final_top1;
  double abs_skew_sum = 0.0;
  std::size_t abs_skew_n = 0;

  std::mt19937_64 rng(cfg.seed);
  std::size_t step = 0;
  for (Schema phase : {Schema::kAnswerOnly, Schema::kThinkAnswer}) {
    const bool first = phase == Schema::kAnswerOnly;
    const std::size_t n_steps = first ? cfg.steps_phase1 : cfg.steps_phase2;
    PhaseSummary& ps = first ? summary.phase1 : summary.phase2;
    if (n_steps == 0) continue;
    result.policy.snapshot_reference();
    spdlog::info("phase {} ({}): {} steps, strategy {}, off-policy injection {}", first ? 1 : 2,
                 to_string(phase), n_steps, to_string(cfg.strategy),
                 cfg.inject_off_policy ? "on" : "off");

    double top1_sum = 0.0;
    std::size_t top1_n = 0;
    for (std::size_t k = 0; k < n_steps; ++k, ++step) {
      const StepRecord rec = train_step(result.policy, dataset, cfg, phase, step, rng);
      for (auto* sink : sinks) sink->on_step(rec);

      ++ps.steps;
      if (rec.skewness) {
        ps.mean_abs_skewness += std::abs(*rec.skewness);
        ++ps.skewness_steps;
      }
      for (const auto& g : rec.groups) {
        top1_sum += g.top1_reward;
        ++top1_n;
        ps.anchor_nonpositive += g.anchor_nonpositive ? 1 : 0;
        ps.degenerate_groups += g.degenerate ? 1 : 0;
        if (step >= window_start) final_top1.push_back(g.top1_reward);
      }
      if (spdlog::should_log(spdlog::level::debug) && (step + 1) % 100 == 0) {
        const auto top1 = rec.top1_rewards();
        const double mean = std::accumulate(top1.begin(), top1.end(), 0.0) /
                            static_cast<double>(top1.size());
        spdlog::debug("step {}: mean top-1 {:.4f}, kl {:.5f}, objective {:.5f}", step + 1, mean,
                      rec.kl, rec.objective);
      }
    }
    if (ps.skewness_steps > 0) {
      abs_skew_sum += ps.mean_abs_skewness;
      abs_skew_n += ps.skewness_steps;
      ps.mean_abs_skewness /= static_cast<double>(ps.skewness_steps);
    }
    if (top1_n > 0) ps.mean_top1_reward = top1_sum / static_cast<double>(top1_n);
    if (ps.anchor_nonpositive > 0) {
      spdlog::warn("anchoring gave {} ground-truth solutions a non-positive advantage",
                   ps.anchor_nonpositive);
    }
  }

  if (!final_top1.empty()) summary.final_top1 = quartiles(final_top1);
  if (abs_skew_n > 0) summary.mean_abs_skewness = abs_skew_sum / static_cast<double>(abs_skew_n);
  return result;
}

}  // namespace tempsamp
