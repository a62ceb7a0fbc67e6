#include "tempsamp/environment.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "tempsamp/error.hpp"

namespace tempsamp {

TaskInstance TaskInstance::make(std::int64_t instance_id, double duration,
                                std::vector<double> observation, GroundTruth gt) {
  if (!std::isfinite(duration) || duration <= 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "duration must be positive");
  }
  if (observation.empty()) throw Error(ErrorCode::kDimensionMismatch, "empty observation");
  for (double x : observation) {
    if (!std::isfinite(x)) throw Error(ErrorCode::kNonFinite, "observation not finite");
  }
  if (const auto* interval = std::get_if<TimeInterval>(&gt)) {
    if (interval->end() > duration) {
      throw Error(ErrorCode::kOutOfRange, "GT interval extends past the duration");
    }
  } else {
    const auto& hl = std::get<HighlightGroundTruth>(gt);
    const double covered = hl.track.clip_len() * static_cast<double>(hl.track.num_clips());
    if (std::abs(covered - duration) > 1e-9 * duration) {
      throw Error(ErrorCode::kInvalidArgument, "saliency track does not cover the duration");
    }
    for (int c : hl.salient) {
      if (c < 0 || static_cast<std::size_t>(c) >= hl.track.num_clips()) {
        throw Error(ErrorCode::kIndexOutOfRange, "salient clip outside the track");
      }
    }
  }
  return TaskInstance(instance_id, duration, std::move(observation), std::move(gt));
}

Task TaskInstance::task() const noexcept {
  return std::holds_alternative<TimeInterval>(gt_) ? Task::kGrounding : Task::kHighlight;
}

void DatasetParams::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::kConfigInvalid, msg); };
  if (num_instances == 0) fail("dataset.num_instances: num_instances >= 1 required");
  if (num_bins < 2) fail("dataset.num_bins: N >= 2 required");
  if (!(obs_noise >= 0.0) || !std::isfinite(obs_noise)) {
    fail("dataset.obs_noise: obs_noise >= 0 required");
  }
  if (min_bin_seconds < 1 || max_bin_seconds < min_bin_seconds) {
    fail("dataset.min_bin_seconds: 1 <= min_bin_seconds <= max_bin_seconds required");
  }
}

std::size_t feature_dim_for(std::size_t num_bins) { return 2 * num_bins; }

TimeInterval bins_to_interval(BinPair bins, double duration, std::size_t num_bins) {
  const double n = static_cast<double>(num_bins);
  return TimeInterval::make(static_cast<double>(bins.first) * duration / n,
                            static_cast<double>(bins.last + 1) * duration / n);
}

std::vector<TaskInstance> generate_dataset(const DatasetParams& params) {
  params.validate();
  const std::size_t n_bins = params.num_bins;
  std::vector<BinPair> pairs;
  for (std::size_t i = 0; i < n_bins; ++i) {
    for (std::size_t j = i; j < n_bins; ++j) pairs.push_back({i, j});
  }

  std::mt19937_64 rng(params.seed);
  std::uniform_int_distribution<std::size_t> pick_pair(0, pairs.size() - 1);
  std::uniform_int_distribution<int> pick_seconds(params.min_bin_seconds, params.max_bin_seconds);
  std::bernoulli_distribution coin(0.5);
  std::normal_distribution<double> noise(0.0, 1.0);

  std::vector<TaskInstance> out;
  out.reserve(params.num_instances);
  for (std::size_t k = 0; k < params.num_instances; ++k) {
    const BinPair bins = pairs[pick_pair(rng)];
    const int bin_seconds = pick_seconds(rng);
    const double duration = static_cast<double>(n_bins) * bin_seconds;

    GroundTruth gt = bins_to_interval(bins, duration, n_bins);
    if (params.task == Task::kHighlight) {
      // Raw 0..4 labels: 3 or 4 inside the salient run, 0 or 1 outside.
      std::vector<double> raw(n_bins);
      for (std::size_t c = 0; c < n_bins; ++c) {
        const bool inside = c >= bins.first && c <= bins.last;
        raw[c] = (inside ? 3.0 : 0.0) + (coin(rng) ? 1.0 : 0.0);
      }
      auto track = SaliencyTrack::from_raw_scale(static_cast<double>(bin_seconds), raw);
      ClipSet salient = salient_clips(track);
      gt = HighlightGroundTruth{std::move(track), std::move(salient)};
    }

    std::vector<double> obs(feature_dim_for(n_bins), 0.0);
    obs[bins.first] = 1.0;
    obs[n_bins + bins.last] = 1.0;
    if (params.obs_noise > 0.0) {
      for (double& x : obs) x += params.obs_noise * noise(rng);
    }
    out.push_back(TaskInstance::make(static_cast<std::int64_t>(k), duration, std::move(obs),
                                     std::move(gt)));
  }
  return out;
}

std::string render_template(Template templ, const Payload& payload) {
  switch (templ) {
    case Template::kThinkAnswer:
      return emit_output(payload, std::string(kTemplateThink), Schema::kThinkAnswer);
    case Template::kAnswerOnly:
      return emit_output(payload, std::nullopt, Schema::kAnswerOnly);
    case Template::kUnterminated:
      return "<Answer>" + emit_payload(payload);
    case Template::kAnswerFirst:
      return "<Answer>" + emit_payload(payload) + "</Answer><Think>" + kTemplateThink + "</Think>";
  }
  throw Error(ErrorCode::kIndexOutOfRange, "unknown template");
}

Template canonical_template(Schema schema) {
  return schema == Schema::kThinkAnswer ? Template::kThinkAnswer : Template::kAnswerOnly;
}

Payload action_payload(const TaskInstance& instance, BinPair bins, std::size_t num_bins) {
  if (instance.task() == Task::kHighlight) {
    std::vector<ClipScore> clips;
    for (std::size_t c = bins.first; c <= bins.last; ++c) {
      clips.push_back({static_cast<int>(c), 1.0});
    }
    return HighlightAnswer::make(std::move(clips));
  }
  return bins_to_interval(bins, instance.duration(), num_bins);
}

Payload gt_payload(const TaskInstance& instance) {
  if (const auto* interval = std::get_if<TimeInterval>(&instance.gt())) return *interval;
  const auto& hl = std::get<HighlightGroundTruth>(instance.gt());
  std::vector<ClipScore> clips;
  const auto& scores = hl.track.scores();
  for (std::size_t c = 0; c < scores.size(); ++c) {
    if (scores[c] > 0.0) clips.push_back({static_cast<int>(c), scores[c]});
  }
  return HighlightAnswer::make(std::move(clips));
}

BinPair gt_bins(const TaskInstance& instance, std::size_t num_bins) {
  if (const auto* hl = std::get_if<HighlightGroundTruth>(&instance.gt())) {
    if (hl->salient.empty()) throw Error(ErrorCode::kInvalidArgument, "GT has no salient clips");
    return {static_cast<std::size_t>(*hl->salient.begin()),
            static_cast<std::size_t>(*hl->salient.rbegin())};
  }
  const auto& interval = std::get<TimeInterval>(instance.gt());
  const double bin = instance.duration() / static_cast<double>(num_bins);
  const double first = std::round(interval.start() / bin);
  const double last = std::round(interval.end() / bin) - 1.0;
  if (first < 0.0 || last < first || last >= static_cast<double>(num_bins)) {
    throw Error(ErrorCode::kInvalidArgument, "GT interval is not bin-aligned");
  }
  const BinPair bins{static_cast<std::size_t>(first), static_cast<std::size_t>(last)};
  const TimeInterval aligned = bins_to_interval(bins, instance.duration(), num_bins);
  if (std::abs(aligned.start() - interval.start()) > 1e-6 ||
      std::abs(aligned.end() - interval.end()) > 1e-6) {
    throw Error(ErrorCode::kInvalidArgument, "GT interval is not bin-aligned");
  }
  return bins;
}

std::size_t sample_categorical(const std::vector<double>& probs, double u) {
  double cdf = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    if (probs[k] <= 0.0) continue;
    cdf += probs[k];
    last_positive = k;
    if (u < cdf) return k;
  }
  return last_positive;
}

GroupSample sample_solutions(const IntervalPolicy& policy, const TaskInstance& instance,
                             const SampleOptions& options, std::uint64_t seed) {
  if (options.group_size < 2) throw Error(ErrorCode::kInvalidArgument, "group size G >= 2 required");
  const auto& obs = instance.observation();
  const auto action_p = policy.action_probs(obs);
  const auto templ_p = policy.template_probs(obs);
  const auto action_lp = policy.action_log_probs(obs);
  const auto templ_lp = policy.template_log_probs(obs);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  GroupSample out;
  out.instance_id = instance.instance_id();
  const std::size_t n_on = options.inject_off_policy ? options.group_size - 1 : options.group_size;
  for (std::size_t k = 0; k < n_on; ++k) {
    const ActionPair action{sample_categorical(action_p, unit(rng)),
                            sample_categorical(templ_p, unit(rng))};
    const Payload payload = action_payload(instance, policy.action_bins(action.interval), policy.num_bins());
    const auto templ = static_cast<Template>(action.templ % kNumTemplates);
    out.solutions.push_back(Solution::make(render_template(templ, payload), std::nullopt,
                                           Source::kOnPolicy));
    out.log_probs.push_back(action_lp[action.interval] + templ_lp[action.templ]);
    out.actions.push_back(action);
  }
  if (options.inject_off_policy) {
    const Template templ = canonical_template(options.schema);
    const Payload payload = gt_payload(instance);
    out.solutions.push_back(
        Solution::make(render_template(templ, payload), payload, Source::kOffPolicy));
    out.off_policy_action = ActionPair{policy.action_index(gt_bins(instance, policy.num_bins())),
                                       static_cast<std::size_t>(templ)};
  }
  return out;
}

}  // namespace tempsamp
