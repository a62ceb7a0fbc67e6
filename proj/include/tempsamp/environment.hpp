#pragma once

// Synthetic grounding / highlight episodes and mixed-policy group sampling.
//
// Every instance spans N bins of an integer number of seconds, so bin edges are
// integers and rendered answers round-trip exactly through the 3-decimal wire format.
// Observations are concat(one_hot(first GT bin), one_hot(last GT bin)) plus
// Gaussian noise, giving feature_dim = 2N.

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "tempsamp/policy.hpp"
#include "tempsamp/rewards.hpp"
#include "tempsamp/structured_output.hpp"
#include "tempsamp/temporal.hpp"

namespace tempsamp {

struct HighlightGroundTruth {
  SaliencyTrack track;
  ClipSet salient;
};

using GroundTruth = std::variant<TimeInterval, HighlightGroundTruth>;

class TaskInstance {
 public:
  /// Validates GT against the duration (interval inside [0, duration]; track covers it).
  static TaskInstance make(std::int64_t instance_id, double duration, std::vector<double> observation,
                           GroundTruth gt);

  std::int64_t instance_id() const noexcept { return instance_id_; }
  double duration() const noexcept { return duration_; }
  const std::vector<double>& observation() const noexcept { return observation_; }
  const GroundTruth& gt() const noexcept { return gt_; }
  Task task() const noexcept;

 private:
  TaskInstance(std::int64_t id, double duration, std::vector<double> observation, GroundTruth gt)
      : instance_id_(id), duration_(duration), observation_(std::move(observation)), gt_(std::move(gt)) {}
  std::int64_t instance_id_;
  double duration_;
  std::vector<double> observation_;
  GroundTruth gt_;
};

struct DatasetParams {
  std::size_t num_instances = 256;
  std::size_t num_bins = 16;
  double obs_noise = 0.0;
  Task task = Task::kGrounding;
  std::uint64_t seed = 0;
  int min_bin_seconds = 2;
  int max_bin_seconds = 10;

  void validate() const;
};

std::size_t feature_dim_for(std::size_t num_bins);

/// [first * duration / N, (last + 1) * duration / N]
TimeInterval bins_to_interval(BinPair bins, double duration, std::size_t num_bins);

std::vector<TaskInstance> generate_dataset(const DatasetParams& params);

/// Output templates of the format head.
enum class Template : std::size_t {
  kThinkAnswer = 0,   // well-formed under ThinkAnswer
  kAnswerOnly = 1,    // well-formed under AnswerOnly
  kUnterminated = 2,  // missing </Answer>
  kAnswerFirst = 3,   // Answer block before the Think block
};

inline constexpr const char* kTemplateThink = "scan the timeline for the queried event";

std::string render_template(Template templ, const Payload& payload);
Template canonical_template(Schema schema);

/// Payload a bin-pair action renders to: the bin interval for grounding, the
/// clips first..last at score 1 for highlights.
Payload action_payload(const TaskInstance& instance, BinPair bins, std::size_t num_bins);
/// Ground-truth annotation as a payload (every clip with a positive score, for highlights).
Payload gt_payload(const TaskInstance& instance);
/// Bin pair of the ground-truth annotation.
BinPair gt_bins(const TaskInstance& instance, std::size_t num_bins);

struct GroupSample {
  std::int64_t instance_id = 0;
  std::vector<Solution> solutions;
  /// Log-probs and actions of the on-policy solutions (the first entries of `solutions`).
  std::vector<double> log_probs;
  std::vector<ActionPair> actions;
  /// Action the injected ground truth renders, when injection is on (last solution).
  std::optional<ActionPair> off_policy_action;
};

struct SampleOptions {
  std::size_t group_size = 4;
  Schema schema = Schema::kAnswerOnly;
  bool inject_off_policy = true;
};

/// Draws G-1 on-policy solutions and appends the canonical ground truth
/// (or G on-policy draws when injection is off). Deterministic in `seed`.
GroupSample sample_solutions(const IntervalPolicy& policy, const TaskInstance& instance,
                             const SampleOptions& options, std::uint64_t seed);

/// Inverse-CDF draw from a categorical distribution with u in [0, 1).
std::size_t sample_categorical(const std::vector<double>& probs, double u);

}  // namespace tempsamp
