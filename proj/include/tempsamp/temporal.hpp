#pragma once

// Shared value types for intervals, saliency tracks, solutions and reward groups.
// Every type validates on construction and is immutable afterwards.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace tempsamp {

/// A closed temporal segment [start, end] in seconds.
class TimeInterval {
 public:
  /// Throws kNonFinite, kNegativeTime, or kOrderViolation (start > end is never swapped).
  static TimeInterval make(double start, double end);

  double start() const noexcept { return start_; }
  double end() const noexcept { return end_; }
  double length() const noexcept { return end_ - start_; }

  friend bool operator==(const TimeInterval&, const TimeInterval&) = default;

 private:
  TimeInterval(double start, double end) : start_(start), end_(end) {}
  double start_;
  double end_;
};

/// Per-clip saliency scores normalized to [0, 1].
class SaliencyTrack {
 public:
  static SaliencyTrack make(double clip_len, std::vector<double> scores);
  /// Scores on the raw 0..4 annotation scale, divided by 4.
  static SaliencyTrack from_raw_scale(double clip_len, std::span<const double> raw_scores);

  double clip_len() const noexcept { return clip_len_; }
  const std::vector<double>& scores() const noexcept { return scores_; }
  std::size_t num_clips() const noexcept { return scores_.size(); }

  friend bool operator==(const SaliencyTrack&, const SaliencyTrack&) = default;

 private:
  SaliencyTrack(double clip_len, std::vector<double> scores)
      : clip_len_(clip_len), scores_(std::move(scores)) {}
  double clip_len_;
  std::vector<double> scores_;
};

struct ClipScore {
  int clip = 0;
  double score = 0.0;
  friend bool operator==(const ClipScore&, const ClipScore&) = default;
};

/// Highlight answer: listed clips with predicted saliency; unlisted clips read as 0.
class HighlightAnswer {
 public:
  /// Requires non-negative, pairwise distinct clip indices and scores in [0, 1].
  static HighlightAnswer make(std::vector<ClipScore> clips);

  const std::vector<ClipScore>& clips() const noexcept { return clips_; }

  friend bool operator==(const HighlightAnswer&, const HighlightAnswer&) = default;

 private:
  explicit HighlightAnswer(std::vector<ClipScore> clips) : clips_(std::move(clips)) {}
  std::vector<ClipScore> clips_;
};

using Payload = std::variant<TimeInterval, HighlightAnswer>;

enum class Source { kOnPolicy, kOffPolicy };

/// One member of a solution group.
class Solution {
 public:
  /// Off-policy solutions must carry a parsed payload.
  static Solution make(std::string raw_text, std::optional<Payload> parsed, Source source);

  const std::string& raw_text() const noexcept { return raw_text_; }
  const std::optional<Payload>& parsed() const noexcept { return parsed_; }
  Source source() const noexcept { return source_; }

 private:
  Solution(std::string raw_text, std::optional<Payload> parsed, Source source)
      : raw_text_(std::move(raw_text)), parsed_(std::move(parsed)), source_(source) {}
  std::string raw_text_;
  std::optional<Payload> parsed_;
  Source source_;
};

/// G rewards with aligned provenance. G >= 2, at most one off-policy entry.
class RewardGroup {
 public:
  static RewardGroup make(std::vector<double> rewards, std::vector<Source> sources);
  /// All entries on-policy.
  static RewardGroup on_policy(std::vector<double> rewards);
  /// On-policy entries followed by one off-policy entry in last position.
  static RewardGroup mixed(std::vector<double> on_policy_rewards, double off_policy_reward);

  const std::vector<double>& rewards() const noexcept { return rewards_; }
  const std::vector<Source>& sources() const noexcept { return sources_; }
  std::size_t size() const noexcept { return rewards_.size(); }
  std::optional<std::size_t> off_policy_index() const noexcept;

  /// Same provenance, new reward values (re-validated).
  RewardGroup with_rewards(std::vector<double> rewards) const;

 private:
  RewardGroup(std::vector<double> rewards, std::vector<Source> sources)
      : rewards_(std::move(rewards)), sources_(std::move(sources)) {}
  std::vector<double> rewards_;
  std::vector<Source> sources_;
};

/// Constants for off-policy stabilization and reward shaping.
struct ShapingConfig {
  double tau = 0.8;
  double alpha1 = 0.01;
  double alpha2 = 1.0;
  double lambda_off = 1.2;
  double kappa = 0.8;
  double r_max = 1.0;
  double sigma_floor = 1e-8;

  /// Throws kConfigInvalid naming the first violated field.
  void validate() const;
};

}  // namespace tempsamp
