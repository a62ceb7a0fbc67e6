#include "tempsamp/temporal.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "tempsamp/error.hpp"

namespace tempsamp {

TimeInterval TimeInterval::make(double start, double end) {
  if (!std::isfinite(start) || !std::isfinite(end)) {
    throw Error(ErrorCode::kNonFinite, "interval bounds must be finite");
  }
  if (start < 0.0 || end < 0.0) {
    throw Error(ErrorCode::kNegativeTime, "interval bounds must be >= 0");
  }
  if (start > end) {
    std::ostringstream os;
    os << "start " << start << " > end " << end;
    throw Error(ErrorCode::kOrderViolation, os.str());
  }
  return TimeInterval(start, end);
}

SaliencyTrack SaliencyTrack::make(double clip_len, std::vector<double> scores) {
  if (!std::isfinite(clip_len) || clip_len <= 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "clip_len must be positive");
  }
  if (scores.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "saliency track must be non-empty");
  }
  for (double s : scores) {
    if (!(s >= 0.0 && s <= 1.0)) {
      throw Error(ErrorCode::kOutOfRange, "saliency score outside [0, 1]");
    }
  }
  return SaliencyTrack(clip_len, std::move(scores));
}

SaliencyTrack SaliencyTrack::from_raw_scale(double clip_len, std::span<const double> raw_scores) {
  std::vector<double> scores(raw_scores.begin(), raw_scores.end());
  for (double& s : scores) s /= 4.0;
  return make(clip_len, std::move(scores));
}

HighlightAnswer HighlightAnswer::make(std::vector<ClipScore> clips) {
  std::set<int> seen;
  for (const auto& c : clips) {
    if (c.clip < 0) throw Error(ErrorCode::kIndexOutOfRange, "negative clip index");
    if (!(c.score >= 0.0 && c.score <= 1.0)) {
      throw Error(ErrorCode::kOutOfRange, "clip score outside [0, 1]");
    }
    if (!seen.insert(c.clip).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate clip index " + std::to_string(c.clip));
    }
  }
  return HighlightAnswer(std::move(clips));
}

Solution Solution::make(std::string raw_text, std::optional<Payload> parsed, Source source) {
  if (source == Source::kOffPolicy && !parsed) {
    throw Error(ErrorCode::kInvalidArgument, "off-policy solution requires a parsed payload");
  }
  return Solution(std::move(raw_text), std::move(parsed), source);
}

RewardGroup RewardGroup::make(std::vector<double> rewards, std::vector<Source> sources) {
  if (rewards.size() != sources.size()) {
    throw Error(ErrorCode::kLengthMismatch, "rewards and sources differ in length");
  }
  if (rewards.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "reward group needs at least 2 entries");
  }
  if (std::count(sources.begin(), sources.end(), Source::kOffPolicy) > 1) {
    throw Error(ErrorCode::kInvalidArgument, "reward group holds more than one off-policy entry");
  }
  for (double r : rewards) {
    if (!std::isfinite(r)) throw Error(ErrorCode::kNonFinite, "reward must be finite");
  }
  return RewardGroup(std::move(rewards), std::move(sources));
}

RewardGroup RewardGroup::on_policy(std::vector<double> rewards) {
  std::vector<Source> sources(rewards.size(), Source::kOnPolicy);
  return make(std::move(rewards), std::move(sources));
}

RewardGroup RewardGroup::mixed(std::vector<double> on_policy_rewards, double off_policy_reward) {
  std::vector<Source> sources(on_policy_rewards.size(), Source::kOnPolicy);
  on_policy_rewards.push_back(off_policy_reward);
  sources.push_back(Source::kOffPolicy);
  return make(std::move(on_policy_rewards), std::move(sources));
}

std::optional<std::size_t> RewardGroup::off_policy_index() const noexcept {
  auto it = std::find(sources_.begin(), sources_.end(), Source::kOffPolicy);
  if (it == sources_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - sources_.begin());
}

RewardGroup RewardGroup::with_rewards(std::vector<double> rewards) const {
  return make(std::move(rewards), sources_);
}

void ShapingConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::kConfigInvalid, msg); };
  if (!(r_max > 0.0) || !std::isfinite(r_max)) fail("shaping.r_max: r_max > 0 required");
  if (!(tau > 0.0 && tau < r_max)) fail("shaping.tau: 0 < tau < r_max required");
  if (!(alpha1 > 0.0) || !std::isfinite(alpha1)) fail("shaping.alpha1: alpha1 > 0 required");
  if (!(alpha2 > 0.0) || !std::isfinite(alpha2)) fail("shaping.alpha2: alpha2 > 0 required");
  if (!(lambda_off > 0.0) || !std::isfinite(lambda_off)) {
    fail("shaping.lambda_off: lambda_off > 0 required");
  }
  if (!(kappa > 0.0 && kappa <= 1.0)) fail("shaping.kappa: 0 < kappa <= 1 required");
  if (!(sigma_floor > 0.0) || !std::isfinite(sigma_floor)) {
    fail("shaping.sigma_floor: sigma_floor > 0 required");
  }
}

}  // namespace tempsamp
