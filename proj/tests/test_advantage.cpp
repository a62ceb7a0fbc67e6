#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "tempsamp/advantage.hpp"
#include "tempsamp/error.hpp"

using namespace tempsamp;

namespace {

const ShapingConfig kCfg;

double mean_of(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s / v.size();
}

double pop_std(const std::vector<double>& v) {
  const double m = mean_of(v);
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / v.size());
}

double beta25(std::mt19937_64& rng) {
  std::gamma_distribution<double> a(2.0, 1.0), b(5.0, 1.0);
  const double x = a(rng), y = b(rng);
  return x / (x + y);
}

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::kInvalidArgument;
}

}  // namespace

TEST(NormalizeGroup, Examples) {
  auto a = normalize_group(RewardGroup::on_policy({0.2, 0.4, 0.6}), kCfg);
  EXPECT_NEAR(a.group_mean, 0.4, 1e-15);
  EXPECT_NEAR(a.group_std, 0.16329931618554520, 1e-12);
  ASSERT_EQ(a.values.size(), 3u);
  EXPECT_NEAR(a.values[0], -1.2247448713915890, 1e-9);
  EXPECT_NEAR(a.values[1], 0.0, 1e-12);
  EXPECT_NEAR(a.values[2], 1.2247448713915890, 1e-9);
  EXPECT_FALSE(a.degenerate);

  auto d = normalize_group(RewardGroup::on_policy({0.5, 0.5, 0.5, 0.5}), kCfg);
  EXPECT_TRUE(d.degenerate);
  EXPECT_EQ(d.values, (std::vector<double>{0, 0, 0, 0}));

  auto two = normalize_group(RewardGroup::on_policy({0.0, 1.0}), kCfg);
  EXPECT_EQ(two.values, (std::vector<double>{-1.0, 1.0}));
}

TEST(NormalizeGroup, JointOverOffPolicyEntry) {
  auto a = normalize_group(RewardGroup::mixed({0.0, 0.0, 0.0}, 1.0), kCfg);
  EXPECT_NEAR(a.group_mean, 0.25, 1e-15);
  EXPECT_FALSE(a.degenerate);
  EXPECT_GT(a.values[3], 0.0);
}

TEST(NormalizeGroup, SigmaFloorBoundary) {
  ShapingConfig c;
  c.sigma_floor = 0.1;
  auto a = normalize_group(RewardGroup::on_policy({0.0, 0.1}), c);  // sigma 0.05
  EXPECT_TRUE(a.degenerate);
  auto b = normalize_group(RewardGroup::on_policy({0.0, 0.4}), c);  // sigma 0.2
  EXPECT_FALSE(b.degenerate);
}

TEST(NormalizeGroup, ZeroMeanUnitStdOnRandomGroups) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 5000; ++k) {
    std::size_t g = 2 + rng() % 9;
    std::vector<double> r(g);
    for (auto& x : r) x = u(rng);
    for (Strategy s : {Strategy::kNone, Strategy::kNonLinearShape}) {
      auto a = compute_advantages(RewardGroup::on_policy(r), s, kCfg);
      if (a.degenerate) continue;
      ASSERT_NEAR(mean_of(a.values), 0.0, 1e-9);
      ASSERT_NEAR(pop_std(a.values), 1.0, 1e-9);
    }
    if (g >= 3) {
      std::vector<double> on(r.begin(), r.end() - 1);
      auto a = compute_advantages(RewardGroup::mixed(on, r.back()), Strategy::kDownscale, kCfg);
      if (a.degenerate) continue;
      ASSERT_NEAR(mean_of(a.values), 0.0, 1e-9);
      ASSERT_NEAR(pop_std(a.values), 1.0, 1e-9);
    }
  }
}

TEST(NormalizeGroup, MatchesTwoPassGrpoOracle) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 2000; ++k) {
    std::vector<double> r(4);
    for (auto& x : r) x = u(rng);
    const double m = mean_of(r), s = pop_std(r);
    auto a = compute_advantages(RewardGroup::on_policy(r), Strategy::kNone, kCfg);
    for (std::size_t i = 0; i < r.size(); ++i) ASSERT_NEAR(a.values[i], (r[i] - m) / s, 1e-12);
  }
}

TEST(Downscale, Examples) {
  auto g = downscale_offpolicy(RewardGroup::mixed({0.1, 0.9}, 1.0), kCfg);
  EXPECT_EQ(g.rewards(), (std::vector<double>{0.1, 0.9, 0.8}));
  auto h = downscale_offpolicy(RewardGroup::mixed({0.1, 0.9}, 0.5), kCfg);
  EXPECT_EQ(h.rewards(), (std::vector<double>{0.1, 0.9, 0.5}));
  EXPECT_EQ(h.sources(), RewardGroup::mixed({0.1, 0.9}, 0.5).sources());
}

TEST(Downscale, CapUsesKappaTimesRmax) {
  ShapingConfig c;
  c.kappa = 0.5;
  c.r_max = 2.0;
  c.tau = 1.5;
  auto g = downscale_offpolicy(RewardGroup::mixed({0.1, 0.2}, 1.7), c);
  EXPECT_EQ(g.rewards().back(), 1.0);
}

TEST(Downscale, RequiresOffPolicy) {
  EXPECT_EQ(code_of([] { downscale_offpolicy(RewardGroup::on_policy({0.1, 0.2}), kCfg); }),
            ErrorCode::kNoOffPolicyEntry);
}

TEST(Downscale, ComposedAdvantages) {
  auto a = compute_advantages(RewardGroup::mixed({0.2, 0.4}, 1.0), Strategy::kDownscale, kCfg);
  EXPECT_NEAR(a.group_mean, 0.4666666666666667, 1e-12);
  EXPECT_NEAR(a.group_std, 0.2494438257849294, 1e-12);
  EXPECT_NEAR(a.values[0], -1.0690449676496975, 1e-9);
  EXPECT_NEAR(a.values[1], -0.2672612419124244, 1e-9);
  EXPECT_NEAR(a.values[2], 1.3363062095621219, 1e-9);
}

TEST(Anchor, Examples) {
  auto a = anchor_offpolicy(RewardGroup::mixed({0.2, 0.4, 0.6}, 1.0), kCfg);
  EXPECT_NEAR(a.values[3], 1.4696938456699069, 1e-9);
  EXPECT_EQ(a.values[3], 1.2 * a.values[2]);
  EXPECT_NEAR(a.values[2], 1.2247448713915890, 1e-9);
  EXPECT_FALSE(a.anchor_nonpositive);

  auto d = anchor_offpolicy(RewardGroup::mixed({0.3, 0.3, 0.3}, 1.0), kCfg);
  EXPECT_TRUE(d.degenerate);
  EXPECT_EQ(d.values, (std::vector<double>{0, 0, 0, 0}));
}

TEST(Anchor, OffPolicyAnywhere) {
  auto g = RewardGroup::make({0.2, 1.0, 0.4, 0.6},
                             {Source::kOnPolicy, Source::kOffPolicy, Source::kOnPolicy, Source::kOnPolicy});
  auto a = anchor_offpolicy(g, kCfg);
  auto on = normalize_group(RewardGroup::on_policy({0.2, 0.4, 0.6}), kCfg);
  EXPECT_EQ(a.values[0], on.values[0]);
  EXPECT_EQ(a.values[2], on.values[1]);
  EXPECT_EQ(a.values[3], on.values[2]);
  EXPECT_EQ(a.values[1], 1.2 * on.values[2]);
}

TEST(Anchor, Errors) {
  EXPECT_EQ(code_of([] { anchor_offpolicy(RewardGroup::on_policy({0.1, 0.2, 0.3}), kCfg); }),
            ErrorCode::kNoOffPolicyEntry);
  EXPECT_EQ(code_of([] { anchor_offpolicy(RewardGroup::mixed({0.1}, 1.0), kCfg); }),
            ErrorCode::kTooFewOnPolicy);
}

TEST(Anchor, DecouplingAndContract) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 5000; ++k) {
    std::size_t on_n = 2 + rng() % 6;
    std::vector<double> on(on_n);
    for (auto& x : on) x = u(rng);
    auto a = anchor_offpolicy(RewardGroup::mixed(on, u(rng)), kCfg);
    auto b = anchor_offpolicy(RewardGroup::mixed(on, u(rng)), kCfg);
    for (std::size_t i = 0; i < on_n; ++i) ASSERT_EQ(a.values[i], b.values[i]);
    if (a.degenerate) continue;
    const double max_on = *std::max_element(a.values.begin(), a.values.end() - 1);
    ASSERT_EQ(a.values.back(), 1.2 * max_on);
    if (max_on > 0) {
      for (std::size_t i = 0; i < on_n; ++i) ASSERT_LT(a.values[i], a.values.back());
    }
  }
}

TEST(Anchor, NonPositiveFlagTracksMax) {
  // A zero-mean, non-degenerate on-policy sub-group always has a positive maximum.
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 2000; ++k) {
    auto a = anchor_offpolicy(RewardGroup::mixed({u(rng), u(rng), u(rng)}, u(rng)), kCfg);
    if (a.degenerate) continue;
    ASSERT_FALSE(a.anchor_nonpositive);
    ASSERT_GT(a.values.back(), 0.0);
  }
}

TEST(ShapeReward, Examples) {
  EXPECT_EQ(shape_reward(0.8, kCfg), 0.8);
  EXPECT_NEAR(shape_reward(1.0, kCfg), 0.8018232155679395, 1e-12);
  EXPECT_NEAR(shape_reward(0.0, kCfg), 0.0867637263023770, 1e-12);
}

TEST(ShapeReward, OutOfRange) {
  EXPECT_EQ(code_of([] { shape_reward(-0.01, kCfg); }), ErrorCode::kOutOfRange);
  EXPECT_EQ(code_of([] { shape_reward(1.01, kCfg); }), ErrorCode::kOutOfRange);
  EXPECT_EQ(code_of([] { shape_reward(std::nan(""), kCfg); }), ErrorCode::kOutOfRange);
}

TEST(ShapeReward, ContinuousMonotoneCompressive) {
  const double below = shape_reward(std::nextafter(0.8, 0.0), kCfg);
  EXPECT_LT(std::abs(below - 0.8), 1e-12);
  double prev = -1;
  for (int k = 0; k <= 10000; ++k) {
    const double r = k / 10000.0;
    const double s = shape_reward(r, kCfg);
    ASSERT_GT(s, prev);
    prev = s;
    if (r > 0.8) {
      ASSERT_LT(std::abs(s - 0.8), std::abs(r - 0.8));
      ASSERT_GE(s, 0.8);
      ASSERT_LE(s, 0.80183);
    }
  }
}

TEST(ShapeGroup, Examples) {
  auto a = shape_group(RewardGroup::on_policy({0.8, 0.8}), kCfg);
  EXPECT_EQ(a.rewards(), (std::vector<double>{0.8, 0.8}));
  auto b = shape_group(RewardGroup::mixed({1.0}, 0.0), kCfg);
  EXPECT_NEAR(b.rewards()[0], 0.801823, 1e-6);
  EXPECT_NEAR(b.rewards()[1], 0.086764, 1e-6);
  EXPECT_EQ(b.sources(), RewardGroup::mixed({1.0}, 0.0).sources());
  EXPECT_THROW(shape_group(RewardGroup::on_policy({0.5, 1.5}), kCfg), Error);
}

TEST(ComputeAdvantages, Delegation) {
  auto g = RewardGroup::on_policy({0.2, 0.4, 0.6});
  auto a = compute_advantages(g, Strategy::kNone, kCfg);
  EXPECT_EQ(a.values, normalize_group(g, kCfg).values);
  EXPECT_EQ(a.strategy, Strategy::kNone);
  auto tied = compute_advantages(RewardGroup::mixed({0.3, 0.3}, 0.3), Strategy::kNonLinearShape, kCfg);
  EXPECT_TRUE(tied.degenerate);
  EXPECT_EQ(tied.values, (std::vector<double>{0, 0, 0}));
  EXPECT_THROW(compute_advantages(g, Strategy::kDownscale, kCfg), Error);
  EXPECT_THROW(compute_advantages(g, Strategy::kAnchor, kCfg), Error);
}

TEST(ComputeAdvantages, ArgmaxInvariance) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 3000; ++k) {
    std::vector<double> on(3);
    for (auto& x : on) x = u(rng);
    auto g = RewardGroup::mixed(on, u(rng));
    for (Strategy s : {Strategy::kNone, Strategy::kDownscale, Strategy::kNonLinearShape}) {
      RewardGroup post = s == Strategy::kDownscale        ? downscale_offpolicy(g, kCfg)
                         : s == Strategy::kNonLinearShape ? shape_group(g, kCfg)
                                                          : g;
      auto a = compute_advantages(g, s, kCfg);
      const auto& r = post.rewards();
      ASSERT_EQ(std::max_element(a.values.begin(), a.values.end()) - a.values.begin(),
                std::max_element(r.begin(), r.end()) - r.begin());
    }
  }
}

TEST(Skewness, Examples) {
  EXPECT_NEAR(sample_skewness(std::vector<double>{-1, 0, 1}), 0.0, 1e-15);
  EXPECT_NEAR(sample_skewness(std::vector<double>{0, 0, 1}), std::sqrt(2.0) / 2, 1e-12);
  EXPECT_NEAR(sample_skewness(std::vector<double>{0, 1, 1}), -std::sqrt(2.0) / 2, 1e-12);
}

TEST(Skewness, Errors) {
  EXPECT_EQ(code_of([] { sample_skewness(std::vector<double>{0, 1}); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([] { sample_skewness(std::vector<double>{2, 2, 2}); }), ErrorCode::kDegenerateSample);
}

TEST(Skewness, ShapeReducesSkewOfMixedGroups) {
  std::mt19937_64 rng(8);
  double raw = 0, shaped = 0;
  int n = 0;
  for (int k = 0; k < 1000; ++k) {
    std::vector<double> on(3);
    for (auto& x : on) x = beta25(rng);
    auto g = RewardGroup::mixed(on, 1.0);
    auto a = compute_advantages(g, Strategy::kNone, kCfg);
    auto b = compute_advantages(g, Strategy::kNonLinearShape, kCfg);
    if (a.degenerate || b.degenerate) continue;
    raw += std::abs(sample_skewness(a.values));
    shaped += std::abs(sample_skewness(b.values));
    ++n;
  }
  ASSERT_GT(n, 900);
  EXPECT_LT(shaped / n, raw / n);
}

TEST(Strategy, Names) {
  for (Strategy s : {Strategy::kNone, Strategy::kDownscale, Strategy::kAnchor, Strategy::kNonLinearShape}) {
    EXPECT_EQ(parse_strategy(to_string(s)), s);
  }
  EXPECT_EQ(parse_strategy("nonlinear_shape"), Strategy::kNonLinearShape);
  EXPECT_THROW(parse_strategy("x"), Error);
}
