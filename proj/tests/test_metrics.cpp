#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "metrics_oracle.hpp"
#include "tempsamp/error.hpp"
#include "tempsamp/metrics.hpp"

using namespace tempsamp;
using namespace metrics_oracle;

namespace {

GroundingPrediction single(std::int64_t id, double s, double e) {
  return {id, {TimeInterval::make(s, e)}, std::nullopt};
}

}  // namespace

TEST(RecallAt1, PerfectPredictorScoresOneAtEveryThreshold) {
  GroundingTruths gts{{1, {TimeInterval::make(2, 6)}}, {2, {TimeInterval::make(0, 1)}}};
  std::vector<GroundingPrediction> preds{single(1, 2, 6), single(2, 0, 1)};
  for (double mu : {0.0, 0.3, 0.5, 0.7, 1.0}) EXPECT_EQ(recall_at_1(preds, gts, mu), 1.0);
}

TEST(RecallAt1, TwoInstancesOneAboveThreshold) {
  // IoU 0.6 and 0.4 against [0, 10].
  GroundingTruths gts{{1, {TimeInterval::make(0, 10)}}, {2, {TimeInterval::make(0, 10)}}};
  std::vector<GroundingPrediction> preds{single(1, 0, 6), single(2, 0, 4)};
  EXPECT_NEAR(rank1_iou(preds[0], gts), 0.6, 1e-15);
  EXPECT_NEAR(rank1_iou(preds[1], gts), 0.4, 1e-15);
  EXPECT_EQ(recall_at_1(preds, gts, 0.5), 0.5);
}

TEST(RecallAt1, ZeroThresholdCountsEveryInstance) {
  GroundingTruths gts{{1, {TimeInterval::make(0, 10)}}, {2, {TimeInterval::make(0, 10)}}};
  std::vector<GroundingPrediction> preds{single(1, 1, 2), single(2, 9, 12)};
  EXPECT_EQ(recall_at_1(preds, gts, 0.0), 1.0);
}

TEST(RecallAt1, MissingGroundTruth) {
  GroundingTruths gts{{1, {TimeInterval::make(0, 10)}}};
  std::vector<GroundingPrediction> preds{single(1, 0, 10), single(7, 0, 10)};
  try {
    recall_at_1(preds, gts, 0.5);
    FAIL() << "expected MissingGroundTruth";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingGroundTruth);
    EXPECT_NE(std::string(e.what()).find('7'), std::string::npos);
  }
  EXPECT_THROW(mean_iou(preds, gts), Error);
}

TEST(MeanIou, Examples) {
  GroundingTruths gts{{1, {TimeInterval::make(0, 4)}}, {2, {TimeInterval::make(0, 4)}}};
  std::vector<GroundingPrediction> preds{single(1, 0, 4), single(2, 6, 8)};
  EXPECT_EQ(mean_iou(preds, gts), 0.5);

  GroundingTruths one{{5, {TimeInterval::make(0, 3)}}};
  std::vector<GroundingPrediction> third{single(5, 0, 1)};
  EXPECT_NEAR(mean_iou(third, one), 1.0 / 3.0, 1e-15);
}

TEST(MeanIou, MatchesBruteForceOnRandomInstances) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 30.0);
  GroundingTruths gts;
  std::vector<GroundingPrediction> preds;
  for (int i = 0; i < 100; ++i) {
    double a = u(rng), b = u(rng), c = u(rng), d = u(rng);
    if (a > b) std::swap(a, b);
    if (c > d) std::swap(c, d);
    gts[i] = {TimeInterval::make(a, b)};
    preds.push_back(single(i, c, d));
  }
  EXPECT_NEAR(mean_iou(preds, gts), oracle_miou(preds, gts), 1e-12);
}

TEST(AveragePrecision, RankOneMatchIsPerfect) {
  GroundingTruths gts{{1, {TimeInterval::make(2, 6)}}};
  GroundingPrediction p{1, {TimeInterval::make(2, 6), TimeInterval::make(10, 12)}, std::vector<double>{0.9, 0.1}};
  const auto report = mean_average_precision(std::vector{p}, gts);
  EXPECT_EQ(report.per_threshold.at(0.5), 1.0);
  EXPECT_EQ(report.per_threshold.at(0.75), 1.0);
  EXPECT_EQ(report.mean, 1.0);
}

TEST(AveragePrecision, OnlyRankTwoMatches) {
  const std::vector<TimeInterval> gt{TimeInterval::make(2, 6)};
  GroundingPrediction p{1, {TimeInterval::make(10, 12), TimeInterval::make(2, 6)}, std::vector<double>{0.9, 0.8}};
  EXPECT_EQ(average_precision(p, gt, 0.5), 0.5);
}

TEST(AveragePrecision, OneToOneMatching) {
  // Two identical predictions cannot both claim one GT segment.
  const std::vector<TimeInterval> gt{TimeInterval::make(0, 4), TimeInterval::make(10, 14)};
  GroundingPrediction p{1, {TimeInterval::make(0, 4), TimeInterval::make(0, 4), TimeInterval::make(10, 14)},
                        std::vector<double>{0.9, 0.8, 0.7}};
  EXPECT_NEAR(average_precision(p, gt, 0.5), 0.5 * 1.0 + 0.5 * (2.0 / 3.0), 1e-15);
}

TEST(AveragePrecision, EqualConfidencesRankEarlierStartFirst) {
  const std::vector<TimeInterval> gt{TimeInterval::make(10, 14)};
  GroundingPrediction p{1, {TimeInterval::make(10, 14), TimeInterval::make(0, 2)}, std::vector<double>{0.5, 0.5}};
  EXPECT_EQ(average_precision(p, gt, 0.5), 0.5);
}

TEST(AveragePrecision, UnrankedPredictions) {
  const std::vector<TimeInterval> gt{TimeInterval::make(0, 4)};
  GroundingPrediction missing{1, {TimeInterval::make(0, 4)}, std::nullopt};
  GroundingPrediction rising{1, {TimeInterval::make(0, 4), TimeInterval::make(1, 4)}, std::vector<double>{0.2, 0.3}};
  GroundingPrediction short_conf{1, {TimeInterval::make(0, 4), TimeInterval::make(1, 4)}, std::vector<double>{0.2}};
  for (const auto& p : {missing, rising, short_conf}) {
    try {
      average_precision(p, gt, 0.5);
      FAIL() << "expected UnrankedPredictions";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kUnrankedPredictions);
    }
  }
}

TEST(AveragePrecision, MissingGroundTruth) {
  GroundingTruths gts{{1, {TimeInterval::make(0, 4)}}};
  GroundingPrediction p{2, {TimeInterval::make(0, 4)}, std::vector<double>{1.0}};
  try {
    mean_average_precision(std::vector{p}, gts);
    FAIL() << "expected MissingGroundTruth";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingGroundTruth);
  }
}

TEST(HitAt1, Examples) {
  HighlightTruths gts{{1, SaliencyTrack::make(2.0, {0.1, 1.0, 0.5})},
                      {2, SaliencyTrack::make(2.0, {0.95, 0.0})},
                      {3, SaliencyTrack::make(2.0, {0.2, 0.9})}};
  std::vector<HighlightPrediction> preds{{1, {{1, 0.9}, {0, 0.1}}}, {2, {{0, 0.7}}}, {3, {{0, 0.8}, {1, 0.1}}}};
  EXPECT_NEAR(hit_at_1(preds, gts), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(hit_at_1(preds, gts), 0.666667, 1e-6);

  std::vector<HighlightPrediction> half{{1, {{2, 1.0}}}};
  EXPECT_EQ(hit_at_1(half, gts, 0.9), 0.0);
  std::vector<HighlightPrediction> top{{1, {{1, 1.0}}}};
  EXPECT_EQ(hit_at_1(top, gts, 0.9), 1.0);
}

TEST(HitAt1, Errors) {
  HighlightTruths gts{{1, SaliencyTrack::make(2.0, {0.1, 1.0})}};
  std::vector<HighlightPrediction> unknown{{9, {{0, 1.0}}}};
  try {
    hit_at_1(unknown, gts);
    FAIL() << "expected MissingGroundTruth";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingGroundTruth);
  }
  std::vector<HighlightPrediction> outside{{1, {{2, 1.0}}}};
  EXPECT_THROW(hit_at_1(outside, gts), Error);
}

TEST(HitAt1, MatchesBruteForce) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const HighlightCase c = random_highlight_case(rng);
    ASSERT_NEAR(hit_at_1(c.preds, c.gts), oracle_hit(c.preds, c.gts, 0.9), 1e-12);
  }
}

TEST(Metrics, MatchBruteForceOnRandomSmallCases) {
  std::mt19937_64 rng(99);
  const std::vector<double> thresholds{0.5, 0.75};
  for (int trial = 0; trial < 500; ++trial) {
    const Case c = random_case(rng, 3);
    for (double mu : {0.0, 0.3, 0.5, 0.7, 1.0}) {
      ASSERT_NEAR(recall_at_1(c.preds, c.gts, mu), oracle_recall(c.preds, c.gts, mu), 1e-12);
    }
    ASSERT_NEAR(mean_iou(c.preds, c.gts), oracle_miou(c.preds, c.gts), 1e-12);
    const auto report = mean_average_precision(c.preds, c.gts, thresholds);
    const double m5 = oracle_map(c.preds, c.gts, 0.5), m75 = oracle_map(c.preds, c.gts, 0.75);
    ASSERT_NEAR(report.per_threshold.at(0.5), m5, 1e-12);
    ASSERT_NEAR(report.per_threshold.at(0.75), m75, 1e-12);
    ASSERT_NEAR(report.mean, (m5 + m75) / 2.0, 1e-12);
  }
}

TEST(Metrics, RecallNonIncreasingInThreshold) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 300; ++trial) {
    const Case c = random_case(rng, 1);
    double prev = 1.0;
    for (int k = 0; k <= 100; ++k) {
      const double r = recall_at_1(c.preds, c.gts, k / 100.0);
      ASSERT_LE(r, prev);
      prev = r;
    }
  }
}

TEST(Metrics, StricterThresholdNeverRaisesMap) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 300; ++trial) {
    const Case c = random_case(rng, 3);
    const auto report = mean_average_precision(c.preds, c.gts);
    ASSERT_LE(report.per_threshold.at(0.75), report.per_threshold.at(0.5));
  }
}

TEST(Metrics, PermutationInvariant) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    Case c = random_case(rng, 3);
    const double r = recall_at_1(c.preds, c.gts, 0.5);
    const double m = mean_iou(c.preds, c.gts);
    const double ap = mean_average_precision(c.preds, c.gts).mean;
    std::shuffle(c.preds.begin(), c.preds.end(), rng);
    ASSERT_EQ(recall_at_1(c.preds, c.gts, 0.5), r);
    ASSERT_NEAR(mean_iou(c.preds, c.gts), m, 1e-12);
    ASSERT_NEAR(mean_average_precision(c.preds, c.gts).mean, ap, 1e-12);
  }
}

TEST(SalientSegments, MaximalRuns) {
  const auto track = SaliencyTrack::make(2.0, {0.6, 0.7, 0.1, 0.5, 0.0, 0.9});
  const auto segs = salient_segments(track, 0.5);
  ASSERT_EQ(segs.size(), 3u);
  EXPECT_EQ(segs[0], TimeInterval::make(0, 4));
  EXPECT_EQ(segs[1], TimeInterval::make(6, 8));
  EXPECT_EQ(segs[2], TimeInterval::make(10, 12));
}
