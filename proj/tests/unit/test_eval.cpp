#include <cmath>
#include <random>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "support/scenes.hpp"
#include "tubeflow/eval.hpp"

using namespace tubeflow;

namespace {

ScalarField2D row(std::vector<double> v) {
  const int n = static_cast<int>(v.size());
  return ScalarField2D(n, 1, std::move(v));
}

BinaryMask row_mask(const std::vector<int>& v) {
  BinaryMask m(static_cast<int>(v.size()), 1);
  for (std::size_t i = 0; i < v.size(); ++i) m.set(i, v[i] != 0);
  return m;
}

// Pairwise definition: every positive against every negative.
double brute_auc(const ScalarField2D& s, const BinaryMask& gt) {
  double wins = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (!gt[i]) continue;
    for (std::size_t j = 0; j < gt.size(); ++j) {
      if (gt[j]) continue;
      pairs += 1.0;
      const double a = s.values()[i], b = s.values()[j];
      wins += a > b ? 1.0 : (a == b ? 0.5 : 0.0);
    }
  }
  return wins / pairs;
}

double brute_dice(const ScalarField2D& s, const BinaryMask& gt, double t) {
  double tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const bool p = s.values()[i] >= t;
    tp += p && gt[i];
    fp += p && !gt[i];
    fn += !p && gt[i];
  }
  return 2 * tp + fp + fn == 0 ? 1.0 : 2 * tp / (2 * tp + fp + fn);
}

struct RandomCase {
  ScalarField2D scores;
  BinaryMask gt;
};

RandomCase random_case(std::uint64_t seed, int n, bool ties) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RandomCase c{ScalarField2D(n, 1), BinaryMask(n, 1)};
  for (int i = 0; i < n; ++i) {
    const bool pos = u(rng) < 0.4;
    c.gt.set(static_cast<std::size_t>(i), pos);
    double v = u(rng) + (pos ? 0.3 : 0.0);
    if (ties) v = std::round(v * 4.0) / 4.0;
    c.scores.values()[static_cast<std::size_t>(i)] = v;
  }
  c.gt.set(0, true);
  c.gt.set(1, false);
  return c;
}

}  // namespace

TEST(RocAuc, Examples) {
  EXPECT_DOUBLE_EQ(roc_auc(row({0.9, 0.4, 0.6}), row_mask({1, 0, 1})), 1.0);
  // The only negative outscores both positives.
  EXPECT_DOUBLE_EQ(roc_auc(row({0.4, 0.9, 0.6}), row_mask({1, 0, 1})), 0.0);
  EXPECT_DOUBLE_EQ(roc_auc(row({0.4, 0.9, 0.6}), row_mask({1, 0, 1})), brute_auc(row({0.4, 0.9, 0.6}), row_mask({1, 0, 1})));
  EXPECT_DOUBLE_EQ(roc_auc(row({0.5, 0.5, 0.5, 0.5}), row_mask({1, 0, 1, 0})), 0.5);
  const BinaryMask gt = row_mask({1, 0, 0, 1, 1});
  EXPECT_DOUBLE_EQ(roc_auc(gt.to_field(), gt), 1.0);
  EXPECT_DOUBLE_EQ(roc_auc(row({0.2, 0.9, 0.6, 0.6, 0.1}), row_mask({1, 0, 1, 0, 1})), 0.5 / 6.0);
}

TEST(RocAuc, MatchesBruteForce) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const RandomCase c = random_case(seed, 60, seed % 2 == 0);
    EXPECT_NEAR(roc_auc(c.scores, c.gt), brute_auc(c.scores, c.gt), 1e-12) << seed;
  }
}

TEST(RocAuc, RankInvariantAndComplementary) {
  const RandomCase c = random_case(3, 80, false);
  ScalarField2D warped = c.scores, negated = c.scores;
  for (double& v : warped.values()) v = std::exp(3.0 * v) - 7.0;
  for (double& v : negated.values()) v = -v;
  const double a = roc_auc(c.scores, c.gt);
  EXPECT_NEAR(roc_auc(warped, c.gt), a, 1e-12);
  EXPECT_NEAR(roc_auc(negated, c.gt) + a, 1.0, 1e-12);
}

TEST(RocAuc, FovRestrictsAndDegenerateThrows) {
  const ScalarField2D s = row({0.9, 0.1, 0.8, 0.95});
  const BinaryMask gt = row_mask({1, 0, 1, 0});
  const BinaryMask fov = row_mask({1, 1, 1, 0});
  EXPECT_DOUBLE_EQ(roc_auc(s, gt, &fov), 1.0);
  EXPECT_DOUBLE_EQ(roc_auc(s, gt), 0.5);
  EXPECT_THROW(roc_auc(s, row_mask({1, 1, 1, 1})), std::invalid_argument);
  EXPECT_THROW(roc_auc(s, row_mask({0, 0, 0, 0})), std::invalid_argument);
  const BinaryMask only_negatives = row_mask({0, 1, 0, 0});
  EXPECT_THROW(roc_auc(s, gt, &only_negatives), std::invalid_argument);
}

TEST(BestThreshold, PerfectScoresPickSmallestPositive) {
  const ScalarField2D s = row({0.0, 0.7, 0.0, 0.3, 0.9});
  const BinaryMask gt = row_mask({0, 1, 0, 1, 1});
  const ThresholdChoice c = best_threshold(s, gt);
  EXPECT_DOUBLE_EQ(c.threshold, 0.3);
  EXPECT_DOUBLE_EQ(c.dice, 1.0);
}

TEST(BestThreshold, SingleValueSelectsAll) {
  const BinaryMask gt = row_mask({1, 0, 0, 1, 0, 0});
  const ThresholdChoice c = best_threshold(ScalarField2D(6, 1, 0.4), gt);
  EXPECT_DOUBLE_EQ(c.threshold, 0.4);
  EXPECT_DOUBLE_EQ(c.dice, 2.0 * 2.0 / (2.0 * 2.0 + 4.0));
}

TEST(BestThreshold, MatchesExhaustiveSweep) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const RandomCase c = random_case(seed + 100, 50, seed % 2 == 1);
    double best = -1.0, best_t = 0.0;
    std::vector<double> cand(c.scores.values().begin(), c.scores.values().end());
    std::sort(cand.begin(), cand.end());
    for (double t : cand) {
      const double d = brute_dice(c.scores, c.gt, t);
      if (d > best) best = d, best_t = t;
    }
    const ThresholdChoice got = best_threshold(c.scores, c.gt);
    EXPECT_NEAR(got.dice, best, 1e-12) << seed;
    EXPECT_EQ(got.threshold, best_t) << seed;
    const double p = static_cast<double>(c.gt.count());
    EXPECT_GE(got.dice, 2.0 * p / (2.0 * p + (50.0 - p)));
  }
}

TEST(BestThreshold, PooledEqualsConcatenated) {
  const RandomCase a = random_case(1, 30, true), b = random_case(2, 40, true);
  ScalarField2D joint(70, 1);
  BinaryMask jgt(70, 1);
  for (std::size_t i = 0; i < 30; ++i) joint.values()[i] = a.scores.values()[i], jgt.set(i, a.gt[i]);
  for (std::size_t i = 0; i < 40; ++i) joint.values()[30 + i] = b.scores.values()[i], jgt.set(30 + i, b.gt[i]);
  const std::vector<ScalarField2D> scores{a.scores, b.scores};
  const std::vector<BinaryMask> gts{a.gt, b.gt};
  const ThresholdChoice pooled = best_threshold(scores, gts);
  const ThresholdChoice single = best_threshold(joint, jgt);
  EXPECT_EQ(pooled.threshold, single.threshold);
  EXPECT_NEAR(pooled.dice, single.dice, 1e-12);
}

TEST(ConfusionMetrics, Examples) {
  // TP = 6, FP = 2, FN = 2, TN = 10.
  const BinaryMask seg = row_mask({1, 1, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0});
  const BinaryMask gt = row_mask({1, 1, 1, 1, 1, 1, 0, 0, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0});
  const Confusion c = confusion(seg, gt);
  EXPECT_EQ(c.tp, 6u);
  EXPECT_EQ(c.fp, 2u);
  EXPECT_EQ(c.fn, 2u);
  EXPECT_EQ(c.tn, 10u);
  const EvalReport r = confusion_metrics(seg, gt);
  EXPECT_DOUBLE_EQ(r.dice, 0.75);
  EXPECT_DOUBLE_EQ(r.accuracy, 0.8);
  EXPECT_DOUBLE_EQ(r.sensitivity, 0.75);
  EXPECT_DOUBLE_EQ(r.specificity, 10.0 / 12.0);
  EXPECT_EQ(r.n_pos, 8u);
  EXPECT_EQ(r.n_neg, 12u);

  const EvalReport same = confusion_metrics(gt, gt);
  EXPECT_EQ(same.accuracy, 1.0);
  EXPECT_EQ(same.dice, 1.0);
  EXPECT_EQ(same.sensitivity, 1.0);
  EXPECT_EQ(same.specificity, 1.0);
  BinaryMask inv(20, 1);
  for (std::size_t i = 0; i < 20; ++i) inv.set(i, !gt[i]);
  const EvalReport opp = confusion_metrics(inv, gt);
  EXPECT_EQ(opp.accuracy, 0.0);
  EXPECT_EQ(opp.dice, 0.0);
  const BinaryMask none(20, 1);
  EXPECT_THROW(confusion_metrics(seg, gt, &none), std::invalid_argument);
}

TEST(ConfusionMetrics, EmptyDenominatorsAreOne) {
  const Confusion c{0, 0, 0, 5};
  EXPECT_EQ(dice_of(c), 1.0);
  EXPECT_EQ(sensitivity_of(c), 1.0);
  EXPECT_EQ(specificity_of(Confusion{3, 0, 0, 0}), 1.0);
}

TEST(Dilate, Disk) {
  BinaryMask m(9, 9);
  m.set(4, 4, true);
  const BinaryMask d = dilate(m, 2);
  EXPECT_EQ(d.count(), 13u);
  EXPECT_TRUE(d(4, 2));
  EXPECT_TRUE(d(3, 3));
  EXPECT_FALSE(d(2, 2));
  EXPECT_EQ(dilate(m, 0), m);
}

TEST(LocalAccuracy, Examples) {
  const auto tube = fixtures::render_tube(40, 40, {20, 20}, 0.4, 3.0);
  const BinaryMask& gt = tube.mask;
  EXPECT_DOUBLE_EQ(local_accuracy(gt, gt, 2), 1.0);
  const BinaryMask region = dilate(gt, 2);
  EXPECT_DOUBLE_EQ(local_accuracy(BinaryMask(40, 40, true), gt, 2),
                   static_cast<double>(gt.count()) / static_cast<double>(region.count()));
  BinaryMask seg(40, 40);
  for (int y = 0; y < 40; ++y)
    for (int x = 0; x < 40; ++x) seg.set(x, y, (x * 7 + y * 3) % 5 == 0);
  EXPECT_DOUBLE_EQ(local_accuracy(seg, gt, 100), confusion_metrics(seg, gt).accuracy);
  EXPECT_THROW(local_accuracy(seg, BinaryMask(40, 40), 2), std::invalid_argument);
}

TEST(BifurcationBbDice, Examples) {
  const BifurcationBox box{3.0, 3.0, 2.0};  // pixels 1..4 in x and y
  const BinaryMask region = box_region(box, 8, 8);
  EXPECT_EQ(region.count(), 16u);
  EXPECT_TRUE(region(1, 1));
  EXPECT_TRUE(region(4, 4));
  EXPECT_FALSE(region(5, 4));

  BinaryMask gt(8, 8), seg(8, 8);
  for (int y = 1; y <= 2; ++y)
    for (int x = 1; x <= 4; ++x) gt.set(x, y, true);  // 8 pixels in the box
  for (int x = 1; x <= 4; ++x) seg.set(x, 1, true);
  seg.set(1, 2, true);
  seg.set(2, 2, true);  // 6 matched
  seg.set(1, 4, true);
  seg.set(2, 4, true);  // 2 extra
  seg.set(7, 7, true);  // outside the box, ignored
  gt.set(0, 0, true);   // outside the box, ignored
  const std::vector<BifurcationBox> boxes{box};
  EXPECT_DOUBLE_EQ(bifurcation_bb_dice(seg, gt, boxes), 0.75);
  EXPECT_DOUBLE_EQ(bifurcation_bb_dice(gt, gt, boxes), 1.0);
  EXPECT_DOUBLE_EQ(bifurcation_bb_dice(BinaryMask(8, 8), gt, boxes), 0.0);
  EXPECT_THROW(bifurcation_bb_dice(seg, gt, {}), std::invalid_argument);
}

TEST(BifurcationBbDice, UnionOfOverlappingBoxesCountsOnce) {
  BinaryMask gt(10, 10), seg(10, 10);
  gt.set(4, 4, true);
  seg.set(4, 4, true);
  seg.set(5, 5, true);
  const std::vector<BifurcationBox> twice{{4.5, 4.5, 1.0}, {4.5, 4.5, 1.0}};
  EXPECT_DOUBLE_EQ(bifurcation_bb_dice(seg, gt, twice), 2.0 / 3.0);
  const std::vector<BifurcationBox> clipped{{0.0, 0.0, 3.0}};
  EXPECT_EQ(box_region(clipped[0], 10, 10).count(), 9u);
}

TEST(Evaluate, ReportConsistency) {
  const auto tube = fixtures::render_tube(32, 32, {16, 16}, 0.9, 2.5);
  const ScalarField2D& s = tube.image;
  const EvalReport r = evaluate(s, tube.mask, 0.4);
  const Confusion c = confusion(threshold_mask(s, 0.4), tube.mask);
  EXPECT_DOUBLE_EQ(r.dice, dice_of(c));
  EXPECT_DOUBLE_EQ(r.accuracy, accuracy_of(c));
  EXPECT_DOUBLE_EQ(r.sensitivity, sensitivity_of(c));
  EXPECT_DOUBLE_EQ(r.specificity, specificity_of(c));
  EXPECT_EQ(r.n_pos, tube.mask.count());
  EXPECT_EQ(r.n_pos + r.n_neg, 32u * 32u);
  EXPECT_DOUBLE_EQ(r.auc, roc_auc(s, tube.mask));
  EXPECT_DOUBLE_EQ(r.threshold, 0.4);
  EXPECT_FALSE(r.bb_dice.has_value());
  const std::vector<BifurcationBox> boxes{{16, 16, 6}};
  EXPECT_TRUE(evaluate(s, tube.mask, 0.4, nullptr, 2, boxes).bb_dice.has_value());
}

TEST(Serialization, JsonKeys) {
  EvalReport r;
  r.auc = 0.5;
  auto j = nlohmann::json::parse(to_json(r));
  for (const char* k : {"auc", "accuracy", "local_accuracy", "dice", "sensitivity", "specificity", "threshold",
                        "n_pos", "n_neg"})
    EXPECT_TRUE(j.contains(k)) << k;
  EXPECT_FALSE(j.contains("bb_dice"));
  r.bb_dice = 0.25;
  j = nlohmann::json::parse(to_json(r));
  EXPECT_DOUBLE_EQ(j["bb_dice"].get<double>(), 0.25);
}

TEST(Serialization, CsvRowAndNumbers) {
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(2.0), "2");
  EXPECT_EQ(std::stod(format_number(1.0 / 3.0)), 1.0 / 3.0);
  CsvRow r{"ours", 0.2, "7", {}};
  r.report.dice = 0.75;
  r.report.n_pos = 3;
  r.report.n_neg = 4;
  EXPECT_EQ(csv_header(),
            "method,sigma,seed,auc,accuracy,local_accuracy,dice,sensitivity,specificity,threshold,n_pos,n_neg");
  EXPECT_EQ(to_csv(r), "ours,0.2,7,0,0,0,0.75,0,0,0,3,4");
}
