#include <gtest/gtest.h>

#include <sstream>

#include "oracles.hpp"
#include "visionguide/eval.hpp"
#include "visionguide/random.hpp"

using namespace visionguide;

TEST(Assign, NormalisedDistancePicksLargerCircle) {
    const std::vector<CircleAnnotation> anns{{0, 0, 100}, {150, 0, 25}};
    const auto a = assign({{100, 0}}, anns);
    ASSERT_TRUE(a[0].annotation);
    EXPECT_EQ(*a[0].annotation, 0u);
    EXPECT_DOUBLE_EQ(a[0].normalized_distance, 1.0);
}

TEST(Assign, CentreBoundaryTiesAndEmpty) {
    const std::vector<CircleAnnotation> anns{{10, 10, 5}, {30, 10, 5}};
    EXPECT_EQ(assign({{10, 10}}, anns)[0].normalized_distance, 0.0);
    EXPECT_DOUBLE_EQ(assign({{15, 10}}, anns)[0].normalized_distance, 1.0);
    EXPECT_EQ(*assign({{20, 10}}, anns)[0].annotation, 0u);
    const auto none = assign({{1, 1}}, {});
    EXPECT_FALSE(none[0].annotation);
    const MatchReport r = report(none, {}, 1.0);
    EXPECT_EQ(r.fp, 1);
    EXPECT_EQ(r.precision, 0.0);
}

TEST(Report, Examples) {
    const std::vector<CircleAnnotation> one{{50, 50, 10}};
    const MatchReport r = report(assign({{50, 50}}, one), one, 1.0);
    EXPECT_EQ(r.tp, 1);
    EXPECT_EQ(r.fp, 0);
    EXPECT_EQ(r.fn, 0);
    EXPECT_EQ(r.precision, 1.0);
    EXPECT_EQ(r.f2, 1.0);

    const MatchReport empty = report({}, one, 1.0);
    EXPECT_EQ(empty.fn, 1);
    EXPECT_EQ(empty.recall, 0.0);
    EXPECT_EQ(empty.f1, 0.0);
    EXPECT_THROW(report({}, one, 0.0), InvalidArgument);
}

TEST(FBeta, Values) {
    EXPECT_NEAR(f_beta(0.5, 1.0, 1.0), 2.0 / 3.0, 1e-12);
    EXPECT_NEAR(f_beta(0.5, 1.0, 2.0), 5.0 / 6.0, 1e-12);
    EXPECT_NEAR(f_beta(1.0, 0.5, 1.0), 2.0 / 3.0, 1e-12);
    EXPECT_NEAR(f_beta(1.0, 0.5, 2.0), 5.0 / 9.0, 1e-12);
    EXPECT_EQ(f_beta(0.0, 0.0, 2.0), 0.0);
    for (double p : {0.1, 0.37, 0.8, 1.0}) {
        EXPECT_NEAR(f_beta(p, p, 1.0), p, 1e-12);
        EXPECT_NEAR(f_beta(p, p, 2.0), p, 1e-12);
    }
}

TEST(FBeta, RecallEmphasis) {
    Rng rng(4);
    for (int i = 0; i < 200; ++i) {
        const double p = rng.uniform(0.01, 1), r = rng.uniform(0.01, 1);
        if (r > p) {
            EXPECT_GT(f_beta(p, r, 2), f_beta(p, r, 1));
        } else if (r < p) {
            EXPECT_LT(f_beta(p, r, 2), f_beta(p, r, 1));
        }
    }
}

TEST(Curve, ThresholdingAndMonotoneRecall) {
    const std::vector<CircleAnnotation> one{{0, 0, 10}};
    const MetricCurve c = curve({{15, 0}}, one, {1.0, 2.0});
    EXPECT_EQ(c.reports[0].tp, 0);
    EXPECT_EQ(c.reports[1].tp, 1);
    EXPECT_THROW(curve({}, one, {}), ConfigError);
    EXPECT_THROW(curve({}, one, {2.0, 1.0}), ConfigError);
}

TEST(Report, MatchesBruteForceRecount) {
    Rng rng(500);
    for (int t = 0; t < 500; ++t) {
        std::vector<CircleAnnotation> anns(1 + rng.below(4));
        for (auto& a : anns) a = {rng.uniform(0, 100), rng.uniform(0, 100), rng.uniform(3, 30)};
        std::vector<Point2> preds(rng.below(7));
        for (auto& p : preds) p = {rng.uniform(0, 100), rng.uniform(0, 100)};
        const auto thresholds = default_thresholds();
        const MetricCurve c = curve(preds, anns, thresholds);
        std::vector<double> prev_recall{0.0};
        for (std::size_t i = 0; i < thresholds.size(); ++i) {
            const auto ref = oracle::match_counts(preds, anns, thresholds[i]);
            const MatchReport& r = c.reports[i];
            ASSERT_EQ(r.tp, ref.tp);
            ASSERT_EQ(r.fp, ref.fp);
            ASSERT_EQ(r.fn, ref.fn);
            EXPECT_EQ(r.tp + r.fp, static_cast<long>(preds.size()));
            EXPECT_GE(r.recall, prev_recall.back());
            prev_recall.push_back(r.recall);
        }
    }
}

TEST(Report, FirstOnlyCountsDuplicatesAsFalsePositives) {
    const std::vector<CircleAnnotation> one{{0, 0, 10}};
    const auto a = assign({{1, 0}, {0, 2}, {50, 0}}, one);
    const MatchReport all = report(a, one, 1.0, DuplicatePolicy::CountAll);
    EXPECT_EQ(all.tp, 2);
    EXPECT_EQ(all.fp, 1);
    const MatchReport first = report(a, one, 1.0, DuplicatePolicy::FirstOnly);
    EXPECT_EQ(first.tp, 1);
    EXPECT_EQ(first.fp, 2);
    EXPECT_EQ(first.fn, 0);
}

TEST(Aggregate, MicroAveragesCounts) {
    const std::vector<CircleAnnotation> a{{0, 0, 10}};
    const MetricCurve hit = curve({{0, 0}}, a, {1.0});
    const MetricCurve miss = curve({{100, 0}, {200, 0}}, a, {1.0});
    const MetricCurve agg = aggregate({hit, miss}, {1.0});
    EXPECT_EQ(agg.reports[0].tp, 1);
    EXPECT_EQ(agg.reports[0].fp, 2);
    EXPECT_EQ(agg.reports[0].fn, 1);
    EXPECT_NEAR(agg.reports[0].precision, 1.0 / 3.0, 1e-12);
    EXPECT_NEAR(agg.reports[0].recall, 0.5, 1e-12);
}

TEST(MetricsCsv, Format) {
    const std::vector<CircleAnnotation> a{{0, 0, 10}};
    std::ostringstream out;
    write_metrics_csv(curve({{0, 0}, {100, 0}}, a, {0.5, 1.5}), out);
    EXPECT_EQ(out.str(),
              "threshold,tp,fp,fn,precision,recall,f1,f2\n"
              "0.5,1,1,0,0.5,1,0.6666666666666666,0.8333333333333334\n"
              "1.5,1,1,0,0.5,1,0.6666666666666666,0.8333333333333334\n");
    EXPECT_EQ(default_thresholds().size(), 20u);
    EXPECT_DOUBLE_EQ(default_thresholds().back(), 2.0);
}
