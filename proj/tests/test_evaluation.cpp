#include <curlog/evaluation.hpp>

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

using namespace curlog;

namespace {

constexpr auto A = ActionClass::InitialReviewAndPlanning;
constexpr auto B = ActionClass::DataTransformation;

/// Label sequences realizing a confusion matrix over the first classes of the schema.
std::pair<std::vector<ActionClass>, std::vector<ActionClass>> realize(const std::vector<std::vector<long>>& m) {
    std::vector<ActionClass> t, p;
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = 0; j < m.size(); ++j)
            for (long k = 0; k < m[i][j]; ++k) {
                t.push_back(kAllActions[i]);
                p.push_back(kAllActions[j]);
            }
    return {t, p};
}

MetricsReport report_for(const std::vector<std::vector<long>>& m) {
    auto [t, p] = realize(m);
    std::vector<ActionClass> classes(kAllActions.begin(), kAllActions.begin() + static_cast<long>(m.size()));
    return metrics(confusion_matrix(t, p, classes));
}

}  // namespace

TEST(Confusion, CountsRowsTrueColumnsPredicted) {
    std::vector<ActionClass> t{A, A, B}, p{A, B, B};
    auto cm = confusion_matrix(t, p, observed_classes(t, p));
    ASSERT_EQ(cm.n(), 2u);
    EXPECT_EQ(cm.at(0, 0), 1u);
    EXPECT_EQ(cm.at(0, 1), 1u);
    EXPECT_EQ(cm.at(1, 0), 0u);
    EXPECT_EQ(cm.at(1, 1), 1u);
    EXPECT_EQ(cm.total(), 3u);
    EXPECT_EQ(cm.trace(), 2u);
    EXPECT_EQ(cm.row_sum(0), 2u);
    EXPECT_EQ(cm.col_sum(1), 2u);
}

TEST(Confusion, InputErrors) {
    std::vector<ActionClass> t{A, B}, p{A};
    EXPECT_THROW(confusion_matrix(t, p, observed_classes(t, t)), Error);
    EXPECT_THROW(confusion_matrix({}, {}, std::vector{A}), Error);
    std::vector<ActionClass> only_a{A};
    EXPECT_THROW(confusion_matrix(t, t, only_a), Error);
}

TEST(Metrics, TwoClassWorkedExample) {
    auto r = report_for({{1, 1}, {0, 1}});
    EXPECT_NEAR(r.accuracy, 2.0 / 3.0, 1e-12);
    ASSERT_EQ(r.per_class.size(), 2u);
    EXPECT_DOUBLE_EQ(r.per_class[0].precision, 1.0);
    EXPECT_DOUBLE_EQ(r.per_class[0].recall, 0.5);
    EXPECT_NEAR(r.per_class[0].f1, 2.0 / 3.0, 1e-12);
    EXPECT_DOUBLE_EQ(r.per_class[1].precision, 0.5);
    EXPECT_DOUBLE_EQ(r.per_class[1].recall, 1.0);
    EXPECT_NEAR(r.macro.precision, 0.75, 1e-12);
    EXPECT_NEAR(r.macro.recall, 0.75, 1e-12);
    EXPECT_NEAR(r.macro.f1, 2.0 / 3.0, 1e-12);
    EXPECT_NEAR(r.weighted.precision, 2.5 / 3.0, 1e-12);
    EXPECT_NEAR(r.weighted.recall, 2.0 / 3.0, 1e-12);
    EXPECT_NEAR(r.weighted.f1, 2.0 / 3.0, 1e-12);
}

TEST(Metrics, ZeroDivisionResolvesToZeroAndIsFlagged) {
    auto r = report_for({{2, 0}, {1, 0}});
    EXPECT_EQ(r.per_class[1].precision, 0.0);
    EXPECT_TRUE(r.per_class[1].precision_undefined);
    EXPECT_TRUE(r.per_class[1].f1_undefined);
    EXPECT_FALSE(r.per_class[0].precision_undefined);
}

TEST(Metrics, RandomMatricesMatchOracle) {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t k = 2 + rng() % 7;
        std::vector<std::vector<long>> m(k, std::vector<long>(k));
        for (auto& row : m)
            for (auto& v : row) v = static_cast<long>(rng() % 12);
        m[0][0] += 1;
        auto r = report_for(m);
        auto expect = oracle::per_class(m);
        long total = 0, trace = 0;
        for (std::size_t i = 0; i < k; ++i) {
            trace += m[i][i];
            for (long v : m[i]) total += v;
        }
        EXPECT_NEAR(r.accuracy, double(trace) / double(total), 1e-12);
        // Weighted recall is accuracy.
        EXPECT_NEAR(r.weighted.recall, r.accuracy, 1e-12);
        for (std::size_t c = 0; c < k; ++c) {
            EXPECT_NEAR(r.per_class[c].precision, expect[c].precision, 1e-12);
            EXPECT_NEAR(r.per_class[c].recall, expect[c].recall, 1e-12);
            EXPECT_NEAR(r.per_class[c].f1, expect[c].f1, 1e-12);
        }
    }
}

TEST(Metrics, InvariantUnderSamplePermutation) {
    std::mt19937_64 rng(5);
    auto [t, p] = realize({{5, 2, 1}, {0, 4, 3}, {2, 2, 6}});
    auto base = metrics(confusion_matrix(t, p, observed_classes(t, p)));
    std::vector<std::size_t> idx(t.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::shuffle(idx.begin(), idx.end(), rng);
    std::vector<ActionClass> t2, p2;
    for (auto i : idx) {
        t2.push_back(t[i]);
        p2.push_back(p[i]);
    }
    auto shuffled = metrics(confusion_matrix(t2, p2, observed_classes(t2, p2)));
    EXPECT_EQ(report_to_json(shuffled), report_to_json(base));
}

TEST(Compare, MarksBestIncludingTies) {
    auto a = report_for({{2, 0}, {0, 2}});
    a.model = "a";
    auto b = report_for({{2, 0}, {0, 2}});
    b.model = "b";
    auto c = report_for({{1, 1}, {0, 2}});
    c.model = "c";
    std::vector<MetricsReport> reports{a, b, c};
    auto table = compare_models(reports);
    ASSERT_EQ(table.rows.size(), 3u);
    EXPECT_TRUE(table.rows[0].best[0]);
    EXPECT_TRUE(table.rows[1].best[0]);
    EXPECT_FALSE(table.rows[2].best[0]);
    EXPECT_TRUE(table.to_csv().starts_with("Classifier,Accuracy,F1,Precision,Recall,best\n"));
    EXPECT_NE(table.to_text().find("1.00*"), std::string::npos);
    auto macro = compare_models(reports, Averaging::macro);
    EXPECT_EQ(macro.averaging, Averaging::macro);
}

TEST(Compare, DifferentTestSetsAreRejected) {
    std::vector<std::string> ids1{"f1", "f2"}, ids2{"f1", "f3"};
    std::vector<ActionClass> y{A, B};
    auto a = report_for({{1, 0}, {0, 1}});
    a.test_fingerprint = test_set_fingerprint(ids1, y);
    auto b = a;
    b.test_fingerprint = test_set_fingerprint(ids2, y);
    EXPECT_NE(a.test_fingerprint, b.test_fingerprint);
    std::vector<MetricsReport> reports{a, b};
    EXPECT_THROW(compare_models(reports), Error);
    EXPECT_THROW(compare_models(std::vector<MetricsReport>{}), Error);
}
