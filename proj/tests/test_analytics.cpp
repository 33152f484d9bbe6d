#include <curlog/analytics.hpp>
#include <curlog/synthetic.hpp>

#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace curlog;

namespace {

using AC = ActionClass;

/// Hand labels for the 20 fixture fragments, in segmentation order.
const std::vector<AC> kHandLabels{
    AC::InitialReviewAndPlanning, AC::InitialReviewAndPlanning, AC::QualityChecks,  // T01
    AC::DataTransformation,       AC::QualityChecks,                                // T02
    AC::Metadata,                 AC::Communication,            AC::NonCuration,    // T03
    AC::Documentation,                                                              // T04
    AC::DataTransformation,       AC::QualityChecks,            AC::Communication,  // T05
    AC::QualityChecks,                                                              // T06
    AC::DataTransformation,                                                         // T07
    AC::Communication,            AC::Metadata,                                     // T08
    AC::QualityChecks,            AC::Communication,            AC::Other,          // T09
    AC::InitialReviewAndPlanning,                                                   // T10
};

struct Fixture {
    Corpus corpus;
    FragmentSet fragments;
    std::vector<PredictedFragment> preds;
};

Fixture hand_labeled() {
    Fixture f;
    f.corpus = ingest_file(test::fixture("tickets_small.jsonl")).corpus;
    f.fragments = segment_corpus(f.corpus);
    for (std::size_t i = 0; i < f.fragments.fragments.size(); ++i)
        f.preds.push_back({f.fragments.fragments[i], kHandLabels.at(i), false});
    return f;
}

}  // namespace

TEST(HoursByAction, HandTallies) {
    auto f = hand_labeled();
    ASSERT_EQ(f.preds.size(), kHandLabels.size());
    auto r = hours_by_action(f.preds);
    EXPECT_DOUBLE_EQ(r.included_hours, 31.5);
    EXPECT_DOUBLE_EQ(r.excluded_hours, 0.5);
    EXPECT_DOUBLE_EQ(r.row(AC::InitialReviewAndPlanning).hours, 3.0);
    EXPECT_DOUBLE_EQ(r.row(AC::DataTransformation).hours, 4.5);
    EXPECT_DOUBLE_EQ(r.row(AC::Metadata).hours, 3.0);
    EXPECT_DOUBLE_EQ(r.row(AC::Documentation).hours, 2.5);
    EXPECT_DOUBLE_EQ(r.row(AC::QualityChecks).hours, 11.5);
    EXPECT_DOUBLE_EQ(r.row(AC::Communication).hours, 6.0);
    EXPECT_DOUBLE_EQ(r.row(AC::Other).hours, 1.0);
    EXPECT_NEAR(r.row(AC::QualityChecks).percent_hours, 100.0 * 11.5 / 31.5, 1e-9);
    EXPECT_TRUE(r.row(AC::NonCuration).excluded);
    EXPECT_EQ(r.row(AC::NonCuration).percent_hours, 0.0);
}

TEST(HoursByAction, ConservationAgainstSegmentedHours) {
    auto f = hand_labeled();
    for (const ActionSet& exclude : {ActionSet{}, kDefaultExclusions, ActionSet{AC::Other, AC::NonCuration}}) {
        auto r = hours_by_action(f.preds, exclude);
        EXPECT_NEAR(r.included_hours + r.excluded_hours + f.fragments.unattributable_hours, f.fragments.total_hours(), 1e-9);
        EXPECT_NEAR(r.included_hours + r.excluded_hours + f.fragments.unattributable_hours, 33.5, 1e-9);
        double pct = 0.0;
        for (const auto& row : r.rows) pct += row.percent_hours;
        EXPECT_NEAR(pct, 100.0, 1e-9);
    }
}

TEST(HoursByAction, EntryAttributionCreditsWholeEntries) {
    auto f = hand_labeled();
    auto r = hours_by_action(f.preds, kDefaultExclusions, HoursAttribution::entry);
    EXPECT_EQ(r.attribution, HoursAttribution::entry);
    EXPECT_DOUBLE_EQ(r.row(AC::InitialReviewAndPlanning).hours, 3.0);
    EXPECT_DOUBLE_EQ(r.row(AC::QualityChecks).hours, 17.0);
    EXPECT_DOUBLE_EQ(r.row(AC::Communication).hours, 14.0);
    EXPECT_DOUBLE_EQ(r.row(AC::NonCuration).hours, 0.5);
}

TEST(HoursByAction, NothingIncludedIsFatal) {
    auto f = hand_labeled();
    ActionSet all(kAllActions.begin(), kAllActions.end());
    EXPECT_THROW(hours_by_action(f.preds, all), Error);
}

TEST(StudiesWithAction, HandTallies) {
    auto f = hand_labeled();
    auto r = action_report(f.preds, f.corpus);
    EXPECT_EQ(r.total_studies, 9u);
    const std::vector<std::pair<AC, std::size_t>> expect{
        {AC::InitialReviewAndPlanning, 2}, {AC::DataTransformation, 3}, {AC::Metadata, 2}, {AC::Documentation, 1},
        {AC::QualityChecks, 4},            {AC::Communication, 4},      {AC::Other, 1},    {AC::NonCuration, 1}};
    for (auto [a, n] : expect) {
        EXPECT_EQ(r.row(a).studies_with_action, n) << to_string(a);
        EXPECT_NEAR(r.row(a).percent_studies, 100.0 * double(n) / 9.0, 1e-9);
    }
}

TEST(StudiesWithAction, TableRowsSortedAndCsvHeader) {
    auto f = hand_labeled();
    auto r = action_report(f.preds, f.corpus);
    auto rows = r.table_rows();
    ASSERT_EQ(rows.size(), 7u);
    for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_GE(rows[i - 1].percent_studies, rows[i].percent_studies);
    const std::string csv = r.to_csv();
    EXPECT_TRUE(csv.starts_with(
        "Action,Percent of studies containing action,Percent of total work log hours classified as action\n"));
    EXPECT_NE(csv.find(",44.4,36.5\n"), std::string::npos) << csv;
    EXPECT_EQ(csv.find("Non"), std::string::npos);
}

TEST(Proportions, ByLevelSumToOneAndShowCommunicationAtL3) {
    auto f = hand_labeled();
    auto g = action_proportions_by(f.preds, f.corpus, GroupKey::level);
    ASSERT_EQ(g.groups.size(), 3u);
    for (const auto& row : g.groups) {
        double sum = 0.0;
        for (double v : row.proportions) sum += v;
        EXPECT_NEAR(sum, 1.0, 1e-9) << row.group;
    }
    const auto comm = index_of(AC::Communication);
    EXPECT_EQ(g.groups[0].group, "L1");
    EXPECT_EQ(g.groups[0].total, 6.0);
    EXPECT_EQ(g.groups[0].proportions[comm], 0.0);
    EXPECT_EQ(g.groups[2].group, "L3");
    EXPECT_EQ(g.groups[2].total, 7.0);
    EXPECT_NEAR(g.groups[2].proportions[comm], 2.0 / 7.0, 1e-12);
    EXPECT_GT(g.groups[2].proportions[comm], g.groups[0].proportions[comm]);
    EXPECT_TRUE(g.to_plot_csv().starts_with("group,action,value\nL1,"));
}

TEST(Proportions, ArchivesOutsideAllowListFoldIntoOther) {
    auto f = hand_labeled();
    auto g = action_proportions_by(f.preds, f.corpus, GroupKey::archive);
    std::vector<std::string> names;
    for (const auto& row : g.groups) names.push_back(row.group);
    EXPECT_EQ(names, (std::vector<std::string>{"BJS", "ICPSR", "Other"}));
    auto by_year = action_proportions_by(f.preds, f.corpus, GroupKey::year);
    EXPECT_EQ(by_year.groups.size(), 3u);
    EXPECT_THROW(group_key_from_string("month"), Error);
}

TEST(Proportions, HoursWeighting) {
    auto f = hand_labeled();
    ProportionOptions opts;
    opts.weight = ProportionWeight::hours;
    auto g = action_proportions_by(f.preds, f.corpus, GroupKey::level, opts);
    EXPECT_DOUBLE_EQ(g.groups[2].total, 15.0);
    EXPECT_NEAR(g.groups[2].proportions[index_of(AC::Communication)], 3.0 / 15.0, 1e-12);
}

TEST(CurationSummary, AverageHoursPerStudyByLevel) {
    auto f = hand_labeled();
    auto s = curation_hours_summary(f.preds, f.corpus);
    auto rows = s.rows_for(SummaryDimension::level);
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_DOUBLE_EQ(rows[0].hours, 7.0);
    EXPECT_EQ(rows[0].studies, 3u);
    EXPECT_DOUBLE_EQ(rows[1].hours, 9.5);
    EXPECT_DOUBLE_EQ(rows[1].avg_hours_per_study, 2.375);
    EXPECT_DOUBLE_EQ(rows[2].hours, 15.0);
    EXPECT_DOUBLE_EQ(rows[2].avg_hours_per_study, 7.5);
}

TEST(Predictions, JsonlRoundTrip) {
    auto f = hand_labeled();
    f.preds[3].low_confidence = true;
    const std::string text = predictions_to_jsonl(f.preds);
    EXPECT_EQ(predictions_to_jsonl(predictions_from_jsonl(text)), text);
    EXPECT_THROW(predictions_from_jsonl("{\"fragment_id\":\"x\"}\n"), Error);
}

TEST(PredictCorpus, OutOfVocabularyFallsBackToMajority) {
    auto f = hand_labeled();
    std::vector<std::string> texts;
    for (const auto& fr : f.fragments.fragments) texts.push_back(fr.text);
    auto space = fit_feature_space(texts, FeatureConfig{});
    auto model = train_cnb(transform(texts, space), kHandLabels);
    model.feature_fingerprint = space.fingerprint();
    EXPECT_EQ(model.majority_class(), AC::QualityChecks);

    FragmentSet probe;
    probe.fragments.push_back(f.fragments.fragments[0]);
    probe.fragments.push_back(f.fragments.fragments[0]);
    probe.fragments[1].text = "zzz qqq";
    auto preds = predict_corpus(model, probe, space);
    EXPECT_FALSE(preds[0].low_confidence);
    EXPECT_EQ(preds[1].label, AC::QualityChecks);
    EXPECT_TRUE(preds[1].low_confidence);
}

TEST(PredictCorpus, SyntheticCorpusRecoversGeneratingClasses) {
    auto labels = synthetic::labels({});
    auto space = fit_feature_space(labels.texts(), FeatureConfig{});
    auto model = train_cnb(transform(labels.texts(), space), labels.labels());
    model.feature_fingerprint = space.fingerprint();

    auto gen = synthetic::corpus({});
    auto fragments = segment_corpus(gen.corpus);
    ASSERT_EQ(fragments.fragments.size(), gen.truth.size());
    auto preds = predict_corpus(model, fragments, space);
    std::size_t hit = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) hit += preds[i].label == gen.truth[i];
    EXPECT_GE(double(hit) / double(preds.size()), 0.90);
}

TEST(Charts, SvgOutputsAreWellFormed) {
    auto f = hand_labeled();
    LabelSet set;
    for (std::size_t i = 0; i < f.preds.size(); ++i)
    {
        LabeledFragment item;
        item.fragment_id = f.preds[i].fragment.fragment_id;
        item.text = f.preds[i].fragment.text;
        item.label = kHandLabels[i];
        set.push_back(item);
    }
    auto dist = label_distribution(set);
    const std::string svg = render_distribution_svg(dist);
    EXPECT_TRUE(svg.starts_with("<svg"));
    EXPECT_TRUE(svg.ends_with("</svg>\n"));
    EXPECT_TRUE(label_distribution_csv(dist).starts_with("action,count,proportion\n"));
    const std::string stacked = render_proportions_svg(action_proportions_by(f.preds, f.corpus, GroupKey::level));
    EXPECT_NE(stacked.find("L3"), std::string::npos);
}
