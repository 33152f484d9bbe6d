#include <curlog/segmenter.hpp>

#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

using namespace curlog;

namespace {

std::vector<std::string> texts(const std::vector<Segment>& segs) {
    std::vector<std::string> out;
    for (const auto& s : segs) out.push_back(s.text);
    return out;
}

FragmentSet fixture_fragments() {
    return segment_corpus(ingest_file(test::fixture("tickets_small.jsonl")).corpus);
}

}  // namespace

TEST(SegmentEntry, SplitsAtSentencePeriods) {
    EXPECT_EQ(texts(segment_entry("Reviewed deposit. Drafted plan.")),
              (std::vector<std::string>{"Reviewed deposit", "Drafted plan"}));
}

TEST(SegmentEntry, DecimalPointDoesNotSplit) {
    EXPECT_EQ(texts(segment_entry("Spent 1.5 hrs fixing labels")),
              (std::vector<std::string>{"Spent 1.5 hrs fixing labels"}));
}

TEST(SegmentEntry, NoDelimiterGivesOneFragment) {
    EXPECT_EQ(texts(segment_entry("1QC")), (std::vector<std::string>{"1QC"}));
}

TEST(SegmentEntry, LineBreaksSplitAndEmptyPiecesDrop) {
    EXPECT_EQ(texts(segment_entry("a one\r\n\r\n  b two  \n. \nc")),
              (std::vector<std::string>{"a one", "b two", "c"}));
    EXPECT_TRUE(segment_entry("").empty());
    EXPECT_TRUE(segment_entry(" . \n ").empty());
}

TEST(SegmentEntry, SpansPointIntoTheSource) {
    const std::string src = "  Reviewed deposit.\tDrafted plan";
    for (const auto& s : segment_entry(src)) EXPECT_EQ(src.substr(s.span.start, s.span.end - s.span.start), s.text);
}

TEST(SegmentEntry, OnlyDelimitersAndWhitespaceAreRemoved) {
    const std::string src = "Ran 1QC. Emailed PI\r\nUpdated e.g. metadata.\n\nDone";
    std::size_t pos = 0;
    for (const auto& s : segment_entry(src)) {
        for (; pos < s.span.start; ++pos) {
            const char ch = src[pos];
            EXPECT_TRUE(ch == '.' || ch == '\n' || ch == '\r' || ch == ' ' || ch == '\t') << int(ch);
        }
        pos = s.span.end;
    }
}

TEST(Apportion, EqualSplit) {
    std::vector<Segment> three(3), two(2);
    EXPECT_EQ(equal_apportion(6.0, three), (std::vector<double>{2.0, 2.0, 2.0}));
    auto h = equal_apportion(1.0, two);
    EXPECT_EQ(h, (std::vector<double>{0.5, 0.5}));
    std::vector<Segment> seven(7);
    auto s = equal_apportion(1.0, seven);
    double sum = 0.0;
    for (double v : s) sum += v;
    EXPECT_LE(std::fabs(sum - 1.0), std::numeric_limits<double>::epsilon());
}

TEST(SegmentCorpus, FixtureHasTwentyFragments) {
    auto set = fixture_fragments();
    EXPECT_EQ(set.fragments.size(), 20u);
    ASSERT_EQ(set.empty_entries.size(), 1u);
    EXPECT_EQ(set.empty_entries[0].ticket_id, "T06");
    EXPECT_DOUBLE_EQ(set.unattributable_hours, 1.5);
    EXPECT_DOUBLE_EQ(set.total_hours(), 33.5);
    EXPECT_EQ(set.fragments[0].fragment_id, "T01:0:0");
    EXPECT_EQ(set.fragments[1].text, "Drafted processing plan");
    EXPECT_EQ(set.fragments[5].study_id, "S03");
}

TEST(SegmentCorpus, HoursAreConservedPerEntry) {
    Corpus c = ingest_file(test::fixture("tickets_small.jsonl")).corpus;
    auto set = segment_corpus(c);
    for (const auto& t : c.tickets) {
        for (std::size_t e = 0; e < t.work_logs.size(); ++e) {
            double sum = 0.0;
            std::size_t n = 0;
            for (const auto& f : set.fragments)
                if (f.ticket_id == t.ticket_id && f.entry_index == e) {
                    sum += f.apportioned_hours;
                    ++n;
                }
            if (n == 0) continue;
            EXPECT_LE(std::fabs(sum - t.work_logs[e].time_spent_hours),
                      std::numeric_limits<double>::epsilon() * t.work_logs[e].time_spent_hours);
        }
    }
}

TEST(SegmentCorpus, JsonlRoundTripAndDeterminism) {
    auto a = fixture_fragments();
    auto b = fixture_fragments();
    EXPECT_EQ(fragments_to_jsonl(a), fragments_to_jsonl(b));
    auto back = fragments_from_jsonl(fragments_to_jsonl(a));
    EXPECT_EQ(fragments_to_jsonl(back), fragments_to_jsonl(a));
    ASSERT_EQ(back.fragments.size(), a.fragments.size());
    EXPECT_EQ(back.fragments[3].apportioned_hours, a.fragments[3].apportioned_hours);
}

TEST(SegmentCorpus, CustomApportionerIsUsed) {
    Corpus c = ingest_file(test::fixture("tickets_small.jsonl")).corpus;
    auto first_gets_all = [](double hours, std::span<const Segment> segs) {
        std::vector<double> h(segs.size(), 0.0);
        if (!h.empty()) h[0] = hours;
        return h;
    };
    auto set = segment_corpus(c, first_gets_all);
    EXPECT_DOUBLE_EQ(set.fragments[0].apportioned_hours, 2.0);
    EXPECT_DOUBLE_EQ(set.fragments[1].apportioned_hours, 0.0);
}
