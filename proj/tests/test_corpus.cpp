#include <curlog/corpus.hpp>

#include "support.hpp"

#include <gtest/gtest.h>

#include <regex>

using namespace curlog;

namespace {

std::string ticket_line(const std::string& id, const std::string& study, int level, const std::string& created,
                        const std::string& logs) {
    return R"({"ticket_id":")" + id + R"(","study_id":")" + study + R"(","curation_level":)" +
           std::to_string(level) + R"(,"archive":"icpsr","created_date":")" + created + R"(","work_logs":)" + logs +
           "}\n";
}

const std::string kOneLog = R"([{"author":"Jane Doe","logged_date":"2018-01-02","time_spent_hours":2,"description":"Ran checks"}])";

Corpus small_fixture() {
    auto r = ingest_file(test::fixture("tickets_small.jsonl"));
    EXPECT_TRUE(r.errors.empty());
    return r.corpus;
}

WorkLogEntry entry(std::string author, double hours, std::string description) {
    return {std::move(author), Date{2018, 1, 1}, hours, std::move(description)};
}

}  // namespace

TEST(Date, ParsesIsoDatesAndTimestampPrefixes) {
    auto d = Date::parse("2019-12-31");
    ASSERT_TRUE(d);
    EXPECT_EQ(d->to_string(), "2019-12-31");
    auto ts = Date::parse("2018-03-04T10:00:00Z");
    ASSERT_TRUE(ts);
    EXPECT_EQ(ts->to_string(), "2018-03-04");
    EXPECT_FALSE(Date::parse("2018-13-01"));
    EXPECT_FALSE(Date::parse("2018-02-30"));
    EXPECT_FALSE(Date::parse("yesterday"));
    EXPECT_LT(*Date::parse("2017-02-01"), *Date::parse("2017-02-02"));
}

TEST(Csv, ReadsQuotedFieldsAndTracksLines) {
    auto recs = parse_csv("a,b\n\"x, y\",\"multi\nline\"\n\"q\"\"uote\",z\n");
    ASSERT_EQ(recs.size(), 3u);
    EXPECT_EQ(recs[1].fields[0], "x, y");
    EXPECT_EQ(recs[1].fields[1], "multi\nline");
    EXPECT_EQ(recs[2].line, 4u);
    EXPECT_EQ(recs[2].fields[0], "q\"uote");
    EXPECT_EQ(csv_escape("a,b"), "\"a,b\"");
    EXPECT_EQ(csv_escape("plain"), "plain");
}

TEST(Ingest, WellFormedRecordsBecomeTickets) {
    std::string text = ticket_line("A", "S1", 1, "2018-01-01", kOneLog) +
                       ticket_line("B", "S2", 2, "2018-01-01", kOneLog) +
                       ticket_line("C", "S3", 3, "2018-01-01", kOneLog);
    auto r = ingest_tickets_text(text, InputFormat::jsonl);
    EXPECT_EQ(r.corpus.tickets.size(), 3u);
    EXPECT_TRUE(r.errors.empty());
    EXPECT_EQ(r.corpus.tickets[0].archive, "ICPSR");
}

TEST(Ingest, OutOfRangeLevelIsARecordError) {
    std::string text = ticket_line("A", "S1", 1, "2018-01-01", kOneLog) +
                       ticket_line("B", "S2", 4, "2018-01-01", kOneLog) +
                       ticket_line("C", "S3", 3, "2018-01-01", kOneLog);
    auto r = ingest_tickets_text(text, InputFormat::jsonl);
    EXPECT_EQ(r.corpus.tickets.size(), 2u);
    ASSERT_EQ(r.errors.size(), 1u);
    EXPECT_EQ(r.errors[0].line, 2u);
    EXPECT_NE(r.errors[0].message.find("level out of range"), std::string::npos);
}

TEST(Ingest, MissingRequiredFieldsAreRecordErrors) {
    std::string text = R"({"study_id":"S","curation_level":1,"created_date":"2018-01-01","work_logs":[]})"
                       "\n" R"({"ticket_id":"T","study_id":"S","created_date":"2018-01-01","work_logs":[]})"
                       "\n" R"({"ticket_id":"U","study_id":"S","curation_level":1,"created_date":"2018-01-01"})"
                       "\nnot json\n";
    auto r = ingest_tickets_text(text, InputFormat::jsonl);
    EXPECT_TRUE(r.corpus.tickets.empty());
    ASSERT_EQ(r.errors.size(), 4u);
    EXPECT_NE(r.errors[0].message.find("ticket_id"), std::string::npos);
    EXPECT_NE(r.errors[1].message.find("curation_level"), std::string::npos);
    EXPECT_NE(r.errors[2].message.find("work_logs"), std::string::npos);
    EXPECT_EQ(r.errors[3].line, 4u);
}

TEST(Ingest, DuplicateTicketIdIsFatalWithBothLines) {
    std::string text = ticket_line("A", "S1", 1, "2018-01-01", kOneLog) + "\n" +
                       ticket_line("A", "S2", 2, "2018-01-01", kOneLog);
    try {
        ingest_tickets_text(text, InputFormat::jsonl);
        FAIL() << "expected duplicate error";
    } catch (const Error& e) {
        EXPECT_STREQ(e.what(), "duplicate ticket_id A at lines 1 and 3");
    }
}

TEST(Ingest, UnknownFieldsAreReportedNotDropped) {
    std::string text = R"({"ticket_id":"A","study_id":"S","curation_level":"L2","archive":"bjs",)"
                       R"("created_date":"2018-01-01","work_logs":[],"priority":"high"})" "\n";
    auto r = ingest_tickets_text(text, InputFormat::jsonl);
    ASSERT_EQ(r.corpus.tickets.size(), 1u);
    EXPECT_EQ(r.corpus.tickets[0].curation_level, CurationLevel::L2);
    ASSERT_EQ(r.warnings.size(), 1u);
    EXPECT_NE(r.warnings[0].find("priority"), std::string::npos);
}

TEST(Ingest, CsvRowsRegroupByTicket) {
    std::string text =
        "ticket_id,study_id,curation_level,archive,created_date,author,logged_date,time_spent_hours,description\n"
        "A,S1,1,ICPSR,2018-01-01,Jane Doe,2018-01-02,1.5,\"Reviewed deposit. Drafted plan.\"\n"
        "B,S2,2,BJS,2018-02-01,John Roe,2018-02-03,2,Ran 1QC\n"
        "A,S1,1,ICPSR,2018-01-01,Jane Doe,2018-01-05,0.5,Emailed PI\n"
        "C,S3,3,BJS,2018-03-01,,,,\n";
    auto r = ingest_tickets_text(text, InputFormat::csv);
    EXPECT_TRUE(r.errors.empty());
    ASSERT_EQ(r.corpus.tickets.size(), 3u);
    EXPECT_EQ(r.corpus.tickets[0].work_logs.size(), 2u);
    EXPECT_DOUBLE_EQ(r.corpus.tickets[0].total_hours(), 2.0);
    EXPECT_TRUE(r.corpus.tickets[2].work_logs.empty());
}

TEST(Ingest, CsvConflictingTicketAttributesAreRecordErrors) {
    std::string text =
        "ticket_id,study_id,curation_level,archive,created_date,author,logged_date,time_spent_hours,description\n"
        "A,S1,1,ICPSR,2018-01-01,Jane Doe,2018-01-02,1.5,x\n"
        "A,S1,2,ICPSR,2018-01-01,Jane Doe,2018-01-02,1.5,y\n";
    auto r = ingest_tickets_text(text, InputFormat::csv);
    ASSERT_EQ(r.errors.size(), 1u);
    EXPECT_EQ(r.errors[0].line, 3u);
}

TEST(Ingest, JsonlRoundTripsThroughCanonicalForm) {
    Corpus c = small_fixture();
    auto again = ingest_tickets_text(corpus_to_jsonl(c), InputFormat::jsonl);
    EXPECT_EQ(corpus_to_jsonl(again.corpus), corpus_to_jsonl(c));
}

TEST(Ingest, SmallFixtureHasTenTicketsNineStudies) {
    Corpus c = small_fixture();
    EXPECT_EQ(c.tickets.size(), 10u);
    EXPECT_EQ(c.distinct_studies(), 9u);
    EXPECT_DOUBLE_EQ(c.total_hours(), 33.5);
}

TEST(Deidentify, ReplacesAuthorAndDescription) {
    Corpus c;
    c.tickets.push_back({"A", "S", CurationLevel::L1, "ICPSR", Date{2018, 1, 1},
                         {entry("Jane Doe", 1.0, "Jane Doe ran checks")}});
    std::vector<std::string> names{"Jane Doe"};
    auto r = deidentify(c, names);
    EXPECT_EQ(r.corpus.tickets[0].work_logs[0].author, "CURATOR-001");
    EXPECT_EQ(r.corpus.tickets[0].work_logs[0].description, "CURATOR-001 ran checks");
    EXPECT_TRUE(r.unused_names.empty());
}

TEST(Deidentify, UnusedNameLeavesCorpusUnchanged) {
    Corpus c;
    c.tickets.push_back({"A", "S", CurationLevel::L1, "ICPSR", Date{2018, 1, 1},
                         {entry("John Roe", 1.0, "Ran checks")}});
    std::vector<std::string> names{"Jane Doe"};
    auto r = deidentify(c, names);
    EXPECT_EQ(corpus_to_jsonl(r.corpus), corpus_to_jsonl(c));
    EXPECT_EQ(r.map.pseudonym_for("Jane Doe"), "CURATOR-001");
    ASSERT_EQ(r.unused_names.size(), 1u);
    EXPECT_EQ(r.unused_names[0], "Jane Doe");
}

TEST(Deidentify, SameNameLinksAcrossTickets) {
    Corpus c;
    c.tickets.push_back({"A", "S", CurationLevel::L1, "ICPSR", Date{2018, 1, 1},
                         {entry("John Roe", 1.0, "asked jane doe")}});
    c.tickets.push_back({"B", "S", CurationLevel::L1, "ICPSR", Date{2018, 1, 1},
                         {entry("Jane Doe", 1.0, "Checked with JOHN ROE")}});
    std::vector<std::string> names{"Jane Doe", "John Roe"};
    auto r = deidentify(c, names);
    EXPECT_EQ(r.corpus.tickets[0].work_logs[0].author, "CURATOR-001");
    EXPECT_EQ(r.corpus.tickets[0].work_logs[0].description, "asked CURATOR-002");
    EXPECT_EQ(r.corpus.tickets[1].work_logs[0].author, "CURATOR-002");
    EXPECT_EQ(r.corpus.tickets[1].work_logs[0].description, "Checked with CURATOR-001");
    EXPECT_EQ(r.map.name_for("CURATOR-001"), "John Roe");
}

TEST(Deidentify, LongestNameFirstAndWholeWordOnly) {
    Corpus c;
    c.tickets.push_back({"A", "S", CurationLevel::L1, "ICPSR", Date{2018, 1, 1},
                         {entry("x", 1.0, "Jane Doe-Smith met Jane Doe; Jane Does not count")}});
    std::vector<std::string> names{"Jane Doe", "Jane Doe-Smith"};
    auto r = deidentify(c, names);
    EXPECT_EQ(r.corpus.tickets[0].work_logs[0].description, "CURATOR-001 met CURATOR-002; Jane Does not count");
}

TEST(Deidentify, NoListedNameSurvivesOnTheFixture) {
    Corpus c = small_fixture();
    std::vector<std::string> names{"Jane Doe", "John Roe"};
    auto r = deidentify(c, names);
    const std::string text = corpus_to_jsonl(r.corpus);
    EXPECT_FALSE(std::regex_search(text, std::regex(R"(\bJane Doe\b|\bJohn Roe\b)", std::regex::icase)));
    EXPECT_EQ(r.map.size(), 2u);
    EXPECT_TRUE(r.map.to_csv().starts_with("raw_name,pseudonym\n"));
}

TEST(Deidentify, EmptyNameListIsRejected) {
    std::vector<std::string> names;
    EXPECT_THROW(deidentify(Corpus{}, names), Error);
}

TEST(Filter, DropsLateTicketsAndTicketsWithoutLogs) {
    Corpus c;
    c.tickets.push_back({"in", "S", CurationLevel::L1, "ICPSR", Date{2018, 1, 1}, {entry("a", 1, "x")}});
    c.tickets.push_back({"late", "S", CurationLevel::L1, "ICPSR", Date{2020, 3, 1}, {entry("a", 1, "x")}});
    c.tickets.push_back({"empty", "S", CurationLevel::L1, "ICPSR", Date{2018, 1, 1}, {}});
    FilterCriteria f{Date{2017, 2, 1}, Date{2019, 12, 31}, true};
    Corpus out = filter_corpus(c, f);
    ASSERT_EQ(out.tickets.size(), 1u);
    EXPECT_EQ(out.tickets[0].ticket_id, "in");
    ASSERT_EQ(out.provenance.filter_trail.size(), 1u);
    EXPECT_NE(out.provenance.filter_trail[0].find("removed_out_of_range=1"), std::string::npos);
    EXPECT_NE(out.provenance.filter_trail[0].find("removed_no_worklog=1"), std::string::npos);
    EXPECT_EQ(corpus_to_jsonl(filter_corpus(out, f)), corpus_to_jsonl(out));
}

TEST(Filter, EmptyCriteriaIsIdentity) {
    Corpus c = small_fixture();
    Corpus out = filter_corpus(c, {});
    EXPECT_EQ(corpus_to_jsonl(out), corpus_to_jsonl(c));
    EXPECT_TRUE(out.provenance.filter_trail.empty());
}

TEST(Filter, InvertedRangeIsFatal) {
    FilterCriteria f{Date{2019, 1, 1}, Date{2018, 1, 1}, false};
    EXPECT_THROW(filter_corpus(small_fixture(), f), Error);
}

TEST(Summary, LevelRowsMatchHandTally) {
    auto s = corpus_summary(small_fixture());
    auto rows = s.rows_for(SummaryDimension::level);
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[0].group, "L1");
    EXPECT_EQ(rows[0].tickets, 3u);
    EXPECT_EQ(rows[0].studies, 3u);
    EXPECT_DOUBLE_EQ(rows[0].avg_hours_per_study, 7.0 / 3.0);
    EXPECT_EQ(rows[1].tickets, 4u);
    EXPECT_DOUBLE_EQ(rows[1].avg_hours_per_study, 2.5);
    EXPECT_EQ(rows[2].tickets, 3u);
    EXPECT_EQ(rows[2].studies, 2u);
    EXPECT_DOUBLE_EQ(rows[2].avg_hours_per_study, 8.25);
}

TEST(Summary, TicketCountsAreConservedPerDimension) {
    auto s = corpus_summary(small_fixture());
    for (auto dim : {SummaryDimension::level, SummaryDimension::archive, SummaryDimension::year}) {
        std::size_t total = 0;
        for (const auto& r : s.rows_for(dim)) total += r.tickets;
        EXPECT_EQ(total, 10u);
    }
    auto archives = s.rows_for(SummaryDimension::archive);
    ASSERT_EQ(archives.size(), 3u);
    EXPECT_EQ(archives[0].group, "BJS");
    EXPECT_EQ(archives[1].group, "ICPSR");
    EXPECT_EQ(archives[2].group, "Other");
    EXPECT_EQ(archives[2].tickets, 1u);
}

TEST(Summary, SingleTicketAverageIsItsHours) {
    Corpus c;
    c.tickets.push_back({"A", "S", CurationLevel::L2, "ICPSR", Date{2018, 1, 1},
                         {entry("a", 4.0, "x"), entry("a", 6.0, "y")}});
    auto s = corpus_summary(c);
    EXPECT_DOUBLE_EQ(s.rows_for(SummaryDimension::level)[0].avg_hours_per_study, 10.0);
}

TEST(Summary, TwoTicketsOnOneStudyShareTheAverage) {
    Corpus c;
    c.tickets.push_back({"A", "S", CurationLevel::L2, "ICPSR", Date{2018, 1, 1}, {entry("a", 4.0, "x")}});
    c.tickets.push_back({"B", "S", CurationLevel::L2, "ICPSR", Date{2018, 1, 1}, {entry("a", 6.0, "y")}});
    auto row = corpus_summary(c).rows_for(SummaryDimension::level)[0];
    EXPECT_EQ(row.studies, 1u);
    EXPECT_DOUBLE_EQ(row.avg_hours_per_study, 10.0);
}

TEST(Summary, EmptyCorpusIsFatal) {
    try {
        corpus_summary(Corpus{});
        FAIL();
    } catch (const Error& e) {
        EXPECT_STREQ(e.what(), "nothing to summarize");
    }
}
