#include <curlog/service.hpp>
#include <curlog/util.hpp>

#include "support.hpp"

#include <gtest/gtest.h>
#include <httplib.h>

#include <fstream>
#include <thread>

using namespace curlog;
using nlohmann::json;
using namespace std::chrono_literals;

namespace {

struct Env {
    Corpus corpus;
    FragmentSet fragments;
    std::filesystem::path dir;

    std::unique_ptr<ReviewService> start() const {
        ServiceOptions opts;
        opts.state_dir = dir;
        opts.config.seed = 3;
        return std::make_unique<ReviewService>(corpus, fragments, opts);
    }
    const std::string& id(std::size_t i) const { return fragments.fragments[i].fragment_id; }
};

Env make_env(const std::string& name) {
    Env e;
    e.corpus = ingest_file(test::fixture("tickets_small.jsonl")).corpus;
    e.fragments = segment_corpus(e.corpus);
    e.dir = test::scratch_dir("service-" + name);
    return e;
}

json label(const std::string& id, const std::string& action, const std::string& who = "CURATOR-001") {
    return {{"fragment_id", id}, {"label", action}, {"annotator", who}, {"timestamp", "2020-01-01T00:00:00Z"}};
}

/// Labels fragments 0..n-1 alternating between two classes.
void seed_labels(ReviewService& s, const Env& e, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        ASSERT_EQ(s.post_label(label(e.id(i), i % 2 ? "QualityChecks" : "DataTransformation")).status, 201);
}

std::size_t count_lines(const std::filesystem::path& p) { return split_lines(read_file(p)).size(); }

}  // namespace

TEST(Service, SchemaListsEightClassesWithShortcuts) {
    auto e = make_env("schema");
    auto s = e.start();
    auto r = s->schema();
    ASSERT_EQ(r.body["classes"].size(), 8u);
    EXPECT_EQ(r.body["classes"][0]["name"], "InitialReviewAndPlanning");
    EXPECT_EQ(r.body["classes"][7]["shortcut"], "8");
}

TEST(Service, LabelValidation) {
    auto e = make_env("validation");
    auto s = e.start();
    EXPECT_EQ(s->post_label({{"fragment_id", e.id(0)}}).status, 400);
    EXPECT_EQ(s->post_label(label("T99:0:0", "Other")).status, 404);
    auto bad = s->post_label(label(e.id(0), "Lunch"));
    EXPECT_EQ(bad.status, 422);
    EXPECT_EQ(bad.body["valid"].size(), 8u);
    auto ok = s->post_label(label(e.id(0), "Other"));
    EXPECT_EQ(ok.status, 201);
    EXPECT_EQ(ok.body["replaced"], false);
}

TEST(Service, UnlabeledListShrinksAndPages) {
    auto e = make_env("listing");
    auto s = e.start();
    EXPECT_EQ(s->list_fragments("unlabeled", 1, 50).body["total"], 20);
    seed_labels(*s, e, 3);
    auto r = s->list_fragments("unlabeled", 1, 5);
    EXPECT_EQ(r.body["total"], 17);
    EXPECT_EQ(r.body["items"].size(), 5u);
    EXPECT_EQ(r.body["items"][0]["fragment_id"], e.id(3));
    EXPECT_EQ(s->list_fragments("labeled", 1, 50).body["total"], 3);
    EXPECT_EQ(s->list_fragments("unlabeled", 4, 5).body["items"].size(), 2u);
    EXPECT_EQ(s->list_fragments("bogus", 1, 5).status, 400);
    EXPECT_EQ(s->list_fragments("all", 0, 5).status, 400);
}

TEST(Service, SameAnnotatorLastWriteWinsAndAuditKeepsBoth) {
    auto e = make_env("lww");
    auto s = e.start();
    ASSERT_EQ(s->post_label(label(e.id(0), "Other")).status, 201);
    auto second = s->post_label(label(e.id(0), "Metadata"));
    EXPECT_EQ(second.body["replaced"], true);
    EXPECT_EQ(second.body["previous_label"], "Other");
    auto snap = s->label_snapshot();
    ASSERT_EQ(snap.size(), 1u);
    EXPECT_EQ(snap[0].label, ActionClass::Metadata);
    EXPECT_EQ(count_lines(e.dir / "audit.jsonl"), 2u);
}

TEST(Service, AcknowledgedLabelsSurviveRestartAndTornTail) {
    auto e = make_env("restart");
    {
        auto s = e.start();
        seed_labels(*s, e, 4);
        s->post_label(label(e.id(1), "Communication"));
    }
    std::ofstream(e.dir / "events.jsonl", std::ios::app) << R"({"kind":"label","fragment_id":")";
    {
        auto s = e.start();
        auto snap = s->label_snapshot();
        ASSERT_EQ(snap.size(), 4u);
        EXPECT_EQ(snap[1].label, ActionClass::Communication);
        ASSERT_EQ(s->post_label(label(e.id(5), "Other")).status, 201);
    }
    auto s = e.start();
    EXPECT_EQ(s->label_snapshot().size(), 5u);
}

TEST(Service, ConcurrentLabelsAllPersist) {
    auto e = make_env("concurrent");
    {
        auto s = e.start();
        std::vector<std::thread> threads;
        for (int t = 0; t < 4; ++t) {
            threads.emplace_back([&, t] {
                for (std::size_t i = static_cast<std::size_t>(t); i < 20; i += 4)
                    EXPECT_EQ(s->post_label(label(e.id(i), "Other", "A" + std::to_string(t))).status, 201);
            });
        }
        for (auto& th : threads) th.join();
        EXPECT_EQ(s->label_snapshot().size(), 20u);
    }
    EXPECT_EQ(count_lines(e.dir / "events.jsonl"), 20u);
    EXPECT_EQ(e.start()->label_snapshot().size(), 20u);
}

TEST(Service, CompactionKeepsCurrentLabelsAndAudit) {
    auto e = make_env("compact");
    {
        auto s = e.start();
        for (const char* a : {"Other", "Metadata", "QualityChecks"}) s->post_label(label(e.id(0), a));
        s->post_label(label(e.id(0), "Documentation", "CURATOR-002"));
        s->post_label(label(e.id(0), "Communication"));
        s->compact();
        EXPECT_EQ(count_lines(e.dir / "events.jsonl"), 2u);
        EXPECT_EQ(count_lines(e.dir / "audit.jsonl"), 5u);
    }
    auto s = e.start();
    EXPECT_EQ(s->label_snapshot().size(), 2u);
    EXPECT_EQ(s->list_fragments("labeled", 1, 5).body["items"][0]["label"], "Communication");
}

TEST(Service, TrainRequiresTwoClassesAndKnownModel) {
    auto e = make_env("train-guards");
    auto s = e.start();
    s->post_label(label(e.id(0), "Other"));
    EXPECT_EQ(s->post_train({{"model", "cnb"}}).status, 409);
    s->post_label(label(e.id(1), "Metadata"));
    EXPECT_EQ(s->post_train({{"model", "svm"}}).status, 422);
    EXPECT_EQ(s->post_train({{"model", "cnb"}, {"config_ref", "0000000000000000"}}).status, 422);
    EXPECT_EQ(s->get_job(42).status, 404);
    EXPECT_EQ(s->latest_metrics().status, 404);
    EXPECT_EQ(s->report("table4").status, 409);
    EXPECT_EQ(s->report("fig2").status, 200);
    EXPECT_EQ(s->report("nope").status, 404);
}

TEST(Service, ReviewCorrectionFeedsTheNextJob) {
    auto e = make_env("review");
    auto s = e.start();
    EXPECT_EQ(s->post_review({{"fragment_id", e.id(12)}, {"decision", "confirm"}, {"reviewer", "R"}}).status, 409);
    seed_labels(*s, e, 10);

    auto first = s->post_train({{"model", "cnb"}});
    ASSERT_EQ(first.status, 202);
    const std::size_t job1 = first.body["job_id"];
    ASSERT_TRUE(s->wait_for_job(job1, 30s));
    auto j1 = s->get_job(job1).body;
    ASSERT_EQ(j1["status"], "succeeded") << j1.dump();
    EXPECT_EQ(j1["training_labels"].size(), 10u);
    EXPECT_EQ(j1["n_train"].get<int>() + j1["n_test"].get<int>(), 10);

    auto predicted = s->list_fragments("predicted", 1, 50).body;
    EXPECT_EQ(predicted["total"], 10);
    EXPECT_TRUE(predicted["items"][0].contains("predicted_label"));

    EXPECT_EQ(s->post_review({{"fragment_id", e.id(12)}, {"decision", "confirm"}, {"reviewer", "R"},
                              {"label", "Other"}}).status, 422);
    EXPECT_EQ(s->post_review({{"fragment_id", e.id(12)}, {"decision", "correct"}, {"reviewer", "R"}}).status, 422);
    EXPECT_EQ(s->post_review({{"fragment_id", e.id(12)}, {"decision", "correct"}, {"reviewer", "R"},
                              {"label", "Lunch"}}).status, 422);
    auto fixed = s->post_review({{"fragment_id", e.id(12)}, {"decision", "correct"}, {"reviewer", "R"},
                                 {"label", "Communication"}});
    ASSERT_EQ(fixed.status, 201);
    auto confirmed = s->post_review({{"fragment_id", e.id(13)}, {"decision", "confirm"}, {"reviewer", "R"}});
    ASSERT_EQ(confirmed.status, 201);

    const std::size_t job2 = s->post_train({{"model", "sgd"}}).body["job_id"];
    ASSERT_TRUE(s->wait_for_job(job2, 30s));
    auto j2 = s->get_job(job2).body;
    ASSERT_EQ(j2["status"], "succeeded") << j2.dump();
    EXPECT_EQ(j2["training_labels"].size(), 12u);
    bool found = false;
    for (const auto& item : j2["training_labels"])
        if (item["fragment_id"] == e.id(12)) found = item["label"] == "Communication";
    EXPECT_TRUE(found);
    EXPECT_EQ(s->report("table4").status, 200);
    EXPECT_EQ(s->report("fig4").status, 200);
}

TEST(Service, HttpRoundTrip) {
    auto e = make_env("http");
    auto s = e.start();
    httplib::Server server;
    mount_routes(server, *s);
    const int port = server.bind_to_any_port("127.0.0.1");
    ASSERT_GT(port, 0);
    std::thread th([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    httplib::Client client("127.0.0.1", port);
    auto schema = client.Get("/schema");
    ASSERT_TRUE(schema);
    EXPECT_EQ(schema->status, 200);
    auto posted = client.Post("/labels", label(e.id(0), "Other").dump(), "application/json");
    ASSERT_TRUE(posted);
    EXPECT_EQ(posted->status, 201);
    EXPECT_EQ(client.Post("/labels", "not json", "application/json")->status, 400);
    auto listing = client.Get("/fragments?status=labeled&page=1&page_size=10");
    ASSERT_TRUE(listing);
    EXPECT_EQ(json::parse(listing->body)["items"][0]["label"], "Other");
    EXPECT_EQ(client.Get("/jobs/7")->status, 404);
    EXPECT_EQ(client.Get("/reports/fig2")->status, 200);

    server.stop();
    th.join();
}
