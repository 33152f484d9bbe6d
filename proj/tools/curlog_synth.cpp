// curlog-synth: writes a synthetic ticket export, curator name list and
// BRAT-labeled fragments for exercising the pipeline end to end.

#include <curlog/annotation.hpp>
#include <curlog/corpus.hpp>
#include <curlog/synthetic.hpp>
#include <curlog/util.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;
using namespace curlog;

int main(int argc, char** argv) {
    CLI::App app{"curlog-synth: generate a synthetic work-log fixture"};
    std::string out_dir;
    std::size_t tickets = 60;
    std::size_t n_labels = 1000;
    std::size_t per_doc = 100;
    std::uint64_t seed = 1;
    app.add_option("--out-dir", out_dir)->required();
    app.add_option("--tickets", tickets);
    app.add_option("--labels", n_labels);
    app.add_option("--per-doc", per_doc, "Labeled fragments per BRAT document")->check(CLI::PositiveNumber);
    app.add_option("--seed", seed);
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n" << app.help();
        return 2;
    }

    try {
        const fs::path root(out_dir);
        fs::create_directories(root / "labels");

        synthetic::CorpusOptions copts;
        copts.tickets = tickets;
        copts.seed = seed + 1;
        auto gen = synthetic::corpus(copts);
        // Out-of-window and empty tickets exercise the ingest filters.
        Ticket early = gen.corpus.tickets.front();
        early.ticket_id = "TKT-EARLY";
        early.study_id = "STUDY-EARLY";
        early.created_date = {2016, 5, 1};
        gen.corpus.tickets.push_back(early);
        Ticket empty;
        empty.ticket_id = "TKT-EMPTY";
        empty.study_id = "STUDY-EMPTY";
        empty.curation_level = CurationLevel::L2;
        empty.archive = "ICPSR";
        empty.created_date = {2018, 6, 1};
        gen.corpus.tickets.push_back(empty);
        write_file_atomic(root / "tickets.jsonl", corpus_to_jsonl(gen.corpus));

        std::string names;
        for (const auto& c : copts.curators) names += c + "\n";
        write_file_atomic(root / "curators.txt", names);

        synthetic::LabelOptions lopts;
        lopts.count = n_labels;
        lopts.seed = seed;
        const LabelSet all = synthetic::labels(lopts);
        for (std::size_t start = 0, doc = 1; start < all.size(); start += per_doc, ++doc) {
            const std::size_t end = std::min(all.size(), start + per_doc);
            LabelSet chunk(std::vector<LabeledFragment>(all.items().begin() + static_cast<std::ptrdiff_t>(start),
                                                        all.items().begin() + static_cast<std::ptrdiff_t>(end)));
            const auto brat = export_brat(chunk);
            char stem[32];
            std::snprintf(stem, sizeof stem, "doc%02zu", doc);
            write_file_atomic(root / "labels" / (std::string(stem) + ".txt"), brat.txt);
            write_file_atomic(root / "labels" / (std::string(stem) + ".ann"), brat.ann);
        }
        std::cerr << gen.corpus.tickets.size() << " tickets, " << all.size() << " labeled fragments\n";
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
