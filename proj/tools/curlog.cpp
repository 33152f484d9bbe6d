// curlog: command-line driver for the work-log pipeline.
//
//   ingest -> deidentify -> segment -> import-labels -> split -> train
//   -> evaluate -> predict -> report, plus serve.
//
// Every artifact is written atomically. JSON artifacts carry the config
// fingerprint inline; line-oriented artifacts get a <path>.meta.json sidecar.

#include <curlog/analytics.hpp>
#include <curlog/annotation.hpp>
#include <curlog/config.hpp>
#include <curlog/corpus.hpp>
#include <curlog/evaluation.hpp>
#include <curlog/features.hpp>
#include <curlog/models.hpp>
#include <curlog/segmenter.hpp>
#include <curlog/service.hpp>
#include <curlog/util.hpp>

#include <CLI11.hpp>
#include <httplib.h>
#include <json.hpp>

#include <algorithm>
#include <csignal>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using namespace curlog;

struct Globals {
    std::string config_path;
    std::optional<std::uint64_t> seed;

    PipelineConfig load() const {
        PipelineConfig cfg = config_path.empty() ? PipelineConfig{} : PipelineConfig::load(config_path);
        if (seed) {
            cfg.seed = *seed;
            cfg.sgd.seed = *seed;
        }
        return cfg;
    }
};

json meta(const PipelineConfig& cfg, std::string_view command, std::string_view content) {
    return {{"command", command},
            {"config_fingerprint", cfg.fingerprint()},
            {"seed", cfg.seed},
            {"content_fingerprint", fingerprint(content)}};
}

void write_with_sidecar(const fs::path& path, std::string_view content, const PipelineConfig& cfg,
                        std::string_view command) {
    write_file_atomic(path, content);
    write_file_atomic(path.string() + ".meta.json", meta(cfg, command, content).dump(1) + "\n");
}

void write_json(const fs::path& path, json body, const PipelineConfig& cfg) {
    body["config_fingerprint"] = cfg.fingerprint();
    write_file_atomic(path, body.dump(1) + "\n");
}

void warn(std::string_view msg) { std::cerr << "warning: " << msg << "\n"; }

Corpus load_corpus(const fs::path& path) {
    auto result = ingest_file(path, InputFormat::jsonl);
    for (const auto& e : result.errors) warn(path.string() + ":" + std::to_string(e.line) + ": " + e.message);
    return std::move(result.corpus);
}

LabelSet load_labels(const fs::path& path) { return labels_from_jsonl(read_file(path)); }

std::vector<std::string> read_names(const fs::path& path) {
    std::vector<std::string> names;
    for (const auto& line : split_lines(read_file(path))) {
        auto t = trim(line);
        if (!t.empty() && t.front() != '#') names.emplace_back(t);
    }
    return names;
}

ActionSet parse_exclusions(const std::vector<std::string>& names) {
    ActionSet out;
    for (const auto& n : names) {
        if (n == "none") continue;
        auto a = LabelAliases::defaults().resolve(n);
        if (!a) throw Error("unknown action '" + n + "' in --exclude");
        out.insert(*a);
    }
    return out;
}

// ---- subcommands -------------------------------------------------------------

struct IngestArgs {
    std::string input, out, format, from, to;
    bool require_worklog = false;
    bool strict = false;
};

int run_ingest(const Globals& g, const IngestArgs& a) {
    auto cfg = g.load();
    std::optional<InputFormat> fmt;
    if (a.format == "csv") fmt = InputFormat::csv;
    if (a.format == "jsonl") fmt = InputFormat::jsonl;
    auto result = ingest_file(a.input, fmt);
    for (const auto& w : result.warnings) warn(w);
    for (const auto& e : result.errors) warn(a.input + ":" + std::to_string(e.line) + ": " + e.message);
    if (a.strict && !result.errors.empty())
        throw Error(std::to_string(result.errors.size()) + " malformed records in " + a.input);

    FilterCriteria criteria = cfg.filter;
    if (!a.from.empty()) criteria.created_from = Date::parse(a.from);
    if (!a.to.empty()) criteria.created_to = Date::parse(a.to);
    if ((!a.from.empty() && !criteria.created_from) || (!a.to.empty() && !criteria.created_to))
        throw Error("dates must be YYYY-MM-DD");
    if (a.require_worklog) criteria.require_worklog = true;
    Corpus corpus = filter_corpus(result.corpus, criteria);
    write_with_sidecar(a.out, corpus_to_jsonl(corpus), cfg, "ingest");
    std::cerr << corpus.tickets.size() << " tickets, " << corpus.distinct_studies() << " studies\n";
    return 0;
}

struct DeidArgs {
    std::string corpus, names, out, map;
};

int run_deidentify(const Globals& g, const DeidArgs& a) {
    auto cfg = g.load();
    const auto names = read_names(a.names);
    auto result = deidentify(load_corpus(a.corpus), names);
    for (const auto& n : result.unused_names) warn("name never found: " + n);
    write_with_sidecar(a.out, corpus_to_jsonl(result.corpus), cfg, "deidentify");
    write_with_sidecar(a.map, result.map.to_csv(), cfg, "deidentify");
    return 0;
}

struct SegmentArgs {
    std::string corpus, out;
};

int run_segment(const Globals& g, const SegmentArgs& a) {
    auto cfg = g.load();
    auto set = segment_corpus(load_corpus(a.corpus));
    for (const auto& e : set.empty_entries)
        warn("empty description in " + e.ticket_id + " entry " + std::to_string(e.entry_index) + " (" +
             format_double(e.hours) + " h unattributable)");
    write_with_sidecar(a.out, fragments_to_jsonl(set), cfg, "segment");
    std::cerr << set.fragments.size() << " fragments\n";
    return 0;
}

struct ImportArgs {
    std::string ann, txt, brat_dir, out, annotator, doc_id;
    bool strict = false;
};

int run_import(const Globals& g, const ImportArgs& a) {
    auto cfg = g.load();
    std::vector<std::pair<fs::path, fs::path>> docs;
    if (!a.brat_dir.empty()) {
        if (!fs::is_directory(a.brat_dir)) throw Error("cannot open " + a.brat_dir);
        for (const auto& entry : fs::directory_iterator(a.brat_dir)) {
            if (entry.path().extension() != ".ann") continue;
            auto txt = entry.path();
            docs.emplace_back(entry.path(), txt.replace_extension(".txt"));
        }
        std::sort(docs.begin(), docs.end());
        if (docs.empty()) throw Error("no .ann files in " + a.brat_dir);
    } else {
        if (a.ann.empty() || a.txt.empty()) throw Error("give --ann and --txt, or --brat");
        docs.emplace_back(a.ann, a.txt);
    }

    LabelSet set;
    std::size_t n_errors = 0;
    for (const auto& [ann, txt] : docs) {
        BratOptions opts;
        opts.doc_id = (docs.size() == 1 && !a.doc_id.empty()) ? a.doc_id : ann.stem().string();
        opts.annotator = a.annotator;
        opts.timestamp = artifact_timestamp();
        auto result = import_brat(read_file(ann), read_file(txt), opts);
        for (const auto& e : result.errors) warn(ann.string() + ":" + std::to_string(e.line) + ": " + e.message);
        n_errors += result.errors.size();
        for (auto& f : result.fragments) set.push_back(std::move(f));
    }
    if (a.strict && n_errors > 0) throw Error(std::to_string(n_errors) + " annotation lines rejected");
    write_with_sidecar(a.out, labels_to_jsonl(set), cfg, "import-labels");
    std::cerr << set.size() << " labels\n";
    return 0;
}

struct SplitArgs {
    std::string labels, train, test, mode;
    std::optional<double> test_fraction;
};

int run_split(const Globals& g, const SplitArgs& a) {
    auto cfg = g.load();
    if (a.test_fraction) cfg.split.test_fraction = *a.test_fraction;
    if (a.mode == "ticket") cfg.split.mode = SplitMode::ticket;
    if (a.mode == "fragment") cfg.split.mode = SplitMode::fragment;
    auto result = stratified_split(load_labels(a.labels), cfg.split.test_fraction, cfg.seed, cfg.split.mode);
    for (const auto& w : result.warnings) warn(w);
    write_with_sidecar(a.train, labels_to_jsonl(result.train), cfg, "split");
    write_with_sidecar(a.test, labels_to_jsonl(result.test), cfg, "split");
    return 0;
}

struct TrainArgs {
    std::string model, labels, out, vocab_out;
};

int run_train(const Globals& g, const TrainArgs& a) {
    auto cfg = g.load();
    auto variant = model_variant_from_string(a.model);
    if (!variant) throw Error("unknown model '" + a.model + "'");
    const LabelSet set = load_labels(a.labels);
    if (set.empty()) throw Error("no labels in " + a.labels);
    const auto texts = set.texts();
    const auto y = set.labels();

    FeatureSpace space = fit_feature_space(texts, cfg.features);
    TrainedModel model;
    switch (*variant) {
        case ModelVariant::dummy: model = train_dummy(y, cfg.seed); break;
        case ModelVariant::cnb: model = train_cnb(transform(texts, space), y, cfg.cnb); break;
        case ModelVariant::sgd: model = train_sgd(transform(texts, space), y, cfg.sgd); break;
    }
    model.feature_fingerprint = space.fingerprint();
    model.features = space;
    model.config_fingerprint = cfg.fingerprint();
    write_file_atomic(a.out, save_model_string(model));
    if (!a.vocab_out.empty()) write_with_sidecar(a.vocab_out, space.vocab.serialize(), cfg, "train");
    return 0;
}

TrainedModel read_model(const fs::path& path) { return load_model_string(read_file(path)); }

/// Feature space to vectorize with: the model's own, or the model's config
/// paired with an explicitly supplied vocabulary.
FeatureSpace space_for(const TrainedModel& model, const std::string& vocab_path) {
    if (!model.features) throw Error("model has no embedded feature space");
    FeatureSpace space = *model.features;
    if (!vocab_path.empty()) space.vocab = Vocabulary::deserialize(read_file(vocab_path));
    return space;
}

struct EvaluateArgs {
    std::vector<std::string> models;
    std::string labels, out, vocab, averaging;
};

int run_evaluate(const Globals& g, const EvaluateArgs& a) {
    auto cfg = g.load();
    Averaging averaging = cfg.report.averaging;
    if (a.averaging == "macro") averaging = Averaging::macro;
    if (a.averaging == "weighted") averaging = Averaging::weighted;

    const LabelSet test = load_labels(a.labels);
    if (test.empty()) throw Error("no labels in " + a.labels);
    const auto texts = test.texts();
    const auto y_true = test.labels();
    const auto ids = test.fragment_ids();
    const std::string test_fp = test_set_fingerprint(ids, y_true);

    std::vector<MetricsReport> reports;
    for (const auto& path : a.models) {
        const TrainedModel model = read_model(path);
        const FeatureSpace space = space_for(model, a.vocab);
        const auto pred = predict(model, transform(texts, space));
        const auto classes = observed_classes(y_true, pred.labels);
        reports.push_back(metrics(confusion_matrix(y_true, pred.labels, classes), fs::path(path).stem().string(),
                                  test_fp));
    }
    const ComparisonTable table = compare_models(reports, averaging);
    std::cout << table.to_text();

    json body;
    body["test_fingerprint"] = test_fp;
    body["averaging"] = to_string(averaging);
    body["comparison"] = json::parse(table.to_json());
    body["reports"] = json::array();
    for (const auto& r : reports) body["reports"].push_back(json::parse(report_to_json(r)));
    if (!a.out.empty()) write_json(a.out, std::move(body), cfg);
    return 0;
}

struct PredictArgs {
    std::string model, fragments, out, vocab;
};

int run_predict(const Globals& g, const PredictArgs& a) {
    auto cfg = g.load();
    const TrainedModel model = read_model(a.model);
    const FeatureSpace space = space_for(model, a.vocab);
    const auto preds = predict_corpus(model, fragments_from_jsonl(read_file(a.fragments)), space);
    const auto low = std::count_if(preds.begin(), preds.end(), [](const auto& p) { return p.low_confidence; });
    if (low > 0) warn(std::to_string(low) + " fragments had no in-vocabulary terms");
    write_with_sidecar(a.out, predictions_to_jsonl(preds), cfg, "predict");
    return 0;
}

struct ReportArgs {
    std::string kind, predictions, corpus, labels, by, format, out, attribution, weight;
    std::vector<std::string> exclude;
    std::optional<int> decimals;
};

int run_report(const Globals& g, const ReportArgs& a) {
    auto cfg = g.load();
    auto rc = cfg.report;
    if (!a.exclude.empty()) rc.exclude = parse_exclusions(a.exclude);
    if (a.attribution == "entry") rc.attribution = HoursAttribution::entry;
    if (a.attribution == "fragment") rc.attribution = HoursAttribution::fragment;
    if (a.weight == "hours") rc.weight = ProportionWeight::hours;
    if (a.weight == "fragments") rc.weight = ProportionWeight::fragments;
    if (a.decimals) rc.decimals = *a.decimals;

    auto need = [](const std::string& value, const char* flag) {
        if (value.empty()) throw Error(std::string("--kind requires ") + flag);
    };
    auto bad_format = [&](std::string_view allowed) {
        return Error("--format " + a.format + " not available for " + a.kind + " (use " + std::string(allowed) + ")");
    };

    std::string content;
    bool is_json = false;
    if (a.kind == "table3") {
        need(a.corpus, "--corpus");
        const Corpus corpus = load_corpus(a.corpus);
        SummaryOptions so{rc.allowed_archives};
        CorpusSummary summary = a.predictions.empty()
                                    ? corpus_summary(corpus, so)
                                    : curation_hours_summary(predictions_from_jsonl(read_file(a.predictions)), corpus,
                                                             rc.exclude, so);
        if (a.format != "csv") throw bad_format("csv");
        content = summary.to_csv(rc.decimals);
    } else if (a.kind == "table4") {
        need(a.corpus, "--corpus");
        need(a.predictions, "--predictions");
        auto report = action_report(predictions_from_jsonl(read_file(a.predictions)), load_corpus(a.corpus),
                                    rc.exclude, rc.attribution);
        if (a.format == "csv") {
            content = report.to_csv(rc.decimals);
        } else if (a.format == "json") {
            content = report.to_json();
            is_json = true;
        } else {
            throw bad_format("csv or json");
        }
    } else if (a.kind == "fig2") {
        need(a.labels, "--labels");
        const auto dist = label_distribution(load_labels(a.labels));
        if (a.format == "csv") {
            content = label_distribution_csv(dist);
        } else if (a.format == "json") {
            content = label_distribution_json(dist);
            is_json = true;
        } else if (a.format == "svg") {
            content = render_distribution_svg(dist);
        } else {
            throw bad_format("csv, json or svg");
        }
    } else if (a.kind == "fig4") {
        need(a.corpus, "--corpus");
        need(a.predictions, "--predictions");
        ProportionOptions opts{rc.exclude, rc.weight, rc.allowed_archives};
        auto grouped = action_proportions_by(predictions_from_jsonl(read_file(a.predictions)), load_corpus(a.corpus),
                                             group_key_from_string(a.by), opts);
        for (const auto& w : grouped.warnings) warn(w);
        if (a.format == "plot" || a.format == "csv") {
            content = grouped.to_plot_csv();
        } else if (a.format == "json") {
            content = grouped.to_json();
            is_json = true;
        } else if (a.format == "svg") {
            content = render_proportions_svg(grouped);
        } else {
            throw bad_format("plot, json or svg");
        }
    } else {
        throw Error("unknown report kind '" + a.kind + "'");
    }

    if (is_json) {
        write_json(a.out, json::parse(content), cfg);
    } else {
        write_with_sidecar(a.out, content, cfg, "report");
    }
    return 0;
}

struct ServeArgs {
    std::string corpus, fragments, state_dir, host = "127.0.0.1", static_dir;
    int port = 8080;
};

httplib::Server* g_server = nullptr;

int run_serve(const Globals& g, const ServeArgs& a) {
    ServiceOptions opts;
    opts.config = g.load();
    opts.state_dir = a.state_dir;
    ReviewService service(load_corpus(a.corpus), fragments_from_jsonl(read_file(a.fragments)), opts);
    httplib::Server server;
    std::optional<fs::path> static_dir;
    if (!a.static_dir.empty()) static_dir = a.static_dir;
    mount_routes(server, service, static_dir);
    g_server = &server;
    std::signal(SIGINT, [](int) {
        if (g_server) g_server->stop();
    });
    std::signal(SIGTERM, [](int) {
        if (g_server) g_server->stop();
    });
    std::cerr << "listening on http://" << a.host << ":" << a.port << "\n";
    if (!server.listen(a.host, a.port)) throw Error("cannot listen on " + a.host + ":" + std::to_string(a.port));
    g_server = nullptr;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"curlog: detect curation actions in work logs"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--config", g.config_path, "Pipeline config (JSON)");
    app.add_option("--seed", g.seed, "Overrides the config seed");

    IngestArgs ingest;
    auto* c_ingest = app.add_subcommand("ingest", "Parse tickets into a corpus");
    c_ingest->add_option("--input", ingest.input, "Ticket export (.jsonl or .csv)")->required();
    c_ingest->add_option("--out", ingest.out, "Corpus JSONL")->required();
    c_ingest->add_option("--format", ingest.format, "jsonl or csv (default: by extension)")
        ->check(CLI::IsMember({"jsonl", "csv"}));
    c_ingest->add_option("--from", ingest.from, "Keep tickets created on or after YYYY-MM-DD");
    c_ingest->add_option("--to", ingest.to, "Keep tickets created on or before YYYY-MM-DD");
    c_ingest->add_flag("--require-worklog", ingest.require_worklog, "Drop tickets without work logs");
    c_ingest->add_flag("--strict", ingest.strict, "Fail on any malformed record");

    DeidArgs deid;
    auto* c_deid = app.add_subcommand("deidentify", "Replace curator names with pseudonyms");
    c_deid->add_option("--corpus", deid.corpus)->required();
    c_deid->add_option("--names", deid.names, "One raw name per line")->required();
    c_deid->add_option("--out", deid.out)->required();
    c_deid->add_option("--map", deid.map, "Pseudonym linkage CSV")->required();

    SegmentArgs seg;
    auto* c_seg = app.add_subcommand("segment", "Split work-log descriptions into fragments");
    c_seg->add_option("--corpus", seg.corpus)->required();
    c_seg->add_option("--out", seg.out)->required();

    ImportArgs imp;
    auto* c_imp = app.add_subcommand("import-labels", "Read BRAT standoff annotations");
    c_imp->add_option("--ann", imp.ann);
    c_imp->add_option("--txt", imp.txt);
    c_imp->add_option("--brat", imp.brat_dir, "Directory of .ann/.txt pairs");
    c_imp->add_option("--doc-id", imp.doc_id);
    c_imp->add_option("--annotator", imp.annotator);
    c_imp->add_option("--out", imp.out)->required();
    c_imp->add_flag("--strict", imp.strict, "Fail on any rejected annotation line");

    SplitArgs split;
    auto* c_split = app.add_subcommand("split", "Stratified train/test split");
    c_split->add_option("--labels", split.labels)->required();
    c_split->add_option("--train", split.train)->required();
    c_split->add_option("--test", split.test)->required();
    c_split->add_option("--test-fraction", split.test_fraction)->check(CLI::Range(0.0, 1.0));
    c_split->add_option("--mode", split.mode)->check(CLI::IsMember({"fragment", "ticket"}));

    TrainArgs train;
    auto* c_train = app.add_subcommand("train", "Fit a classifier");
    c_train->add_option("--model", train.model)->required()->check(CLI::IsMember({"dummy", "cnb", "sgd"}));
    c_train->add_option("--labels", train.labels)->required();
    c_train->add_option("--out", train.out)->required();
    c_train->add_option("--vocab-out", train.vocab_out, "Also write the fitted vocabulary");

    EvaluateArgs eval;
    auto* c_eval = app.add_subcommand("evaluate", "Score models on a labeled test set");
    c_eval->add_option("--model", eval.models, "Model file (repeatable)")->required();
    c_eval->add_option("--labels", eval.labels)->required();
    c_eval->add_option("--vocab", eval.vocab, "Vectorize with this vocabulary instead of the model's");
    c_eval->add_option("--averaging", eval.averaging)->check(CLI::IsMember({"weighted", "macro"}));
    c_eval->add_option("--out", eval.out, "Metrics JSON");

    PredictArgs pred;
    auto* c_pred = app.add_subcommand("predict", "Label every fragment");
    c_pred->add_option("--model", pred.model)->required();
    c_pred->add_option("--fragments", pred.fragments)->required();
    c_pred->add_option("--vocab", pred.vocab);
    c_pred->add_option("--out", pred.out)->required();

    ReportArgs rep;
    rep.by = "level";
    rep.format = "csv";
    auto* c_rep = app.add_subcommand("report", "Aggregate tables and figures");
    c_rep->add_option("--kind", rep.kind)->required()->check(CLI::IsMember({"table3", "table4", "fig2", "fig4"}));
    c_rep->add_option("--predictions", rep.predictions);
    c_rep->add_option("--corpus", rep.corpus);
    c_rep->add_option("--labels", rep.labels);
    c_rep->add_option("--by", rep.by)->check(CLI::IsMember({"level", "archive", "year"}));
    c_rep->add_option("--format", rep.format)->check(CLI::IsMember({"csv", "json", "plot", "svg"}));
    c_rep->add_option("--exclude", rep.exclude, "Actions left out of hours (default NonCuration; 'none')");
    c_rep->add_option("--attribution", rep.attribution)->check(CLI::IsMember({"fragment", "entry"}));
    c_rep->add_option("--weight", rep.weight)->check(CLI::IsMember({"fragments", "hours"}));
    c_rep->add_option("--decimals", rep.decimals);
    c_rep->add_option("--out", rep.out)->required();

    ServeArgs serve;
    auto* c_serve = app.add_subcommand("serve", "Run the annotation and review API");
    c_serve->add_option("--corpus", serve.corpus)->required();
    c_serve->add_option("--fragments", serve.fragments)->required();
    c_serve->add_option("--state-dir", serve.state_dir)->required();
    c_serve->add_option("--host", serve.host);
    c_serve->add_option("--port", serve.port);
    c_serve->add_option("--static", serve.static_dir, "Directory of UI assets served at /");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        const CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
        std::cerr << sub->help();
        return 2;
    }

    try {
        if (*c_ingest) return run_ingest(g, ingest);
        if (*c_deid) return run_deidentify(g, deid);
        if (*c_seg) return run_segment(g, seg);
        if (*c_imp) return run_import(g, imp);
        if (*c_split) return run_split(g, split);
        if (*c_train) return run_train(g, train);
        if (*c_eval) return run_evaluate(g, eval);
        if (*c_pred) return run_predict(g, pred);
        if (*c_rep) return run_report(g, rep);
        if (*c_serve) return run_serve(g, serve);
    } catch (const std::exception& e) {
        std::string msg = e.what();
        std::replace(msg.begin(), msg.end(), '\n', ' ');
        std::cerr << "error: " << msg << "\n";
        return 1;
    }
    return 1;
}
