#include <curlog/models.hpp>
#include <curlog/rng.hpp>
#include <curlog/util.hpp>

#include "json_io.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace curlog {

using nlohmann::json;

std::string_view to_string(ModelVariant v) {
    switch (v) {
    case ModelVariant::dummy: return "dummy";
    case ModelVariant::cnb: return "cnb";
    case ModelVariant::sgd: return "sgd";
    }
    return "?";
}

std::optional<ModelVariant> model_variant_from_string(std::string_view s) {
    if (s == "dummy") return ModelVariant::dummy;
    if (s == "cnb") return ModelVariant::cnb;
    if (s == "sgd") return ModelVariant::sgd;
    return std::nullopt;
}

ActionClass TrainedModel::majority_class() const {
    std::size_t best = 0;
    for (std::size_t c = 1; c < class_counts.size(); ++c)
        if (class_counts[c] > class_counts[best]) best = c;
    return classes.at(best);
}

namespace {

struct ClassIndex {
    std::vector<ActionClass> classes;
    std::vector<std::size_t> counts;
    std::vector<std::size_t> row_class;
};

ClassIndex index_classes(std::span<const ActionClass> y) {
    std::array<std::size_t, kActionCount> counts{};
    for (auto a : y) counts[index_of(a)]++;
    ClassIndex ci;
    std::array<std::size_t, kActionCount> slot{};
    for (auto a : kAllActions) {
        if (counts[index_of(a)] == 0) continue;
        slot[index_of(a)] = ci.classes.size();
        ci.classes.push_back(a);
        ci.counts.push_back(counts[index_of(a)]);
    }
    ci.row_class.reserve(y.size());
    for (auto a : y) ci.row_class.push_back(slot[index_of(a)]);
    return ci;
}

void check_training_input(const DocTermMatrix& x, std::span<const ActionClass> y, const ClassIndex& ci,
                          const char* what) {
    if (x.n_docs() != y.size())
        throw Error(std::string(what) + ": " + std::to_string(x.n_docs()) + " rows but " +
                    std::to_string(y.size()) + " labels");
    if (ci.classes.size() < 2)
        throw Error(std::string(what) + (std::string_view(what) == "cnb" ? ": complement undefined" : ": one-vs-rest undefined") +
                    ", training data has fewer than two classes");
}

}  // namespace

// ---- dummy -----------------------------------------------------------------

TrainedModel train_dummy(std::span<const ActionClass> labels, std::uint64_t seed) {
    if (labels.empty()) throw Error("dummy: no training labels");
    auto ci = index_classes(labels);
    TrainedModel m;
    m.variant = ModelVariant::dummy;
    m.classes = ci.classes;
    m.class_counts = ci.counts;
    m.n_train = labels.size();
    m.timestamp = artifact_timestamp();
    DummyParams p;
    p.seed = seed;
    for (auto c : ci.counts) p.probabilities.push_back(static_cast<double>(c) / static_cast<double>(labels.size()));
    m.params = std::move(p);
    return m;
}

// ---- complement naive bayes ------------------------------------------------

TrainedModel train_cnb(const DocTermMatrix& x, std::span<const ActionClass> y, const CnbOptions& options) {
    auto ci = index_classes(y);
    check_training_input(x, y, ci, "cnb");
    if (!(options.alpha >= 0.0) || !std::isfinite(options.alpha)) throw Error("cnb: alpha must be >= 0");

    const std::size_t n_classes = ci.classes.size();
    const std::size_t n_terms = x.n_terms;
    const kernels::Dense totals = kernels::class_term_totals(x, ci.row_class, n_classes);

    CnbParams p;
    p.options = options;
    p.weights = kernels::Dense(n_classes, n_terms);
    for (std::size_t c = 0; c < n_classes; ++c) {
        // N_{~c,i}: mass of term i in every document outside class c.
        std::vector<double> comp(n_terms, 0.0);
        for (std::size_t other = 0; other < n_classes; ++other) {
            if (other == c) continue;
            for (std::size_t i = 0; i < n_terms; ++i) comp[i] += totals(other, i);
        }
        double comp_total = 0.0;
        for (double v : comp) comp_total += v;
        if (options.alpha == 0.0 && std::any_of(comp.begin(), comp.end(), [](double v) { return v == 0.0; }))
            throw Error("cnb: unsmoothed zero complement count for class " +
                        std::string(to_string(ci.classes[c])));
        const double denom = options.alpha * static_cast<double>(n_terms) + comp_total;
        auto w = p.weights.row(c);
        double abs_sum = 0.0;
        for (std::size_t i = 0; i < n_terms; ++i) {
            w[i] = std::log((options.alpha + comp[i]) / denom);
            abs_sum += std::abs(w[i]);
        }
        if (options.normalize && abs_sum > 0.0)
            for (auto& v : w) v /= abs_sum;
    }

    TrainedModel m;
    m.variant = ModelVariant::cnb;
    m.classes = ci.classes;
    m.class_counts = ci.counts;
    m.n_terms = n_terms;
    m.feature_fingerprint = x.fingerprint;
    m.n_train = y.size();
    m.timestamp = artifact_timestamp();
    m.params = std::move(p);
    return m;
}

// ---- SGD -------------------------------------------------------------------

void sgd_hinge_step(std::span<double> w, double& b, std::span<const std::uint32_t> cols, std::span<const double> vals,
                    double y, double eta, double lambda) {
    double dot = b;
    for (std::size_t k = 0; k < cols.size(); ++k) dot += w[cols[k]] * vals[k];
    const double margin = y * dot;
    const double shrink = 1.0 - eta * lambda;
    for (auto& v : w) v *= shrink;
    if (margin < 1.0) {
        for (std::size_t k = 0; k < cols.size(); ++k) w[cols[k]] += eta * y * vals[k];
        b += eta * y;
    }
}

TrainedModel train_sgd(const DocTermMatrix& x, std::span<const ActionClass> y, const SgdOptions& options) {
    auto ci = index_classes(y);
    check_training_input(x, y, ci, "sgd");
    if (options.epochs < 1) throw Error("sgd: epochs must be >= 1");
    if (!(options.eta0 > 0.0)) throw Error("sgd: eta0 must be > 0");
    if (!(options.l2_lambda >= 0.0)) throw Error("sgd: l2_lambda must be >= 0");

    const std::size_t n_classes = ci.classes.size();
    SgdParams p;
    p.options = options;
    p.weights = kernels::Dense(n_classes, x.n_terms);
    p.bias.assign(n_classes, 0.0);

    Rng rng(options.seed);
    std::vector<std::size_t> order(x.n_docs());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::uint64_t t = 0;
    for (int epoch = 1; epoch <= options.epochs; ++epoch) {
        shuffle(std::span<std::size_t>(order), rng);
        for (auto r : order) {
            const double eta = options.eta0 / (1.0 + options.eta0 * options.l2_lambda * static_cast<double>(t));
            for (std::size_t c = 0; c < n_classes; ++c) {
                const double target = ci.row_class[r] == c ? 1.0 : -1.0;
                sgd_hinge_step(p.weights.row(c), p.bias[c], x.row_cols(r), x.row_vals(r), target, eta,
                               options.l2_lambda);
            }
            ++t;
        }
        double norm = 0.0;
        bool finite = std::all_of(p.bias.begin(), p.bias.end(), [](double v) { return std::isfinite(v); });
        for (std::size_t c = 0; c < n_classes && finite; ++c) {
            double sq = 0.0;
            for (double v : p.weights.row(c)) sq += v * v;
            finite = std::isfinite(sq);
            norm += std::sqrt(sq);
        }
        if (!finite) throw Error("sgd: diverged at epoch " + std::to_string(epoch));
        p.epoch_norms.push_back(norm);
    }

    TrainedModel m;
    m.variant = ModelVariant::sgd;
    m.classes = ci.classes;
    m.class_counts = ci.counts;
    m.n_terms = x.n_terms;
    m.feature_fingerprint = x.fingerprint;
    m.n_train = y.size();
    m.timestamp = artifact_timestamp();
    m.params = std::move(p);
    return m;
}

// ---- prediction ------------------------------------------------------------

namespace {

void check_feature_space(const TrainedModel& model, const DocTermMatrix& x) {
    if (!model.feature_fingerprint.empty() && x.fingerprint != model.feature_fingerprint)
        throw Error("feature space mismatch");
    if (model.variant != ModelVariant::dummy && x.n_terms != model.n_terms) throw Error("feature space mismatch");
}

}  // namespace

kernels::Dense predict_scores(const TrainedModel& model, const DocTermMatrix& x) {
    check_feature_space(model, x);
    const std::size_t n_classes = model.classes.size();
    if (const auto* d = std::get_if<DummyParams>(&model.params)) {
        kernels::Dense out(x.n_docs(), n_classes);
        Rng rng(d->seed);
        for (std::size_t r = 0; r < x.n_docs(); ++r) {
            const double u = uniform01(rng);
            double cum = 0.0;
            std::size_t pick = n_classes - 1;
            for (std::size_t c = 0; c < n_classes; ++c) {
                cum += d->probabilities[c];
                if (u < cum) {
                    pick = c;
                    break;
                }
            }
            out(r, pick) = 1.0;
        }
        return out;
    }
    if (const auto* c = std::get_if<CnbParams>(&model.params)) return kernels::linear_scores(x, c->weights, {});
    const auto& s = std::get<SgdParams>(model.params);
    return kernels::linear_scores(x, s.weights, s.bias);
}

PredictionSet decide(const TrainedModel& model, const kernels::Dense& scores) {
    PredictionSet out;
    out.labels.reserve(scores.rows);
    out.low_confidence.reserve(scores.rows);
    const bool minimize = model.variant == ModelVariant::cnb;
    for (std::size_t r = 0; r < scores.rows; ++r) {
        auto row = scores.row(r);
        std::size_t best = 0;
        for (std::size_t c = 1; c < row.size(); ++c)
            if (minimize ? row[c] < row[best] : row[c] > row[best]) best = c;
        std::size_t ties = 0;
        for (double v : row)
            if (v == row[best]) ++ties;
        out.labels.push_back(model.classes[best]);
        out.low_confidence.push_back(model.variant != ModelVariant::dummy && ties > 1);
    }
    return out;
}

PredictionSet predict(const TrainedModel& model, const DocTermMatrix& x) {
    auto scores = predict_scores(model, x);
    auto out = decide(model, scores);
    if (model.variant != ModelVariant::dummy)
        for (std::size_t r = 0; r < x.n_docs(); ++r)
            if (x.row_empty(r)) out.low_confidence[r] = true;
    return out;
}

// ---- persistence -----------------------------------------------------------

namespace {

constexpr const char* kFormatTag = "curlog-model";

json params_json(const TrainedModel& model) {
    if (const auto* d = std::get_if<DummyParams>(&model.params))
        return {{"probabilities", d->probabilities}, {"seed", d->seed}};
    if (const auto* c = std::get_if<CnbParams>(&model.params))
        return {{"alpha", c->options.alpha}, {"normalize", c->options.normalize},
                {"weights", detail::dense_json(c->weights)}};
    const auto& s = std::get<SgdParams>(model.params);
    return {{"loss", "hinge"},
            {"l2_lambda", s.options.l2_lambda},
            {"epochs", s.options.epochs},
            {"eta0", s.options.eta0},
            {"seed", s.options.seed},
            {"weights", detail::dense_json(s.weights)},
            {"bias", s.bias},
            {"epoch_norms", s.epoch_norms}};
}

json body_json(const TrainedModel& model) {
    json classes = json::array();
    for (auto a : model.classes) classes.push_back(to_string(a));
    json features = nullptr;
    if (model.features)
        features = {{"config", detail::feature_config_json(model.features->config)},
                    {"vocabulary", model.features->vocab.serialize()}};
    return {{"variant", to_string(model.variant)},
            {"classes", classes},
            {"class_counts", model.class_counts},
            {"n_terms", model.n_terms},
            {"feature_fingerprint", model.feature_fingerprint},
            {"weighting", model.features ? std::string(to_string(model.features->config.weighting)) : ""},
            {"n_train", model.n_train},
            {"timestamp", model.timestamp},
            {"config_fingerprint", model.config_fingerprint},
            {"features", features},
            {"params", params_json(model)}};
}

}  // namespace

std::string save_model_string(const TrainedModel& model) {
    json body = body_json(model);
    const std::string payload = body.dump();
    json container = {{"format", kFormatTag},
                      {"version", kModelFormatVersion},
                      {"checksum", fingerprint(payload)},
                      {"model", std::move(body)}};
    return container.dump(1) + "\n";
}

void save_model(const TrainedModel& model, std::ostream& sink) {
    sink << save_model_string(model);
    if (!sink) throw Error("cannot write model");
}

TrainedModel load_model_string(std::string_view text) {
    json container;
    try {
        container = json::parse(text);
    } catch (const json::parse_error&) {
        throw Error("model file is truncated or corrupted");
    }
    if (!container.is_object() || container.value("format", "") != kFormatTag) throw Error("not a curlog model file");
    const int version = container.value("version", -1);
    if (version != kModelFormatVersion)
        throw Error("model format version " + std::to_string(version) + " is not supported (this build reads version " +
                    std::to_string(kModelFormatVersion) + ")");
    if (!container.contains("model") || !container["model"].is_object())
        throw Error("model file is truncated or corrupted");
    const json& body = container["model"];
    if (fingerprint(body.dump()) != container.value("checksum", ""))
        throw Error("model file is truncated or corrupted (checksum mismatch)");

    TrainedModel m;
    try {
        const auto tag = body.at("variant").get<std::string>();
        auto variant = model_variant_from_string(tag);
        if (!variant) throw Error("unsupported variant '" + tag + "'");
        m.variant = *variant;
        for (const auto& c : body.at("classes")) {
            auto a = parse_action(c.get<std::string>());
            if (!a) throw Error("model names unknown class '" + c.get<std::string>() + "'");
            m.classes.push_back(*a);
        }
        if (m.classes.empty()) throw Error("model has an empty class list");
        m.class_counts = body.at("class_counts").get<std::vector<std::size_t>>();
        m.n_terms = body.at("n_terms").get<std::size_t>();
        m.feature_fingerprint = body.at("feature_fingerprint").get<std::string>();
        m.n_train = body.at("n_train").get<std::size_t>();
        m.timestamp = body.at("timestamp").get<std::string>();
        m.config_fingerprint = body.value("config_fingerprint", std::string{});
        if (const auto& f = body.at("features"); !f.is_null()) {
            FeatureSpace space;
            space.config = detail::feature_config_from_json(f.at("config"));
            space.vocab = Vocabulary::deserialize(f.at("vocabulary").get<std::string>());
            m.features = std::move(space);
        }
        const json& p = body.at("params");
        switch (m.variant) {
        case ModelVariant::dummy: {
            DummyParams d;
            d.probabilities = p.at("probabilities").get<std::vector<double>>();
            d.seed = p.at("seed").get<std::uint64_t>();
            if (d.probabilities.size() != m.classes.size()) throw Error("dummy probabilities do not match classes");
            m.params = std::move(d);
            break;
        }
        case ModelVariant::cnb: {
            CnbParams c;
            c.options.alpha = p.at("alpha").get<double>();
            c.options.normalize = p.at("normalize").get<bool>();
            c.weights = detail::dense_from_json(p.at("weights"));
            if (c.weights.rows != m.classes.size() || c.weights.cols != m.n_terms)
                throw Error("cnb weights do not match classes / vocabulary");
            m.params = std::move(c);
            break;
        }
        case ModelVariant::sgd: {
            SgdParams s;
            s.options.l2_lambda = p.at("l2_lambda").get<double>();
            s.options.epochs = p.at("epochs").get<int>();
            s.options.eta0 = p.at("eta0").get<double>();
            s.options.seed = p.at("seed").get<std::uint64_t>();
            s.weights = detail::dense_from_json(p.at("weights"));
            s.bias = p.at("bias").get<std::vector<double>>();
            s.epoch_norms = p.at("epoch_norms").get<std::vector<double>>();
            if (s.weights.rows != m.classes.size() || s.weights.cols != m.n_terms ||
                s.bias.size() != m.classes.size())
                throw Error("sgd weights do not match classes / vocabulary");
            m.params = std::move(s);
            break;
        }
        }
    } catch (const json::exception& e) {
        throw Error(std::string("model file is truncated or corrupted: ") + e.what());
    }
    if (m.class_counts.size() != m.classes.size()) throw Error("class counts do not match classes");
    return m;
}

TrainedModel load_model(std::istream& source) {
    std::ostringstream ss;
    ss << source.rdbuf();
    return load_model_string(ss.str());
}

}  // namespace curlog
