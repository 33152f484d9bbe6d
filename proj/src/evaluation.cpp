#include <curlog/evaluation.hpp>
#include <curlog/util.hpp>

#include <json.hpp>

#include <algorithm>
#include <cstdio>

namespace curlog {

using nlohmann::json;

std::size_t ConfusionMatrix::total() const {
    std::size_t s = 0;
    for (auto v : cells) s += v;
    return s;
}

std::size_t ConfusionMatrix::row_sum(std::size_t t) const {
    std::size_t s = 0;
    for (std::size_t p = 0; p < n(); ++p) s += at(t, p);
    return s;
}

std::size_t ConfusionMatrix::col_sum(std::size_t p) const {
    std::size_t s = 0;
    for (std::size_t t = 0; t < n(); ++t) s += at(t, p);
    return s;
}

std::size_t ConfusionMatrix::trace() const {
    std::size_t s = 0;
    for (std::size_t c = 0; c < n(); ++c) s += at(c, c);
    return s;
}

std::string ConfusionMatrix::to_csv() const {
    std::string out = "true\\predicted";
    for (auto a : classes) out += "," + std::string(to_string(a));
    out += '\n';
    for (std::size_t t = 0; t < n(); ++t) {
        out += std::string(to_string(classes[t]));
        for (std::size_t p = 0; p < n(); ++p) out += "," + std::to_string(at(t, p));
        out += '\n';
    }
    return out;
}

ConfusionMatrix confusion_matrix(std::span<const ActionClass> y_true, std::span<const ActionClass> y_pred,
                                 std::span<const ActionClass> classes) {
    if (y_true.size() != y_pred.size())
        throw Error("length mismatch: " + std::to_string(y_true.size()) + " true labels, " +
                    std::to_string(y_pred.size()) + " predictions");
    if (y_true.empty()) throw Error("nothing to evaluate");
    std::array<std::ptrdiff_t, kActionCount> slot;
    slot.fill(-1);
    for (std::size_t i = 0; i < classes.size(); ++i) {
        if (slot[index_of(classes[i])] >= 0) throw Error("duplicate class in class list");
        slot[index_of(classes[i])] = static_cast<std::ptrdiff_t>(i);
    }
    ConfusionMatrix cm;
    cm.classes.assign(classes.begin(), classes.end());
    cm.cells.assign(classes.size() * classes.size(), 0);
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        auto t = slot[index_of(y_true[i])];
        auto p = slot[index_of(y_pred[i])];
        if (t < 0) throw Error("unknown label " + std::string(to_string(y_true[i])));
        if (p < 0) throw Error("unknown label " + std::string(to_string(y_pred[i])));
        cm.cells[static_cast<std::size_t>(t) * classes.size() + static_cast<std::size_t>(p)]++;
    }
    return cm;
}

std::vector<ActionClass> observed_classes(std::span<const ActionClass> y_true, std::span<const ActionClass> y_pred) {
    std::array<bool, kActionCount> seen{};
    for (auto a : y_true) seen[index_of(a)] = true;
    for (auto a : y_pred) seen[index_of(a)] = true;
    std::vector<ActionClass> out;
    for (auto a : kAllActions)
        if (seen[index_of(a)]) out.push_back(a);
    return out;
}

MetricsReport metrics(const ConfusionMatrix& cm, std::string model, std::string test_fingerprint) {
    const std::size_t total = cm.total();
    if (total == 0) throw Error("confusion matrix is empty");
    MetricsReport r;
    r.model = std::move(model);
    r.test_fingerprint = std::move(test_fingerprint);
    r.n = total;
    r.confusion = cm;
    const double n = static_cast<double>(total);
    r.accuracy = static_cast<double>(cm.trace()) / n;

    double wp = 0.0, wf = 0.0;
    for (std::size_t c = 0; c < cm.n(); ++c) {
        ClassMetrics m;
        m.action = cm.classes[c];
        const auto tp = static_cast<double>(cm.at(c, c));
        const auto row = cm.row_sum(c);
        const auto col = cm.col_sum(c);
        m.support = row;
        if (col == 0) m.precision_undefined = true;
        else m.precision = tp / static_cast<double>(col);
        if (row == 0) m.recall_undefined = true;
        else m.recall = tp / static_cast<double>(row);
        if (m.precision + m.recall == 0.0) m.f1_undefined = true;
        else m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);

        r.macro.precision += m.precision;
        r.macro.recall += m.recall;
        r.macro.f1 += m.f1;
        wp += static_cast<double>(row) * m.precision;
        wf += static_cast<double>(row) * m.f1;
        r.per_class.push_back(m);
    }
    const double k = static_cast<double>(cm.n());
    r.macro.precision /= k;
    r.macro.recall /= k;
    r.macro.f1 /= k;
    r.weighted.precision = wp / n;
    r.weighted.f1 = wf / n;
    // support_c * (tp_c / support_c) == tp_c, so the support-weighted recall
    // is computed from the diagonal directly and equals accuracy exactly.
    r.weighted.recall = static_cast<double>(cm.trace()) / n;
    return r;
}

std::string test_set_fingerprint(std::span<const std::string> ids, std::span<const ActionClass> y_true) {
    std::string data;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        if (i < ids.size()) data += ids[i];
        data += '\t';
        data += to_string(y_true[i]);
        data += '\n';
    }
    return fingerprint(data);
}

std::string_view to_string(Averaging a) { return a == Averaging::weighted ? "weighted" : "macro"; }

ComparisonTable compare_models(std::span<const MetricsReport> reports, Averaging averaging) {
    if (reports.empty()) throw Error("no reports to compare");
    for (const auto& r : reports)
        if (r.test_fingerprint != reports.front().test_fingerprint)
            throw Error("reports were evaluated on different test sets (" + reports.front().test_fingerprint + " vs " +
                        r.test_fingerprint + ")");
    ComparisonTable t;
    t.averaging = averaging;
    for (const auto& r : reports) {
        const auto& agg = averaging == Averaging::weighted ? r.weighted : r.macro;
        t.rows.push_back({r.model, r.accuracy, agg.f1, agg.precision, agg.recall, {}});
    }
    auto column = [](const ComparisonRow& row, int c) {
        switch (c) {
        case 0: return row.accuracy;
        case 1: return row.f1;
        case 2: return row.precision;
        default: return row.recall;
        }
    };
    for (int c = 0; c < 4; ++c) {
        double best = column(t.rows.front(), c);
        for (const auto& row : t.rows) best = std::max(best, column(row, c));
        for (auto& row : t.rows) row.best[static_cast<std::size_t>(c)] = column(row, c) == best;
    }
    return t;
}

std::string ComparisonTable::to_text(int decimals) const {
    std::size_t width = 10;
    for (const auto& r : rows) width = std::max(width, r.model.size());
    auto pad = [](std::string s, std::size_t w) {
        if (s.size() < w) s.append(w - s.size(), ' ');
        return s;
    };
    std::string out = pad("Classifier", width) + "  Accuracy   F1         Precision  Recall     (" +
                      std::string(to_string(averaging)) + ")\n";
    for (const auto& r : rows) {
        out += pad(r.model, width);
        const double vals[] = {r.accuracy, r.f1, r.precision, r.recall};
        for (int c = 0; c < 4; ++c)
            out += "  " + pad(format_fixed(vals[c], decimals) + (r.best[static_cast<std::size_t>(c)] ? "*" : ""), 9);
        while (!out.empty() && out.back() == ' ') out.pop_back();
        out += '\n';
    }
    return out;
}

std::string ComparisonTable::to_csv() const {
    std::string out = "Classifier,Accuracy,F1,Precision,Recall,best\n";
    for (const auto& r : rows) {
        std::string best;
        const char* names[] = {"accuracy", "f1", "precision", "recall"};
        for (int c = 0; c < 4; ++c)
            if (r.best[static_cast<std::size_t>(c)]) best += (best.empty() ? "" : ";") + std::string(names[c]);
        out += csv_escape(r.model) + "," + format_double(r.accuracy) + "," + format_double(r.f1) + "," +
               format_double(r.precision) + "," + format_double(r.recall) + "," + best + "\n";
    }
    return out;
}

std::string ComparisonTable::to_json() const {
    json rows_j = json::array();
    for (const auto& r : rows)
        rows_j.push_back({{"model", r.model},
                          {"accuracy", r.accuracy},
                          {"f1", r.f1},
                          {"precision", r.precision},
                          {"recall", r.recall},
                          {"best", {{"accuracy", r.best[0]}, {"f1", r.best[1]}, {"precision", r.best[2]},
                                    {"recall", r.best[3]}}}});
    return json{{"averaging", to_string(averaging)}, {"rows", rows_j}}.dump(2) + "\n";
}

std::string report_to_json(const MetricsReport& r) {
    json per = json::array();
    for (const auto& m : r.per_class)
        per.push_back({{"class", to_string(m.action)},
                       {"support", m.support},
                       {"precision", m.precision},
                       {"recall", m.recall},
                       {"f1", m.f1},
                       {"precision_undefined", m.precision_undefined},
                       {"recall_undefined", m.recall_undefined},
                       {"f1_undefined", m.f1_undefined}});
    json classes = json::array();
    for (auto a : r.confusion.classes) classes.push_back(to_string(a));
    json matrix = json::array();
    for (std::size_t t = 0; t < r.confusion.n(); ++t) {
        json row = json::array();
        for (std::size_t p = 0; p < r.confusion.n(); ++p) row.push_back(r.confusion.at(t, p));
        matrix.push_back(row);
    }
    json j = {{"model", r.model},
              {"test_fingerprint", r.test_fingerprint},
              {"n", r.n},
              {"accuracy", r.accuracy},
              {"macro", {{"precision", r.macro.precision}, {"recall", r.macro.recall}, {"f1", r.macro.f1}}},
              {"weighted",
               {{"precision", r.weighted.precision}, {"recall", r.weighted.recall}, {"f1", r.weighted.f1}}},
              {"per_class", per},
              {"confusion", {{"classes", classes}, {"matrix", matrix}}}};
    return j.dump(2);
}

std::string report_to_text(const MetricsReport& r, int decimals) {
    std::string out = "model " + r.model + "  n=" + std::to_string(r.n) + "  accuracy=" +
                      format_fixed(r.accuracy, decimals) + "\n";
    out += "class                      support  precision  recall  f1\n";
    for (const auto& m : r.per_class) {
        std::string name(to_string(m.action));
        name.resize(26, ' ');
        std::string support = std::to_string(m.support);
        out += name + " " + std::string(support.size() < 7 ? 7 - support.size() : 0, ' ') + support + "  " +
               format_fixed(m.precision, decimals) + (m.precision_undefined ? "!" : " ") + "     " +
               format_fixed(m.recall, decimals) + (m.recall_undefined ? "!" : " ") + "  " +
               format_fixed(m.f1, decimals) + (m.f1_undefined ? "!" : "") + "\n";
    }
    out += "macro    precision=" + format_fixed(r.macro.precision, decimals) + " recall=" +
           format_fixed(r.macro.recall, decimals) + " f1=" + format_fixed(r.macro.f1, decimals) + "\n";
    out += "weighted precision=" + format_fixed(r.weighted.precision, decimals) + " recall=" +
           format_fixed(r.weighted.recall, decimals) + " f1=" + format_fixed(r.weighted.f1, decimals) + "\n";
    out += "(! marks 0/0 resolved to 0)\n";
    return out;
}

}  // namespace curlog
