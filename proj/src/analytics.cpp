#include <curlog/analytics.hpp>
#include <curlog/util.hpp>

#include <json.hpp>

#include <algorithm>
#include <map>

namespace curlog {

using nlohmann::json;

std::vector<PredictedFragment> predict_corpus(const TrainedModel& model, const FragmentSet& fragments,
                                              const FeatureSpace& features) {
    std::vector<std::string> texts;
    texts.reserve(fragments.fragments.size());
    for (const auto& f : fragments.fragments) texts.push_back(f.text);
    const DocTermMatrix x = transform(texts, features);
    const PredictionSet p = predict(model, x);
    const ActionClass majority = model.majority_class();

    std::vector<PredictedFragment> out;
    out.reserve(texts.size());
    for (std::size_t i = 0; i < texts.size(); ++i) {
        PredictedFragment pf;
        pf.fragment = fragments.fragments[i];
        if (x.row_empty(i)) {
            pf.label = majority;
            pf.low_confidence = true;
        } else {
            pf.label = p.labels[i];
            pf.low_confidence = p.low_confidence[i];
        }
        out.push_back(std::move(pf));
    }
    return out;
}

std::string predictions_to_jsonl(const std::vector<PredictedFragment>& preds) {
    std::string out;
    for (const auto& p : preds) {
        const auto& f = p.fragment;
        json j = {{"fragment_id", f.fragment_id}, {"ticket_id", f.ticket_id},
                  {"study_id", f.study_id},       {"entry_index", f.entry_index},
                  {"start", f.span.start},        {"end", f.span.end},
                  {"text", f.text},               {"hours", f.apportioned_hours},
                  {"label", to_string(p.label)},  {"low_confidence", p.low_confidence}};
        out += j.dump();
        out += '\n';
    }
    return out;
}

std::vector<PredictedFragment> predictions_from_jsonl(std::string_view text) {
    std::vector<PredictedFragment> out;
    auto lines = split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) continue;
        try {
            json j = json::parse(lines[i]);
            PredictedFragment p;
            auto& f = p.fragment;
            f.fragment_id = j.at("fragment_id").get<std::string>();
            f.ticket_id = j.at("ticket_id").get<std::string>();
            f.study_id = j.at("study_id").get<std::string>();
            f.entry_index = j.at("entry_index").get<std::size_t>();
            f.span = {j.at("start").get<std::size_t>(), j.at("end").get<std::size_t>()};
            f.text = j.at("text").get<std::string>();
            f.apportioned_hours = j.at("hours").get<double>();
            auto label = j.at("label").get<std::string>();
            auto a = parse_action(label);
            if (!a) throw Error("predictions line " + std::to_string(i + 1) + ": unknown label '" + label + "'");
            p.label = *a;
            p.low_confidence = j.value("low_confidence", false);
            out.push_back(std::move(p));
        } catch (const json::exception& e) {
            throw Error("predictions line " + std::to_string(i + 1) + ": " + e.what());
        }
    }
    return out;
}

std::string_view to_string(HoursAttribution a) { return a == HoursAttribution::fragment ? "fragment" : "entry"; }

std::string exclusion_tag(const ActionSet& exclude) {
    if (exclude.empty()) return "exclude=none";
    std::string s = "exclude=";
    bool first = true;
    for (auto a : exclude) {
        s += (first ? "" : "+") + std::string(to_string(a));
        first = false;
    }
    return s;
}

ActionReport hours_by_action(const std::vector<PredictedFragment>& preds, const ActionSet& exclude,
                             HoursAttribution attribution) {
    ActionReport r;
    r.attribution = attribution;
    r.exclusion_policy = exclusion_tag(exclude);
    for (auto a : kAllActions) r.rows.push_back({a, exclude.count(a) > 0});

    if (attribution == HoursAttribution::fragment) {
        for (const auto& p : preds) r.rows[index_of(p.label)].hours += p.fragment.apportioned_hours;
    } else {
        struct Entry {
            double hours = 0.0;
            std::array<bool, kActionCount> actions{};
        };
        std::map<std::pair<std::string, std::size_t>, Entry> entries;
        for (const auto& p : preds) {
            auto& e = entries[{p.fragment.ticket_id, p.fragment.entry_index}];
            e.hours += p.fragment.apportioned_hours;
            e.actions[index_of(p.label)] = true;
        }
        for (const auto& [key, e] : entries)
            for (std::size_t c = 0; c < kActionCount; ++c)
                if (e.actions[c]) r.rows[c].hours += e.hours;
    }
    for (const auto& row : r.rows) (row.excluded ? r.excluded_hours : r.included_hours) += row.hours;
    if (r.included_hours <= 0.0) throw Error("zero total hours for included actions");
    for (auto& row : r.rows)
        if (!row.excluded) row.percent_hours = 100.0 * row.hours / r.included_hours;
    return r;
}

void studies_containing_action(const std::vector<PredictedFragment>& preds, const Corpus& corpus,
                               ActionReport& report) {
    if (corpus.tickets.empty()) throw Error("empty corpus");
    if (report.rows.size() != kActionCount) {
        report.rows.clear();
        for (auto a : kAllActions) report.rows.push_back({a});
    }
    report.total_studies = corpus.distinct_studies();
    std::array<std::set<std::string>, kActionCount> studies;
    for (const auto& p : preds) studies[index_of(p.label)].insert(p.fragment.study_id);
    for (std::size_t c = 0; c < kActionCount; ++c) {
        report.rows[c].studies_with_action = studies[c].size();
        report.rows[c].percent_studies =
            100.0 * static_cast<double>(studies[c].size()) / static_cast<double>(report.total_studies);
    }
}

ActionReport action_report(const std::vector<PredictedFragment>& preds, const Corpus& corpus,
                           const ActionSet& exclude, HoursAttribution attribution) {
    ActionReport r = hours_by_action(preds, exclude, attribution);
    studies_containing_action(preds, corpus, r);
    return r;
}

std::vector<ActionRow> ActionReport::table_rows() const {
    std::vector<ActionRow> out;
    for (const auto& row : rows)
        if (!row.excluded) out.push_back(row);
    std::stable_sort(out.begin(), out.end(),
                     [](const ActionRow& a, const ActionRow& b) { return a.percent_studies > b.percent_studies; });
    return out;
}

std::string ActionReport::to_csv(int decimals) const {
    std::string out = "Action,Percent of studies containing action,Percent of total work log hours classified as action\n";
    for (const auto& row : table_rows())
        out += csv_escape(display_name(row.action)) + "," + format_fixed(row.percent_studies, decimals) + "," +
               format_fixed(row.percent_hours, decimals) + "\n";
    return out;
}

std::string ActionReport::to_json() const {
    json rows_j = json::array();
    for (const auto& row : rows)
        rows_j.push_back({{"action", to_string(row.action)},
                          {"excluded", row.excluded},
                          {"studies_with_action", row.studies_with_action},
                          {"percent_studies", row.percent_studies},
                          {"hours", row.hours},
                          {"percent_hours", row.percent_hours}});
    return json{{"attribution", to_string(attribution)},
                {"exclusion_policy", exclusion_policy},
                {"included_hours", included_hours},
                {"excluded_hours", excluded_hours},
                {"total_studies", total_studies},
                {"rows", rows_j}}
               .dump(2);
}

// ---- grouped proportions ---------------------------------------------------

GroupKey group_key_from_string(std::string_view s) {
    if (s == "level") return GroupKey::level;
    if (s == "archive") return GroupKey::archive;
    if (s == "year") return GroupKey::year;
    throw Error("unknown grouping key '" + std::string(s) + "' (expected level, archive or year)");
}

std::string_view to_string(GroupKey k) {
    switch (k) {
    case GroupKey::level: return "level";
    case GroupKey::archive: return "archive";
    case GroupKey::year: return "year";
    }
    return "?";
}

GroupedProportions action_proportions_by(const std::vector<PredictedFragment>& preds, const Corpus& corpus,
                                         GroupKey key, const ProportionOptions& options) {
    GroupedProportions g;
    g.key = key;
    g.weight = options.weight;
    g.excluded = options.exclude;

    std::map<std::string, std::string> group_of;
    std::map<std::string, std::array<double, kActionCount>> sums;
    for (const auto& t : corpus.tickets) {
        std::string group;
        switch (key) {
        case GroupKey::level: group = std::string(to_string(t.curation_level)); break;
        case GroupKey::archive: group = report_archive(t.archive, options.allowed_archives); break;
        case GroupKey::year: group = std::to_string(t.created_date.year); break;
        }
        group_of[t.ticket_id] = group;
        sums.try_emplace(group);
    }
    for (const auto& p : preds) {
        auto it = group_of.find(p.fragment.ticket_id);
        if (it == group_of.end()) throw Error("fragment ticket " + p.fragment.ticket_id + " is not in the corpus");
        if (options.exclude.count(p.label)) continue;
        sums[it->second][index_of(p.label)] +=
            options.weight == ProportionWeight::hours ? p.fragment.apportioned_hours : 1.0;
    }
    for (const auto& [group, s] : sums) {
        double total = 0.0;
        for (double v : s) total += v;
        if (total <= 0.0) {
            g.warnings.push_back("group " + group + " has no included fragments; omitted");
            continue;
        }
        GroupRow row;
        row.group = group;
        row.total = total;
        for (std::size_t c = 0; c < kActionCount; ++c) row.proportions[c] = s[c] / total;
        g.groups.push_back(std::move(row));
    }
    return g;
}

std::string GroupedProportions::to_plot_csv(int decimals) const {
    std::string out = "group,action,value\n";
    for (const auto& row : groups)
        for (auto a : kAllActions)
            if (!excluded.count(a))
                out += csv_escape(row.group) + "," + std::string(to_string(a)) + "," +
                       format_fixed(row.proportions[index_of(a)], decimals) + "\n";
    return out;
}

std::string GroupedProportions::to_json() const {
    json groups_j = json::array();
    for (const auto& row : groups) {
        json props = json::object();
        for (auto a : kAllActions)
            if (!excluded.count(a)) props[std::string(to_string(a))] = row.proportions[index_of(a)];
        groups_j.push_back({{"group", row.group}, {"total", row.total}, {"proportions", props}});
    }
    return json{{"key", to_string(key)},
                {"weight", weight == ProportionWeight::hours ? "hours" : "fragments"},
                {"exclusion_policy", exclusion_tag(excluded)},
                {"groups", groups_j},
                {"warnings", warnings}}
        .dump(2);
}

CorpusSummary curation_hours_summary(const std::vector<PredictedFragment>& preds, const Corpus& corpus,
                                     const ActionSet& exclude, const SummaryOptions& options) {
    std::map<std::string, double> hours;
    for (const auto& t : corpus.tickets) hours[t.ticket_id] = 0.0;
    for (const auto& p : preds)
        if (!exclude.count(p.label)) hours[p.fragment.ticket_id] += p.fragment.apportioned_hours;
    return corpus_summary(corpus, options, &hours);
}

std::string label_distribution_csv(const LabelDistribution& dist) {
    std::string out = "action,count,proportion\n";
    for (auto a : kAllActions)
        out += std::string(to_string(a)) + "," + std::to_string(dist.counts[index_of(a)]) + "," +
               format_fixed(dist.proportions[index_of(a)], 6) + "\n";
    return out;
}

std::string label_distribution_json(const LabelDistribution& dist) {
    json rows = json::array();
    for (auto a : kAllActions)
        rows.push_back({{"action", to_string(a)},
                        {"count", dist.counts[index_of(a)]},
                        {"proportion", dist.proportions[index_of(a)]}});
    return json{{"total", dist.total}, {"classes", rows}}.dump(2);
}

// ---- charts ----------------------------------------------------------------

namespace {

constexpr std::array<const char*, kActionCount> kPalette{"#4e79a7", "#f28e2b", "#e15759", "#76b7b2",
                                                          "#59a14f", "#edc948", "#b07aa1", "#9c755f"};

std::string xml_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out.push_back(c);
        }
    }
    return out;
}

}  // namespace

std::string render_distribution_svg(const LabelDistribution& dist) {
    const int bar_h = 22, gap = 8, left = 200, width = 420;
    const int height = static_cast<int>(kActionCount) * (bar_h + gap) + 40;
    std::size_t max_count = 1;
    for (auto c : dist.counts) max_count = std::max(max_count, c);
    std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(left + width + 80) +
                      "\" height=\"" + std::to_string(height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg += "<text x=\"10\" y=\"18\" font-size=\"14\">Labeled curation actions (n=" + std::to_string(dist.total) +
           ")</text>\n";
    int y = 30;
    for (auto a : kAllActions) {
        const auto c = dist.counts[index_of(a)];
        const int w = static_cast<int>(static_cast<double>(width) * static_cast<double>(c) /
                                       static_cast<double>(max_count));
        svg += "<text x=\"10\" y=\"" + std::to_string(y + 15) + "\">" + xml_escape(display_name(a)) + "</text>\n";
        svg += "<rect x=\"" + std::to_string(left) + "\" y=\"" + std::to_string(y) + "\" width=\"" +
               std::to_string(w) + "\" height=\"" + std::to_string(bar_h) + "\" fill=\"" +
               kPalette[index_of(a)] + "\"/>\n";
        svg += "<text x=\"" + std::to_string(left + w + 6) + "\" y=\"" + std::to_string(y + 15) + "\">" +
               std::to_string(c) + "</text>\n";
        y += bar_h + gap;
    }
    svg += "</svg>\n";
    return svg;
}

std::string render_proportions_svg(const GroupedProportions& grouped) {
    const int bar_h = 24, gap = 10, left = 90, width = 500;
    const int legend_y = static_cast<int>(grouped.groups.size()) * (bar_h + gap) + 40;
    const int height = legend_y + static_cast<int>(kActionCount) * 18 + 10;
    std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(left + width + 20) +
                      "\" height=\"" + std::to_string(height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg += "<text x=\"10\" y=\"18\" font-size=\"14\">Proportion of curation actions by " +
           std::string(to_string(grouped.key)) + "</text>\n";
    int y = 30;
    for (const auto& row : grouped.groups) {
        svg += "<text x=\"10\" y=\"" + std::to_string(y + 16) + "\">" + xml_escape(row.group) + "</text>\n";
        double x = left;
        for (auto a : kAllActions) {
            if (grouped.excluded.count(a)) continue;
            const double w = width * row.proportions[index_of(a)];
            svg += "<rect x=\"" + format_fixed(x, 2) + "\" y=\"" + std::to_string(y) + "\" width=\"" +
                   format_fixed(w, 2) + "\" height=\"" + std::to_string(bar_h) + "\" fill=\"" +
                   kPalette[index_of(a)] + "\"/>\n";
            x += w;
        }
        y += bar_h + gap;
    }
    int ly = legend_y;
    for (auto a : kAllActions) {
        if (grouped.excluded.count(a)) continue;
        svg += "<rect x=\"10\" y=\"" + std::to_string(ly) + "\" width=\"12\" height=\"12\" fill=\"" +
               kPalette[index_of(a)] + "\"/>\n";
        svg += "<text x=\"28\" y=\"" + std::to_string(ly + 10) + "\">" + xml_escape(display_name(a)) + "</text>\n";
        ly += 18;
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace curlog
