#include <curlog/annotation.hpp>
#include <curlog/rng.hpp>

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

namespace curlog {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, kActionCount> kNames{
    "InitialReviewAndPlanning", "DataTransformation", "Metadata", "Documentation",
    "QualityChecks",            "Communication",      "Other",    "NonCuration",
};

constexpr std::array<std::string_view, kActionCount> kDisplay{
    "Initial review and planning", "Data transformation", "Metadata", "Documentation",
    "Quality checks",              "Communication",       "Other",    "Non-curation",
};

std::string alias_key(std::string_view s) {
    std::string key;
    for (unsigned char c : s)
        if (std::isalnum(c)) key.push_back(static_cast<char>(std::tolower(c)));
    return key;
}

}  // namespace

std::string_view to_string(ActionClass a) { return kNames[index_of(a)]; }
std::string_view display_name(ActionClass a) { return kDisplay[index_of(a)]; }

std::optional<ActionClass> parse_action(std::string_view name) {
    for (auto a : kAllActions)
        if (kNames[index_of(a)] == name) return a;
    return std::nullopt;
}

std::vector<std::string> action_names() {
    return {kNames.begin(), kNames.end()};
}

LabelAliases LabelAliases::defaults() {
    LabelAliases t;
    for (auto a : kAllActions) {
        t.add(kNames[index_of(a)], a);
        t.add(kDisplay[index_of(a)], a);
    }
    t.add("Initial_Review", ActionClass::InitialReviewAndPlanning);
    t.add("Initial_Review_Planning", ActionClass::InitialReviewAndPlanning);
    t.add("Data_Transformations", ActionClass::DataTransformation);
    t.add("Quality_Check", ActionClass::QualityChecks);
    t.add("Non_Curation_Action", ActionClass::NonCuration);
    return t;
}

void LabelAliases::add(std::string_view alias, ActionClass target) { table_[alias_key(alias)] = target; }

std::optional<ActionClass> LabelAliases::resolve(std::string_view label) const {
    auto it = table_.find(alias_key(label));
    if (it == table_.end()) return std::nullopt;
    return it->second;
}

std::string_view to_string(LabelSource s) {
    switch (s) {
    case LabelSource::brat_import: return "brat_import";
    case LabelSource::ui: return "ui";
    case LabelSource::fixture: return "fixture";
    }
    return "?";
}

std::optional<LabelSource> label_source_from_string(std::string_view s) {
    if (s == "brat_import") return LabelSource::brat_import;
    if (s == "ui") return LabelSource::ui;
    if (s == "fixture") return LabelSource::fixture;
    return std::nullopt;
}

// ---- LabelSet --------------------------------------------------------------

LabelSet::LabelSet(std::vector<LabeledFragment> items) : items_(std::move(items)) {}

bool LabelSet::upsert(LabeledFragment item) {
    if (!item.fragment_id.empty()) {
        for (auto& existing : items_) {
            if (existing.fragment_id == item.fragment_id && existing.annotator == item.annotator) {
                existing = std::move(item);
                return true;
            }
        }
    }
    items_.push_back(std::move(item));
    return false;
}

std::vector<std::string> LabelSet::texts() const {
    std::vector<std::string> out;
    out.reserve(items_.size());
    for (const auto& i : items_) out.push_back(i.text);
    return out;
}

std::vector<ActionClass> LabelSet::labels() const {
    std::vector<ActionClass> out;
    out.reserve(items_.size());
    for (const auto& i : items_) out.push_back(i.label);
    return out;
}

std::vector<std::string> LabelSet::fragment_ids() const {
    std::vector<std::string> out;
    out.reserve(items_.size());
    for (const auto& i : items_) out.push_back(i.fragment_id);
    return out;
}

LabelDistribution label_distribution(const LabelSet& set) {
    LabelDistribution d;
    for (const auto& item : set.items()) d.counts[index_of(item.label)]++;
    d.total = set.size();
    if (d.total > 0)
        for (std::size_t c = 0; c < kActionCount; ++c)
            d.proportions[c] = static_cast<double>(d.counts[c]) / static_cast<double>(d.total);
    return d;
}

std::string labels_to_jsonl(const LabelSet& set) {
    std::string out;
    for (const auto& i : set.items()) {
        json j = {{"fragment_id", i.fragment_id}, {"ticket_id", i.ticket_id},
                  {"text", i.text},               {"label", to_string(i.label)},
                  {"annotator", i.annotator},     {"source", to_string(i.source)},
                  {"timestamp", i.timestamp}};
        if (i.span) j["span"] = {i.span->start, i.span->end};
        out += j.dump();
        out += '\n';
    }
    return out;
}

LabelSet labels_from_jsonl(std::string_view text) {
    LabelSet set;
    auto lines = split_lines(text);
    for (std::size_t n = 0; n < lines.size(); ++n) {
        if (trim(lines[n]).empty()) continue;
        const std::string where = "labels line " + std::to_string(n + 1) + ": ";
        json j;
        try {
            j = json::parse(lines[n]);
        } catch (const json::parse_error& e) {
            throw Error(where + "invalid JSON");
        }
        LabeledFragment f;
        try {
            f.text = j.at("text").get<std::string>();
            auto label = j.at("label").get<std::string>();
            auto a = parse_action(label);
            if (!a) throw Error(where + "unknown label '" + label + "'");
            f.label = *a;
            f.fragment_id = j.value("fragment_id", "");
            f.ticket_id = j.value("ticket_id", "");
            f.annotator = j.value("annotator", "");
            f.timestamp = j.value("timestamp", "");
            auto src = label_source_from_string(j.value("source", "fixture"));
            if (!src) throw Error(where + "unknown source");
            f.source = *src;
            if (auto s = j.find("span"); s != j.end() && s->is_array() && s->size() == 2)
                f.span = Span{(*s)[0].get<std::size_t>(), (*s)[1].get<std::size_t>()};
        } catch (const json::exception& e) {
            throw Error(where + e.what());
        }
        set.push_back(std::move(f));
    }
    return set;
}

// ---- BRAT ------------------------------------------------------------------

namespace {

// Byte offset of every code point boundary, plus the end.
std::vector<std::size_t> code_point_offsets(std::string_view s) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < s.size(); ++i)
        if ((static_cast<unsigned char>(s[i]) & 0xC0) != 0x80) out.push_back(i);
    out.push_back(s.size());
    return out;
}

std::size_t code_point_count(std::string_view s) { return code_point_offsets(s).size() - 1; }

}  // namespace

BratImport import_brat(std::string_view ann, std::string_view txt, const BratOptions& options) {
    BratImport out;
    const auto offsets = code_point_offsets(txt);
    const std::size_t n_cp = offsets.size() - 1;
    auto lines = split_lines(ann);
    for (std::size_t n = 0; n < lines.size(); ++n) {
        const std::size_t line_no = n + 1;
        const std::string& line = lines[n];
        if (trim(line).empty()) continue;
        if (line[0] != 'T') {
            ++out.ignored_lines;
            continue;
        }
        auto tab1 = line.find('\t');
        auto tab2 = tab1 == std::string::npos ? tab1 : line.find('\t', tab1 + 1);
        if (tab2 == std::string::npos) {
            out.errors.push_back({line_no, "malformed text-bound line"});
            continue;
        }
        const std::string id = line.substr(0, tab1);
        const std::string middle = line.substr(tab1 + 1, tab2 - tab1 - 1);
        const std::string surface = line.substr(tab2 + 1);
        if (middle.find(';') != std::string::npos) {
            out.errors.push_back({line_no, "discontinuous spans are not supported at " + id});
            continue;
        }
        auto sp1 = middle.find(' ');
        auto sp2 = sp1 == std::string::npos ? sp1 : middle.find(' ', sp1 + 1);
        if (sp2 == std::string::npos || middle.find(' ', sp2 + 1) != std::string::npos) {
            out.errors.push_back({line_no, "malformed span at " + id});
            continue;
        }
        const std::string label = middle.substr(0, sp1);
        std::size_t start = 0, end = 0;
        try {
            std::size_t used = 0;
            auto a = middle.substr(sp1 + 1, sp2 - sp1 - 1);
            auto b = middle.substr(sp2 + 1);
            if (a.empty() || b.empty() || a[0] == '-' || b[0] == '-') throw std::invalid_argument("neg");
            start = std::stoull(a, &used);
            if (used != a.size()) throw std::invalid_argument("trailing");
            end = std::stoull(b, &used);
            if (used != b.size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            out.errors.push_back({line_no, "malformed offsets at " + id});
            continue;
        }
        if (start > end || end > n_cp) {
            out.errors.push_back({line_no, "offsets out of range at " + id});
            continue;
        }
        auto cls = options.aliases.resolve(label);
        if (!cls) {
            out.errors.push_back({line_no, "unknown label '" + label + "' at " + id});
            continue;
        }
        std::string_view actual = txt.substr(offsets[start], offsets[end] - offsets[start]);
        if (actual != surface) {
            out.errors.push_back({line_no, "span text mismatch at " + id});
            continue;
        }
        LabeledFragment f;
        f.fragment_id = options.doc_id + ":" + id;
        f.ticket_id = options.doc_id;
        f.text = surface;
        f.label = *cls;
        f.annotator = options.annotator;
        f.source = LabelSource::brat_import;
        f.timestamp = options.timestamp;
        f.span = Span{start, end};
        out.fragments.push_back(std::move(f));
    }
    return out;
}

BratDocument export_brat(const LabelSet& set) {
    BratDocument doc;
    std::size_t cp = 0;
    for (std::size_t i = 0; i < set.size(); ++i) {
        const auto& item = set[i];
        if (item.text.find_first_of("\n\r\t") != std::string::npos)
            throw Error("fragment " + std::to_string(i) + " contains a line break or tab and cannot be exported");
        const std::size_t len = code_point_count(item.text);
        doc.ann += "T" + std::to_string(i + 1) + "\t" + std::string(to_string(item.label)) + " " +
                   std::to_string(cp) + " " + std::to_string(cp + len) + "\t" + item.text + "\n";
        doc.txt += item.text;
        doc.txt += '\n';
        cp += len + 1;
    }
    return doc;
}

// ---- splitting -------------------------------------------------------------

SplitResult stratified_split(const LabelSet& set, double test_fraction, std::uint64_t seed, SplitMode mode) {
    if (set.empty()) throw Error("cannot split an empty label set");
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw Error("test_fraction must lie in (0, 1)");

    Rng rng(seed);
    std::vector<bool> in_test(set.size(), false);
    SplitResult result;

    if (mode == SplitMode::fragment) {
        for (auto a : kAllActions) {
            std::vector<std::size_t> members;
            for (std::size_t i = 0; i < set.size(); ++i)
                if (set[i].label == a) members.push_back(i);
            const std::size_t n = members.size();
            if (n == 0) continue;
            if (n == 1) {
                result.warnings.push_back("class " + std::string(to_string(a)) +
                                          " has a single member; kept in train");
                continue;
            }
            auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
            n_test = std::clamp<std::size_t>(n_test, 1, n - 1);
            shuffle(std::span<std::size_t>(members), rng);
            for (std::size_t k = 0; k < n_test; ++k) in_test[members[k]] = true;
        }
    } else {
        // Every fragment of a ticket lands on the same side.
        std::vector<std::string> groups;
        std::map<std::string, std::vector<std::size_t>> members;
        for (std::size_t i = 0; i < set.size(); ++i) {
            std::string key = set[i].ticket_id.empty() ? "#" + set[i].fragment_id + "#" + std::to_string(i)
                                                       : set[i].ticket_id;
            auto [it, inserted] = members.try_emplace(key);
            if (inserted) groups.push_back(key);
            it->second.push_back(i);
        }
        shuffle(std::span<std::string>(groups), rng);
        const auto target = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(set.size())));
        std::size_t taken = 0;
        for (const auto& g : groups) {
            if (taken >= target) break;
            for (auto i : members[g]) in_test[i] = true;
            taken += members[g].size();
        }
    }

    for (std::size_t i = 0; i < set.size(); ++i) (in_test[i] ? result.test : result.train).push_back(set[i]);
    if (mode == SplitMode::ticket) {
        auto tr = label_distribution(result.train), te = label_distribution(result.test);
        for (auto a : kAllActions)
            if (tr.counts[index_of(a)] + te.counts[index_of(a)] >= 2 &&
                (tr.counts[index_of(a)] == 0 || te.counts[index_of(a)] == 0))
                result.warnings.push_back("class " + std::string(to_string(a)) + " is missing from one partition");
    }
    return result;
}

std::vector<std::string> sample_tickets(const Corpus& corpus, const std::map<CurationLevel, std::size_t>& quotas,
                                        std::uint64_t seed, std::vector<std::string>* warnings) {
    Rng rng(seed);
    std::vector<bool> chosen(corpus.tickets.size(), false);
    for (const auto& [level, quota] : quotas) {
        std::vector<std::size_t> candidates;
        for (std::size_t i = 0; i < corpus.tickets.size(); ++i)
            if (corpus.tickets[i].curation_level == level) candidates.push_back(i);
        if (candidates.size() < quota && warnings)
            warnings->push_back("level " + std::string(to_string(level)) + " has " +
                                std::to_string(candidates.size()) + " tickets; quota " + std::to_string(quota));
        shuffle(std::span<std::size_t>(candidates), rng);
        for (std::size_t k = 0; k < std::min(quota, candidates.size()); ++k) chosen[candidates[k]] = true;
    }
    std::vector<std::string> out;
    for (std::size_t i = 0; i < corpus.tickets.size(); ++i)
        if (chosen[i]) out.push_back(corpus.tickets[i].ticket_id);
    return out;
}

}  // namespace curlog
