#include <curlog/corpus.hpp>

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>
#include <unordered_map>

namespace curlog {

using nlohmann::json;

std::string_view to_string(CurationLevel level) {
    switch (level) {
    case CurationLevel::L1: return "L1";
    case CurationLevel::L2: return "L2";
    case CurationLevel::L3: return "L3";
    }
    return "?";
}

std::optional<CurationLevel> level_from_int(long long value) {
    if (value < 1 || value > 3) return std::nullopt;
    return static_cast<CurationLevel>(value);
}

double Ticket::total_hours() const {
    double h = 0.0;
    for (const auto& e : work_logs) h += e.time_spent_hours;
    return h;
}

const Ticket* Corpus::find(std::string_view ticket_id) const {
    for (const auto& t : tickets)
        if (t.ticket_id == ticket_id) return &t;
    return nullptr;
}

std::size_t Corpus::distinct_studies() const {
    std::set<std::string> ids;
    for (const auto& t : tickets) ids.insert(t.study_id);
    return ids.size();
}

double Corpus::total_hours() const {
    double h = 0.0;
    for (const auto& t : tickets) h += t.total_hours();
    return h;
}

// ---- ingestion -------------------------------------------------------------

namespace {

const std::set<std::string> kTicketFields{"ticket_id", "study_id", "curation_level", "archive", "created_date",
                                          "work_logs"};
const std::set<std::string> kEntryFields{"author", "logged_date", "time_spent_hours", "description"};
const std::vector<std::string> kCsvHeader{"ticket_id",   "study_id", "curation_level",   "archive",    "created_date",
                                          "author",      "logged_date", "time_spent_hours", "description"};

std::optional<CurationLevel> parse_level(const json& v, std::string& why) {
    long long n = 0;
    if (v.is_number_integer()) {
        n = v.get<long long>();
    } else if (v.is_string()) {
        std::string s = to_upper(trim(v.get<std::string>()));
        if (!s.empty() && s[0] == 'L') s.erase(0, 1);
        if (s.empty() || !std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); })) {
            why = "curation_level is not a level";
            return std::nullopt;
        }
        n = std::stoll(s);
    } else {
        why = "curation_level is not a level";
        return std::nullopt;
    }
    auto lvl = level_from_int(n);
    if (!lvl) why = "level out of range";
    return lvl;
}

std::optional<double> parse_hours_text(std::string_view s) {
    s = trim(s);
    if (s.empty()) return std::nullopt;
    try {
        std::size_t used = 0;
        double v = std::stod(std::string(s), &used);
        if (used != s.size()) return std::nullopt;
        return v;
    } catch (...) {
        return std::nullopt;
    }
}

struct Builder {
    IngestResult result;
    std::unordered_map<std::string, std::size_t> line_of;

    void add_ticket(Ticket t, std::size_t line) {
        auto [it, inserted] = line_of.emplace(t.ticket_id, line);
        if (!inserted)
            throw Error("duplicate ticket_id " + t.ticket_id + " at lines " + std::to_string(it->second) + " and " +
                        std::to_string(line));
        result.corpus.tickets.push_back(std::move(t));
    }
    void error(std::size_t line, std::string msg) { result.errors.push_back({line, std::move(msg)}); }
    void warn(std::size_t line, const std::string& msg) {
        result.warnings.push_back("line " + std::to_string(line) + ": " + msg);
    }
};

std::optional<WorkLogEntry> parse_entry(const json& j, std::size_t line, std::size_t index, Builder& b,
                                        std::string& why) {
    if (!j.is_object()) {
        why = "work_logs[" + std::to_string(index) + "] is not an object";
        return std::nullopt;
    }
    WorkLogEntry e;
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!kEntryFields.count(it.key()))
            b.warn(line, "unknown field work_logs[" + std::to_string(index) + "]." + it.key() + " not retained");
    if (auto it = j.find("author"); it != j.end() && it->is_string()) e.author = it->get<std::string>();
    auto date = j.find("logged_date");
    if (date == j.end() || !date->is_string()) {
        why = "work_logs[" + std::to_string(index) + "] missing logged_date";
        return std::nullopt;
    }
    auto d = Date::parse(date->get<std::string>());
    if (!d) {
        why = "work_logs[" + std::to_string(index) + "] logged_date is not an ISO-8601 date";
        return std::nullopt;
    }
    e.logged_date = *d;
    auto hours = j.find("time_spent_hours");
    if (hours == j.end()) {
        why = "work_logs[" + std::to_string(index) + "] missing time_spent_hours";
        return std::nullopt;
    }
    std::optional<double> h;
    if (hours->is_number()) h = hours->get<double>();
    else if (hours->is_string()) h = parse_hours_text(hours->get<std::string>());
    if (!h || !std::isfinite(*h)) {
        why = "work_logs[" + std::to_string(index) + "] time_spent_hours is not a number";
        return std::nullopt;
    }
    if (*h < 0) {
        why = "work_logs[" + std::to_string(index) + "] negative time_spent_hours";
        return std::nullopt;
    }
    e.time_spent_hours = *h;
    if (auto it = j.find("description"); it != j.end() && it->is_string()) e.description = it->get<std::string>();
    if (trim(e.description).empty()) b.warn(line, "work_logs[" + std::to_string(index) + "] has empty description");
    return e;
}

void ingest_jsonl(std::string_view text, Builder& b) {
    auto lines = split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::size_t line = i + 1;
        if (trim(lines[i]).empty()) continue;
        json j;
        try {
            j = json::parse(lines[i]);
        } catch (const json::parse_error& e) {
            b.error(line, std::string("invalid JSON: ") + e.what());
            continue;
        }
        if (!j.is_object()) {
            b.error(line, "record is not a JSON object");
            continue;
        }
        Ticket t;
        auto str_field = [&](const char* name) -> std::optional<std::string> {
            auto it = j.find(name);
            if (it == j.end() || !it->is_string() || trim(it->get<std::string>()).empty()) return std::nullopt;
            return std::string(trim(it->get<std::string>()));
        };
        auto id = str_field("ticket_id");
        if (!id) {
            b.error(line, "missing ticket_id");
            continue;
        }
        t.ticket_id = *id;
        auto study = str_field("study_id");
        if (!study) {
            b.error(line, "missing study_id");
            continue;
        }
        t.study_id = *study;
        auto lvl = j.find("curation_level");
        if (lvl == j.end()) {
            b.error(line, "missing curation_level");
            continue;
        }
        std::string why;
        auto level = parse_level(*lvl, why);
        if (!level) {
            b.error(line, why);
            continue;
        }
        t.curation_level = *level;
        if (auto a = str_field("archive")) t.archive = to_upper(*a);
        else b.warn(line, "missing archive");
        auto created = str_field("created_date");
        auto cd = created ? Date::parse(*created) : std::nullopt;
        if (!cd) {
            b.error(line, created ? "created_date is not an ISO-8601 date" : "missing created_date");
            continue;
        }
        t.created_date = *cd;
        auto logs = j.find("work_logs");
        if (logs == j.end() || !logs->is_array()) {
            b.error(line, "missing work_logs");
            continue;
        }
        bool ok = true;
        for (std::size_t k = 0; k < logs->size(); ++k) {
            auto e = parse_entry((*logs)[k], line, k, b, why);
            if (!e) {
                ok = false;
                break;
            }
            t.work_logs.push_back(std::move(*e));
        }
        if (!ok) {
            b.error(line, why);
            continue;
        }
        for (auto it = j.begin(); it != j.end(); ++it)
            if (!kTicketFields.count(it.key())) b.warn(line, "unknown field " + it.key() + " not retained");
        b.add_ticket(std::move(t), line);
    }
}

void ingest_csv(std::string_view text, Builder& b) {
    auto records = parse_csv(text);
    if (records.empty()) return;
    std::vector<std::string> header;
    for (const auto& f : records[0].fields) header.emplace_back(trim(f));
    if (header != kCsvHeader) throw Error("unexpected CSV header; expected " + [] {
        std::string s;
        for (const auto& h : kCsvHeader) s += (s.empty() ? "" : ",") + h;
        return s;
    }());

    std::unordered_map<std::string, std::size_t> slot;
    std::vector<std::pair<Ticket, std::size_t>> tickets;
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        const std::size_t line = rec.line;
        if (rec.fields.size() != kCsvHeader.size()) {
            b.error(line, "expected " + std::to_string(kCsvHeader.size()) + " fields, got " +
                              std::to_string(rec.fields.size()));
            continue;
        }
        auto field = [&](std::size_t k) { return std::string(trim(rec.fields[k])); };
        Ticket t;
        t.ticket_id = field(0);
        if (t.ticket_id.empty()) {
            b.error(line, "missing ticket_id");
            continue;
        }
        t.study_id = field(1);
        if (t.study_id.empty()) {
            b.error(line, "missing study_id");
            continue;
        }
        if (field(2).empty()) {
            b.error(line, "missing curation_level");
            continue;
        }
        std::string why;
        auto level = parse_level(json(field(2)), why);
        if (!level) {
            b.error(line, why);
            continue;
        }
        t.curation_level = *level;
        t.archive = to_upper(field(3));
        auto cd = Date::parse(field(4));
        if (!cd) {
            b.error(line, field(4).empty() ? "missing created_date" : "created_date is not an ISO-8601 date");
            continue;
        }
        t.created_date = *cd;

        // A row with no work-log columns declares a ticket without entries.
        bool has_entry = !(field(5).empty() && field(6).empty() && field(7).empty() && rec.fields[8].empty());
        std::optional<WorkLogEntry> entry;
        if (has_entry) {
            json je = {{"author", rec.fields[5]}, {"logged_date", field(6)}, {"time_spent_hours", field(7)},
                       {"description", rec.fields[8]}};
            entry = parse_entry(je, line, 0, b, why);
            if (!entry) {
                b.error(line, why.substr(why.find(']') + 2));
                continue;
            }
        }

        auto it = slot.find(t.ticket_id);
        if (it == slot.end()) {
            slot.emplace(t.ticket_id, tickets.size());
            if (entry) t.work_logs.push_back(std::move(*entry));
            tickets.emplace_back(std::move(t), line);
            continue;
        }
        Ticket& existing = tickets[it->second].first;
        if (existing.study_id != t.study_id || existing.curation_level != t.curation_level ||
            existing.archive != t.archive || existing.created_date != t.created_date) {
            b.error(line, "ticket attributes conflict with line " + std::to_string(tickets[it->second].second));
            continue;
        }
        if (entry) existing.work_logs.push_back(std::move(*entry));
    }
    for (auto& [t, line] : tickets) b.add_ticket(std::move(t), line);
}

}  // namespace

IngestResult ingest_tickets_text(std::string_view text, InputFormat format, std::string source_name) {
    Builder b;
    b.result.corpus.provenance.source = std::move(source_name);
    b.result.corpus.provenance.ingested_at = artifact_timestamp();
    if (format == InputFormat::jsonl) ingest_jsonl(text, b);
    else ingest_csv(text, b);
    return std::move(b.result);
}

IngestResult ingest_tickets(std::istream& source, InputFormat format, std::string source_name) {
    if (!source) throw Error("cannot read " + source_name);
    std::ostringstream ss;
    ss << source.rdbuf();
    if (source.bad()) throw Error("cannot read " + source_name);
    return ingest_tickets_text(ss.str(), format, std::move(source_name));
}

IngestResult ingest_file(const std::filesystem::path& path, std::optional<InputFormat> format) {
    InputFormat fmt = format.value_or(path.extension() == ".csv" ? InputFormat::csv : InputFormat::jsonl);
    return ingest_tickets_text(read_file(path), fmt, path.string());
}

std::string corpus_to_jsonl(const Corpus& corpus) {
    std::string out;
    for (const auto& t : corpus.tickets) {
        json logs = json::array();
        for (const auto& e : t.work_logs)
            logs.push_back({{"author", e.author},
                            {"logged_date", e.logged_date.to_string()},
                            {"time_spent_hours", e.time_spent_hours},
                            {"description", e.description}});
        json j = {{"ticket_id", t.ticket_id},
                  {"study_id", t.study_id},
                  {"curation_level", static_cast<int>(t.curation_level)},
                  {"archive", t.archive},
                  {"created_date", t.created_date.to_string()},
                  {"work_logs", std::move(logs)}};
        out += j.dump();
        out += '\n';
    }
    return out;
}

// ---- deidentification ------------------------------------------------------

std::string pseudonym_token(std::size_t ordinal) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "CURATOR-%03zu", ordinal);
    return buf;
}

const std::string& PseudonymMap::assign(const std::string& raw_name) {
    std::string key = to_lower(raw_name);
    auto it = by_key_.find(key);
    if (it != by_key_.end()) return entries_[it->second].second;
    by_key_.emplace(key, entries_.size());
    entries_.emplace_back(raw_name, pseudonym_token(entries_.size() + 1));
    return entries_.back().second;
}

std::optional<std::string> PseudonymMap::pseudonym_for(std::string_view raw_name) const {
    auto it = by_key_.find(to_lower(raw_name));
    if (it == by_key_.end()) return std::nullopt;
    return entries_[it->second].second;
}

std::optional<std::string> PseudonymMap::name_for(std::string_view pseudonym) const {
    for (const auto& [name, token] : entries_)
        if (token == pseudonym) return name;
    return std::nullopt;
}

std::string PseudonymMap::to_csv() const {
    std::string out = "raw_name,pseudonym\n";
    for (const auto& [name, token] : entries_) out += csv_escape(name) + "," + token + "\n";
    return out;
}

namespace {

bool word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

struct Match {
    std::size_t pos;
    std::size_t len;
    std::size_t name;
};

// A hyphen joined to another word character continues the word, so
// "Jane Doe" does not match inside "Jane Doe-Smith".
bool boundary_before(std::string_view s, std::size_t pos) {
    if (pos == 0) return true;
    char c = s[pos - 1];
    if (word_char(c)) return false;
    if (c == '-' && pos >= 2 && word_char(s[pos - 2])) return false;
    return true;
}

bool boundary_after(std::string_view s, std::size_t end) {
    if (end >= s.size()) return true;
    char c = s[end];
    if (word_char(c)) return false;
    if (c == '-' && end + 1 < s.size() && word_char(s[end + 1])) return false;
    return true;
}

std::vector<Match> scan(std::string_view text, const std::vector<std::string>& lowered) {
    std::vector<Match> out;
    std::string low = to_lower(text);
    std::size_t pos = 0;
    while (pos < low.size()) {
        bool hit = false;
        if (boundary_before(low, pos)) {
            for (std::size_t k = 0; k < lowered.size(); ++k) {
                const auto& n = lowered[k];
                if (n.empty() || low.compare(pos, n.size(), n) != 0) continue;
                if (!boundary_after(low, pos + n.size())) continue;
                out.push_back({pos, n.size(), k});
                pos += n.size();
                hit = true;
                break;
            }
        }
        if (!hit) ++pos;
    }
    return out;
}

std::vector<std::string> longest_first(std::span<const std::string> names) {
    std::vector<std::string> sorted;
    std::set<std::string> seen;
    for (const auto& n : names) {
        std::string t(trim(n));
        if (!t.empty() && seen.insert(to_lower(t)).second) sorted.push_back(t);
    }
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const std::string& a, const std::string& b) { return a.size() > b.size(); });
    return sorted;
}

std::string apply(std::string_view text, const std::vector<Match>& matches, const std::vector<std::string>& names,
                  const PseudonymMap& map) {
    std::string out;
    std::size_t prev = 0;
    for (const auto& m : matches) {
        out.append(text.substr(prev, m.pos - prev));
        out += *map.pseudonym_for(names[m.name]);
        prev = m.pos + m.len;
    }
    out.append(text.substr(prev));
    return out;
}

}  // namespace

std::string replace_names(std::string_view text, std::span<const std::string> names_longest_first,
                          const PseudonymMap& map) {
    std::vector<std::string> names(names_longest_first.begin(), names_longest_first.end());
    std::vector<std::string> lowered;
    for (const auto& n : names) {
        if (!map.pseudonym_for(n)) throw Error("no pseudonym assigned for a listed name");
        lowered.push_back(to_lower(n));
    }
    return apply(text, scan(text, lowered), names, map);
}

DeidentifyResult deidentify(const Corpus& corpus, std::span<const std::string> names) {
    if (names.empty()) throw Error("deidentify requires at least one name");
    auto sorted = longest_first(names);
    std::vector<std::string> lowered;
    for (const auto& n : sorted) lowered.push_back(to_lower(n));

    DeidentifyResult result;
    result.corpus = corpus;
    std::vector<bool> used(sorted.size(), false);

    auto process = [&](std::string& field) {
        auto matches = scan(field, lowered);
        for (const auto& m : matches) {
            used[m.name] = true;
            result.map.assign(sorted[m.name]);
        }
        if (!matches.empty()) field = apply(field, matches, sorted, result.map);
    };
    for (auto& t : result.corpus.tickets)
        for (auto& e : t.work_logs) {
            process(e.author);
            process(e.description);
        }
    // Names never seen still get a pseudonym, after the used ones, in input order.
    for (const auto& raw : names) {
        std::string t(trim(raw));
        if (t.empty()) continue;
        auto it = std::find_if(sorted.begin(), sorted.end(),
                               [&](const std::string& s) { return to_lower(s) == to_lower(t); });
        std::size_t k = static_cast<std::size_t>(it - sorted.begin());
        if (!used[k] && !result.map.pseudonym_for(t)) {
            result.map.assign(sorted[k]);
            result.unused_names.push_back(sorted[k]);
        }
    }
    return result;
}

// ---- filtering -------------------------------------------------------------

Corpus filter_corpus(const Corpus& corpus, const FilterCriteria& criteria) {
    if (criteria.created_from && criteria.created_to && *criteria.created_to < *criteria.created_from)
        throw Error("inverted date range " + criteria.created_from->to_string() + " > " +
                    criteria.created_to->to_string());
    if (!criteria.created_from && !criteria.created_to && !criteria.require_worklog) return corpus;

    Corpus out;
    out.provenance = corpus.provenance;
    std::size_t out_of_range = 0, no_logs = 0;
    for (const auto& t : corpus.tickets) {
        if ((criteria.created_from && t.created_date < *criteria.created_from) ||
            (criteria.created_to && *criteria.created_to < t.created_date)) {
            ++out_of_range;
            continue;
        }
        if (criteria.require_worklog && t.work_logs.empty()) {
            ++no_logs;
            continue;
        }
        out.tickets.push_back(t);
    }
    std::string trail = "filter created=[" + (criteria.created_from ? criteria.created_from->to_string() : "*") +
                        "," + (criteria.created_to ? criteria.created_to->to_string() : "*") +
                        "] require_worklog=" + (criteria.require_worklog ? "true" : "false") +
                        " removed_out_of_range=" + std::to_string(out_of_range) +
                        " removed_no_worklog=" + std::to_string(no_logs) +
                        " kept=" + std::to_string(out.tickets.size());
    out.provenance.filter_trail.push_back(std::move(trail));
    return out;
}

// ---- summary ---------------------------------------------------------------

std::string_view to_string(SummaryDimension dim) {
    switch (dim) {
    case SummaryDimension::level: return "level";
    case SummaryDimension::archive: return "archive";
    case SummaryDimension::year: return "year";
    }
    return "?";
}

std::string report_archive(std::string_view archive, const std::set<std::string>& allowed) {
    std::string up = to_upper(trim(archive));
    return allowed.count(up) ? up : "Other";
}

std::vector<SummaryRow> CorpusSummary::rows_for(SummaryDimension dim) const {
    std::vector<SummaryRow> out;
    for (const auto& r : rows)
        if (r.dimension == dim) out.push_back(r);
    return out;
}

std::string CorpusSummary::to_csv(int decimals) const {
    std::string out = "dimension,group,total_tickets,total_studies,average_curation_hours_per_study,hours_variant\n";
    for (const auto& r : rows)
        out += std::string(to_string(r.dimension)) + "," + csv_escape(r.group) + "," + std::to_string(r.tickets) +
               "," + std::to_string(r.studies) + "," + format_fixed(r.avg_hours_per_study, decimals) + "," +
               hours_variant + "\n";
    return out;
}

CorpusSummary corpus_summary(const Corpus& corpus, const SummaryOptions& options,
                             const std::map<std::string, double>* ticket_hours) {
    if (corpus.tickets.empty()) throw Error("nothing to summarize");

    struct Acc {
        std::size_t tickets = 0;
        std::set<std::string> studies;
        double hours = 0.0;
    };
    // Keys are chosen so std::map ordering is the report ordering.
    std::map<std::string, Acc> level, archive, year;
    for (const auto& t : corpus.tickets) {
        double h = t.total_hours();
        if (ticket_hours) {
            auto it = ticket_hours->find(t.ticket_id);
            h = it == ticket_hours->end() ? 0.0 : it->second;
        }
        std::string arch = report_archive(t.archive, options.allowed_archives);
        if (arch == "Other") arch = "\x7f" + arch;  // sorts last
        for (auto* acc : {&level[std::string(to_string(t.curation_level))], &archive[arch],
                          &year[std::to_string(t.created_date.year)]}) {
            acc->tickets++;
            acc->studies.insert(t.study_id);
            acc->hours += h;
        }
    }
    CorpusSummary s;
    if (ticket_hours) s.hours_variant = "curation_hours";
    auto emit = [&](SummaryDimension dim, const std::map<std::string, Acc>& groups) {
        for (const auto& [key, acc] : groups) {
            SummaryRow r;
            r.dimension = dim;
            r.group = key[0] == '\x7f' ? key.substr(1) : key;
            r.tickets = acc.tickets;
            r.studies = acc.studies.size();
            r.hours = acc.hours;
            r.avg_hours_per_study = acc.hours / static_cast<double>(r.studies);
            s.rows.push_back(std::move(r));
        }
    };
    emit(SummaryDimension::level, level);
    emit(SummaryDimension::archive, archive);
    emit(SummaryDimension::year, year);
    return s;
}

}  // namespace curlog
