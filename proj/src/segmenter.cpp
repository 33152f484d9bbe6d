#include <curlog/segmenter.hpp>

#include <json.hpp>

#include <cctype>

namespace curlog {

using nlohmann::json;

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

void push_trimmed(std::string_view text, std::size_t begin, std::size_t end, std::vector<Segment>& out) {
    while (begin < end && is_space(text[begin])) ++begin;
    while (end > begin && is_space(text[end - 1])) --end;
    if (begin < end) out.push_back({{begin, end}, std::string(text.substr(begin, end - begin))});
}

}  // namespace

std::vector<Segment> segment_entry(std::string_view description) {
    std::vector<Segment> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i < description.size(); ++i) {
        char c = description[i];
        bool cut = c == '\n' || c == '\r' ||
                   (c == '.' && (i + 1 == description.size() || is_space(description[i + 1])));
        if (!cut) continue;
        push_trimmed(description, start, i, out);
        start = i + 1;
    }
    push_trimmed(description, start, description.size(), out);
    return out;
}

std::vector<double> equal_apportion(double hours, std::span<const Segment> segments) {
    if (segments.empty()) return {};
    return std::vector<double>(segments.size(), hours / static_cast<double>(segments.size()));
}

double FragmentSet::total_hours() const {
    double h = unattributable_hours;
    for (const auto& f : fragments) h += f.apportioned_hours;
    return h;
}

FragmentSet segment_corpus(const Corpus& corpus, const Apportioner& apportion) {
    // Segment entries independently, then assemble in corpus order.
    struct Job {
        const Ticket* ticket;
        std::size_t entry;
    };
    std::vector<Job> jobs;
    for (const auto& t : corpus.tickets)
        for (std::size_t e = 0; e < t.work_logs.size(); ++e) jobs.push_back({&t, e});

    std::vector<std::vector<Segment>> segments(jobs.size());
    const auto n = static_cast<std::ptrdiff_t>(jobs.size());
#pragma omp parallel for schedule(dynamic, 64)
    for (std::ptrdiff_t j = 0; j < n; ++j)
        segments[j] = segment_entry(jobs[j].ticket->work_logs[jobs[j].entry].description);

    FragmentSet out;
    for (std::size_t j = 0; j < jobs.size(); ++j) {
        const Ticket& t = *jobs[j].ticket;
        const WorkLogEntry& entry = t.work_logs[jobs[j].entry];
        const auto& segs = segments[j];
        if (segs.empty()) {
            out.empty_entries.push_back({t.ticket_id, jobs[j].entry, entry.time_spent_hours});
            out.unattributable_hours += entry.time_spent_hours;
            continue;
        }
        auto hours = apportion(entry.time_spent_hours, segs);
        if (hours.size() != segs.size()) throw Error("apportioner returned the wrong number of shares");
        for (std::size_t k = 0; k < segs.size(); ++k) {
            Fragment f;
            f.fragment_id = t.ticket_id + ":" + std::to_string(jobs[j].entry) + ":" + std::to_string(k);
            f.ticket_id = t.ticket_id;
            f.study_id = t.study_id;
            f.entry_index = jobs[j].entry;
            f.span = segs[k].span;
            f.text = segs[k].text;
            f.apportioned_hours = hours[k];
            out.fragments.push_back(std::move(f));
        }
    }
    return out;
}

std::string fragments_to_jsonl(const FragmentSet& set) {
    std::string out;
    for (const auto& f : set.fragments) {
        json j = {{"fragment_id", f.fragment_id}, {"ticket_id", f.ticket_id},
                  {"study_id", f.study_id},       {"entry_index", f.entry_index},
                  {"start", f.span.start},        {"end", f.span.end},
                  {"text", f.text},               {"hours", f.apportioned_hours}};
        out += j.dump();
        out += '\n';
    }
    return out;
}

FragmentSet fragments_from_jsonl(std::string_view text) {
    FragmentSet set;
    auto lines = split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) continue;
        try {
            json j = json::parse(lines[i]);
            Fragment f;
            f.fragment_id = j.at("fragment_id").get<std::string>();
            f.ticket_id = j.at("ticket_id").get<std::string>();
            f.study_id = j.at("study_id").get<std::string>();
            f.entry_index = j.at("entry_index").get<std::size_t>();
            f.span = {j.at("start").get<std::size_t>(), j.at("end").get<std::size_t>()};
            f.text = j.at("text").get<std::string>();
            f.apportioned_hours = j.at("hours").get<double>();
            set.fragments.push_back(std::move(f));
        } catch (const json::exception& e) {
            throw Error("fragments line " + std::to_string(i + 1) + ": " + e.what());
        }
    }
    return set;
}

}  // namespace curlog
