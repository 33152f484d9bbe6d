#include <curlog/synthetic.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>

namespace curlog::synthetic {

const std::vector<std::string>& class_vocabulary(ActionClass action) {
    static const std::array<std::vector<std::string>, kActionCount> vocab{{
        {"initial", "review", "deposited", "planning", "plan", "processing", "scope", "assess", "determine",
         "outline", "inventory", "intake", "evaluate", "drafted"},
        {"recode", "variables", "missing", "values", "labels", "reorder", "convert", "standardize", "collapse",
         "categories", "identifiers", "disclosure", "recoded", "transformed"},
        {"metadata", "description", "collection", "dates", "abstract", "keywords", "ddi", "universe", "sampling",
         "geography", "summary", "citation", "funding", "subject"},
        {"codebook", "documentation", "pdf", "questionnaire", "technical", "report", "guide", "compiled",
         "appendix", "layout", "record", "manual", "notes", "instrument"},
        {"qc", "1qc", "2qc", "self", "checks", "quality", "check", "verified", "completeness", "standards",
         "alignment", "final", "passed", "issues"},
        {"emailed", "pi", "manager", "discussed", "consulted", "supervisor", "asked", "replied", "call",
         "contacted", "depositor", "followup", "conversation", "clarify"},
        {"compiling", "folder", "folders", "misc", "curation", "general", "organizing", "wrapping", "scripts",
         "running", "setup", "copying", "cleanup", "sorting"},
        {"timesheet", "staff", "training", "admin", "administrative", "webinar", "inbox", "vacation", "holiday",
         "professional", "development", "seminar", "lunch", "meeting"},
    }};
    return vocab[index_of(action)];
}

const std::vector<std::string>& noise_vocabulary() {
    static const std::vector<std::string> noise{"worked",  "continued", "file",    "files",   "data",
                                                "spss",    "stata",     "sas",     "dataset", "version",
                                                "today",   "started",   "finished", "team",   "project",
                                                "update",  "updated",   "progress", "pending", "study"};
    return noise;
}

std::string fragment_text(ActionClass action, Rng& rng, const FragmentOptions& options) {
    const auto& cls = class_vocabulary(action);
    const auto& noise = noise_vocabulary();
    const std::size_t span = options.max_tokens - options.min_tokens + 1;
    const std::size_t n = options.min_tokens + uniform_index(rng, span);
    std::string text;
    for (std::size_t k = 0; k < n; ++k) {
        const bool from_noise = uniform01(rng) < options.noise_share;
        const auto& pool = from_noise ? noise : cls;
        if (!text.empty()) text += ' ';
        text += pool[uniform_index(rng, pool.size())];
    }
    text[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(text[0])));
    return text;
}

namespace {

// Largest-remainder allocation of `total` over the given proportions.
std::array<std::size_t, kActionCount> allocate(const std::array<double, kActionCount>& p, std::size_t total) {
    double sum = 0.0;
    for (double v : p) sum += v;
    std::array<std::size_t, kActionCount> counts{};
    std::array<double, kActionCount> rem{};
    std::size_t assigned = 0;
    for (std::size_t c = 0; c < kActionCount; ++c) {
        const double exact = p[c] / sum * static_cast<double>(total);
        counts[c] = static_cast<std::size_t>(std::floor(exact));
        rem[c] = exact - std::floor(exact);
        assigned += counts[c];
    }
    std::array<std::size_t, kActionCount> order{};
    for (std::size_t c = 0; c < kActionCount; ++c) order[c] = c;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rem[a] > rem[b]; });
    for (std::size_t k = 0; assigned < total; ++k, ++assigned) counts[order[k % kActionCount]]++;
    return counts;
}

ActionClass draw_class(const std::array<double, kActionCount>& p, Rng& rng) {
    double sum = 0.0;
    for (double v : p) sum += v;
    double u = uniform01(rng) * sum;
    for (auto a : kAllActions) {
        u -= p[index_of(a)];
        if (u < 0.0) return a;
    }
    return kAllActions.back();
}

}  // namespace

LabelSet labels(const LabelOptions& options) {
    Rng rng(options.seed);
    auto counts = allocate(options.proportions, options.count);
    std::vector<ActionClass> classes;
    for (auto a : kAllActions)
        for (std::size_t k = 0; k < counts[index_of(a)]; ++k) classes.push_back(a);
    shuffle(std::span<ActionClass>(classes), rng);

    LabelSet set;
    for (std::size_t i = 0; i < classes.size(); ++i) {
        LabeledFragment f;
        char id[32];
        std::snprintf(id, sizeof id, "SYN-%05zu", i);
        f.fragment_id = id;
        std::snprintf(id, sizeof id, "SYN-T%04zu", i / 10);
        f.ticket_id = id;
        f.text = fragment_text(classes[i], rng, options.fragment);
        f.label = classes[i];
        f.annotator = options.annotator;
        f.source = LabelSource::fixture;
        set.push_back(std::move(f));
    }
    return set;
}

GeneratedCorpus corpus(const CorpusOptions& options) {
    static const std::array<const char*, 6> kArchives{"BJS", "ICPSR", "NACJD", "NAHDAP", "ICPSR", "RCMD"};
    Rng rng(options.seed);
    GeneratedCorpus out;
    out.corpus.provenance.source = "synthetic";
    std::string study;
    for (std::size_t i = 0; i < options.tickets; ++i) {
        Ticket t;
        char buf[32];
        std::snprintf(buf, sizeof buf, "TKT-%04zu", i + 1);
        t.ticket_id = buf;
        if (i == 0 || options.shared_study_every == 0 || i % options.shared_study_every != 0) {
            std::snprintf(buf, sizeof buf, "STUDY-%04zu", i + 1);
            study = buf;
        }
        t.study_id = study;
        t.curation_level = static_cast<CurationLevel>(1 + i % 3);
        t.archive = kArchives[uniform_index(rng, kArchives.size())];
        t.created_date.year = 2017 + static_cast<int>(uniform_index(rng, 3));
        t.created_date.month = static_cast<int>(uniform_index(rng, 12)) + 1;
        if (t.created_date.year == 2017 && t.created_date.month < 2) t.created_date.month = 2;
        t.created_date.day = static_cast<int>(uniform_index(rng, 28)) + 1;

        auto props = kLabelSkew;
        if (t.curation_level == CurationLevel::L3) {
            for (auto& p : props) p *= 1.0 - options.communication_boost_l3;
            props[index_of(ActionClass::Communication)] += options.communication_boost_l3;
        }
        const std::size_t n_entries =
            options.min_entries + uniform_index(rng, options.max_entries - options.min_entries + 1);
        for (std::size_t e = 0; e < n_entries; ++e) {
            WorkLogEntry entry;
            entry.author = options.curators[uniform_index(rng, options.curators.size())];
            entry.logged_date = t.created_date;
            entry.time_spent_hours = 0.25 * static_cast<double>(1 + uniform_index(rng, 32));
            const std::size_t n_frag = 1 + uniform_index(rng, options.max_fragments_per_entry);
            for (std::size_t k = 0; k < n_frag; ++k) {
                ActionClass a = draw_class(props, rng);
                std::string text = fragment_text(a, rng, options.fragment);
                if (a == ActionClass::Communication && uniform01(rng) < 0.3)
                    text += " with " + options.curators[uniform_index(rng, options.curators.size())];
                if (k > 0) {
                    static const std::array<const char*, 3> kDelims{". ", "\n", ".\r\n"};
                    entry.description += kDelims[uniform_index(rng, kDelims.size())];
                }
                entry.description += text;
                out.truth.push_back(a);
            }
            if (uniform01(rng) < 0.5) entry.description += ".";
            t.work_logs.push_back(std::move(entry));
        }
        out.corpus.tickets.push_back(std::move(t));
    }
    return out;
}

}  // namespace curlog::synthetic
