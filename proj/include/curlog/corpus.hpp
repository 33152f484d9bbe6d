#pragma once

#include <curlog/error.hpp>
#include <curlog/util.hpp>

#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace curlog {

enum class CurationLevel : int { L1 = 1, L2 = 2, L3 = 3 };

std::string_view to_string(CurationLevel level);
std::optional<CurationLevel> level_from_int(long long value);

struct WorkLogEntry {
    std::string author;
    Date logged_date;
    double time_spent_hours = 0.0;
    std::string description;
};

struct Ticket {
    std::string ticket_id;
    std::string study_id;
    CurationLevel curation_level = CurationLevel::L1;
    std::string archive;  // upper-cased on ingestion
    Date created_date;
    std::vector<WorkLogEntry> work_logs;

    double total_hours() const;
};

struct Provenance {
    std::string source;
    std::string ingested_at;
    std::vector<std::string> filter_trail;
};

struct Corpus {
    std::vector<Ticket> tickets;
    Provenance provenance;

    const Ticket* find(std::string_view ticket_id) const;
    std::size_t distinct_studies() const;
    double total_hours() const;
};

enum class InputFormat { jsonl, csv };

struct IngestResult {
    Corpus corpus;
    std::vector<RecordError> errors;
    std::vector<std::string> warnings;
};

/// Parses a ticket stream. Malformed records are reported in `errors` and
/// skipped; a duplicate ticket_id or an unreadable stream throws.
IngestResult ingest_tickets(std::istream& source, InputFormat format,
                            std::string source_name = "<stream>");
IngestResult ingest_tickets_text(std::string_view text, InputFormat format,
                                 std::string source_name = "<memory>");
IngestResult ingest_file(const std::filesystem::path& path,
                         std::optional<InputFormat> format = std::nullopt);

/// Canonical JSONL form, one ticket per line.
std::string corpus_to_jsonl(const Corpus& corpus);

// ---- deidentification ----------------------------------------------------

/// Ordered raw name -> CURATOR-NNN linkage.
class PseudonymMap {
public:
    const std::string& assign(const std::string& raw_name);
    std::optional<std::string> pseudonym_for(std::string_view raw_name) const;
    std::optional<std::string> name_for(std::string_view pseudonym) const;
    const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }

    /// Two-column CSV: raw_name,pseudonym
    std::string to_csv() const;

private:
    std::vector<std::pair<std::string, std::string>> entries_;
    std::map<std::string, std::size_t> by_key_;  // lower-cased name -> slot
};

std::string pseudonym_token(std::size_t ordinal);

struct DeidentifyResult {
    Corpus corpus;
    PseudonymMap map;
    std::vector<std::string> unused_names;
};

/// Replaces whole-word, case-insensitive occurrences of each name in author
/// fields and descriptions. Longer names are tried first.
DeidentifyResult deidentify(const Corpus& corpus, std::span<const std::string> names);

/// Applies the name replacement rule to a single string.
std::string replace_names(std::string_view text, std::span<const std::string> names_longest_first,
                          const PseudonymMap& map);

// ---- filtering -----------------------------------------------------------

struct FilterCriteria {
    std::optional<Date> created_from;
    std::optional<Date> created_to;
    bool require_worklog = false;
};

Corpus filter_corpus(const Corpus& corpus, const FilterCriteria& criteria);

// ---- summary -------------------------------------------------------------

enum class SummaryDimension { level, archive, year };
std::string_view to_string(SummaryDimension dim);

struct SummaryRow {
    SummaryDimension dimension;
    std::string group;
    std::size_t tickets = 0;
    std::size_t studies = 0;
    double hours = 0.0;
    double avg_hours_per_study = 0.0;
};

struct CorpusSummary {
    std::vector<SummaryRow> rows;
    std::string hours_variant = "all_logged_hours";

    std::vector<SummaryRow> rows_for(SummaryDimension dim) const;
    std::string to_csv(int decimals = 1) const;
};

struct SummaryOptions {
    std::set<std::string> allowed_archives{"BJS", "ICPSR"};
};

/// Maps an archive tag outside the allow-list to "Other".
std::string report_archive(std::string_view archive, const std::set<std::string>& allowed);

/// Groups tickets by level, archive and created-year. If `ticket_hours` is
/// given it replaces each ticket's logged total (used for curation-only hours).
CorpusSummary corpus_summary(const Corpus& corpus, const SummaryOptions& options = {},
                             const std::map<std::string, double>* ticket_hours = nullptr);

}  // namespace curlog
