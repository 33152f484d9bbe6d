#pragma once

#include <curlog/corpus.hpp>
#include <curlog/error.hpp>
#include <curlog/segmenter.hpp>

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace curlog {

/// The closed schema of curatorial actions, in schema order.
enum class ActionClass : std::uint8_t {
    InitialReviewAndPlanning,
    DataTransformation,
    Metadata,
    Documentation,
    QualityChecks,
    Communication,
    Other,
    NonCuration,
};

inline constexpr std::size_t kActionCount = 8;
inline constexpr std::array<ActionClass, kActionCount> kAllActions{
    ActionClass::InitialReviewAndPlanning, ActionClass::DataTransformation, ActionClass::Metadata,
    ActionClass::Documentation,            ActionClass::QualityChecks,      ActionClass::Communication,
    ActionClass::Other,                    ActionClass::NonCuration,
};

inline std::size_t index_of(ActionClass a) { return static_cast<std::size_t>(a); }
std::string_view to_string(ActionClass a);
std::string_view display_name(ActionClass a);
/// Exact canonical name only.
std::optional<ActionClass> parse_action(std::string_view name);
std::vector<std::string> action_names();

/// Maps label spellings (e.g. "Quality_Checks", "quality checks") to the
/// schema. Matching ignores case, spaces, '_' and '-'. Unknown spellings
/// resolve to nothing; they never fall back to Other.
class LabelAliases {
public:
    static LabelAliases defaults();
    void add(std::string_view alias, ActionClass target);
    std::optional<ActionClass> resolve(std::string_view label) const;

private:
    std::map<std::string, ActionClass> table_;
};

enum class LabelSource { brat_import, ui, fixture };
std::string_view to_string(LabelSource s);
std::optional<LabelSource> label_source_from_string(std::string_view s);

struct LabeledFragment {
    std::string fragment_id;
    std::string ticket_id;  // may be empty for standalone text
    std::string text;
    ActionClass label = ActionClass::Other;
    std::string annotator;
    LabelSource source = LabelSource::fixture;
    std::string timestamp;
    std::optional<Span> span;  // character offsets in the BRAT document

    bool operator==(const LabeledFragment&) const = default;
};

struct LabelDistribution {
    std::array<std::size_t, kActionCount> counts{};
    std::array<double, kActionCount> proportions{};
    std::size_t total = 0;
};

class LabelSet {
public:
    LabelSet() = default;
    explicit LabelSet(std::vector<LabeledFragment> items);

    /// Keeps one current label per (fragment_id, annotator); a later label
    /// replaces the earlier one in place. Returns true if it replaced.
    bool upsert(LabeledFragment item);
    void push_back(LabeledFragment item) { items_.push_back(std::move(item)); }

    const std::vector<LabeledFragment>& items() const { return items_; }
    std::size_t size() const { return items_.size(); }
    bool empty() const { return items_.empty(); }
    const LabeledFragment& operator[](std::size_t i) const { return items_[i]; }

    std::vector<std::string> texts() const;
    std::vector<ActionClass> labels() const;
    std::vector<std::string> fragment_ids() const;

    bool operator==(const LabelSet& other) const { return items_ == other.items_; }

private:
    std::vector<LabeledFragment> items_;
};

LabelDistribution label_distribution(const LabelSet& set);

std::string labels_to_jsonl(const LabelSet& set);
LabelSet labels_from_jsonl(std::string_view text);

// ---- BRAT standoff ---------------------------------------------------------

struct BratOptions {
    std::string doc_id = "doc";
    std::string annotator;
    std::string timestamp;
    LabelAliases aliases = LabelAliases::defaults();
};

struct BratImport {
    std::vector<LabeledFragment> fragments;
    std::vector<RecordError> errors;
    std::size_t ignored_lines = 0;  // relation/event/note lines
};

/// Reads text-bound T-lines. Offsets are Unicode code point offsets into
/// `txt`, as written by BRAT.
BratImport import_brat(std::string_view ann, std::string_view txt, const BratOptions& options = {});

struct BratDocument {
    std::string txt;
    std::string ann;
};

/// One fragment per line of the .txt, one T-line per fragment in order.
BratDocument export_brat(const LabelSet& set);

// ---- splitting / sampling --------------------------------------------------

enum class SplitMode { fragment, ticket };

struct SplitResult {
    LabelSet train;
    LabelSet test;
    std::vector<std::string> warnings;
};

/// Per class, round(test_fraction * n_c) members go to test (at least one and
/// at most n_c - 1 when n_c >= 2). Ticket mode keeps every ticket on a
/// single side.
SplitResult stratified_split(const LabelSet& set, double test_fraction, std::uint64_t seed,
                             SplitMode mode = SplitMode::fragment);

/// Draws the requested number of tickets per curation level without
/// replacement. Returns ticket ids in corpus order.
std::vector<std::string> sample_tickets(const Corpus& corpus, const std::map<CurationLevel, std::size_t>& quotas,
                                        std::uint64_t seed, std::vector<std::string>* warnings = nullptr);

}  // namespace curlog
