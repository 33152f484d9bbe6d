#pragma once

#include <curlog/annotation.hpp>
#include <curlog/corpus.hpp>
#include <curlog/models.hpp>
#include <curlog/segmenter.hpp>

#include <array>
#include <set>
#include <string>
#include <vector>

namespace curlog {

struct PredictedFragment {
    Fragment fragment;
    ActionClass label = ActionClass::Other;
    bool low_confidence = false;
};

/// Labels every fragment. Fragments whose feature row is all zero get the
/// model's training-majority class and low_confidence = true.
std::vector<PredictedFragment> predict_corpus(const TrainedModel& model, const FragmentSet& fragments,
                                              const FeatureSpace& features);

std::string predictions_to_jsonl(const std::vector<PredictedFragment>& preds);
std::vector<PredictedFragment> predictions_from_jsonl(std::string_view text);

using ActionSet = std::set<ActionClass>;
inline const ActionSet kDefaultExclusions{ActionClass::NonCuration};

/// Fragment: each fragment contributes its apportioned hours.
/// Entry: each distinct action predicted within a work-log entry is
/// credited with the full entry hours.
enum class HoursAttribution { fragment, entry };
std::string_view to_string(HoursAttribution a);

struct ActionRow {
    ActionClass action;
    bool excluded = false;
    std::size_t studies_with_action = 0;
    double percent_studies = 0.0;
    double hours = 0.0;
    double percent_hours = 0.0;  // 0 for excluded actions
};

struct ActionReport {
    std::vector<ActionRow> rows;  // all eight actions, schema order
    double included_hours = 0.0;
    double excluded_hours = 0.0;
    std::size_t total_studies = 0;
    HoursAttribution attribution = HoursAttribution::fragment;
    std::string exclusion_policy;

    const ActionRow& row(ActionClass a) const { return rows[index_of(a)]; }
    /// Included actions ordered by percent of studies, descending.
    std::vector<ActionRow> table_rows() const;
    std::string to_csv(int decimals = 1) const;
    std::string to_json() const;
};

std::string exclusion_tag(const ActionSet& exclude);

/// Fills hours / percent_hours. Throws when included hours total zero.
ActionReport hours_by_action(const std::vector<PredictedFragment>& preds, const ActionSet& exclude = kDefaultExclusions,
                             HoursAttribution attribution = HoursAttribution::fragment);

/// Fills studies_with_action / percent_studies against all studies in the corpus.
void studies_containing_action(const std::vector<PredictedFragment>& preds, const Corpus& corpus,
                               ActionReport& report);

ActionReport action_report(const std::vector<PredictedFragment>& preds, const Corpus& corpus,
                           const ActionSet& exclude = kDefaultExclusions,
                           HoursAttribution attribution = HoursAttribution::fragment);

enum class GroupKey { level, archive, year };
GroupKey group_key_from_string(std::string_view s);
std::string_view to_string(GroupKey k);

enum class ProportionWeight { fragments, hours };

struct GroupRow {
    std::string group;
    double total = 0.0;  // included fragments (or hours)
    std::array<double, kActionCount> proportions{};
};

struct GroupedProportions {
    GroupKey key = GroupKey::level;
    ProportionWeight weight = ProportionWeight::fragments;
    ActionSet excluded;
    std::vector<GroupRow> groups;  // sorted by group name
    std::vector<std::string> warnings;

    /// Long-form rows: group,action,value
    std::string to_plot_csv(int decimals = 6) const;
    std::string to_json() const;
};

struct ProportionOptions {
    ActionSet exclude = kDefaultExclusions;
    ProportionWeight weight = ProportionWeight::fragments;
    std::set<std::string> allowed_archives{"BJS", "ICPSR"};
};

GroupedProportions action_proportions_by(const std::vector<PredictedFragment>& preds, const Corpus& corpus,
                                         GroupKey key, const ProportionOptions& options = {});

/// Corpus summary whose hours count only fragments predicted as an
/// included action.
CorpusSummary curation_hours_summary(const std::vector<PredictedFragment>& preds, const Corpus& corpus,
                                     const ActionSet& exclude = kDefaultExclusions,
                                     const SummaryOptions& options = {});

std::string label_distribution_csv(const LabelDistribution& dist);
std::string label_distribution_json(const LabelDistribution& dist);

/// Static SVG bar chart of the label distribution.
std::string render_distribution_svg(const LabelDistribution& dist);
/// Static SVG stacked bars, one per group.
std::string render_proportions_svg(const GroupedProportions& grouped);

}  // namespace curlog
