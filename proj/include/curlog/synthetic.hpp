#pragma once

#include <curlog/annotation.hpp>
#include <curlog/corpus.hpp>
#include <curlog/rng.hpp>

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace curlog::synthetic {

/// Skewed like the labeled data: QualityChecks largest, Metadata smallest.
inline constexpr std::array<double, kActionCount> kLabelSkew{
    0.16,  // InitialReviewAndPlanning
    0.15,  // DataTransformation
    0.04,  // Metadata
    0.07,  // Documentation
    0.27,  // QualityChecks
    0.10,  // Communication
    0.06,  // Other
    0.15,  // NonCuration
};

/// Class-indicative tokens for each action.
const std::vector<std::string>& class_vocabulary(ActionClass action);
/// Tokens shared by every class.
const std::vector<std::string>& noise_vocabulary();

struct FragmentOptions {
    double noise_share = 0.3;
    std::size_t min_tokens = 4;
    std::size_t max_tokens = 9;
};

/// One fragment of text: each token is drawn from the shared pool with
/// probability noise_share, otherwise from the class vocabulary.
std::string fragment_text(ActionClass action, Rng& rng, const FragmentOptions& options = {});

struct LabelOptions {
    std::size_t count = 1000;
    std::array<double, kActionCount> proportions = kLabelSkew;
    FragmentOptions fragment;
    std::uint64_t seed = 1;
    std::string annotator = "CURATOR-001";
};

/// Exactly round(p_c * count) fragments per class (largest remainder),
/// emitted in shuffled order.
LabelSet labels(const LabelOptions& options);

struct CorpusOptions {
    std::size_t tickets = 60;
    std::size_t shared_study_every = 7;  // every k-th ticket reuses the previous study
    std::size_t min_entries = 2;
    std::size_t max_entries = 5;
    std::size_t max_fragments_per_entry = 3;
    double communication_boost_l3 = 0.25;  // extra Communication share for L3 tickets
    std::vector<std::string> curators{"Jane Doe", "John Roe", "Ana Lima"};
    FragmentOptions fragment;
    std::uint64_t seed = 2;
};

struct GeneratedCorpus {
    Corpus corpus;
    /// Generating class of every fragment, in corpus / entry / segment order.
    std::vector<ActionClass> truth;
};

GeneratedCorpus corpus(const CorpusOptions& options);

}  // namespace curlog::synthetic
