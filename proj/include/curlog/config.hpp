#pragma once

#include <curlog/analytics.hpp>
#include <curlog/annotation.hpp>
#include <curlog/corpus.hpp>
#include <curlog/evaluation.hpp>
#include <curlog/features.hpp>
#include <curlog/models.hpp>

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>

namespace curlog {

struct SplitConfig {
    double test_fraction = 0.2;
    SplitMode mode = SplitMode::fragment;
};

struct ReportConfig {
    Averaging averaging = Averaging::weighted;
    ActionSet exclude = kDefaultExclusions;
    HoursAttribution attribution = HoursAttribution::fragment;
    ProportionWeight weight = ProportionWeight::fragments;
    std::set<std::string> allowed_archives{"BJS", "ICPSR"};
    int decimals = 1;
};

/// Single declarative document covering every stage; see docs/cli.md.
struct PipelineConfig {
    FeatureConfig features;
    CnbOptions cnb;
    SgdOptions sgd;
    SplitConfig split;
    ReportConfig report;
    FilterCriteria filter;
    std::uint64_t seed = 0;

    static PipelineConfig from_json(std::string_view text, const std::filesystem::path& base_dir = {});
    static PipelineConfig load(const std::filesystem::path& path);

    /// Canonical JSON with every resolved value; stable across runs.
    std::string canonical() const;
    std::string fingerprint() const;
};

}  // namespace curlog
