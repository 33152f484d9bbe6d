#pragma once

// JSON encodings shared by the model container, config loader and service.

#include <curlog/features.hpp>
#include <curlog/kernels.hpp>

#include <json.hpp>

namespace curlog::detail {

nlohmann::json feature_config_json(const FeatureConfig& config);
/// Reads the fields present in `j` over `base`. A "stopwords" string is
/// either "default", "none", or a file path resolved against base_dir.
FeatureConfig feature_config_from_json(const nlohmann::json& j, FeatureConfig base = {},
                                       const std::filesystem::path& base_dir = {});

nlohmann::json dense_json(const kernels::Dense& m);
kernels::Dense dense_from_json(const nlohmann::json& j);

}  // namespace curlog::detail
