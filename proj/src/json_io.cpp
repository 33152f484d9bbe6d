#include "json_io.hpp"

#include <curlog/error.hpp>
#include <curlog/util.hpp>

namespace curlog::detail {

using nlohmann::json;

json feature_config_json(const FeatureConfig& config) {
    return {{"ngram_min", config.ngram_min},
            {"ngram_max", config.ngram_max},
            {"lowercase", config.lowercase},
            {"min_token_len", config.min_token_len},
            {"weighting", to_string(config.weighting)},
            {"stopwords", config.stopwords}};
}

FeatureConfig feature_config_from_json(const json& j, FeatureConfig base, const std::filesystem::path& base_dir) {
    if (!j.is_object()) throw Error("features section must be an object");
    try {
        if (j.contains("ngram_min")) base.ngram_min = j.at("ngram_min").get<int>();
        if (j.contains("ngram_max")) base.ngram_max = j.at("ngram_max").get<int>();
        if (j.contains("lowercase")) base.lowercase = j.at("lowercase").get<bool>();
        if (j.contains("min_token_len")) base.min_token_len = j.at("min_token_len").get<int>();
        if (j.contains("weighting")) base.weighting = weighting_from_string(j.at("weighting").get<std::string>());
        if (j.contains("stopwords")) {
            const auto& s = j.at("stopwords");
            if (s.is_array()) {
                base.stopwords.clear();
                for (const auto& w : s) base.stopwords.insert(to_lower(w.get<std::string>()));
            } else if (s.is_string()) {
                auto v = s.get<std::string>();
                if (v == "default") base.stopwords = default_stopwords();
                else if (v == "none") base.stopwords.clear();
                else base.stopwords = parse_stopwords(read_file(base_dir.empty() ? std::filesystem::path(v) : base_dir / v));
            } else {
                throw Error("features.stopwords must be \"default\", \"none\", a path, or a list");
            }
        }
    } catch (const json::exception& e) {
        throw Error(std::string("features: ") + e.what());
    }
    base.validate();
    return base;
}

json dense_json(const kernels::Dense& m) { return {{"rows", m.rows}, {"cols", m.cols}, {"data", m.data}}; }

kernels::Dense dense_from_json(const json& j) {
    kernels::Dense m;
    m.rows = j.at("rows").get<std::size_t>();
    m.cols = j.at("cols").get<std::size_t>();
    m.data = j.at("data").get<std::vector<double>>();
    if (m.data.size() != m.rows * m.cols) throw Error("weight payload has the wrong size");
    return m;
}

}  // namespace curlog::detail
