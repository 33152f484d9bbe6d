#include <curlog/config.hpp>
#include <curlog/util.hpp>

#include "json_io.hpp"

namespace curlog {

using nlohmann::json;

namespace {

void check_keys(const json& j, const char* section, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw Error(std::string("config: ") + section + " must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || it.key() == a;
        if (!ok) throw Error(std::string("config: unknown key ") + section + "." + it.key());
    }
}

ActionSet parse_action_set(const json& j) {
    ActionSet out;
    for (const auto& v : j) {
        auto name = v.get<std::string>();
        auto a = parse_action(name);
        if (!a) throw Error("config: unknown action '" + name + "'");
        out.insert(*a);
    }
    return out;
}

}  // namespace

PipelineConfig PipelineConfig::from_json(std::string_view text, const std::filesystem::path& base_dir) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(std::string("config: invalid JSON: ") + e.what());
    }
    check_keys(j, "<root>", {"seed", "features", "cnb", "sgd", "split", "report", "filter"});
    PipelineConfig c;
    try {
        if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("features")) {
            check_keys(j["features"], "features",
                       {"ngram_min", "ngram_max", "lowercase", "min_token_len", "weighting", "stopwords"});
            c.features = detail::feature_config_from_json(j["features"], c.features, base_dir);
        }
        if (j.contains("cnb")) {
            const auto& s = j["cnb"];
            check_keys(s, "cnb", {"alpha", "normalize"});
            c.cnb.alpha = s.value("alpha", c.cnb.alpha);
            c.cnb.normalize = s.value("normalize", c.cnb.normalize);
        }
        if (j.contains("sgd")) {
            const auto& s = j["sgd"];
            check_keys(s, "sgd", {"l2_lambda", "epochs", "eta0", "loss"});
            if (s.value("loss", "hinge") != "hinge") throw Error("config: sgd.loss supports only hinge");
            c.sgd.l2_lambda = s.value("l2_lambda", c.sgd.l2_lambda);
            c.sgd.epochs = s.value("epochs", c.sgd.epochs);
            c.sgd.eta0 = s.value("eta0", c.sgd.eta0);
        }
        if (j.contains("split")) {
            const auto& s = j["split"];
            check_keys(s, "split", {"test_fraction", "mode"});
            c.split.test_fraction = s.value("test_fraction", c.split.test_fraction);
            auto mode = s.value("mode", "fragment");
            if (mode == "fragment") c.split.mode = SplitMode::fragment;
            else if (mode == "ticket") c.split.mode = SplitMode::ticket;
            else throw Error("config: split.mode must be fragment or ticket");
        }
        if (j.contains("report")) {
            const auto& s = j["report"];
            check_keys(s, "report", {"averaging", "exclude", "attribution", "weight", "allowed_archives", "decimals"});
            auto avg = s.value("averaging", "weighted");
            if (avg == "weighted") c.report.averaging = Averaging::weighted;
            else if (avg == "macro") c.report.averaging = Averaging::macro;
            else throw Error("config: report.averaging must be weighted or macro");
            if (s.contains("exclude")) c.report.exclude = parse_action_set(s["exclude"]);
            auto attr = s.value("attribution", "fragment");
            if (attr == "fragment") c.report.attribution = HoursAttribution::fragment;
            else if (attr == "entry") c.report.attribution = HoursAttribution::entry;
            else throw Error("config: report.attribution must be fragment or entry");
            auto weight = s.value("weight", "fragments");
            if (weight == "fragments") c.report.weight = ProportionWeight::fragments;
            else if (weight == "hours") c.report.weight = ProportionWeight::hours;
            else throw Error("config: report.weight must be fragments or hours");
            if (s.contains("allowed_archives")) {
                c.report.allowed_archives.clear();
                for (const auto& a : s["allowed_archives"]) c.report.allowed_archives.insert(to_upper(a.get<std::string>()));
            }
            c.report.decimals = s.value("decimals", c.report.decimals);
        }
        if (j.contains("filter")) {
            const auto& s = j["filter"];
            check_keys(s, "filter", {"created_from", "created_to", "require_worklog"});
            auto date = [&](const char* key) -> std::optional<Date> {
                if (!s.contains(key) || s[key].is_null()) return std::nullopt;
                auto d = Date::parse(s[key].get<std::string>());
                if (!d) throw Error(std::string("config: filter.") + key + " is not an ISO-8601 date");
                return d;
            };
            c.filter.created_from = date("created_from");
            c.filter.created_to = date("created_to");
            c.filter.require_worklog = s.value("require_worklog", false);
        }
    } catch (const json::exception& e) {
        throw Error(std::string("config: ") + e.what());
    }
    c.sgd.seed = c.seed;
    return c;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
    return from_json(read_file(path), path.parent_path());
}

std::string PipelineConfig::canonical() const {
    json exclude = json::array();
    for (auto a : report.exclude) exclude.push_back(to_string(a));
    json j = {
        {"seed", seed},
        {"features", detail::feature_config_json(features)},
        {"cnb", {{"alpha", cnb.alpha}, {"normalize", cnb.normalize}}},
        {"sgd", {{"loss", "hinge"}, {"l2_lambda", sgd.l2_lambda}, {"epochs", sgd.epochs}, {"eta0", sgd.eta0}}},
        {"split", {{"test_fraction", split.test_fraction}, {"mode", split.mode == SplitMode::fragment ? "fragment" : "ticket"}}},
        {"report",
         {{"averaging", to_string(report.averaging)},
          {"exclude", exclude},
          {"attribution", to_string(report.attribution)},
          {"weight", report.weight == ProportionWeight::hours ? "hours" : "fragments"},
          {"allowed_archives", report.allowed_archives},
          {"decimals", report.decimals}}},
        {"filter",
         {{"created_from", filter.created_from ? json(filter.created_from->to_string()) : json(nullptr)},
          {"created_to", filter.created_to ? json(filter.created_to->to_string()) : json(nullptr)},
          {"require_worklog", filter.require_worklog}}},
    };
    return j.dump();
}

std::string PipelineConfig::fingerprint() const { return curlog::fingerprint(canonical()); }

}  // namespace curlog
