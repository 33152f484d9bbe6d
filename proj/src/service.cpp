#include <curlog/service.hpp>

#include <curlog/util.hpp>

#include <httplib.h>

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <set>
#include <sstream>

namespace curlog {

using nlohmann::json;

namespace {

constexpr const char* kLabelLog = "events.jsonl";
constexpr const char* kAuditLog = "audit.jsonl";

json valid_classes() {
    json arr = json::array();
    for (const auto& name : action_names()) arr.push_back(name);
    return arr;
}

ServiceResponse error_response(int status, std::string message, json extra = json::object()) {
    extra["error"] = std::move(message);
    return {status, std::move(extra)};
}

int open_append(const std::filesystem::path& path) {
    int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd < 0) throw Error("cannot open " + path.string() + ": " + std::strerror(errno));
    return fd;
}

void write_all(int fd, std::string_view data) {
    while (!data.empty()) {
        ssize_t n = ::write(fd, data.data(), data.size());
        if (n < 0) {
            if (errno == EINTR) continue;
            throw Error(std::string("log write failed: ") + std::strerror(errno));
        }
        data.remove_prefix(static_cast<std::size_t>(n));
    }
}

std::string_view to_string(JobStatus s) {
    switch (s) {
        case JobStatus::queued: return "queued";
        case JobStatus::running: return "running";
        case JobStatus::succeeded: return "succeeded";
        case JobStatus::failed: return "failed";
    }
    return "unknown";
}

std::optional<std::string> string_field(const json& body, const char* key) {
    auto it = body.find(key);
    if (it == body.end() || !it->is_string()) return std::nullopt;
    return it->get<std::string>();
}

}  // namespace

ReviewService::ReviewService(Corpus corpus, FragmentSet fragments, ServiceOptions options)
    : corpus_(std::move(corpus)), fragments_(std::move(fragments)), options_(std::move(options)) {
    for (std::size_t i = 0; i < fragments_.fragments.size(); ++i)
        fragment_index_.emplace(fragments_.fragments[i].fragment_id, i);
    std::filesystem::create_directories(options_.state_dir);
    replay();
    open_logs();
    worker_ = std::thread([this] { worker_loop(); });
}

ReviewService::~ReviewService() {
    {
        std::lock_guard lock(jobs_mutex_);
        stopping_ = true;
    }
    jobs_cv_.notify_all();
    if (worker_.joinable()) worker_.join();
    if (label_fd_ >= 0) ::close(label_fd_);
    if (audit_fd_ >= 0) ::close(audit_fd_);
}

void ReviewService::open_logs() {
    if (label_fd_ >= 0) ::close(label_fd_);
    label_fd_ = open_append(options_.state_dir / kLabelLog);
    if (audit_fd_ < 0) audit_fd_ = open_append(options_.state_dir / kAuditLog);
}

void ReviewService::append_line(int fd, const json& event) {
    write_all(fd, event.dump() + "\n");
    if (::fdatasync(fd) != 0) throw Error(std::string("log sync failed: ") + std::strerror(errno));
}

bool ReviewService::apply_label(LabeledFragment item) {
    const std::string id = item.fragment_id;
    const std::string annotator = item.annotator;
    const bool replaced = labels_.upsert(std::move(item));
    const auto& items = labels_.items();
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (items[i].fragment_id == id && items[i].annotator == annotator) {
            latest_[id] = i;
            break;
        }
    }
    return replaced;
}

void ReviewService::replay() {
    const auto path = options_.state_dir / kLabelLog;
    if (!std::filesystem::exists(path)) return;
    const std::string text = read_file(path);
    std::size_t line_no = 0;
    for (const auto& line : split_lines(text)) {
        ++line_no;
        if (trim(line).empty()) continue;
        json ev = json::parse(line, nullptr, false);
        // A torn final line is an unacknowledged write.
        if (ev.is_discarded()) {
            if (line_no == split_lines(text).size()) {
                // Dropped so later appends start on a fresh line.
                const auto keep = text.rfind('\n', text.size() - 2);
                write_file_atomic(path, keep == std::string::npos ? std::string{} : text.substr(0, keep + 1));
                break;
            }
            throw Error("corrupt label log at line " + std::to_string(line_no));
        }
        const auto id = ev.value("fragment_id", std::string{});
        auto frag = fragment_index_.find(id);
        auto label = parse_action(ev.value("label", std::string{}));
        if (frag == fragment_index_.end() || !label) continue;
        const Fragment& f = fragments_.fragments[frag->second];
        LabeledFragment item{id,
                             f.ticket_id,
                             f.text,
                             *label,
                             ev.value("annotator", std::string{}),
                             LabelSource::ui,
                             ev.value("timestamp", std::string{}),
                             std::nullopt};
        if (apply_label(std::move(item))) ++superseded_events_;
    }
}

ServiceResponse ReviewService::record_label(json event) {
    const std::string id = event["fragment_id"];
    const Fragment& f = fragments_.fragments[fragment_index_.at(id)];
    const ActionClass label = *parse_action(event["label"].get<std::string>());
    LabeledFragment item{id,    f.ticket_id, f.text, label, event["annotator"], LabelSource::ui, event["timestamp"],
                         std::nullopt};

    std::unique_lock lock(labels_mutex_);
    std::optional<std::string> previous;
    for (const auto& existing : labels_.items())
        if (existing.fragment_id == id && existing.annotator == item.annotator)
            previous = std::string(to_string(existing.label));

    append_line(label_fd_, event);
    json audit = event;
    audit["replaced"] = previous ? json(*previous) : json(nullptr);
    append_line(audit_fd_, audit);

    const bool replaced = apply_label(std::move(item));
    if (replaced) ++superseded_events_;
    if (superseded_events_ >= options_.compact_threshold) {
        lock.unlock();
        compact();
    }

    json body{{"fragment_id", id},
              {"label", event["label"]},
              {"annotator", event["annotator"]},
              {"timestamp", event["timestamp"]},
              {"replaced", replaced}};
    if (previous) body["previous_label"] = *previous;
    return {201, body};
}

void ReviewService::compact() {
    std::unique_lock lock(labels_mutex_);
    // Each fragment's newest label is written after its other annotators' labels.
    std::set<std::size_t> newest;
    for (const auto& [id, index] : latest_) newest.insert(index);
    std::string content;
    for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t i = 0; i < labels_.size(); ++i) {
            if (newest.contains(i) != (pass == 1)) continue;
            const auto& item = labels_[i];
            json ev{{"kind", "label"},
                    {"fragment_id", item.fragment_id},
                    {"label", to_string(item.label)},
                    {"annotator", item.annotator},
                    {"timestamp", item.timestamp}};
            content += ev.dump() + "\n";
        }
    }
    write_file_atomic(options_.state_dir / kLabelLog, content);
    open_logs();
    superseded_events_ = 0;
}

ServiceResponse ReviewService::schema() const {
    json classes = json::array();
    for (std::size_t i = 0; i < kActionCount; ++i) {
        classes.push_back({{"name", to_string(kAllActions[i])},
                           {"display_name", display_name(kAllActions[i])},
                           {"shortcut", std::to_string(i + 1)}});
    }
    return {200, {{"classes", classes}}};
}

ServiceResponse ReviewService::list_fragments(std::string_view status, std::size_t page,
                                              std::size_t page_size) const {
    if (status != "unlabeled" && status != "predicted" && status != "labeled" && status != "all")
        return error_response(400, "status must be one of unlabeled, predicted, labeled, all");
    if (page == 0 || page_size == 0) return error_response(400, "page and page_size start at 1");

    std::shared_ptr<const ModelState> model;
    {
        std::lock_guard lock(jobs_mutex_);
        model = model_;
    }
    std::map<std::string, std::string> current;
    {
        std::shared_lock lock(labels_mutex_);
        for (const auto& [id, idx] : latest_) current.emplace(id, to_string(labels_[idx].label));
    }

    std::vector<std::size_t> selected;
    for (std::size_t i = 0; i < fragments_.fragments.size(); ++i) {
        const auto& id = fragments_.fragments[i].fragment_id;
        const bool labeled = current.contains(id);
        const bool predicted = model && model->by_fragment.contains(id);
        if ((status == "unlabeled" && !labeled) || (status == "labeled" && labeled) ||
            (status == "predicted" && predicted && !labeled) || status == "all")
            selected.push_back(i);
    }

    json items = json::array();
    const std::size_t begin = std::min(selected.size(), (page - 1) * page_size);
    const std::size_t end = std::min(selected.size(), begin + page_size);
    for (std::size_t k = begin; k < end; ++k) {
        const Fragment& f = fragments_.fragments[selected[k]];
        json item{{"fragment_id", f.fragment_id},
                  {"ticket_id", f.ticket_id},
                  {"study_id", f.study_id},
                  {"text", f.text},
                  {"hours", f.apportioned_hours}};
        if (auto it = current.find(f.fragment_id); it != current.end()) item["label"] = it->second;
        if (model) {
            if (auto it = model->by_fragment.find(f.fragment_id); it != model->by_fragment.end()) {
                const auto& p = model->predictions[it->second];
                item["predicted_label"] = to_string(p.label);
                item["low_confidence"] = p.low_confidence;
            }
        }
        items.push_back(std::move(item));
    }
    return {200,
            {{"status", status}, {"page", page}, {"page_size", page_size}, {"total", selected.size()},
             {"items", items}}};
}

ServiceResponse ReviewService::post_label(const json& body) {
    auto id = string_field(body, "fragment_id");
    auto label = string_field(body, "label");
    auto annotator = string_field(body, "annotator");
    if (!id || !label || !annotator) return error_response(400, "fragment_id, label and annotator are required");
    if (!fragment_index_.contains(*id)) return error_response(404, "unknown fragment_id " + *id);
    if (!parse_action(*label))
        return error_response(422, "invalid label '" + *label + "'", {{"valid", valid_classes()}});
    const std::string ts = string_field(body, "timestamp").value_or(now_timestamp());
    return record_label(
        {{"kind", "label"}, {"fragment_id", *id}, {"label", *label}, {"annotator", *annotator}, {"timestamp", ts}});
}

ServiceResponse ReviewService::post_review(const json& body) {
    auto id = string_field(body, "fragment_id");
    auto decision = string_field(body, "decision");
    auto reviewer = string_field(body, "reviewer");
    if (!id || !decision || !reviewer) return error_response(400, "fragment_id, decision and reviewer are required");
    if (*decision != "confirm" && *decision != "correct")
        return error_response(422, "decision must be confirm or correct");
    if (!fragment_index_.contains(*id)) return error_response(404, "unknown fragment_id " + *id);

    std::shared_ptr<const ModelState> model;
    {
        std::lock_guard lock(jobs_mutex_);
        model = model_;
    }
    std::optional<std::string> predicted;
    if (model) {
        if (auto it = model->by_fragment.find(*id); it != model->by_fragment.end())
            predicted = std::string(to_string(model->predictions[it->second].label));
    }

    std::string label;
    if (*decision == "confirm") {
        if (!predicted) return error_response(409, "fragment " + *id + " has no prediction to confirm");
        if (body.contains("label")) return error_response(422, "label is only allowed with decision correct");
        label = *predicted;
    } else {
        auto corrected = string_field(body, "label");
        if (!corrected) return error_response(422, "label is required with decision correct", {{"valid", valid_classes()}});
        if (!parse_action(*corrected))
            return error_response(422, "invalid label '" + *corrected + "'", {{"valid", valid_classes()}});
        label = *corrected;
    }
    const std::string ts = string_field(body, "timestamp").value_or(now_timestamp());
    json event{{"kind", "review"}, {"decision", *decision}, {"fragment_id", *id}, {"label", label},
               {"annotator", *reviewer}, {"timestamp", ts}};
    event["predicted_label"] = predicted ? json(*predicted) : json(nullptr);
    return record_label(std::move(event));
}

LabelSet ReviewService::training_set() const {
    std::shared_lock lock(labels_mutex_);
    std::vector<LabeledFragment> items;
    for (const auto& f : fragments_.fragments) {
        if (auto it = latest_.find(f.fragment_id); it != latest_.end()) items.push_back(labels_[it->second]);
    }
    return LabelSet(std::move(items));
}

LabelSet ReviewService::label_snapshot() const {
    std::shared_lock lock(labels_mutex_);
    return labels_;
}

ServiceResponse ReviewService::labels() const {
    LabelSet snap = label_snapshot();
    json items = json::array();
    for (const auto& item : snap.items()) {
        items.push_back({{"fragment_id", item.fragment_id},
                         {"ticket_id", item.ticket_id},
                         {"label", to_string(item.label)},
                         {"annotator", item.annotator},
                         {"timestamp", item.timestamp}});
    }
    const auto dist = label_distribution(training_set());
    return {200, {{"count", snap.size()}, {"distribution", json::parse(label_distribution_json(dist))},
                  {"items", items}}};
}

ServiceResponse ReviewService::post_train(const json& body) {
    ModelVariant variant = ModelVariant::cnb;
    if (auto name = string_field(body, "model")) {
        auto v = model_variant_from_string(*name);
        if (!v) return error_response(422, "unknown model '" + *name + "'", {{"valid", {"dummy", "cnb", "sgd"}}});
        variant = *v;
    }
    if (auto ref = string_field(body, "config_ref"); ref && *ref != options_.config.fingerprint())
        return error_response(422, "unknown config_ref '" + *ref + "'",
                              {{"config_ref", options_.config.fingerprint()}});

    const LabelSet set = training_set();
    std::set<ActionClass> classes;
    for (const auto& item : set.items()) classes.insert(item.label);
    if (classes.size() < 2)
        return error_response(409, "training needs labels from at least 2 classes; found " +
                                       std::to_string(classes.size()));

    std::size_t id = 0;
    {
        std::lock_guard lock(jobs_mutex_);
        id = jobs_.size() + 1;
        Job job;
        job.id = id;
        job.variant = variant;
        jobs_.push_back(std::move(job));
        queue_.push_back(id);
    }
    jobs_cv_.notify_all();
    return {202, {{"job_id", id}, {"status", "queued"}}};
}

void ReviewService::worker_loop() {
    for (;;) {
        std::size_t id = 0;
        {
            std::unique_lock lock(jobs_mutex_);
            jobs_cv_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
            if (stopping_) return;
            id = queue_.front();
            queue_.pop_front();
            jobs_[id - 1].status = JobStatus::running;
        }
        run_job(id);
        jobs_cv_.notify_all();
    }
}

void ReviewService::run_job(std::size_t id) {
    ModelVariant variant;
    {
        std::lock_guard lock(jobs_mutex_);
        variant = jobs_[id - 1].variant;
    }
    try {
        const LabelSet set = training_set();
        const auto& cfg = options_.config;
        auto split = stratified_split(set, cfg.split.test_fraction, cfg.seed, cfg.split.mode);

        const auto train_texts = split.train.texts();
        const auto train_labels = split.train.labels();
        FeatureSpace space = fit_feature_space(train_texts, cfg.features);
        const auto x_train = transform(train_texts, space);
        TrainedModel model;
        switch (variant) {
            case ModelVariant::dummy: model = train_dummy(train_labels, cfg.seed); break;
            case ModelVariant::cnb: model = train_cnb(x_train, train_labels, cfg.cnb); break;
            case ModelVariant::sgd: model = train_sgd(x_train, train_labels, cfg.sgd); break;
        }
        model.features = space;
        model.feature_fingerprint = space.fingerprint();

        std::optional<MetricsReport> report;
        if (!split.test.empty()) {
            const auto test_texts = split.test.texts();
            const auto y_true = split.test.labels();
            const auto pred = predict(model, transform(test_texts, space));
            const auto classes = observed_classes(y_true, pred.labels);
            const auto ids = split.test.fragment_ids();
            report = metrics(confusion_matrix(y_true, pred.labels, classes), std::string(to_string(variant)),
                             test_set_fingerprint(ids, y_true));
        }

        auto state = std::make_shared<ModelState>();
        state->predictions = predict_corpus(model, fragments_, space);
        for (std::size_t i = 0; i < state->predictions.size(); ++i)
            state->by_fragment.emplace(state->predictions[i].fragment.fragment_id, i);
        state->model = std::move(model);

        std::lock_guard lock(jobs_mutex_);
        Job& job = jobs_[id - 1];
        job.n_labels = set.size();
        job.n_train = split.train.size();
        job.n_test = split.test.size();
        for (const auto& item : set.items()) job.training_labels.emplace_back(item.fragment_id, item.label);
        job.metrics = std::move(report);
        job.status = JobStatus::succeeded;
        model_ = std::move(state);
    } catch (const std::exception& e) {
        std::lock_guard lock(jobs_mutex_);
        jobs_[id - 1].status = JobStatus::failed;
        jobs_[id - 1].error = e.what();
    }
}

json ReviewService::job_json(const Job& job) {
    json j{{"job_id", job.id},
           {"model", to_string(job.variant)},
           {"status", to_string(job.status)},
           {"n_labels", job.n_labels},
           {"n_train", job.n_train},
           {"n_test", job.n_test}};
    if (!job.error.empty()) j["error"] = job.error;
    json labels = json::array();
    for (const auto& [id, label] : job.training_labels) labels.push_back({{"fragment_id", id}, {"label", to_string(label)}});
    j["training_labels"] = std::move(labels);
    if (job.metrics) j["metrics"] = json::parse(report_to_json(*job.metrics));
    return j;
}

ServiceResponse ReviewService::get_job(std::size_t id) const {
    std::lock_guard lock(jobs_mutex_);
    if (id == 0 || id > jobs_.size()) return error_response(404, "unknown job " + std::to_string(id));
    return {200, job_json(jobs_[id - 1])};
}

bool ReviewService::wait_for_job(std::size_t id, std::chrono::milliseconds timeout) const {
    std::unique_lock lock(jobs_mutex_);
    if (id == 0 || id > jobs_.size()) return false;
    return jobs_cv_.wait_for(lock, timeout, [&] {
        auto s = jobs_[id - 1].status;
        return s == JobStatus::succeeded || s == JobStatus::failed;
    });
}

ServiceResponse ReviewService::latest_metrics() const {
    std::lock_guard lock(jobs_mutex_);
    for (auto it = jobs_.rbegin(); it != jobs_.rend(); ++it) {
        if (it->status != JobStatus::succeeded || !it->metrics) continue;
        json body = json::parse(report_to_json(*it->metrics));
        body["job_id"] = it->id;
        return {200, body};
    }
    return error_response(404, "no completed job with metrics");
}

ServiceResponse ReviewService::report(std::string_view kind) const {
    const auto& cfg = options_.config.report;
    if (kind == "fig2") return {200, json::parse(label_distribution_json(label_distribution(training_set())))};
    if (kind != "table4" && kind != "fig4")
        return error_response(404, "unknown report '" + std::string(kind) + "'", {{"valid", {"table4", "fig4", "fig2"}}});

    std::shared_ptr<const ModelState> model;
    {
        std::lock_guard lock(jobs_mutex_);
        model = model_;
    }
    if (!model) return error_response(409, "no completed model; run POST /jobs/train first");
    try {
        if (kind == "table4") {
            auto r = action_report(model->predictions, corpus_, cfg.exclude, cfg.attribution);
            return {200, json::parse(r.to_json())};
        }
        ProportionOptions opts{cfg.exclude, cfg.weight, cfg.allowed_archives};
        auto g = action_proportions_by(model->predictions, corpus_, GroupKey::level, opts);
        return {200, json::parse(g.to_json())};
    } catch (const Error& e) {
        return error_response(409, e.what());
    }
}

void mount_routes(httplib::Server& server, ReviewService& service,
                  const std::optional<std::filesystem::path>& static_dir) {
    auto send = [](httplib::Response& res, const ServiceResponse& r) {
        res.status = r.status;
        res.set_content(r.body.dump(), "application/json");
    };
    auto with_body = [send](auto handler) {
        return [send, handler](const httplib::Request& req, httplib::Response& res) {
            json body = json::parse(req.body, nullptr, false);
            if (body.is_discarded() || !body.is_object()) {
                send(res, error_response(400, "request body must be a JSON object"));
                return;
            }
            send(res, handler(body));
        };
    };
    auto size_param = [](const httplib::Request& req, const char* key, std::size_t fallback) -> std::size_t {
        if (!req.has_param(key)) return fallback;
        try {
            return std::stoul(req.get_param_value(key));
        } catch (const std::exception&) {
            return 0;
        }
    };

    server.Get("/schema", [&service, send](const httplib::Request&, httplib::Response& res) {
        send(res, service.schema());
    });
    server.Get("/fragments", [&service, send, size_param](const httplib::Request& req, httplib::Response& res) {
        const std::string status = req.has_param("status") ? req.get_param_value("status") : "unlabeled";
        send(res, service.list_fragments(status, size_param(req, "page", 1), size_param(req, "page_size", 50)));
    });
    server.Get("/labels", [&service, send](const httplib::Request&, httplib::Response& res) {
        send(res, service.labels());
    });
    server.Post("/labels", with_body([&service](const json& b) { return service.post_label(b); }));
    server.Post("/reviews", with_body([&service](const json& b) { return service.post_review(b); }));
    server.Post("/jobs/train", [&service, send](const httplib::Request& req, httplib::Response& res) {
        json body = req.body.empty() ? json::object() : json::parse(req.body, nullptr, false);
        if (body.is_discarded() || !body.is_object()) {
            send(res, error_response(400, "request body must be a JSON object"));
            return;
        }
        send(res, service.post_train(body));
    });
    server.Get(R"(/jobs/(\d+))", [&service, send](const httplib::Request& req, httplib::Response& res) {
        send(res, service.get_job(std::stoul(req.matches[1])));
    });
    server.Get("/metrics/latest", [&service, send](const httplib::Request&, httplib::Response& res) {
        send(res, service.latest_metrics());
    });
    server.Get(R"(/reports/([a-z0-9]+))", [&service, send](const httplib::Request& req, httplib::Response& res) {
        send(res, service.report(std::string(req.matches[1])));
    });
    if (static_dir) server.set_mount_point("/", static_dir->string());
}

}  // namespace curlog
