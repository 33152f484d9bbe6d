#pragma once

#include <curlog/analytics.hpp>
#include <curlog/annotation.hpp>
#include <curlog/config.hpp>
#include <curlog/corpus.hpp>
#include <curlog/evaluation.hpp>
#include <curlog/models.hpp>
#include <curlog/segmenter.hpp>

#include <json.hpp>

#include <chrono>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <thread>
#include <vector>

namespace httplib {
class Server;
}

namespace curlog {

struct ServiceResponse {
    int status = 200;
    nlohmann::json body;
};

struct ServiceOptions {
    std::filesystem::path state_dir;
    PipelineConfig config;
    /// Rewrite the label log once it holds this many superseded events.
    std::size_t compact_threshold = 1000;
};

enum class JobStatus { queued, running, succeeded, failed };

/// State behind the annotation / review API. All label mutations go through
/// one writer lock and reach disk (flushed) before they are acknowledged;
/// train jobs run one at a time on a background worker.
class ReviewService {
public:
    ReviewService(Corpus corpus, FragmentSet fragments, ServiceOptions options);
    ~ReviewService();

    ReviewService(const ReviewService&) = delete;
    ReviewService& operator=(const ReviewService&) = delete;

    ServiceResponse schema() const;
    ServiceResponse list_fragments(std::string_view status, std::size_t page, std::size_t page_size) const;
    ServiceResponse post_label(const nlohmann::json& body);
    ServiceResponse post_review(const nlohmann::json& body);
    ServiceResponse post_train(const nlohmann::json& body);
    ServiceResponse get_job(std::size_t id) const;
    ServiceResponse latest_metrics() const;
    ServiceResponse report(std::string_view kind) const;
    ServiceResponse labels() const;

    /// Blocks until the job finishes or the timeout passes.
    bool wait_for_job(std::size_t id, std::chrono::milliseconds timeout) const;
    LabelSet label_snapshot() const;
    /// Rewrites the label log to current labels only. The audit log is kept.
    void compact();

private:
    struct Job {
        std::size_t id = 0;
        ModelVariant variant = ModelVariant::cnb;
        JobStatus status = JobStatus::queued;
        std::string error;
        std::size_t n_labels = 0;
        /// Every label the job trained or evaluated on.
        std::vector<std::pair<std::string, ActionClass>> training_labels;
        std::size_t n_train = 0;
        std::size_t n_test = 0;
        std::optional<MetricsReport> metrics;
    };
    struct ModelState {
        TrainedModel model;
        std::vector<PredictedFragment> predictions;
        std::map<std::string, std::size_t> by_fragment;
    };

    void replay();
    void append_line(int fd, const nlohmann::json& event);
    void open_logs();
    LabelSet training_set() const;
    bool apply_label(LabeledFragment item);
    /// Persists `event` (which carries the label fields) and applies it.
    ServiceResponse record_label(nlohmann::json event);
    void worker_loop();
    void run_job(std::size_t id);
    static nlohmann::json job_json(const Job& job);

    Corpus corpus_;
    FragmentSet fragments_;
    std::map<std::string, std::size_t> fragment_index_;
    ServiceOptions options_;

    mutable std::shared_mutex labels_mutex_;
    LabelSet labels_;
    std::map<std::string, std::size_t> latest_;  // fragment_id -> index of its newest label
    int label_fd_ = -1;
    int audit_fd_ = -1;
    std::size_t superseded_events_ = 0;

    mutable std::mutex jobs_mutex_;
    mutable std::condition_variable jobs_cv_;
    std::vector<Job> jobs_;
    std::deque<std::size_t> queue_;
    bool stopping_ = false;
    std::shared_ptr<const ModelState> model_;
    std::thread worker_;
};

/// Registers every route on `server`. Static assets under `static_dir`
/// are served from "/" when given.
void mount_routes(httplib::Server& server, ReviewService& service,
                  const std::optional<std::filesystem::path>& static_dir = std::nullopt);

}  // namespace curlog
