#pragma once

#include <curlog/annotation.hpp>
#include <curlog/features.hpp>
#include <curlog/kernels.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace curlog {

enum class ModelVariant { dummy, cnb, sgd };
std::string_view to_string(ModelVariant v);
std::optional<ModelVariant> model_variant_from_string(std::string_view s);

struct DummyParams {
    std::vector<double> probabilities;  // aligned with TrainedModel::classes
    std::uint64_t seed = 0;
};

struct CnbOptions {
    double alpha = 1.0;
    bool normalize = true;
};

struct CnbParams {
    CnbOptions options;
    kernels::Dense weights;  // classes x terms, w_{c,i}
};

struct SgdOptions {
    double l2_lambda = 1e-4;
    int epochs = 10;
    double eta0 = 0.1;
    std::uint64_t seed = 0;
};

struct SgdParams {
    SgdOptions options;
    kernels::Dense weights;  // classes x terms
    std::vector<double> bias;
    std::vector<double> epoch_norms;  // ||w_c|| summed over classes, after each epoch
};

struct TrainedModel {
    ModelVariant variant = ModelVariant::dummy;
    std::vector<ActionClass> classes;        // schema order, classes present in training
    std::vector<std::size_t> class_counts;   // aligned with classes
    std::size_t n_terms = 0;
    std::string feature_fingerprint;         // empty: any feature space accepted
    std::optional<FeatureSpace> features;    // embedded so the model file is self-contained
    std::variant<DummyParams, CnbParams, SgdParams> params;
    std::size_t n_train = 0;
    std::string timestamp;
    std::string config_fingerprint;          // pipeline config that produced the model, if any

    ActionClass majority_class() const;
};

struct PredictionSet {
    std::vector<ActionClass> labels;
    std::vector<bool> low_confidence;  // tied or all-zero score rows
};

TrainedModel train_dummy(std::span<const ActionClass> labels, std::uint64_t seed);
TrainedModel train_cnb(const DocTermMatrix& x, std::span<const ActionClass> y, const CnbOptions& options = {});
TrainedModel train_sgd(const DocTermMatrix& x, std::span<const ActionClass> y, const SgdOptions& options = {});

/// One hinge-loss SGD update on a single example, y in {-1, +1}.
void sgd_hinge_step(std::span<double> w, double& b, std::span<const std::uint32_t> cols,
                    std::span<const double> vals, double y, double eta, double lambda);

/// Rows x classes. For CNB the score is sum_i t_i w_{c,i} and the decision is
/// argmin; for SGD it is w_c.x + b_c and the decision is argmax; the dummy
/// returns a one-hot row of its seeded draw. Throws "feature space mismatch"
/// when the matrix was built from a different feature space.
kernels::Dense predict_scores(const TrainedModel& model, const DocTermMatrix& x);
PredictionSet predict(const TrainedModel& model, const DocTermMatrix& x);
/// Applies the variant's decision rule to precomputed scores.
PredictionSet decide(const TrainedModel& model, const kernels::Dense& scores);

inline constexpr int kModelFormatVersion = 1;

void save_model(const TrainedModel& model, std::ostream& sink);
std::string save_model_string(const TrainedModel& model);
TrainedModel load_model(std::istream& source);
TrainedModel load_model_string(std::string_view text);

}  // namespace curlog
