#pragma once

#include <curlog/annotation.hpp>

#include <array>
#include <span>
#include <string>
#include <vector>

namespace curlog {

struct ConfusionMatrix {
    std::vector<ActionClass> classes;
    std::vector<std::size_t> cells;  // row = true class, column = predicted

    std::size_t n() const { return classes.size(); }
    std::size_t at(std::size_t t, std::size_t p) const { return cells[t * classes.size() + p]; }
    std::size_t total() const;
    std::size_t row_sum(std::size_t t) const;
    std::size_t col_sum(std::size_t p) const;
    std::size_t trace() const;

    std::string to_csv() const;
};

ConfusionMatrix confusion_matrix(std::span<const ActionClass> y_true, std::span<const ActionClass> y_pred,
                                 std::span<const ActionClass> classes);
/// Classes occurring in either sequence, in schema order.
std::vector<ActionClass> observed_classes(std::span<const ActionClass> y_true, std::span<const ActionClass> y_pred);

struct ClassMetrics {
    ActionClass action;
    std::size_t support = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    // Set when the value came from a 0/0 and was resolved to 0.
    bool precision_undefined = false;
    bool recall_undefined = false;
    bool f1_undefined = false;
};

struct AggregateMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct MetricsReport {
    std::string model;
    std::string test_fingerprint;
    std::size_t n = 0;
    double accuracy = 0.0;
    std::vector<ClassMetrics> per_class;
    AggregateMetrics macro;
    AggregateMetrics weighted;
    ConfusionMatrix confusion;
};

MetricsReport metrics(const ConfusionMatrix& cm, std::string model = {}, std::string test_fingerprint = {});

std::string test_set_fingerprint(std::span<const std::string> ids, std::span<const ActionClass> y_true);

enum class Averaging { weighted, macro };
std::string_view to_string(Averaging a);

struct ComparisonRow {
    std::string model;
    double accuracy = 0.0;
    double f1 = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    std::array<bool, 4> best{};  // accuracy, f1, precision, recall
};

struct ComparisonTable {
    Averaging averaging = Averaging::weighted;
    std::vector<ComparisonRow> rows;

    std::string to_text(int decimals = 2) const;
    std::string to_csv() const;
    std::string to_json() const;
};

ComparisonTable compare_models(std::span<const MetricsReport> reports, Averaging averaging = Averaging::weighted);

std::string report_to_json(const MetricsReport& report);
std::string report_to_text(const MetricsReport& report, int decimals = 3);

}  // namespace curlog
