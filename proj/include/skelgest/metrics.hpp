#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

namespace skelgest {

using CountMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Rows are true classes, columns predicted classes.
struct ConfusionMatrix {
    std::vector<std::string> class_ids;
    CountMatrix counts;

    std::size_t size() const { return class_ids.size(); }
    std::int64_t total() const { return counts.sum(); }
    std::int64_t support(std::size_t k) const { return counts.row(static_cast<Eigen::Index>(k)).sum(); }
    /// trace / total; nullopt when empty.
    std::optional<double> accuracy() const;
    /// Diagonal over row sum; nullopt for a class without samples.
    std::optional<double> recall(std::size_t k) const;
    /// Diagonal over column sum; nullopt when the class was never predicted.
    std::optional<double> precision(std::size_t k) const;
};

/// Throws std::invalid_argument on length mismatch or an index outside [0, K).
ConfusionMatrix confusion(std::span<const int> predicted, std::span<const int> actual,
                          std::vector<std::string> class_ids);

/// Unweighted mean of the two rates.
double average_static_dynamic(double static_acc, double dynamic_acc);

/// Percentage rounded half-up to one decimal (0.70849 -> 70.8, 0.61250 -> 61.3).
double percent_1dp(double rate);

struct BinaryCounts {
    std::int64_t tp = 0, fp = 0, tn = 0, fn = 0;

    std::int64_t total() const { return tp + fp + tn + fn; }
    std::optional<double> accuracy() const;
    std::optional<double> precision() const;
    std::optional<double> recall() const;
};

struct BinarySuiteSummary {
    double mean_accuracy = 0.0;
    std::vector<std::optional<double>> accuracy;
    std::vector<std::optional<double>> precision;
    std::vector<std::optional<double>> recall;
};

/// Unweighted mean of per-class binary accuracies plus per-class precision
/// and recall from TP/FP/FN.
BinarySuiteSummary binary_suite_metrics(std::span<const BinaryCounts> per_class);

// ---------------------------------------------------------------------------

struct FoldResult {
    int fold = 0;
    std::vector<int> test_patients;
    std::size_t n_test_gestures = 0;
    double static_accuracy = 0.0;
    double dynamic_accuracy = 0.0;
    double average_accuracy = 0.0;
};

struct ClassMetrics {
    std::string id;
    std::string kind;
    std::int64_t support = 0;
    std::optional<double> recall;
    std::optional<double> precision;
    std::optional<BinaryCounts> binary;  // multi-class-binary protocol only
};

struct EvaluationReport {
    std::string protocol;
    std::vector<FoldResult> folds;
    double static_accuracy = 0.0;
    double dynamic_accuracy = 0.0;
    double average_accuracy = 0.0;
    std::optional<double> mean_binary_accuracy;
    std::optional<ConfusionMatrix> confusion_static;
    std::optional<ConfusionMatrix> confusion_dynamic;
    std::vector<ClassMetrics> classes;
};

enum class ReportFormat { Json, Text, Csv };

ReportFormat report_format_from_string(const std::string& s);

/// Deterministic rendering. Undefined rates print as "n/a".
std::string render_report(const EvaluationReport& report, ReportFormat format);

/// Header row plus one row per true class.
std::string render_confusion_csv(const ConfusionMatrix& cm);

nlohmann::ordered_json report_to_json(const EvaluationReport& report);
EvaluationReport report_from_json(const nlohmann::json& j);

}  // namespace skelgest
