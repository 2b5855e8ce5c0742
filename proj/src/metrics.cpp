#include "skelgest/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace skelgest {

std::optional<double> ConfusionMatrix::accuracy() const {
    const auto n = total();
    if (n == 0) return std::nullopt;
    return static_cast<double>(counts.trace()) / static_cast<double>(n);
}

std::optional<double> ConfusionMatrix::recall(std::size_t k) const {
    const auto i = static_cast<Eigen::Index>(k);
    const auto row = counts.row(i).sum();
    if (row == 0) return std::nullopt;
    return static_cast<double>(counts(i, i)) / static_cast<double>(row);
}

std::optional<double> ConfusionMatrix::precision(std::size_t k) const {
    const auto i = static_cast<Eigen::Index>(k);
    const auto col = counts.col(i).sum();
    if (col == 0) return std::nullopt;
    return static_cast<double>(counts(i, i)) / static_cast<double>(col);
}

ConfusionMatrix confusion(std::span<const int> predicted, std::span<const int> actual,
                          std::vector<std::string> class_ids) {
    if (predicted.size() != actual.size())
        throw std::invalid_argument("confusion: " + std::to_string(predicted.size()) + " predictions for " +
                                    std::to_string(actual.size()) + " labels");
    const auto k = static_cast<int>(class_ids.size());
    ConfusionMatrix cm{std::move(class_ids), CountMatrix::Zero(k, k)};
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (predicted[i] < 0 || predicted[i] >= k || actual[i] < 0 || actual[i] >= k)
            throw std::invalid_argument("confusion: class index outside [0, K)");
        cm.counts(actual[i], predicted[i]) += 1;
    }
    return cm;
}

double average_static_dynamic(double static_acc, double dynamic_acc) {
    if (!(static_acc >= 0.0 && static_acc <= 1.0 && dynamic_acc >= 0.0 && dynamic_acc <= 1.0))
        throw std::invalid_argument("accuracies must lie in [0, 1]");
    return (static_acc + dynamic_acc) / 2.0;
}

double percent_1dp(double rate) {
    // The 1e-9 nudge absorbs binary representation error at exact ties.
    return std::floor(rate * 1000.0 + 0.5 + 1e-9) / 10.0;
}

std::optional<double> BinaryCounts::accuracy() const {
    if (total() == 0) return std::nullopt;
    return static_cast<double>(tp + tn) / static_cast<double>(total());
}
std::optional<double> BinaryCounts::precision() const {
    if (tp + fp == 0) return std::nullopt;
    return static_cast<double>(tp) / static_cast<double>(tp + fp);
}
std::optional<double> BinaryCounts::recall() const {
    if (tp + fn == 0) return std::nullopt;
    return static_cast<double>(tp) / static_cast<double>(tp + fn);
}

BinarySuiteSummary binary_suite_metrics(std::span<const BinaryCounts> per_class) {
    BinarySuiteSummary s;
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& c : per_class) {
        s.accuracy.push_back(c.accuracy());
        s.precision.push_back(c.precision());
        s.recall.push_back(c.recall());
        if (auto a = c.accuracy()) {
            sum += *a;
            ++n;
        }
    }
    s.mean_accuracy = n ? sum / static_cast<double>(n) : 0.0;
    return s;
}

// ---------------------------------------------------------------------------

namespace {

std::string fmt_rate(const std::optional<double>& r) {
    if (!r) return "n/a";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", *r);
    return buf;
}

std::string fmt_pct(double rate) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", percent_1dp(rate));
    return buf;
}

nlohmann::ordered_json opt_json(const std::optional<double>& v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json("n/a");
}

std::optional<double> opt_from_json(const nlohmann::json& j) {
    if (j.is_number()) return j.get<double>();
    return std::nullopt;
}

nlohmann::ordered_json matrix_json(const ConfusionMatrix& cm) {
    nlohmann::ordered_json j;
    j["classes"] = cm.class_ids;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (Eigen::Index r = 0; r < cm.counts.rows(); ++r) {
        std::vector<std::int64_t> row(static_cast<std::size_t>(cm.counts.cols()));
        for (Eigen::Index c = 0; c < cm.counts.cols(); ++c) row[static_cast<std::size_t>(c)] = cm.counts(r, c);
        rows.push_back(row);
    }
    j["counts"] = rows;
    return j;
}

ConfusionMatrix matrix_from_json(const nlohmann::json& j) {
    ConfusionMatrix cm;
    cm.class_ids = j.at("classes").get<std::vector<std::string>>();
    const auto k = static_cast<Eigen::Index>(cm.class_ids.size());
    cm.counts = CountMatrix::Zero(k, k);
    const auto& rows = j.at("counts");
    if (static_cast<Eigen::Index>(rows.size()) != k) throw std::invalid_argument("confusion matrix is not square");
    for (Eigen::Index r = 0; r < k; ++r) {
        const auto& row = rows.at(static_cast<std::size_t>(r));
        if (static_cast<Eigen::Index>(row.size()) != k) throw std::invalid_argument("confusion matrix is not square");
        for (Eigen::Index c = 0; c < k; ++c) cm.counts(r, c) = row.at(static_cast<std::size_t>(c)).get<std::int64_t>();
    }
    return cm;
}

}  // namespace

ReportFormat report_format_from_string(const std::string& s) {
    if (s == "json") return ReportFormat::Json;
    if (s == "text") return ReportFormat::Text;
    if (s == "csv") return ReportFormat::Csv;
    throw std::invalid_argument("report format must be json, text or csv, got '" + s + "'");
}

nlohmann::ordered_json report_to_json(const EvaluationReport& report) {
    nlohmann::ordered_json j;
    j["protocol"] = report.protocol;
    j["static_accuracy"] = report.static_accuracy;
    j["dynamic_accuracy"] = report.dynamic_accuracy;
    j["average_accuracy"] = report.average_accuracy;
    j["percent"] = {{"static", percent_1dp(report.static_accuracy)},
                    {"dynamic", percent_1dp(report.dynamic_accuracy)},
                    {"average", percent_1dp(report.average_accuracy)}};
    if (report.mean_binary_accuracy) j["mean_binary_accuracy"] = *report.mean_binary_accuracy;

    nlohmann::ordered_json folds = nlohmann::ordered_json::array();
    for (const auto& f : report.folds) {
        nlohmann::ordered_json fj;
        fj["fold"] = f.fold;
        fj["test_patients"] = f.test_patients;
        fj["n_test_gestures"] = f.n_test_gestures;
        fj["static_accuracy"] = f.static_accuracy;
        fj["dynamic_accuracy"] = f.dynamic_accuracy;
        fj["average_accuracy"] = f.average_accuracy;
        folds.push_back(fj);
    }
    j["folds"] = folds;

    nlohmann::ordered_json classes = nlohmann::ordered_json::array();
    for (const auto& c : report.classes) {
        nlohmann::ordered_json cj;
        cj["id"] = c.id;
        cj["kind"] = c.kind;
        cj["support"] = c.support;
        cj["recall"] = opt_json(c.recall);
        cj["precision"] = opt_json(c.precision);
        if (c.binary) {
            cj["binary"] = {{"tp", c.binary->tp}, {"fp", c.binary->fp}, {"tn", c.binary->tn}, {"fn", c.binary->fn},
                            {"accuracy", opt_json(c.binary->accuracy())}};
        }
        classes.push_back(cj);
    }
    j["classes"] = classes;
    if (report.confusion_static) j["confusion_static"] = matrix_json(*report.confusion_static);
    if (report.confusion_dynamic) j["confusion_dynamic"] = matrix_json(*report.confusion_dynamic);
    return j;
}

EvaluationReport report_from_json(const nlohmann::json& j) {
    EvaluationReport r;
    r.protocol = j.at("protocol").get<std::string>();
    r.static_accuracy = j.at("static_accuracy").get<double>();
    r.dynamic_accuracy = j.at("dynamic_accuracy").get<double>();
    r.average_accuracy = j.at("average_accuracy").get<double>();
    if (j.contains("mean_binary_accuracy")) r.mean_binary_accuracy = j.at("mean_binary_accuracy").get<double>();
    for (const auto& fj : j.at("folds")) {
        FoldResult f;
        f.fold = fj.at("fold");
        f.test_patients = fj.at("test_patients").get<std::vector<int>>();
        f.n_test_gestures = fj.at("n_test_gestures");
        f.static_accuracy = fj.at("static_accuracy");
        f.dynamic_accuracy = fj.at("dynamic_accuracy");
        f.average_accuracy = fj.at("average_accuracy");
        r.folds.push_back(std::move(f));
    }
    for (const auto& cj : j.at("classes")) {
        ClassMetrics c;
        c.id = cj.at("id");
        c.kind = cj.at("kind");
        c.support = cj.at("support");
        c.recall = opt_from_json(cj.at("recall"));
        c.precision = opt_from_json(cj.at("precision"));
        if (cj.contains("binary")) {
            const auto& b = cj.at("binary");
            c.binary = BinaryCounts{b.at("tp"), b.at("fp"), b.at("tn"), b.at("fn")};
        }
        r.classes.push_back(std::move(c));
    }
    if (j.contains("confusion_static")) r.confusion_static = matrix_from_json(j.at("confusion_static"));
    if (j.contains("confusion_dynamic")) r.confusion_dynamic = matrix_from_json(j.at("confusion_dynamic"));
    return r;
}

std::string render_confusion_csv(const ConfusionMatrix& cm) {
    std::ostringstream os;
    os << "true\\predicted";
    for (const auto& id : cm.class_ids) os << ',' << id;
    os << '\n';
    for (Eigen::Index r = 0; r < cm.counts.rows(); ++r) {
        os << cm.class_ids[static_cast<std::size_t>(r)];
        for (Eigen::Index c = 0; c < cm.counts.cols(); ++c) os << ',' << cm.counts(r, c);
        os << '\n';
    }
    return os.str();
}

std::string render_report(const EvaluationReport& report, ReportFormat format) {
    if (format == ReportFormat::Json) return report_to_json(report).dump(2) + "\n";

    std::ostringstream os;
    if (format == ReportFormat::Csv) {
        os << "class,kind,support,recall,precision,binary_accuracy\n";
        for (const auto& c : report.classes) {
            os << c.id << ',' << c.kind << ',' << c.support << ',' << fmt_rate(c.recall) << ','
               << fmt_rate(c.precision) << ',' << (c.binary ? fmt_rate(c.binary->accuracy()) : "n/a") << '\n';
        }
        return os.str();
    }

    os << "protocol: " << report.protocol << '\n';
    os << "accuracy (%): static " << fmt_pct(report.static_accuracy) << "  dynamic "
       << fmt_pct(report.dynamic_accuracy) << "  average " << fmt_pct(report.average_accuracy) << '\n';
    if (report.mean_binary_accuracy)
        os << "mean binary accuracy (%): " << fmt_pct(*report.mean_binary_accuracy) << '\n';
    for (const auto& f : report.folds) {
        os << "fold " << f.fold << ": " << f.n_test_gestures << " gestures, static " << fmt_pct(f.static_accuracy)
           << "  dynamic " << fmt_pct(f.dynamic_accuracy) << "  average " << fmt_pct(f.average_accuracy) << '\n';
    }
    os << "class   kind     support  recall   precision\n";
    for (const auto& c : report.classes) {
        char buf[128];
        std::snprintf(buf, sizeof(buf), "%-7s %-8s %7lld  %-7s  %s\n", c.id.c_str(), c.kind.c_str(),
                      static_cast<long long>(c.support), fmt_rate(c.recall).c_str(), fmt_rate(c.precision).c_str());
        os << buf;
    }
    return os.str();
}

}  // namespace skelgest
