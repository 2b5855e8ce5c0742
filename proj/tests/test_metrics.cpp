#include <doctest.h>

#include <cmath>
#include <numeric>

#include "skelgest/metrics.hpp"

using namespace skelgest;

namespace {

std::vector<std::string> ids(std::size_t k) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < k; ++i) out.push_back("C" + std::to_string(i));
    return out;
}

}  // namespace

TEST_CASE("confusion matrix examples") {
    SUBCASE("hand case") {
        const std::vector<int> pred{0, 1, 1}, actual{0, 0, 1};
        const auto cm = confusion(pred, actual, ids(2));
        CHECK(cm.counts(0, 0) == 1);
        CHECK(cm.counts(0, 1) == 1);
        CHECK(cm.counts(1, 0) == 0);
        CHECK(cm.counts(1, 1) == 1);
        CHECK(*cm.accuracy() == doctest::Approx(2.0 / 3.0));
    }
    SUBCASE("perfect predictions are diagonal") {
        const std::vector<int> y{0, 1, 2, 2, 1};
        const auto cm = confusion(y, y, ids(3));
        CHECK(cm.counts.isDiagonal());
        CHECK(*cm.accuracy() == 1.0);
    }
    SUBCASE("constant predictions fill column 0") {
        const std::vector<int> pred(4, 0), actual{0, 1, 2, 1};
        const auto cm = confusion(pred, actual, ids(3));
        CHECK(cm.counts.col(0).sum() == 4);
        CHECK(cm.counts.rightCols(2).sum() == 0);
        CHECK_FALSE(cm.precision(1).has_value());
    }
    SUBCASE("errors") {
        const std::vector<int> a{0, 1}, b{0};
        CHECK_THROWS_AS(confusion(a, b, ids(2)), std::invalid_argument);
        const std::vector<int> c{0, 5};
        CHECK_THROWS_AS(confusion(c, a, ids(2)), std::invalid_argument);
    }
}

TEST_CASE("support-weighted recall recomposes accuracy") {
    const std::vector<int> pred{0, 1, 2, 2, 1, 0, 0, 2, 1, 1}, actual{0, 1, 2, 1, 1, 0, 2, 2, 0, 1};
    const auto cm = confusion(pred, actual, ids(3));
    double weighted = 0.0;
    for (std::size_t k = 0; k < 3; ++k)
        weighted += static_cast<double>(cm.support(k)) * *cm.recall(k) / static_cast<double>(cm.total());
    CHECK(std::abs(weighted - *cm.accuracy()) <= 1e-12);
    CHECK(cm.total() == 10);
}

TEST_CASE("static/dynamic average") {
    CHECK(average_static_dynamic(0.743, 0.673) == doctest::Approx(0.708));
    CHECK(average_static_dynamic(0.653, 0.572) == doctest::Approx(0.6125));
    CHECK(percent_1dp(average_static_dynamic(0.653, 0.572)) == doctest::Approx(61.3));
    CHECK(average_static_dynamic(0.4, 0.4) == 0.4);
    CHECK_THROWS_AS(average_static_dynamic(1.2, 0.5), std::invalid_argument);
}

TEST_CASE("comparison table averages within printed rounding") {
    const double rows[][3] = {{74.3, 67.3, 70.8}, {70.0, 57.0, 63.5}, {57.2, 51.4, 54.3}, {61.8, 55.8, 58.8},
                              {72.4, 62.8, 67.6}, {70.3, 75.5, 72.9}, {92.9, 76.6, 84.7}};
    for (const auto& r : rows) {
        CAPTURE(r[0]);
        // Printed tables round .x5 ties either way.
        CHECK(std::abs(100 * average_static_dynamic(r[0] / 100, r[1] / 100) - r[2]) <= 0.05 + 1e-9);
    }
}

TEST_CASE("percent rounding is half-up") {
    CHECK(percent_1dp(0.70849) == doctest::Approx(70.8));
    CHECK(percent_1dp(0.6125) == doctest::Approx(61.3));
    CHECK(percent_1dp(0.9385) == doctest::Approx(93.9));
    CHECK(percent_1dp(0.0) == 0.0);
    CHECK(percent_1dp(1.0) == doctest::Approx(100.0));
}

TEST_CASE("binary suite") {
    SUBCASE("always negative on a balanced set") {
        std::vector<BinaryCounts> suite(29, BinaryCounts{0, 0, 28, 1});
        const auto s = binary_suite_metrics(suite);
        CHECK(std::abs(s.mean_accuracy - 28.0 / 29.0) <= 1e-12);
        for (const auto& p : s.precision) CHECK_FALSE(p.has_value());
        for (const auto& r : s.recall) CHECK(*r == 0.0);
    }
    SUBCASE("perfect") {
        std::vector<BinaryCounts> suite(29, BinaryCounts{1, 0, 28, 0});
        const auto s = binary_suite_metrics(suite);
        CHECK(s.mean_accuracy == 1.0);
        CHECK(*s.precision[3] == 1.0);
    }
    SUBCASE("definitions") {
        const BinaryCounts c{9, 1, 0, 0};
        CHECK(*c.precision() == doctest::Approx(0.9));
        CHECK(*c.recall() == 1.0);
    }
}

TEST_CASE("report rendering") {
    EvaluationReport r;
    r.protocol = "multiclass";
    r.static_accuracy = 0.743;
    r.dynamic_accuracy = 0.673;
    r.average_accuracy = average_static_dynamic(r.static_accuracy, r.dynamic_accuracy);
    std::vector<std::string> k15;
    for (int i = 0; i < 15; ++i) k15.push_back("S" + std::to_string(i));
    std::vector<int> pred(15), actual(15);
    std::iota(actual.begin(), actual.end(), 0);
    r.confusion_static = confusion(pred, actual, k15);
    ClassMetrics never_predicted{"S3", "static", 1, 0.0, std::nullopt, std::nullopt};
    r.classes.push_back(never_predicted);
    r.folds.push_back(FoldResult{1, {1, 2}, 15, 0.743, 0.673, 0.708});

    for (auto f : {ReportFormat::Json, ReportFormat::Text, ReportFormat::Csv})
        CHECK(render_report(r, f) == render_report(r, f));

    const auto json = render_report(r, ReportFormat::Json);
    CHECK(json.find("\"precision\": \"n/a\"") != std::string::npos);
    CHECK(json.find("\"average\": 70.8") != std::string::npos);
    CHECK(render_report(r, ReportFormat::Text).find("70.8") != std::string::npos);
    CHECK(render_report(r, ReportFormat::Csv).find("n/a") != std::string::npos);

    const auto csv = render_confusion_csv(*r.confusion_static);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 16);

    const auto back = report_from_json(nlohmann::json::parse(json));
    CHECK(render_report(back, ReportFormat::Json) == json);
    CHECK_FALSE(back.classes[0].precision.has_value());
    CHECK_THROWS_AS(report_format_from_string("xml"), std::invalid_argument);
}
