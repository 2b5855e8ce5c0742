#include <doctest.h>

#include "oracles.hpp"
#include "skelgest/preprocess.hpp"

using namespace skelgest;

namespace {

GestureSequence series_sequence(const std::vector<double>& xs) {
    GestureSequence s;
    s.label = lookup_label("A1_1");
    for (double x : xs) {
        SkeletalFrame f;
        for (std::size_t j = 0; j < kNumJoints; ++j) f.joints.push_back({x + static_cast<double>(j), 2.0 * x, 0.5});
        s.frames.push_back(f);
    }
    return s;
}

}  // namespace

TEST_CASE("exact oracle reproduces the classic 5-point quadratic table") {
    const auto c = oracle::savgol_exact(5, 2);
    const std::vector<oracle::Rational> want{{-3, 35}, {12, 35}, {17, 35}, {12, 35}, {-3, 35}};
    CHECK(c == want);
    const auto lin = oracle::savgol_exact(3, 1);
    CHECK(lin == std::vector<oracle::Rational>{{1, 3}, {1, 3}, {1, 3}});
}

TEST_CASE("savgol_coefficients match both oracles") {
    for (auto [m, order] : std::vector<std::pair<int, int>>{{3, 1}, {5, 2}, {5, 3}, {7, 2}, {7, 4}, {9, 3}, {11, 5}}) {
        CAPTURE(m);
        CAPTURE(order);
        const auto got = savgol_coefficients<double>(m, order);
        const auto exact = oracle::savgol_exact(m, order);
        const auto pinv = oracle::savgol_pinv(m, order);
        REQUIRE(got.size() == m);
        for (int i = 0; i < m; ++i) {
            CHECK(std::abs(got(i) - exact[static_cast<std::size_t>(i)].value()) <= 1e-12);
            CHECK(std::abs(got(i) - pinv(i)) <= 1e-12);
        }
        CHECK(std::abs(got.sum() - 1.0) <= 1e-12);
    }
}

TEST_CASE("savgol_coefficients rejects bad shapes") {
    CHECK_THROWS_AS(savgol_coefficients<double>(4, 2), std::invalid_argument);
    CHECK_THROWS_AS(savgol_coefficients<double>(5, 5), std::invalid_argument);
    CHECK_THROWS_AS(savgol_coefficients<double>(-1, 0), std::invalid_argument);
    CHECK(savgol_coefficients<double>(1, 0)(0) == 1.0);
}

TEST_CASE("savgol_smooth fixed points and impulse") {
    SUBCASE("constant") {
        const auto out = savgol_smooth(series_sequence({5, 5, 5, 5, 5, 5}), {5, 2});
        for (const auto& f : out.frames) CHECK(f.joints[0].x == doctest::Approx(5.0).epsilon(1e-14));
    }
    SUBCASE("linear ramp interior") {
        const auto out = savgol_smooth(series_sequence({0, 1, 2, 3, 4, 5, 6}), {5, 2});
        for (std::size_t t = 0; t < 7; ++t) {
            CHECK(std::abs(out.frames[t].joints[0].x - static_cast<double>(t)) <= 1e-12);
            CHECK(std::abs(out.frames[t].joints[3].y - 2.0 * static_cast<double>(t)) <= 1e-12);
        }
    }
    SUBCASE("impulse at the center") {
        const auto out = savgol_smooth(series_sequence({0, 0, 10, 0, 0}), {5, 2});
        CHECK(std::abs(out.frames[2].joints[0].x - 34.0 / 7.0) <= 1e-12);
        CHECK(out.frames[0].joints[0].x == 0.0);
        CHECK(out.frames[4].joints[0].x == 0.0);
    }
    SUBCASE("confidence untouched") {
        const auto out = savgol_smooth(series_sequence({0, 3, 1, 4, 1, 5}), {5, 2});
        for (const auto& f : out.frames) CHECK(f.joints[2].confidence == 0.5);
    }
    SUBCASE("order m-1 reproduces the input") {
        const std::vector<double> xs{3, -1, 4, 1, -5, 9, 2, 6};
        const auto out = savgol_smooth(series_sequence(xs), {5, 4});
        for (std::size_t t = 0; t < xs.size(); ++t) CHECK(std::abs(out.frames[t].joints[0].x - xs[t]) <= 1e-9);
    }
    SUBCASE("sequence shorter than the filter passes through") {
        const auto out = savgol_smooth(series_sequence({1, 7, 2}), {5, 2});
        CHECK(out.frames[1].joints[0].x == 7.0);
    }
}
