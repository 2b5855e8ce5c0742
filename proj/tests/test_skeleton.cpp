#include <doctest.h>

#include <set>

#include "skelgest/skeleton.hpp"

using namespace skelgest;

namespace {

GestureSequence make_sequence(std::size_t frames) {
    GestureSequence s;
    s.label = lookup_label("A1_1");
    for (std::size_t t = 0; t < frames; ++t) {
        SkeletalFrame f;
        for (std::size_t j = 0; j < kNumJoints; ++j) f.joints.push_back({100.0 + j, 50.0 + t, 1.0});
        s.frames.push_back(f);
    }
    return s;
}

}  // namespace

TEST_CASE("taxonomy partitions 29 gestures into 15 static and 14 dynamic") {
    const auto counts = class_counts();
    CHECK(counts.n_static == 15);
    CHECK(counts.n_dynamic == 14);
    CHECK(counts.n_total == 29);
    CHECK(counts.n_static + counts.n_dynamic == counts.n_total);

    std::set<std::string> ids;
    for (const auto& l : taxonomy()) ids.insert(l.id);
    CHECK(ids.size() == 29);
    CHECK(taxonomy().front().id == "A1_1");
    CHECK(taxonomy().back().id == "P2_5");
}

TEST_CASE("label kinds") {
    CHECK(label_kind("A1_1") == GestureKind::Static);
    CHECK(label_kind("P2_5") == GestureKind::Dynamic);
    CHECK(label_kind("S2_1") == GestureKind::Dynamic);
    CHECK(to_string(GestureKind::Static) == "static");
    CHECK_THROWS_AS(label_kind("Z9_9"), UnknownLabelError);
    CHECK_FALSE(label_index("Z9_9").has_value());
    CHECK(*label_index("A1_2") == 1);
}

TEST_CASE("labels_of_kind keeps taxonomy order") {
    const auto statics = labels_of_kind(GestureKind::Static);
    const auto dynamics = labels_of_kind(GestureKind::Dynamic);
    REQUIRE(statics.size() == 15);
    REQUIRE(dynamics.size() == 14);
    for (const auto& id : statics) CHECK(label_kind(id) == GestureKind::Static);
    for (const auto& id : dynamics) CHECK(label_kind(id) == GestureKind::Dynamic);
    CHECK(*label_index(statics[0]) < *label_index(statics[1]));
}

TEST_CASE("validate_sequence") {
    SUBCASE("well-formed") { CHECK(validate_sequence(make_sequence(3)).ok()); }
    SUBCASE("missing joint") {
        auto s = make_sequence(3);
        s.frames[0].joints.pop_back();
        const auto r = validate_sequence(s);
        REQUIRE_FALSE(r.ok());
        CHECK(r.violations.front() == "frame 0: expected 14 joints, got 13");
    }
    SUBCASE("confidence out of range") {
        auto s = make_sequence(3);
        s.frames[1].joints[5].confidence = 1.5;
        const auto r = validate_sequence(s);
        REQUIRE_FALSE(r.ok());
        CHECK(r.violations.front().find("joint 5") != std::string::npos);
        CHECK(r.violations.front().find("1.5") != std::string::npos);
    }
    SUBCASE("no frames") { CHECK_FALSE(validate_sequence(make_sequence(0)).ok()); }
}

TEST_CASE("default joint map") {
    const auto m = JointIndexMap::default_map();
    CHECK(m.names.size() == kNumJoints);
    CHECK(m.chin_index == 0);
    CHECK(validate_joint_map(m).ok());
    auto bad = m;
    bad.chin_index = 14;
    CHECK_FALSE(validate_joint_map(bad).ok());
}
