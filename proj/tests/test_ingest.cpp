#include <doctest.h>

#include <random>

#include "skelgest/ingest.hpp"
#include "skelgest/preprocess.hpp"
#include "test_util.hpp"

using namespace skelgest;
using testutil::block;
using testutil::TempDir;
using testutil::write_text;

TEST_CASE("parse_skeletal_file reads 5x14 blocks") {
    const auto frames = parse_skeletal_file(block(10) + "\n# comment\n" + block(20));
    REQUIRE(frames.size() == 2);
    CHECK(frames[0].joints.size() == 14);
    CHECK(frames[1].joints[3].x == doctest::Approx(23.0));
    CHECK(frames[1].joints[3].y == doctest::Approx(23.0));
    CHECK(frames[0].joints[0].confidence == 1.0);
    CHECK(frames[0].has_aux());
}

TEST_CASE("parse errors name the line") {
    std::string text = block(10);
    text += "1 2 3 4 5 6 7 8 9 10 11 12 13\n";
    try {
        parse_skeletal_file(text);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("line 6") != std::string::npos);
        CHECK(std::string(e.what()).find("got 13") != std::string::npos);
    }
    CHECK_THROWS_WITH_AS(parse_skeletal_file("1 2 x 4 5 6 7 8 9 10 11 12 13 14\n"),
                         doctest::Contains("line 1"), DataError);
    const std::string truncated = block(1).substr(0, block(1).rfind('\n', block(1).size() - 2) + 1);
    CHECK_THROWS_AS(parse_skeletal_file(truncated), DataError);
}

TEST_CASE("serialize/parse round trip is exact on random frames") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<SkeletalFrame> frames;
        const bool aux = trial % 2 == 0;
        for (int t = 0; t < 1 + trial; ++t) frames.push_back(testutil::random_frame(rng, aux));
        const auto back = parse_skeletal_file(serialize_skeletal_frames(frames));
        REQUIRE(back.size() == frames.size());
        for (std::size_t t = 0; t < frames.size(); ++t) {
            for (std::size_t j = 0; j < kNumJoints; ++j) {
                CHECK(back[t].joints[j].x == frames[t].joints[j].x);
                CHECK(back[t].joints[j].y == frames[t].joints[j].y);
                CHECK(back[t].joints[j].confidence == frames[t].joints[j].confidence);
            }
            if (aux) CHECK(*back[t].aux4 == *frames[t].aux4);
        }
    }
}

TEST_CASE("manifest parsing") {
    const auto rows = parse_manifest("patient_id,gesture_id,correct,frames_path\n3,A1_1,1,a.txt\n4,P2_5,false,b.txt\n");
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].patient_id == 3);
    CHECK(rows[1].correct == false);
    CHECK(parse_manifest(serialize_manifest(rows)).size() == 2);
    CHECK_THROWS_AS(parse_manifest("patient_id,gesture_id,correct,frames_path\nx,A1_1,1,a.txt\n"), DataError);
}

TEST_CASE("load_dataset filters incorrect gestures") {
    TempDir dir("ingest");
    write_text(dir / "f/a.txt", block(10) + block(11));
    write_text(dir / "f/b.txt", block(12));
    write_text(dir / "f/c.txt", block(13));
    write_text(dir / "manifest.csv",
               "patient_id,gesture_id,correct,frames_path\n1,A1_1,1,f/a.txt\n1,A1_2,0,f/b.txt\n2,P2_5,1,f/c.txt\n");
    const auto ds = load_dataset(dir.path(), dir / "manifest.csv");
    REQUIRE(ds.sequences.size() == 2);
    for (const auto& s : ds.sequences) CHECK(s.correct);
    CHECK(ds.sequences[0].frames.size() == 2);
    CHECK(ds.sequences[1].label.kind == GestureKind::Dynamic);
}

TEST_CASE("load_dataset errors") {
    TempDir dir("ingest_err");
    write_text(dir / "f/a.txt", block(10));
    SUBCASE("unknown label") {
        write_text(dir / "m.csv", "patient_id,gesture_id,correct,frames_path\n1,Z9_9,1,f/a.txt\n");
        CHECK_THROWS_WITH_AS(load_dataset(dir.path(), dir / "m.csv"), doctest::Contains("Z9_9"), DataError);
    }
    SUBCASE("empty after filtering") {
        write_text(dir / "m.csv", "patient_id,gesture_id,correct,frames_path\n1,A1_1,0,f/a.txt\n");
        CHECK_THROWS_WITH_AS(load_dataset(dir.path(), dir / "m.csv"), doctest::Contains("empty"), DataError);
    }
    SUBCASE("missing frames file") {
        write_text(dir / "m.csv", "patient_id,gesture_id,correct,frames_path\n1,A1_1,1,f/nope.txt\n");
        CHECK_THROWS_AS(load_dataset(dir.path(), dir / "m.csv"), DataError);
    }
    SUBCASE("duplicate entry") {
        write_text(dir / "m.csv",
                   "patient_id,gesture_id,correct,frames_path\n1,A1_1,1,f/a.txt\n1,A1_1,1,f/a.txt\n");
        CHECK_THROWS_AS(load_dataset(dir.path(), dir / "m.csv"), DataError);
    }
}

TEST_CASE("fold assignment") {
    CHECK(fold_for_patient(7, {}) == 1);
    CHECK(fold_for_patient(15, {}) == 1);
    CHECK(fold_for_patient(16, {}) == 2);
    CHECK(fold_for_patient(20, {}) == 2);
    CHECK(fold_for_patient(35, {}) == 2);
    CHECK(fold_for_patient(36, {}) == 3);
    CHECK(fold_for_patient(55, {}) == 3);

    Dataset ds;
    for (int p : {1, 16, 40}) {
        GestureSequence s;
        s.patient_id = p;
        ds.sequences.push_back(s);
    }
    const auto split = assign_folds(ds);
    CHECK(split.patients_in(1) == std::vector<int>{1});
    CHECK(split.patients_in(2) == std::vector<int>{16});
    CHECK(split.patients_in(3) == std::vector<int>{40});
    CHECK_THROWS_AS(assign_folds(ds, {20, 10}), std::invalid_argument);
}

TEST_CASE("synthetic generator") {
    SynthConfig cfg;
    cfg.n_patients = 6;
    cfg.seed = 42;
    const auto a = generate_synthetic(cfg);
    REQUIRE(a.sequences.size() == 6 * 29);
    CHECK(a.provenance == Provenance::Synthetic);
    for (const auto& s : a.sequences) CHECK(validate_sequence(s).ok());

    SUBCASE("every class appears once per patient") {
        std::map<std::string, int> per_class;
        for (const auto& s : a.sequences) ++per_class[s.label.id];
        CHECK(per_class.size() == 29);
        for (const auto& [id, n] : per_class) CHECK(n == 6);
    }
    SUBCASE("deterministic") {
        const auto b = generate_synthetic(cfg);
        CHECK(dataset_checksum(a) == dataset_checksum(b));
        cfg.seed = 43;
        CHECK(dataset_checksum(generate_synthetic(cfg)) != dataset_checksum(a));
    }
    SUBCASE("noise-free static classes repeat exactly") {
        cfg.noise_sigma = 0.0;
        cfg.camera_offset_range = 0.0;
        const auto clean = generate_synthetic(cfg);
        std::map<std::string, const GestureSequence*> first;
        for (const auto& s : clean.sequences) {
            if (s.label.kind != GestureKind::Static) continue;
            auto [it, fresh] = first.emplace(s.label.id, &s);
            if (fresh) continue;
            const auto& ref = it->second->frames.front();
            for (const auto& f : s.frames)
                for (std::size_t j = 0; j < kNumJoints; ++j) {
                    CHECK(f.joints[j].x == ref.joints[j].x);
                    CHECK(f.joints[j].y == ref.joints[j].y);
                }
        }
    }
    SUBCASE("noise-free M1 features ignore the camera offset") {
        cfg.noise_sigma = 0.0;
        const auto shifted = generate_synthetic(cfg);
        const auto map = JointIndexMap::default_map();
        std::map<std::string, Eigen::MatrixXd> first;
        for (const auto& s : shifted.sequences) {
            if (s.label.kind != GestureKind::Static) continue;
            const auto w = extract_features(s, {}, {16, 1}, {NormMethod::M1, false}, map).front().data;
            auto [it, fresh] = first.emplace(s.label.id, w);
            if (!fresh) CHECK((w - it->second).cwiseAbs().maxCoeff() < 1e-9);
        }
    }
    SUBCASE("invalid configuration") {
        cfg.camera_offset_range = 150;
        CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
    }
}

TEST_CASE("write_dataset then load_dataset round trip") {
    SynthConfig cfg;
    cfg.n_patients = 2;
    cfg.seed = 5;
    const auto ds = generate_synthetic(cfg);
    TempDir dir("roundtrip");
    write_dataset(ds, dir.path());
    const auto back = load_dataset(dir.path(), dir / "manifest.csv");
    REQUIRE(back.sequences.size() == ds.sequences.size());
    CHECK(dataset_checksum(back) == dataset_checksum(ds));
}
