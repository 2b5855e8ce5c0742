#include <doctest.h>

#include <mutex>
#include <set>

#include "skelgest/pipeline.hpp"

using namespace skelgest;

namespace {

/// Returns a fixed probability vector; used to see which model was routed.
class ConstantClassifier final : public WindowClassifier {
public:
    explicit ConstantClassifier(Eigen::VectorXd p) : p_(std::move(p)) {}
    std::vector<Eigen::VectorXd> predict(std::span<const FeatureWindow* const> windows) const override {
        return std::vector<Eigen::VectorXd>(windows.size(), p_);
    }

private:
    Eigen::VectorXd p_;
};

GestureSequence flat_sequence(int patient, const std::string& id, std::size_t frames) {
    GestureSequence s;
    s.patient_id = patient;
    s.label = lookup_label(id);
    for (std::size_t t = 0; t < frames; ++t) {
        SkeletalFrame f;
        for (std::size_t j = 0; j < kNumJoints; ++j) f.joints.push_back({100.0 + 5.0 * j, 80.0 + 3.0 * j + t, 1.0});
        s.frames.push_back(f);
    }
    return s;
}

Dataset small_synthetic(int patients, std::uint64_t seed) {
    SynthConfig cfg;
    cfg.n_patients = patients;
    cfg.seed = seed;
    cfg.frames_static = {20, 30};
    cfg.frames_dynamic = {25, 40};
    return generate_synthetic(cfg);
}

RunConfig fast_config() {
    RunConfig cfg;
    cfg.windows = {16};
    cfg.stride = 8;
    cfg.folds = {1, 2};
    cfg.train.seed = 5;
    return cfg;
}

}  // namespace

TEST_CASE("aggregate_windows") {
    Eigen::VectorXd a(2), b(2), tie(2);
    a << 0.6, 0.4;
    b << 0.2, 0.8;
    tie << 0.5, 0.5;
    const std::vector<Eigen::VectorXd> one{a};
    CHECK(aggregate_windows(one).class_index == 0);
    const std::vector<Eigen::VectorXd> two{a, b};
    const auto g = aggregate_windows(two);
    CHECK(g.mean_probs(0) == doctest::Approx(0.4));
    CHECK(g.mean_probs(1) == doctest::Approx(0.6));
    CHECK(g.class_index == 1);
    const std::vector<Eigen::VectorXd> tied{tie};
    CHECK(aggregate_windows(tied).class_index == 0);
    CHECK_THROWS_AS(aggregate_windows(std::span<const Eigen::VectorXd>{}), std::invalid_argument);
}

TEST_CASE("route_by_length") {
    Dataset ds;
    ds.sequences = {flat_sequence(1, "A1_1", 100), flat_sequence(1, "A1_2", 300), flat_sequence(1, "A1_3", 128)};
    RunConfig cfg;
    cfg.windows = {128, 256};
    cfg.stride = 64;
    const auto prepared = prepare_features(ds, cfg);

    Eigen::VectorXd short_p(2), long_p(2);
    short_p << 1.0, 0.0;
    long_p << 0.0, 1.0;
    const auto space = ClassSpace::multiclass({"A1_1", "A1_2"});
    TrainedModel short_model{"s", space, 128, std::make_shared<ConstantClassifier>(short_p)};
    TrainedModel long_model{"l", space, 256, std::make_shared<ConstantClassifier>(long_p)};
    LengthRouter router{128, &short_model, &long_model};

    CHECK(route_by_length(router, prepared[0]).window == 128);
    CHECK(route_by_length(router, prepared[1]).window == 256);
    CHECK(route_by_length(router, prepared[1]).class_index == 1);
    CHECK(route_by_length(router, prepared[2]).window == 128);

    LengthRouter wide{1000, &short_model, &long_model};
    for (const auto& ps : prepared) CHECK(route_by_length(wide, ps).window == 128);
}

TEST_CASE("train_protocol model sets") {
    const auto ds = small_synthetic(2, 3);
    auto cfg = fast_config();
    const auto prepared = prepare_features(ds, cfg);

    SUBCASE("multiclass") {
        const auto set = train_protocol(prepared, cfg, oracle_trainer(), 1);
        REQUIRE(set.models.size() == 2);
        CHECK(set.find("static", 16).space.ids.size() == 15);
        CHECK(set.find("dynamic", 16).space.ids.size() == 14);
        for (const auto& id : set.find("static", 16).space.ids) CHECK(label_kind(id) == GestureKind::Static);
        for (const auto& id : set.find("dynamic", 16).space.ids) CHECK(label_kind(id) == GestureKind::Dynamic);
    }
    SUBCASE("two window lengths double the models") {
        cfg.windows = {16, 32};
        const auto both = prepare_features(ds, cfg);
        CHECK(train_protocol(both, cfg, oracle_trainer(), 1).models.size() == 4);
    }
    SUBCASE("binary") {
        cfg.protocol = Protocol::MultiClassBinary;
        std::mutex mu;
        std::vector<double> positive_fraction;
        const ModelTrainer spy = [&](const TrainingJob& job) {
            const auto pos = std::count(job.targets.begin(), job.targets.end(), 1);
            std::lock_guard lock(mu);
            positive_fraction.push_back(static_cast<double>(pos) / static_cast<double>(job.targets.size()));
            return oracle_trainer()(job);
        };
        const auto set = train_protocol(prepared, cfg, spy, 1);
        REQUIRE(set.models.size() == 29);
        for (const auto& m : set.models) {
            CHECK(m.space.head == nn::HeadType::Sigmoid);
            CHECK(m.space.ids.size() == 2);
        }
        double mean = 0;
        for (double f : positive_fraction) mean += f / 29.0;
        CHECK(mean == doctest::Approx(1.0 / 29.0).epsilon(0.25));
        for (double f : positive_fraction) CHECK(f < 0.1);
    }
    SUBCASE("rebalancing oversamples positives") {
        cfg.protocol = Protocol::MultiClassBinary;
        cfg.rebalance = true;
        std::vector<double> fractions;
        const ModelTrainer spy = [&](const TrainingJob& job) {
            const auto pos = std::count(job.targets.begin(), job.targets.end(), 1);
            fractions.push_back(static_cast<double>(pos) / static_cast<double>(job.targets.size()));
            return oracle_trainer()(job);
        };
        train_protocol(prepared, cfg, spy, 1);
        for (double f : fractions) CHECK(f > 0.3);
    }
    SUBCASE("missing class") {
        std::vector<PreparedSequence> partial;
        for (const auto& ps : prepared)
            if (ps.sequence->label.id != "S2_3") partial.push_back(ps);
        CHECK_THROWS_AS(train_protocol(partial, cfg, oracle_trainer(), 1), MissingClassError);
    }
}

TEST_CASE("cross_validate with an oracle classifier is perfect") {
    const auto ds = small_synthetic(3, 4);
    for (auto protocol : {Protocol::MultiClass, Protocol::MultiClassBinary}) {
        auto cfg = fast_config();
        cfg.protocol = protocol;
        std::vector<std::pair<std::vector<int>, std::vector<int>>> rounds;
        const auto report = cross_validate(ds, cfg, oracle_trainer(),
                                           [&](int, const std::vector<int>& tr, const std::vector<int>& te) {
                                               rounds.emplace_back(tr, te);
                                           });
        CHECK(report.static_accuracy == 1.0);
        CHECK(report.dynamic_accuracy == 1.0);
        CHECK(report.average_accuracy == 1.0);
        for (const auto& c : report.classes) {
            CHECK(*c.recall == 1.0);
            CHECK(*c.precision == 1.0);
        }
        REQUIRE(rounds.size() == 3);
        std::multiset<int> tested;
        for (const auto& [tr, te] : rounds) {
            for (int p : te) {
                CHECK(std::find(tr.begin(), tr.end(), p) == tr.end());
                tested.insert(p);
            }
        }
        CHECK(tested == std::multiset<int>{1, 2, 3});
        CHECK(report.folds.size() == 3);
    }
}

TEST_CASE("cross_validate needs two folds") {
    const auto ds = small_synthetic(2, 4);
    auto cfg = fast_config();
    cfg.folds = {15, 35};
    CHECK_THROWS_AS(cross_validate(ds, cfg, oracle_trainer()), FoldCoverageError);
}

TEST_CASE("patient 20 is tested exactly once, in fold 2") {
    Dataset ds;
    for (int p : {3, 20, 40})
        for (const auto& l : taxonomy()) ds.sequences.push_back(flat_sequence(p, l.id, 20));
    auto cfg = fast_config();
    cfg.folds = {15, 35};
    int seen = 0;
    cross_validate(ds, cfg, oracle_trainer(), [&](int fold, const std::vector<int>&, const std::vector<int>& te) {
        if (std::find(te.begin(), te.end(), 20) != te.end()) {
            ++seen;
            CHECK(fold == 2);
        }
    });
    CHECK(seen == 1);
}

TEST_CASE("network training is deterministic and threads do not change results") {
    const auto ds = small_synthetic(3, 8);
    auto cfg = fast_config();
    cfg.network.lstm_hidden = 6;
    cfg.train.epochs = 2;
    const auto a = render_report(cross_validate(ds, cfg, network_trainer(cfg)), ReportFormat::Json);
    cfg.threads = 3;
    const auto b = render_report(cross_validate(ds, cfg, network_trainer(cfg)), ReportFormat::Json);
    CHECK(a == b);
}

TEST_CASE("checkpointed classifiers reproduce their predictions") {
    const auto ds = small_synthetic(2, 9);
    auto cfg = fast_config();
    cfg.network.lstm_hidden = 5;
    cfg.train.epochs = 1;
    const auto prepared = prepare_features(ds, cfg);
    const auto set = train_protocol(prepared, cfg, network_trainer(cfg), 2);
    for (const auto& m : set.models) {
        const auto ck = m.classifier->checkpoint();
        REQUIRE(ck.has_value());
        const auto restored = classifier_from_checkpoint(nn::decode_checkpoint(nn::encode_checkpoint(*ck)));
        std::vector<const FeatureWindow*> ws;
        for (const auto& w : prepared.front().at(16)) ws.push_back(&w);
        const auto p = m.classifier->predict(ws), q = restored->predict(ws);
        for (std::size_t i = 0; i < p.size(); ++i) CHECK(p[i] == q[i]);
    }
}

TEST_CASE("feature scaler") {
    FeatureWindow a{Eigen::MatrixXd::Zero(3, 2), 1, {}}, b{Eigen::MatrixXd::Zero(2, 2), 0, {}};
    a.data.bottomRows(2) << 1, 10, 3, 10;
    b.data << 5, 10, 7, 10;
    const FeatureWindow* ws[] = {&a, &b};
    const auto s = FeatureScaler::fit(ws);
    CHECK(s.mean(0) == doctest::Approx(4.0));
    CHECK(s.mean(1) == doctest::Approx(10.0));
    CHECK(s.inv_std(1) == 1.0);
    const auto out = s.apply(a);
    CHECK(out.row(0).isZero(0.0));
    CHECK(out(1, 0) == doctest::Approx(-3.0 / std::sqrt(5.0)));
}

TEST_CASE("derive_seed and parallel_for") {
    CHECK(derive_seed(1, 0) != derive_seed(1, 1));
    CHECK(derive_seed(1, 0) == derive_seed(1, 0));
    std::vector<std::size_t> out(100);
    parallel_for(out.size(), 4, [&](std::size_t i) { out[i] = i * i; });
    for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == i * i);
    CHECK_THROWS_AS(parallel_for(5, 2, [](std::size_t i) { if (i == 3) throw std::runtime_error("x"); }),
                    std::runtime_error);
}
