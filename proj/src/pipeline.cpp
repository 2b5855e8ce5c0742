#include "skelgest/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <set>
#include <thread>

namespace skelgest {

std::string_view to_string(Protocol p) { return p == Protocol::MultiClass ? "multiclass" : "binary"; }

Protocol protocol_from_string(std::string_view s) {
    if (s == "multiclass") return Protocol::MultiClass;
    if (s == "binary") return Protocol::MultiClassBinary;
    throw std::invalid_argument("protocol must be 'multiclass' or 'binary', got '" + std::string(s) + "'");
}

void validate(const RunConfig& cfg) {
    if (cfg.windows.empty() || cfg.windows.size() > 2)
        throw std::invalid_argument("need one window length or a (short, long) pair");
    for (auto w : cfg.windows)
        if (w < 1) throw std::invalid_argument("window length must be >= 1");
    if (cfg.windows.size() == 2) {
        if (!(cfg.windows[0] < cfg.windows[1]))
            throw std::invalid_argument("window pair must be (short, long) with short < long");
        const auto th = cfg.effective_threshold();
        if (th < cfg.windows[0] || th > cfg.windows[1])
            throw std::invalid_argument("route threshold must lie between the short and long window");
    }
    if (cfg.stride < 1) throw std::invalid_argument("stride must be >= 1");
    (void)savgol_coefficients<double>(cfg.savgol.m, cfg.savgol.order);
    nn::validate(cfg.train);
    if (!(cfg.folds.first < cfg.folds.second)) throw std::invalid_argument("fold boundaries must increase");
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn) {
    threads = std::max<std::size_t>(1, std::min(threads, n));
    if (threads == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(n);
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

// ---------------------------------------------------------------------------

ClassSpace ClassSpace::multiclass(std::vector<std::string> ids) {
    return ClassSpace{std::move(ids), nn::HeadType::Softmax, {}};
}

ClassSpace ClassSpace::binary(const std::string& positive_id) {
    return ClassSpace{{"not " + positive_id, positive_id}, nn::HeadType::Sigmoid, positive_id};
}

int ClassSpace::target_of(const std::string& label) const {
    if (head == nn::HeadType::Sigmoid) return label == positive ? 1 : 0;
    auto it = std::find(ids.begin(), ids.end(), label);
    if (it == ids.end()) throw std::out_of_range("label '" + label + "' is not in this class space");
    return static_cast<int>(it - ids.begin());
}

FeatureScaler FeatureScaler::fit(std::span<const FeatureWindow* const> windows) {
    if (windows.empty()) throw std::invalid_argument("cannot fit a scaler on no windows");
    const auto d = windows.front()->data.cols();
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(d), sq = Eigen::VectorXd::Zero(d);
    double n = 0;
    for (const auto* w : windows) {
        const auto real = w->data.bottomRows(w->data.rows() - static_cast<Eigen::Index>(w->pad_count));
        sum += real.colwise().sum().transpose();
        sq += real.array().square().colwise().sum().matrix().transpose();
        n += static_cast<double>(real.rows());
    }
    FeatureScaler s;
    s.mean = sum / n;
    const Eigen::VectorXd var = (sq / n - s.mean.cwiseProduct(s.mean)).cwiseMax(0.0);
    s.inv_std = var.unaryExpr([](double v) { return v > 1e-12 ? 1.0 / std::sqrt(v) : 1.0; });
    return s;
}

Eigen::MatrixXd FeatureScaler::apply(const FeatureWindow& w) const {
    Eigen::MatrixXd out = w.data;
    const auto pad = static_cast<Eigen::Index>(w.pad_count);
    auto real = out.bottomRows(out.rows() - pad);
    real.rowwise() -= mean.transpose();
    real.array().rowwise() *= inv_std.transpose().array();
    return out;
}

namespace {

/// Maps a binary model's P(positive) to (P(negative), P(positive)).
Eigen::VectorXd as_class_probs(const Eigen::VectorXd& p, nn::HeadType head) {
    if (head == nn::HeadType::Softmax) return p;
    Eigen::VectorXd out(2);
    out << 1.0 - p(0), p(0);
    return out;
}

class NetworkClassifier final : public WindowClassifier {
public:
    NetworkClassifier(nn::ModelParameters model, std::optional<FeatureScaler> scaler, nlohmann::json meta,
                      std::uint64_t seed)
        : model_(std::move(model)), scaler_(std::move(scaler)), meta_(std::move(meta)), seed_(seed) {}

    std::vector<Eigen::VectorXd> predict(std::span<const FeatureWindow* const> windows) const override {
        std::vector<Eigen::VectorXd> out;
        out.reserve(windows.size());
        constexpr std::size_t kChunk = 128;
        std::vector<Eigen::MatrixXd> scaled;
        std::vector<const Eigen::MatrixXd*> ptrs;
        for (std::size_t start = 0; start < windows.size(); start += kChunk) {
            const std::size_t end = std::min(windows.size(), start + kChunk);
            scaled.clear();
            ptrs.clear();
            for (std::size_t i = start; i < end; ++i)
                scaled.push_back(scaler_ ? scaler_->apply(*windows[i]) : windows[i]->data);
            for (const auto& m : scaled) ptrs.push_back(&m);
            const Eigen::MatrixXd probs = nn::predict_batch(model_, ptrs);
            for (Eigen::Index c = 0; c < probs.cols(); ++c)
                out.push_back(as_class_probs(probs.col(c), model_.spec.head()));
        }
        return out;
    }

    std::optional<nn::Checkpoint> checkpoint() const override {
        nn::Checkpoint ck{model_, seed_, 0, meta_};
        if (scaler_) {
            ck.extra["scaler"] = {
                {"mean", std::vector<double>(scaler_->mean.data(), scaler_->mean.data() + scaler_->mean.size())},
                {"inv_std",
                 std::vector<double>(scaler_->inv_std.data(), scaler_->inv_std.data() + scaler_->inv_std.size())}};
        }
        return ck;
    }

private:
    nn::ModelParameters model_;
    std::optional<FeatureScaler> scaler_;
    nlohmann::json meta_;
    std::uint64_t seed_;
};

class OracleClassifier final : public WindowClassifier {
public:
    explicit OracleClassifier(ClassSpace space) : space_(std::move(space)) {}

    std::vector<Eigen::VectorXd> predict(std::span<const FeatureWindow* const> windows) const override {
        std::vector<Eigen::VectorXd> out;
        for (const auto* w : windows) {
            Eigen::VectorXd p = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(space_.ids.size()));
            p(space_.target_of(w->source.label)) = 1.0;
            out.push_back(std::move(p));
        }
        return out;
    }

private:
    ClassSpace space_;
};

nlohmann::json job_metadata(const TrainingJob& job, const RunConfig& cfg) {
    return {{"name", job.name},
            {"class_ids", job.space.ids},
            {"positive", job.space.positive},
            {"window", job.window},
            {"protocol", std::string(to_string(cfg.protocol))},
            {"method", static_cast<int>(cfg.features.method)},
            {"include_confidence", cfg.features.include_confidence},
            {"stride", cfg.stride},
            {"savgol_m", cfg.savgol.m},
            {"savgol_order", cfg.savgol.order}};
}

nn::ModelSpec model_spec_for(const RunConfig& cfg, const ClassSpace& space) {
    const std::size_t d = feature_dim(cfg.features.method, cfg.features.include_confidence);
    const std::size_t k = space.head == nn::HeadType::Softmax ? space.ids.size() : 2;
    if (cfg.network.kind == nn::NetKind::Lstm) return nn::ModelSpec{nn::LstmSpec{d, cfg.network.lstm_hidden, k, space.head}};
    return nn::ModelSpec{nn::TcnSpec{d, cfg.network.tcn_channels, cfg.network.tcn_kernel, cfg.network.tcn_dilations, k,
                                     space.head}};
}

}  // namespace

ModelTrainer network_trainer(const RunConfig& cfg) {
    return [cfg](const TrainingJob& job) -> std::unique_ptr<WindowClassifier> {
        if (job.windows.empty()) throw MissingClassError("no training windows for model " + job.name);
        std::optional<FeatureScaler> scaler;
        if (cfg.standardize) scaler = FeatureScaler::fit(job.windows);

        std::vector<Eigen::MatrixXd> inputs;
        inputs.reserve(job.windows.size());
        for (const auto* w : job.windows) inputs.push_back(scaler ? scaler->apply(*w) : w->data);
        nn::TrainingSet data;
        for (const auto& m : inputs) data.windows.push_back(&m);
        data.targets = job.targets;

        nn::ModelParameters model = nn::initialize(model_spec_for(cfg, job.space), derive_seed(job.seed, 1));
        nn::TrainConfig tc = cfg.train;
        tc.seed = derive_seed(job.seed, 2);
        nn::train(model, data, tc);
        return std::make_unique<NetworkClassifier>(std::move(model), std::move(scaler), job_metadata(job, cfg),
                                                   job.seed);
    };
}

ModelTrainer oracle_trainer() {
    return [](const TrainingJob& job) -> std::unique_ptr<WindowClassifier> {
        return std::make_unique<OracleClassifier>(job.space);
    };
}

std::unique_ptr<WindowClassifier> classifier_from_checkpoint(const nn::Checkpoint& ckpt) {
    std::optional<FeatureScaler> scaler;
    if (ckpt.extra.contains("scaler")) {
        const auto mean = ckpt.extra["scaler"].at("mean").get<std::vector<double>>();
        const auto inv = ckpt.extra["scaler"].at("inv_std").get<std::vector<double>>();
        FeatureScaler s;
        s.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size()));
        s.inv_std = Eigen::Map<const Eigen::VectorXd>(inv.data(), static_cast<Eigen::Index>(inv.size()));
        if (s.mean.size() != static_cast<Eigen::Index>(ckpt.model.spec.input_dim()) || s.inv_std.size() != s.mean.size())
            throw nn::CheckpointError("scaler size does not match the model input");
        scaler = std::move(s);
    }
    nlohmann::json meta = ckpt.extra;
    meta.erase("scaler");
    return std::make_unique<NetworkClassifier>(ckpt.model, std::move(scaler), std::move(meta), ckpt.seed);
}

// ---------------------------------------------------------------------------

std::vector<PreparedSequence> prepare_features(const Dataset& ds, const RunConfig& cfg) {
    std::vector<PreparedSequence> out(ds.sequences.size());
    parallel_for(ds.sequences.size(), cfg.threads, [&](std::size_t i) {
        out[i].sequence = &ds.sequences[i];
        auto windows = std::make_shared<WindowsByLength>();
        for (auto w : cfg.windows) {
            (*windows)[w] =
                extract_features(ds.sequences[i], cfg.savgol, WindowSpec{w, cfg.stride}, cfg.features, ds.joint_map);
        }
        out[i].windows = std::move(windows);
    });
    return out;
}

const std::vector<FeatureWindow>& PreparedSequence::at(std::size_t window) const {
    auto it = windows ? windows->find(window) : WindowsByLength::const_iterator{};
    if (!windows || it == windows->end())
        throw std::invalid_argument("sequence was not windowed at length " + std::to_string(window));
    return it->second;
}

const TrainedModel& ModelSet::find(const std::string& group, std::size_t window) const {
    for (const auto& m : models) {
        const std::string g = m.space.head == nn::HeadType::Sigmoid
                                  ? m.space.positive
                                  : (m.space.ids.size() && label_kind(m.space.ids.front()) == GestureKind::Static
                                         ? "static"
                                         : "dynamic");
        if (g == group && m.window == window) return m;
    }
    throw std::out_of_range("no model for group '" + group + "' at window " + std::to_string(window));
}

std::vector<std::size_t> ModelSet::window_lengths() const {
    std::set<std::size_t> s;
    for (const auto& m : models) s.insert(m.window);
    return {s.begin(), s.end()};
}

GesturePrediction aggregate_windows(std::span<const Eigen::VectorXd> per_window) {
    if (per_window.empty()) throw std::invalid_argument("aggregate_windows needs at least one window");
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(per_window.front().size());
    for (const auto& p : per_window) {
        if (p.size() != mean.size()) throw std::invalid_argument("window probability vectors differ in size");
        mean += p;
    }
    mean /= static_cast<double>(per_window.size());
    int best = 0;
    for (Eigen::Index k = 1; k < mean.size(); ++k)
        if (mean(k) > mean(best)) best = static_cast<int>(k);
    return GesturePrediction{mean, best, 0};
}

namespace {

GesturePrediction predict_with(const TrainedModel& model, const PreparedSequence& seq) {
    std::vector<const FeatureWindow*> ptrs;
    for (const auto& w : seq.at(model.window)) ptrs.push_back(&w);
    const auto probs = model.classifier->predict(ptrs);
    auto pred = aggregate_windows(probs);
    pred.window = model.window;
    return pred;
}

}  // namespace

GesturePrediction route_by_length(const LengthRouter& router, const PreparedSequence& seq) {
    if (!router.short_model) throw std::invalid_argument("router has no short model");
    const bool use_short = seq.frames() <= router.threshold || router.long_model == nullptr;
    return predict_with(use_short ? *router.short_model : *router.long_model, seq);
}

namespace {

LengthRouter router_for(const ModelSet& set, const std::string& group) {
    const auto lengths = set.window_lengths();
    LengthRouter r;
    r.threshold = set.route_threshold ? set.route_threshold : lengths.front();
    r.short_model = &set.find(group, lengths.front());
    if (lengths.size() > 1) r.long_model = &set.find(group, lengths.back());
    return r;
}

struct Outcome {
    std::vector<int> pred_static, true_static, pred_dynamic, true_dynamic;
    std::vector<BinaryCounts> binary;  // indexed like taxonomy()
};

void merge(Outcome& into, const Outcome& from) {
    auto append = [](std::vector<int>& a, const std::vector<int>& b) { a.insert(a.end(), b.begin(), b.end()); };
    append(into.pred_static, from.pred_static);
    append(into.true_static, from.true_static);
    append(into.pred_dynamic, from.pred_dynamic);
    append(into.true_dynamic, from.true_dynamic);
    if (into.binary.empty()) into.binary.assign(from.binary.size(), BinaryCounts{});
    for (std::size_t k = 0; k < from.binary.size(); ++k) {
        into.binary[k].tp += from.binary[k].tp;
        into.binary[k].fp += from.binary[k].fp;
        into.binary[k].tn += from.binary[k].tn;
        into.binary[k].fn += from.binary[k].fn;
    }
}

Outcome run_evaluation(const ModelSet& set, std::span<const PreparedSequence> test) {
    Outcome out;
    const auto& tax = taxonomy();
    if (set.protocol == Protocol::MultiClass) {
        const auto statics = labels_of_kind(GestureKind::Static);
        const auto dynamics = labels_of_kind(GestureKind::Dynamic);
        const LengthRouter rs = router_for(set, "static");
        const LengthRouter rd = router_for(set, "dynamic");
        for (const auto& ps : test) {
            const auto& label = ps.sequence->label;
            if (label.kind == GestureKind::Static) {
                const auto pred = route_by_length(rs, ps);
                out.pred_static.push_back(pred.class_index);
                out.true_static.push_back(rs.short_model->space.target_of(label.id));
            } else {
                const auto pred = route_by_length(rd, ps);
                out.pred_dynamic.push_back(pred.class_index);
                out.true_dynamic.push_back(rd.short_model->space.target_of(label.id));
            }
        }
        return out;
    }
    out.binary.assign(tax.size(), BinaryCounts{});
    for (std::size_t k = 0; k < tax.size(); ++k) {
        const LengthRouter r = router_for(set, tax[k].id);
        for (const auto& ps : test) {
            const bool positive = route_by_length(r, ps).class_index == 1;
            const bool actual = ps.sequence->label.id == tax[k].id;
            auto& c = out.binary[k];
            if (positive && actual) ++c.tp;
            else if (positive) ++c.fp;
            else if (actual) ++c.fn;
            else ++c.tn;
        }
    }
    return out;
}

struct Summary {
    double static_acc = 0.0, dynamic_acc = 0.0;
    std::size_t n = 0;
};

Summary summarize(Protocol protocol, const Outcome& o) {
    Summary s;
    if (protocol == Protocol::MultiClass) {
        auto acc = [](const std::vector<int>& p, const std::vector<int>& t) {
            if (t.empty()) return 0.0;
            std::size_t hit = 0;
            for (std::size_t i = 0; i < t.size(); ++i) hit += p[i] == t[i];
            return static_cast<double>(hit) / static_cast<double>(t.size());
        };
        s.static_acc = acc(o.pred_static, o.true_static);
        s.dynamic_acc = acc(o.pred_dynamic, o.true_dynamic);
        s.n = o.true_static.size() + o.true_dynamic.size();
        return s;
    }
    const auto& tax = taxonomy();
    double ssum = 0, dsum = 0;
    std::size_t sn = 0, dn = 0;
    for (std::size_t k = 0; k < tax.size(); ++k) {
        const auto a = o.binary[k].accuracy();
        if (!a) continue;
        if (tax[k].kind == GestureKind::Static) ssum += *a, ++sn;
        else dsum += *a, ++dn;
    }
    s.static_acc = sn ? ssum / static_cast<double>(sn) : 0.0;
    s.dynamic_acc = dn ? dsum / static_cast<double>(dn) : 0.0;
    s.n = tax.empty() ? 0 : static_cast<std::size_t>(o.binary.front().total());
    return s;
}

EvaluationReport build_report(Protocol protocol, const Outcome& o) {
    EvaluationReport r;
    r.protocol = std::string(to_string(protocol));
    const Summary s = summarize(protocol, o);
    r.static_accuracy = s.static_acc;
    r.dynamic_accuracy = s.dynamic_acc;
    r.average_accuracy = average_static_dynamic(s.static_acc, s.dynamic_acc);

    if (protocol == Protocol::MultiClass) {
        r.confusion_static = confusion(o.pred_static, o.true_static, labels_of_kind(GestureKind::Static));
        r.confusion_dynamic = confusion(o.pred_dynamic, o.true_dynamic, labels_of_kind(GestureKind::Dynamic));
        for (const auto* cm : {&*r.confusion_static, &*r.confusion_dynamic}) {
            for (std::size_t k = 0; k < cm->size(); ++k) {
                ClassMetrics c;
                c.id = cm->class_ids[k];
                c.kind = std::string(to_string(label_kind(c.id)));
                c.support = cm->support(k);
                c.recall = cm->recall(k);
                c.precision = cm->precision(k);
                r.classes.push_back(std::move(c));
            }
        }
        return r;
    }
    const auto summary = binary_suite_metrics(o.binary);
    r.mean_binary_accuracy = summary.mean_accuracy;
    const auto& tax = taxonomy();
    for (std::size_t k = 0; k < tax.size(); ++k) {
        ClassMetrics c;
        c.id = tax[k].id;
        c.kind = std::string(to_string(tax[k].kind));
        c.support = o.binary[k].tp + o.binary[k].fn;
        c.recall = summary.recall[k];
        c.precision = summary.precision[k];
        c.binary = o.binary[k];
        r.classes.push_back(std::move(c));
    }
    return r;
}

}  // namespace

EvaluationReport evaluate(const ModelSet& models, std::span<const PreparedSequence> test) {
    return build_report(models.protocol, run_evaluation(models, test));
}

ModelSet train_protocol(std::span<const PreparedSequence> train, const RunConfig& cfg, const ModelTrainer& trainer,
                        std::uint64_t seed) {
    validate(cfg);
    if (train.empty()) throw MissingClassError("empty training split");
    std::set<std::string> present;
    for (const auto& ps : train) present.insert(ps.sequence->label.id);

    struct Group {
        std::string name;
        ClassSpace space;
        GestureKind kind;
        bool filter_kind;
    };
    std::vector<Group> groups;
    if (cfg.protocol == Protocol::MultiClass) {
        for (auto kind : {GestureKind::Static, GestureKind::Dynamic}) {
            const auto ids = labels_of_kind(kind);
            for (const auto& id : ids)
                if (!present.count(id)) throw MissingClassError("class " + id + " has no training sequence");
            groups.push_back({std::string(to_string(kind)), ClassSpace::multiclass(ids), kind, true});
        }
    } else {
        for (const auto& l : taxonomy()) {
            if (!present.count(l.id)) throw MissingClassError("class " + l.id + " has no training sequence");
            groups.push_back({"binary_" + l.id, ClassSpace::binary(l.id), l.kind, false});
        }
    }

    std::vector<TrainingJob> jobs;
    for (const auto& g : groups) {
        for (auto w : cfg.windows) {
            TrainingJob job;
            job.name = g.name + "_w" + std::to_string(w);
            job.space = g.space;
            job.window = w;
            job.seed = derive_seed(seed, jobs.size());
            std::vector<const FeatureWindow*> positives;
            for (const auto& ps : train) {
                const auto& label = ps.sequence->label;
                if (g.filter_kind && label.kind != g.kind) continue;
                const int target = job.space.target_of(label.id);
                for (const auto& fw : ps.at(w)) {
                    job.windows.push_back(&fw);
                    job.targets.push_back(target);
                    if (target == 1 && !g.filter_kind) positives.push_back(&fw);
                }
            }
            if (cfg.rebalance && !g.filter_kind && !positives.empty()) {
                const std::size_t negatives = job.windows.size() - positives.size();
                const std::size_t copies = negatives / positives.size();
                for (std::size_t c = 1; c < copies; ++c) {
                    for (const auto* fw : positives) {
                        job.windows.push_back(fw);
                        job.targets.push_back(1);
                    }
                }
            }
            jobs.push_back(std::move(job));
        }
    }

    ModelSet set;
    set.protocol = cfg.protocol;
    set.route_threshold = cfg.effective_threshold();
    set.models.resize(jobs.size());
    parallel_for(jobs.size(), cfg.threads, [&](std::size_t i) {
        set.models[i] = TrainedModel{jobs[i].name, jobs[i].space, jobs[i].window, trainer(jobs[i])};
    });
    return set;
}

EvaluationReport cross_validate(const Dataset& ds, const RunConfig& cfg, const ModelTrainer& trainer,
                                const FoldObserver& observer) {
    validate(cfg);
    const FoldSplit split = assign_folds(ds, cfg.folds);
    std::set<int> populated;
    for (const auto& [p, f] : split.fold_of_patient) populated.insert(f);
    if (populated.size() < 2)
        throw FoldCoverageError("cross-validation needs at least two populated folds, found " +
                                std::to_string(populated.size()));

    const auto prepared = prepare_features(ds, cfg);
    Outcome pooled;
    EvaluationReport report;
    std::vector<FoldResult> folds;
    for (int fold : populated) {
        std::vector<PreparedSequence> train, test;
        std::set<int> train_patients, test_patients;
        for (const auto& ps : prepared) {
            const int p = ps.sequence->patient_id;
            if (split.fold_of(p) == fold) {
                test.push_back(ps);
                test_patients.insert(p);
            } else {
                train.push_back(ps);
                train_patients.insert(p);
            }
        }
        for (int p : test_patients)
            if (train_patients.count(p))
                throw std::logic_error("patient " + std::to_string(p) + " straddles train and test");
        if (observer)
            observer(fold, {train_patients.begin(), train_patients.end()}, {test_patients.begin(), test_patients.end()});

        const ModelSet models = train_protocol(train, cfg, trainer, derive_seed(cfg.train.seed, 1000 + fold));
        const Outcome outcome = run_evaluation(models, test);
        const Summary s = summarize(cfg.protocol, outcome);
        FoldResult fr;
        fr.fold = fold;
        fr.test_patients.assign(test_patients.begin(), test_patients.end());
        fr.n_test_gestures = test.size();
        fr.static_accuracy = s.static_acc;
        fr.dynamic_accuracy = s.dynamic_acc;
        fr.average_accuracy = average_static_dynamic(s.static_acc, s.dynamic_acc);
        folds.push_back(std::move(fr));
        merge(pooled, outcome);
    }
    report = build_report(cfg.protocol, pooled);
    report.folds = std::move(folds);
    return report;
}

}  // namespace skelgest
