#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "skelgest/ingest.hpp"
#include "skelgest/metrics.hpp"
#include "skelgest/nn/checkpoint.hpp"
#include "skelgest/nn/model.hpp"
#include "skelgest/preprocess.hpp"

namespace skelgest {

enum class Protocol { MultiClass, MultiClassBinary };

std::string_view to_string(Protocol p);
Protocol protocol_from_string(std::string_view s);

struct NetworkConfig {
    nn::NetKind kind = nn::NetKind::Lstm;
    std::size_t lstm_hidden = 128;
    std::size_t tcn_channels = 64;
    std::size_t tcn_kernel = 3;
    std::vector<std::size_t> tcn_dilations{1, 2, 4, 8};
};

struct RunConfig {
    Protocol protocol = Protocol::MultiClass;
    FeatureOptions features;
    SavgolSpec savgol;
    /// One window length, or two (short, long) for length-routed models.
    std::vector<std::size_t> windows{32};
    std::size_t stride = 1;
    /// Sequences with T <= threshold use the short model; 0 means "short window length".
    std::size_t route_threshold = 0;
    NetworkConfig network;
    nn::TrainConfig train;
    bool standardize = true;
    bool rebalance = false;
    FoldBoundaries folds;
    std::size_t threads = 1;

    std::size_t effective_threshold() const { return route_threshold ? route_threshold : windows.front(); }
};

void validate(const RunConfig& cfg);

class MissingClassError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class FoldCoverageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class CheckpointMismatchError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------

/// Output classes of one model. Binary spaces are {"not <id>", "<id>"} with
/// index 1 the positive class.
struct ClassSpace {
    std::vector<std::string> ids;
    nn::HeadType head = nn::HeadType::Softmax;
    std::string positive;

    static ClassSpace multiclass(std::vector<std::string> ids);
    static ClassSpace binary(const std::string& positive_id);

    /// Target index of a gesture label in this space.
    int target_of(const std::string& label) const;
};

/// A trained window-level classifier. Probabilities cover the class space
/// (two entries, negative then positive, for binary spaces).
class WindowClassifier {
public:
    virtual ~WindowClassifier() = default;
    virtual std::vector<Eigen::VectorXd> predict(std::span<const FeatureWindow* const> windows) const = 0;
    virtual std::optional<nn::Checkpoint> checkpoint() const { return std::nullopt; }
};

struct TrainingJob {
    std::string name;
    ClassSpace space;
    std::size_t window = 0;
    std::vector<const FeatureWindow*> windows;
    std::vector<int> targets;
    std::uint64_t seed = 0;
};

using ModelTrainer = std::function<std::unique_ptr<WindowClassifier>(const TrainingJob&)>;

/// Trains the configured LSTM/TCN on each job.
ModelTrainer network_trainer(const RunConfig& cfg);

/// Emits the one-hot distribution of each window's true label. Used to check
/// that splitting, aggregation and scoring lose nothing.
ModelTrainer oracle_trainer();

/// Per-feature z-scoring fitted on the non-padded rows of the training windows.
struct FeatureScaler {
    Eigen::VectorXd mean;
    Eigen::VectorXd inv_std;

    static FeatureScaler fit(std::span<const FeatureWindow* const> windows);
    Eigen::MatrixXd apply(const FeatureWindow& w) const;
};

std::unique_ptr<WindowClassifier> classifier_from_checkpoint(const nn::Checkpoint& ckpt);

// ---------------------------------------------------------------------------

using WindowsByLength = std::map<std::size_t, std::vector<FeatureWindow>>;

/// Features of one sequence for every configured window length. Copies
/// share the feature storage.
struct PreparedSequence {
    const GestureSequence* sequence = nullptr;
    std::shared_ptr<const WindowsByLength> windows;

    const std::vector<FeatureWindow>& at(std::size_t window) const;

    std::size_t frames() const { return sequence->frames.size(); }
};

std::vector<PreparedSequence> prepare_features(const Dataset& ds, const RunConfig& cfg);

struct TrainedModel {
    std::string name;
    ClassSpace space;
    std::size_t window = 0;
    std::shared_ptr<const WindowClassifier> classifier;
};

struct ModelSet {
    Protocol protocol = Protocol::MultiClass;
    std::vector<TrainedModel> models;
    std::size_t route_threshold = 0;

    /// Model for a group ("static", "dynamic", or a gesture id for binary sets)
    /// at the given window length.
    const TrainedModel& find(const std::string& group, std::size_t window) const;
    std::vector<std::size_t> window_lengths() const;
};

struct GesturePrediction {
    Eigen::VectorXd mean_probs;
    int class_index = 0;
    std::size_t window = 0;
};

/// Mean of the window probability vectors, then argmax; ties go to the
/// lowest class index.
GesturePrediction aggregate_windows(std::span<const Eigen::VectorXd> per_window);

struct LengthRouter {
    std::size_t threshold = 128;
    const TrainedModel* short_model = nullptr;
    const TrainedModel* long_model = nullptr;  // may be null when only one length is trained
};

/// T <= threshold -> short model, otherwise the long model.
GesturePrediction route_by_length(const LengthRouter& router, const PreparedSequence& seq);

/// MultiClass: one 15-way static and one 14-way dynamic model per window
/// length. MultiClassBinary: 29 one-vs-rest models per window length.
/// Throws MissingClassError if a needed class has no training sequence.
ModelSet train_protocol(std::span<const PreparedSequence> train, const RunConfig& cfg,
                        const ModelTrainer& trainer, std::uint64_t seed);

/// Gesture-level evaluation of a trained set on `test`.
EvaluationReport evaluate(const ModelSet& models, std::span<const PreparedSequence> test);

/// Called once per round with the train and test patient ids.
using FoldObserver = std::function<void(int fold, const std::vector<int>& train_patients,
                                        const std::vector<int>& test_patients)>;

/// Patient-based cross-validation over the folds present in the data.
/// Throws FoldCoverageError when fewer than two folds are populated.
EvaluationReport cross_validate(const Dataset& ds, const RunConfig& cfg, const ModelTrainer& trainer,
                                const FoldObserver& observer = {});

/// Runs fn(0..n-1) on up to `threads` workers; results must be written by index.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn);

/// Deterministic 64-bit mix of a base seed and a stream index.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace skelgest
