#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "skelgest/nn/lstm.hpp"
#include "skelgest/nn/tcn.hpp"

namespace skelgest::nn {

enum class NetKind { Lstm, Tcn };

std::string_view to_string(NetKind kind);
NetKind net_kind_from_string(std::string_view s);

/// Architecture descriptor: exactly one of the two specs is active.
struct ModelSpec {
    std::variant<LstmSpec, TcnSpec> arch;

    NetKind kind() const { return arch.index() == 0 ? NetKind::Lstm : NetKind::Tcn; }
    HeadType head() const;
    std::size_t n_classes() const;
    std::size_t input_dim() const;
};

std::size_t parameter_count(const ModelSpec& spec);

struct ModelParameters {
    ModelSpec spec;
    Eigen::VectorXd values;
};

/// Xavier-uniform weights, zero biases (LSTM forget bias 1).
ModelParameters initialize(const ModelSpec& spec, std::uint64_t seed);

/// Class probabilities for one W x D window: K-vector for softmax heads,
/// a 1-vector P(positive) for sigmoid heads.
Eigen::VectorXd predict(const ModelParameters& model, const Eigen::MatrixXd& window);

/// Probabilities for a batch of equally long windows, one column each.
Eigen::MatrixXd predict_batch(const ModelParameters& model, std::span<const Eigen::MatrixXd* const> windows);

Eigen::VectorXd lstm_forward(const LstmSpec& spec, const Eigen::VectorXd& params, const Eigen::MatrixXd& window);
Eigen::VectorXd tcn_forward(const TcnSpec& spec, const Eigen::VectorXd& params, const Eigen::MatrixXd& window);

/// Negative log-likelihood of one probability vector. Probabilities are
/// floored at 1e-12 before the log.
double loss(const Eigen::VectorXd& probs, int target, HeadType head);

/// A batch view: windows of equal length and their targets (class index, or
/// 0/1 for sigmoid heads).
struct Batch {
    std::span<const Eigen::MatrixXd* const> windows;
    std::span<const int> targets;
};

/// Mean batch loss; when `grad` is non-null it receives the exact gradient
/// of that mean with respect to every parameter.
double loss_and_gradient(const ModelSpec& spec, const Eigen::VectorXd& params, const Batch& batch,
                         Eigen::VectorXd* grad);

inline Eigen::VectorXd backward(const ModelSpec& spec, const Eigen::VectorXd& params, const Batch& batch) {
    Eigen::VectorXd g;
    loss_and_gradient(spec, params, batch, &g);
    return g;
}

// ---------------------------------------------------------------------------
// Optimization

enum class OptimizerKind { Sgd, Adam };

struct TrainConfig {
    double learning_rate = 1e-3;
    std::size_t epochs = 50;
    std::size_t batch_size = 32;
    std::uint64_t seed = 0;
    OptimizerKind optimizer = OptimizerKind::Adam;
    double clip_norm = 5.0;
};

void validate(const TrainConfig& cfg);

class DivergedError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// SGD or Adam (beta1 0.9, beta2 0.999, eps 1e-8) with global-norm clipping.
/// A clip norm <= 0 disables clipping.
class Optimizer {
public:
    Optimizer(const TrainConfig& cfg, Eigen::Index n_params);

    void step(Eigen::VectorXd& params, Eigen::VectorXd grad);

    std::size_t steps_taken() const { return t_; }

private:
    TrainConfig cfg_;
    Eigen::VectorXd m_, v_;
    std::size_t t_ = 0;
};

/// One optimizer update on `batch`; returns the pre-update mean loss.
/// Throws DivergedError if the loss or gradient is not finite.
double train_step(ModelParameters& model, const Batch& batch, Optimizer& opt);

struct TrainingSet {
    std::vector<const Eigen::MatrixXd*> windows;
    std::vector<int> targets;
};

struct TrainResult {
    std::vector<double> epoch_loss;  // mean batch loss per epoch
};

/// Mini-batch training with a seeded per-epoch shuffle. All windows must
/// share one length.
TrainResult train(ModelParameters& model, const TrainingSet& data, const TrainConfig& cfg);

// ---------------------------------------------------------------------------
// Gradient checking

struct GradCheckReport {
    double max_relative_error = 0.0;
    std::size_t worst_index = 0;
    std::size_t n_params = 0;
    bool pass = false;
};

/// Relative error |a - n| / max(|a|, |n|, 1e-8) per component.
GradCheckReport compare_gradients(const Eigen::VectorXd& analytic, const Eigen::VectorXd& numeric,
                                  double tolerance);

/// Central differences of the mean batch loss.
Eigen::VectorXd numerical_gradient(const ModelSpec& spec, const Eigen::VectorXd& params, const Batch& batch,
                                   double eps = 1e-5);

struct GradCheckOptions {
    std::size_t window = 6;
    std::size_t batch = 2;
    double eps = 1e-5;
    /// Applied to the analytic gradient before comparison (for sanity tests).
    std::function<void(Eigen::VectorXd&)> corrupt;
};

/// Random model, random inputs and targets, analytic vs central differences.
GradCheckReport grad_check(const ModelSpec& spec, std::uint64_t seed, double tolerance,
                           const GradCheckOptions& opts = {});

}  // namespace skelgest::nn
