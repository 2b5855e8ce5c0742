#include "skelgest/nn/model.hpp"

#include <numeric>

namespace skelgest::nn {

std::string_view to_string(NetKind kind) { return kind == NetKind::Lstm ? "lstm" : "tcn"; }

NetKind net_kind_from_string(std::string_view s) {
    if (s == "lstm") return NetKind::Lstm;
    if (s == "tcn") return NetKind::Tcn;
    throw std::invalid_argument("network must be 'lstm' or 'tcn', got '" + std::string(s) + "'");
}

HeadType ModelSpec::head() const {
    return std::visit([](const auto& s) { return s.head; }, arch);
}
std::size_t ModelSpec::n_classes() const {
    return std::visit([](const auto& s) { return s.n_classes; }, arch);
}
std::size_t ModelSpec::input_dim() const {
    return std::visit([](const auto& s) { return s.input_dim; }, arch);
}

namespace {

template <typename Fn>
decltype(auto) with_net(const ModelSpec& spec, Fn&& fn) {
    if (const auto* l = std::get_if<LstmSpec>(&spec.arch)) return fn(Lstm<double>(*l));
    return fn(Tcn<double>(std::get<TcnSpec>(spec.arch)));
}

}  // namespace

std::size_t parameter_count(const ModelSpec& spec) {
    return with_net(spec, [](const auto& net) { return net.parameter_count(); });
}

ModelParameters initialize(const ModelSpec& spec, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return ModelParameters{spec, with_net(spec, [&](const auto& net) { return net.initial_parameters(rng); })};
}

Eigen::MatrixXd predict_batch(const ModelParameters& model, std::span<const Eigen::MatrixXd* const> windows) {
    const HeadType head = model.spec.head();
    return with_net(model.spec, [&](const auto& net) {
        return head_probabilities<double>(net.forward(model.values, windows), head);
    });
}

Eigen::VectorXd predict(const ModelParameters& model, const Eigen::MatrixXd& window) {
    const Eigen::MatrixXd* one[] = {&window};
    return predict_batch(model, one).col(0);
}

Eigen::VectorXd lstm_forward(const LstmSpec& spec, const Eigen::VectorXd& params, const Eigen::MatrixXd& window) {
    return predict(ModelParameters{ModelSpec{spec}, params}, window);
}

Eigen::VectorXd tcn_forward(const TcnSpec& spec, const Eigen::VectorXd& params, const Eigen::MatrixXd& window) {
    return predict(ModelParameters{ModelSpec{spec}, params}, window);
}

double loss(const Eigen::VectorXd& probs, int target, HeadType head) {
    return nll<double>(probs, target, head);
}

double loss_and_gradient(const ModelSpec& spec, const Eigen::VectorXd& params, const Batch& batch,
                         Eigen::VectorXd* grad) {
    if (batch.windows.empty()) throw std::invalid_argument("empty batch");
    if (batch.windows.size() != batch.targets.size())
        throw std::invalid_argument("batch windows and targets differ in length");
    check_targets(batch.targets, spec.head(), spec.n_classes());
    return with_net(spec, [&](const auto& net) {
        using Net = std::decay_t<decltype(net)>;
        typename Net::Cache cache;
        const Eigen::MatrixXd logits = net.forward(params, batch.windows, grad ? &cache : nullptr);
        Eigen::MatrixXd dlogits;
        const double l = loss_and_logit_gradient<double>(logits, batch.targets, spec.head(), dlogits);
        if (grad) {
            grad->setZero(params.size());
            net.backward(params, cache, dlogits, *grad);
        }
        return l;
    });
}

// ---------------------------------------------------------------------------

void validate(const TrainConfig& cfg) {
    if (!(cfg.learning_rate >= 0.0)) throw std::invalid_argument("learning rate must be >= 0");
    if (cfg.epochs < 1) throw std::invalid_argument("epochs must be >= 1");
    if (cfg.batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
}

Optimizer::Optimizer(const TrainConfig& cfg, Eigen::Index n_params)
    : cfg_(cfg), m_(Eigen::VectorXd::Zero(n_params)), v_(Eigen::VectorXd::Zero(n_params)) {}

void Optimizer::step(Eigen::VectorXd& params, Eigen::VectorXd grad) {
    if (grad.size() != params.size()) throw std::invalid_argument("gradient/parameter size mismatch");
    if (cfg_.clip_norm > 0.0) {
        const double norm = grad.norm();
        if (norm > cfg_.clip_norm) grad *= cfg_.clip_norm / norm;
    }
    ++t_;
    if (cfg_.optimizer == OptimizerKind::Sgd) {
        params -= cfg_.learning_rate * grad;
        return;
    }
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    m_ = beta1 * m_ + (1 - beta1) * grad;
    v_ = beta2 * v_ + (1 - beta2) * grad.cwiseProduct(grad);
    const double c1 = 1 - std::pow(beta1, static_cast<double>(t_));
    const double c2 = 1 - std::pow(beta2, static_cast<double>(t_));
    params.array() -= cfg_.learning_rate * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps);
}

double train_step(ModelParameters& model, const Batch& batch, Optimizer& opt) {
    Eigen::VectorXd grad;
    const double l = loss_and_gradient(model.spec, model.values, batch, &grad);
    if (!std::isfinite(l) || !grad.allFinite()) throw DivergedError("training diverged: non-finite loss");
    opt.step(model.values, std::move(grad));
    return l;
}

TrainResult train(ModelParameters& model, const TrainingSet& data, const TrainConfig& cfg) {
    validate(cfg);
    if (data.windows.empty()) throw std::invalid_argument("empty training set");
    if (data.windows.size() != data.targets.size())
        throw std::invalid_argument("training windows and targets differ in length");

    Optimizer opt(cfg, model.values.size());
    std::mt19937_64 rng(cfg.seed);
    std::vector<std::size_t> order(data.windows.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    TrainResult result;
    std::vector<const Eigen::MatrixXd*> xs;
    std::vector<int> ys;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double total = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(order.size(), start + cfg.batch_size);
            xs.clear();
            ys.clear();
            for (std::size_t i = start; i < end; ++i) {
                xs.push_back(data.windows[order[i]]);
                ys.push_back(data.targets[order[i]]);
            }
            total += train_step(model, Batch{xs, ys}, opt);
            ++batches;
        }
        result.epoch_loss.push_back(total / static_cast<double>(batches));
    }
    return result;
}

// ---------------------------------------------------------------------------

GradCheckReport compare_gradients(const Eigen::VectorXd& analytic, const Eigen::VectorXd& numeric,
                                  double tolerance) {
    if (analytic.size() != numeric.size()) throw std::invalid_argument("gradient sizes differ");
    GradCheckReport r;
    r.n_params = static_cast<std::size_t>(analytic.size());
    for (Eigen::Index i = 0; i < analytic.size(); ++i) {
        const double a = analytic(i), n = numeric(i);
        const double denom = std::max({std::abs(a), std::abs(n), 1e-8});
        const double rel = std::abs(a - n) / denom;
        if (!(rel <= r.max_relative_error)) {
            r.max_relative_error = rel;
            r.worst_index = static_cast<std::size_t>(i);
        }
    }
    r.pass = r.max_relative_error < tolerance;
    return r;
}

Eigen::VectorXd numerical_gradient(const ModelSpec& spec, const Eigen::VectorXd& params, const Batch& batch,
                                   double eps) {
    Eigen::VectorXd g(params.size());
    Eigen::VectorXd p = params;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        const double orig = p(i);
        p(i) = orig + eps;
        const double up = loss_and_gradient(spec, p, batch, nullptr);
        p(i) = orig - eps;
        const double down = loss_and_gradient(spec, p, batch, nullptr);
        p(i) = orig;
        g(i) = (up - down) / (2 * eps);
    }
    return g;
}

GradCheckReport grad_check(const ModelSpec& spec, std::uint64_t seed, double tolerance,
                           const GradCheckOptions& opts) {
    if (!(tolerance >= 0.0)) throw std::invalid_argument("tolerance must be >= 0");
    ModelParameters model = initialize(spec, seed);
    std::mt19937_64 rng(seed ^ 0x9E3779B97F4A7C15ULL);
    std::normal_distribution<double> normal(0.0, 1.0);
    // Random biases too, so no component sits at an exact zero gradient.
    for (Eigen::Index i = 0; i < model.values.size(); ++i) model.values(i) += 0.3 * normal(rng);

    const auto d = static_cast<Eigen::Index>(spec.input_dim());
    std::vector<Eigen::MatrixXd> inputs(opts.batch);
    std::vector<const Eigen::MatrixXd*> ptrs;
    std::vector<int> targets;
    const int n_targets = spec.head() == HeadType::Softmax ? static_cast<int>(spec.n_classes()) : 2;
    std::uniform_int_distribution<int> pick(0, n_targets - 1);
    for (auto& x : inputs) {
        x.resize(static_cast<Eigen::Index>(opts.window), d);
        for (Eigen::Index c = 0; c < x.cols(); ++c)
            for (Eigen::Index r = 0; r < x.rows(); ++r) x(r, c) = normal(rng);
        ptrs.push_back(&x);
        targets.push_back(pick(rng));
    }
    const Batch batch{ptrs, targets};
    Eigen::VectorXd analytic = backward(spec, model.values, batch);
    if (opts.corrupt) opts.corrupt(analytic);
    const Eigen::VectorXd numeric = numerical_gradient(spec, model.values, batch, opts.eps);
    return compare_gradients(analytic, numeric, tolerance);
}

}  // namespace skelgest::nn
