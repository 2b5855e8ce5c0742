#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <span>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "skelgest/savgol.hpp"

namespace skelgest::nn {

using skelgest::MatrixX;
using skelgest::VectorX;

enum class HeadType { Softmax, Sigmoid };

/// Rows of the logit vector: K for softmax, 1 for a binary sigmoid head.
inline std::size_t head_width(HeadType head, std::size_t n_classes) {
    return head == HeadType::Softmax ? n_classes : 1;
}

class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

template <typename Derived>
auto sigmoid(const Eigen::MatrixBase<Derived>& z) {
    using Scalar = typename Derived::Scalar;
    return z.unaryExpr([](Scalar v) { return Scalar(1) / (Scalar(1) + std::exp(-v)); });
}

/// Column-wise softmax with max subtraction.
template <typename Scalar>
MatrixX<Scalar> softmax_columns(const MatrixX<Scalar>& logits) {
    MatrixX<Scalar> out(logits.rows(), logits.cols());
    for (Eigen::Index c = 0; c < logits.cols(); ++c) {
        const Scalar mx = logits.col(c).maxCoeff();
        out.col(c) = (logits.col(c).array() - mx).exp().matrix();
        out.col(c) /= out.col(c).sum();
    }
    return out;
}

/// Probabilities from logits for the given head: softmax per column, or an
/// elementwise logistic for the 1-row sigmoid head.
template <typename Scalar>
MatrixX<Scalar> head_probabilities(const MatrixX<Scalar>& logits, HeadType head) {
    if (head == HeadType::Softmax) return softmax_columns(logits);
    return sigmoid(logits);
}

inline constexpr double kProbabilityFloor = 1e-12;

/// Negative log-likelihood of one column of probabilities. For the sigmoid
/// head `target` is 0 or 1.
template <typename Scalar>
Scalar nll(const Eigen::Ref<const VectorX<Scalar>>& probs, int target, HeadType head) {
    const Scalar floor = static_cast<Scalar>(kProbabilityFloor);
    if (head == HeadType::Softmax) return -std::log(std::max(probs(target), floor));
    const Scalar p = probs(0);
    return target ? -std::log(std::max(p, floor)) : -std::log(std::max(Scalar(1) - p, floor));
}

/// Mean batch loss and its gradient with respect to the logits.
template <typename Scalar>
Scalar loss_and_logit_gradient(const MatrixX<Scalar>& logits, std::span<const int> targets,
                               HeadType head, MatrixX<Scalar>& dlogits) {
    const auto batch = logits.cols();
    const MatrixX<Scalar> probs = head_probabilities(logits, head);
    dlogits = probs;
    Scalar total = 0;
    for (Eigen::Index b = 0; b < batch; ++b) {
        const int y = targets[static_cast<std::size_t>(b)];
        total += nll<Scalar>(probs.col(b), y, head);
        if (head == HeadType::Softmax) dlogits(y, b) -= Scalar(1);
        else dlogits(0, b) -= static_cast<Scalar>(y);
    }
    dlogits /= static_cast<Scalar>(batch);
    return total / static_cast<Scalar>(batch);
}

inline void check_targets(std::span<const int> targets, HeadType head, std::size_t n_classes) {
    for (int t : targets) {
        const int upper = head == HeadType::Softmax ? static_cast<int>(n_classes) : 2;
        if (t < 0 || t >= upper) throw std::out_of_range("target " + std::to_string(t) + " out of range");
    }
}

/// Fills `block` with U(-l, l), l = sqrt(6 / (fan_in + fan_out)).
template <typename Derived, typename Rng>
void xavier_uniform(Eigen::MatrixBase<Derived> const& block, Eigen::Index fan_in, Eigen::Index fan_out,
                    Rng& rng) {
    using Scalar = typename Derived::Scalar;
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    auto& out = const_cast<Eigen::MatrixBase<Derived>&>(block);
    for (Eigen::Index c = 0; c < out.cols(); ++c)
        for (Eigen::Index r = 0; r < out.rows(); ++r) out(r, c) = static_cast<Scalar>(dist(rng));
}

}  // namespace skelgest::nn
