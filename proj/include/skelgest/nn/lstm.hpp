#pragma once

#include <vector>

#include "skelgest/nn/common.hpp"

namespace skelgest::nn {

struct LstmSpec {
    std::size_t input_dim = 28;
    std::size_t hidden_dim = 128;
    std::size_t n_classes = 2;
    HeadType head = HeadType::Softmax;
};

/// Single-layer LSTM over a W x D window, zero initial state, with an affine
/// head on the final hidden state.
///
/// Flat parameter layout (column-major blocks, gate order i, f, g, o):
///   W_x (4H x D) | W_h (4H x H) | b (4H) | W_out (O x H) | b_out (O)
template <typename Scalar>
class Lstm {
public:
    using Vector = VectorX<Scalar>;
    using Matrix = MatrixX<Scalar>;
    using ConstMap = Eigen::Map<const Matrix>;
    using Map = Eigen::Map<Matrix>;

    explicit Lstm(LstmSpec spec) : spec_(spec) {
        if (spec.input_dim < 1 || spec.hidden_dim < 1 || spec.n_classes < 1)
            throw std::invalid_argument("LSTM dimensions must be >= 1");
        if (spec.head == HeadType::Sigmoid && spec.n_classes != 2)
            throw std::invalid_argument("sigmoid head is binary (n_classes = 2)");
    }

    const LstmSpec& spec() const { return spec_; }
    Eigen::Index input_dim() const { return static_cast<Eigen::Index>(spec_.input_dim); }
    Eigen::Index hidden() const { return static_cast<Eigen::Index>(spec_.hidden_dim); }
    Eigen::Index outputs() const {
        return static_cast<Eigen::Index>(head_width(spec_.head, spec_.n_classes));
    }

    std::size_t parameter_count() const {
        const auto d = input_dim(), h = hidden(), o = outputs();
        return static_cast<std::size_t>(4 * h * (d + h + 1) + o * (h + 1));
    }

    /// Per-timestep activations kept for backpropagation.
    struct Cache {
        std::vector<Matrix> inputs;  // D x B per step
        std::vector<Matrix> gates;   // 4H x B per step, post-activation
        std::vector<Matrix> cells;   // H x B, index t+1 holds c_t; cells[0] = 0
        std::vector<Matrix> hiddens; // H x B, same indexing
    };

    /// Logits (O x B) for a batch of equally long windows.
    Matrix forward(const Eigen::Ref<const Vector>& params, std::span<const Matrix* const> batch,
                   Cache* cache = nullptr) const {
        check(params, batch);
        const auto h = hidden();
        const auto bsz = static_cast<Eigen::Index>(batch.size());
        const auto steps = batch.front()->rows();
        const auto v = views(params);

        Matrix hcur = Matrix::Zero(h, bsz), ccur = Matrix::Zero(h, bsz);
        if (cache) {
            cache->inputs.assign(static_cast<std::size_t>(steps), Matrix());
            cache->gates.assign(static_cast<std::size_t>(steps), Matrix());
            cache->cells.assign(static_cast<std::size_t>(steps + 1), ccur);
            cache->hiddens.assign(static_cast<std::size_t>(steps + 1), hcur);
        }
        Matrix xt(input_dim(), bsz), z(4 * h, bsz);
        for (Eigen::Index t = 0; t < steps; ++t) {
            for (Eigen::Index b = 0; b < bsz; ++b) xt.col(b) = batch[static_cast<std::size_t>(b)]->row(t).transpose();
            z.noalias() = v.wx * xt;
            z.noalias() += v.wh * hcur;
            z.colwise() += v.b;
            z.topRows(2 * h) = sigmoid(z.topRows(2 * h));
            z.middleRows(2 * h, h) = z.middleRows(2 * h, h).array().tanh().matrix();
            z.bottomRows(h) = sigmoid(z.bottomRows(h));

            ccur = z.middleRows(h, h).cwiseProduct(ccur) + z.topRows(h).cwiseProduct(z.middleRows(2 * h, h));
            hcur = z.bottomRows(h).cwiseProduct(ccur.array().tanh().matrix());
            if (cache) {
                const auto i = static_cast<std::size_t>(t);
                cache->inputs[i] = xt;
                cache->gates[i] = z;
                cache->cells[i + 1] = ccur;
                cache->hiddens[i + 1] = hcur;
            }
        }
        Matrix logits = v.wo * hcur;
        logits.colwise() += v.bo;
        return logits;
    }

    /// Accumulates d(loss)/d(params) into `grad` given d(loss)/d(logits).
    void backward(const Eigen::Ref<const Vector>& params, const Cache& cache, const Matrix& dlogits,
                  Eigen::Ref<Vector> grad) const {
        const auto h = hidden();
        const auto v = views(params);
        auto g = grad_views(grad);
        const auto steps = static_cast<Eigen::Index>(cache.inputs.size());

        const Matrix& hlast = cache.hiddens.back();
        g.wo.noalias() += dlogits * hlast.transpose();
        g.bo += dlogits.rowwise().sum();

        Matrix dh = v.wo.transpose() * dlogits;
        Matrix dc = Matrix::Zero(h, dlogits.cols());
        Matrix dz(4 * h, dlogits.cols());
        for (Eigen::Index t = steps - 1; t >= 0; --t) {
            const auto i = static_cast<std::size_t>(t);
            const Matrix& z = cache.gates[i];
            const auto gi = z.topRows(h).array();
            const auto gf = z.middleRows(h, h).array();
            const auto gg = z.middleRows(2 * h, h).array();
            const auto go = z.bottomRows(h).array();
            const Matrix tc = cache.cells[i + 1].array().tanh().matrix();

            dc.array() += dh.array() * go * (1 - tc.array().square());
            dz.bottomRows(h) = (dh.array() * tc.array() * go * (1 - go)).matrix();
            dz.topRows(h) = (dc.array() * gg * gi * (1 - gi)).matrix();
            dz.middleRows(h, h) = (dc.array() * cache.cells[i].array() * gf * (1 - gf)).matrix();
            dz.middleRows(2 * h, h) = (dc.array() * gi * (1 - gg.square())).matrix();

            g.wx.noalias() += dz * cache.inputs[i].transpose();
            g.wh.noalias() += dz * cache.hiddens[i].transpose();
            g.b += dz.rowwise().sum();

            dh.noalias() = v.wh.transpose() * dz;
            dc = (dc.array() * gf).matrix();
        }
    }

    template <typename Rng>
    Vector initial_parameters(Rng& rng) const {
        Vector p = Vector::Zero(static_cast<Eigen::Index>(parameter_count()));
        auto g = grad_views(p);
        const auto d = input_dim(), h = hidden(), o = outputs();
        for (Eigen::Index k = 0; k < 4; ++k) {
            xavier_uniform(g.wx.middleRows(k * h, h), d, h, rng);
            xavier_uniform(g.wh.middleRows(k * h, h), h, h, rng);
        }
        g.b.segment(h, h).setOnes();  // forget-gate bias
        xavier_uniform(g.wo, h, o, rng);
        return p;
    }

private:
    struct ConstViews {
        ConstMap wx, wh;
        Eigen::Map<const Vector> b;
        ConstMap wo;
        Eigen::Map<const Vector> bo;
    };
    struct Views {
        Map wx, wh;
        Eigen::Map<Vector> b;
        Map wo;
        Eigen::Map<Vector> bo;
    };

    ConstViews views(const Eigen::Ref<const Vector>& p) const {
        const auto d = input_dim(), h = hidden(), o = outputs();
        const Scalar* ptr = p.data();
        ConstMap wx(ptr, 4 * h, d);
        ptr += 4 * h * d;
        ConstMap wh(ptr, 4 * h, h);
        ptr += 4 * h * h;
        Eigen::Map<const Vector> b(ptr, 4 * h);
        ptr += 4 * h;
        ConstMap wo(ptr, o, h);
        ptr += o * h;
        Eigen::Map<const Vector> bo(ptr, o);
        return {wx, wh, b, wo, bo};
    }

    Views grad_views(Eigen::Ref<Vector> p) const {
        const auto d = input_dim(), h = hidden(), o = outputs();
        Scalar* ptr = p.data();
        Map wx(ptr, 4 * h, d);
        ptr += 4 * h * d;
        Map wh(ptr, 4 * h, h);
        ptr += 4 * h * h;
        Eigen::Map<Vector> b(ptr, 4 * h);
        ptr += 4 * h;
        Map wo(ptr, o, h);
        ptr += o * h;
        Eigen::Map<Vector> bo(ptr, o);
        return {wx, wh, b, wo, bo};
    }

    void check(const Eigen::Ref<const Vector>& params, std::span<const Matrix* const> batch) const {
        if (static_cast<std::size_t>(params.size()) != parameter_count())
            throw DimensionError("LSTM parameter vector has length " + std::to_string(params.size()) +
                                 ", expected " + std::to_string(parameter_count()));
        if (batch.empty()) throw std::invalid_argument("empty batch");
        const auto steps = batch.front()->rows();
        if (steps < 1) throw DimensionError("window has no frames");
        for (const Matrix* x : batch) {
            if (x->cols() != input_dim())
                throw DimensionError("window has " + std::to_string(x->cols()) + " features, LSTM expects " +
                                     std::to_string(input_dim()));
            if (x->rows() != steps) throw DimensionError("windows in one batch must share a length");
        }
    }

    LstmSpec spec_;
};

}  // namespace skelgest::nn
