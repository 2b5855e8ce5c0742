#pragma once

#include <vector>

#include "skelgest/nn/common.hpp"

namespace skelgest::nn {

struct TcnSpec {
    std::size_t input_dim = 28;
    std::size_t channels = 64;
    std::size_t kernel = 3;
    std::vector<std::size_t> dilations{1, 2, 4, 8};
    std::size_t n_classes = 2;
    HeadType head = HeadType::Softmax;
};

/// Frames of history visible to the last time step: 1 + (k-1) * sum(d).
inline std::size_t receptive_field(const TcnSpec& spec) {
    std::size_t sum = 0;
    for (auto d : spec.dilations) sum += d;
    return 1 + (spec.kernel - 1) * sum;
}

/// Stack of dilated causal convolutions. Each level computes
///   y_t = tanh(b + sum_j W_j x_{t - j*d}) + R x_t
/// where R is the identity, or a 1x1 projection when the channel count
/// changes. Inputs before t = 0 are zero. The head reads the last time step.
///
/// Per-level layout: W_0..W_{k-1} (each C x C_in) | b (C) | [P (C x C_in) | p (C)],
/// followed by W_out (O x C) | b_out (O).
template <typename Scalar>
class Tcn {
public:
    using Vector = VectorX<Scalar>;
    using Matrix = MatrixX<Scalar>;

    explicit Tcn(TcnSpec spec) : spec_(std::move(spec)) {
        if (spec_.input_dim < 1 || spec_.channels < 1 || spec_.kernel < 1 || spec_.n_classes < 1)
            throw std::invalid_argument("TCN dimensions must be >= 1");
        if (spec_.dilations.empty()) throw std::invalid_argument("TCN needs at least one level");
        for (std::size_t l = 0; l < spec_.dilations.size(); ++l) {
            const auto d = spec_.dilations[l];
            if (d == 0 || (d & (d - 1)) != 0)
                throw std::invalid_argument("TCN dilations must be powers of two");
            if (l > 0 && d <= spec_.dilations[l - 1])
                throw std::invalid_argument("TCN dilations must be strictly increasing");
        }
        if (spec_.head == HeadType::Sigmoid && spec_.n_classes != 2)
            throw std::invalid_argument("sigmoid head is binary (n_classes = 2)");
        std::size_t offset = 0;
        for (std::size_t l = 0; l < spec_.dilations.size(); ++l) {
            Level lv;
            lv.in = static_cast<Eigen::Index>(l == 0 ? spec_.input_dim : spec_.channels);
            lv.out = static_cast<Eigen::Index>(spec_.channels);
            lv.dilation = static_cast<Eigen::Index>(spec_.dilations[l]);
            lv.offset = static_cast<Eigen::Index>(offset);
            lv.projected = lv.in != lv.out;
            offset += static_cast<std::size_t>(level_size(lv));
            levels_.push_back(lv);
        }
        head_offset_ = static_cast<Eigen::Index>(offset);
    }

    const TcnSpec& spec() const { return spec_; }
    Eigen::Index input_dim() const { return static_cast<Eigen::Index>(spec_.input_dim); }
    Eigen::Index outputs() const {
        return static_cast<Eigen::Index>(head_width(spec_.head, spec_.n_classes));
    }

    std::size_t parameter_count() const {
        const auto c = static_cast<Eigen::Index>(spec_.channels);
        return static_cast<std::size_t>(head_offset_ + outputs() * (c + 1));
    }

    /// Per-example level inputs and tanh activations; level_out[l] is the
    /// input of level l+1.
    struct ExampleCache {
        std::vector<Matrix> level_in;   // W x C_in
        std::vector<Matrix> activation; // W x C, tanh(conv)
        std::vector<Matrix> level_out;  // W x C
    };
    struct Cache {
        std::vector<ExampleCache> examples;
    };

    /// Output of every level (W x C each) for one window.
    std::vector<Matrix> level_outputs(const Eigen::Ref<const Vector>& params, const Matrix& window) const {
        const Matrix* one[] = {&window};
        Cache cache;
        forward(params, one, &cache);
        return cache.examples.front().level_out;
    }

    Matrix forward(const Eigen::Ref<const Vector>& params, std::span<const Matrix* const> batch,
                   Cache* cache = nullptr) const {
        check(params, batch);
        const auto c = static_cast<Eigen::Index>(spec_.channels);
        const auto bsz = static_cast<Eigen::Index>(batch.size());
        Eigen::Map<const Matrix> wo(params.data() + head_offset_, outputs(), c);
        Eigen::Map<const Vector> bo(params.data() + head_offset_ + outputs() * c, outputs());

        if (cache) cache->examples.assign(batch.size(), ExampleCache{});
        Matrix last(c, bsz);
        for (Eigen::Index b = 0; b < bsz; ++b) {
            Matrix x = *batch[static_cast<std::size_t>(b)];
            ExampleCache* ec = cache ? &cache->examples[static_cast<std::size_t>(b)] : nullptr;
            for (const auto& lv : levels_) {
                Matrix act = conv(params, lv, x).array().tanh().matrix();
                Matrix y = act;
                if (lv.projected) {
                    Eigen::Map<const Matrix> proj(params.data() + proj_offset(lv), lv.out, lv.in);
                    Eigen::Map<const Vector> pb(params.data() + proj_offset(lv) + lv.out * lv.in, lv.out);
                    y.noalias() += x * proj.transpose();
                    y.rowwise() += pb.transpose();
                } else {
                    y += x;
                }
                if (ec) {
                    ec->level_in.push_back(x);
                    ec->activation.push_back(std::move(act));
                    ec->level_out.push_back(y);
                }
                x = std::move(y);
            }
            last.col(b) = x.row(x.rows() - 1).transpose();
        }
        Matrix logits = wo * last;
        logits.colwise() += bo;
        return logits;
    }

    void backward(const Eigen::Ref<const Vector>& params, const Cache& cache, const Matrix& dlogits,
                  Eigen::Ref<Vector> grad) const {
        const auto c = static_cast<Eigen::Index>(spec_.channels);
        Eigen::Map<const Matrix> wo(params.data() + head_offset_, outputs(), c);
        Eigen::Map<Matrix> gwo(grad.data() + head_offset_, outputs(), c);
        Eigen::Map<Vector> gbo(grad.data() + head_offset_ + outputs() * c, outputs());
        gbo += dlogits.rowwise().sum();

        for (std::size_t b = 0; b < cache.examples.size(); ++b) {
            const auto& ec = cache.examples[b];
            const Matrix& top = ec.level_out.back();
            const auto steps = top.rows();
            gwo.noalias() += dlogits.col(static_cast<Eigen::Index>(b)) * top.row(steps - 1);

            Matrix dy = Matrix::Zero(steps, c);
            dy.row(steps - 1) = (wo.transpose() * dlogits.col(static_cast<Eigen::Index>(b))).transpose();
            for (std::size_t l = levels_.size(); l-- > 0;) {
                const auto& lv = levels_[l];
                const Matrix& x = ec.level_in[l];
                Matrix dx = Matrix::Zero(steps, lv.in);
                if (lv.projected) {
                    Eigen::Map<const Matrix> proj(params.data() + proj_offset(lv), lv.out, lv.in);
                    Eigen::Map<Matrix> gproj(grad.data() + proj_offset(lv), lv.out, lv.in);
                    Eigen::Map<Vector> gpb(grad.data() + proj_offset(lv) + lv.out * lv.in, lv.out);
                    gproj.noalias() += dy.transpose() * x;
                    gpb += dy.colwise().sum().transpose();
                    dx.noalias() += dy * proj;
                } else {
                    dx += dy;
                }
                const Matrix dpre = (dy.array() * (1 - ec.activation[l].array().square())).matrix();
                Eigen::Map<Vector> gbias(grad.data() + bias_offset(lv), lv.out);
                gbias += dpre.colwise().sum().transpose();
                for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(spec_.kernel); ++j) {
                    const Eigen::Index shift = j * lv.dilation;
                    if (shift >= steps) break;
                    const Eigen::Index n = steps - shift;
                    Eigen::Map<const Matrix> w(params.data() + tap_offset(lv, j), lv.out, lv.in);
                    Eigen::Map<Matrix> gw(grad.data() + tap_offset(lv, j), lv.out, lv.in);
                    gw.noalias() += dpre.bottomRows(n).transpose() * x.topRows(n);
                    dx.topRows(n).noalias() += dpre.bottomRows(n) * w;
                }
                dy = std::move(dx);
            }
        }
    }

    template <typename Rng>
    Vector initial_parameters(Rng& rng) const {
        Vector p = Vector::Zero(static_cast<Eigen::Index>(parameter_count()));
        const auto k = static_cast<Eigen::Index>(spec_.kernel);
        for (const auto& lv : levels_) {
            for (Eigen::Index j = 0; j < k; ++j) {
                Eigen::Map<Matrix> w(p.data() + tap_offset(lv, j), lv.out, lv.in);
                xavier_uniform(w, k * lv.in, lv.out, rng);
            }
            if (lv.projected) {
                Eigen::Map<Matrix> proj(p.data() + proj_offset(lv), lv.out, lv.in);
                xavier_uniform(proj, lv.in, lv.out, rng);
            }
        }
        const auto c = static_cast<Eigen::Index>(spec_.channels);
        Eigen::Map<Matrix> wo(p.data() + head_offset_, outputs(), c);
        xavier_uniform(wo, c, outputs(), rng);
        return p;
    }

private:
    struct Level {
        Eigen::Index in = 0, out = 0, dilation = 1, offset = 0;
        bool projected = false;
    };

    Eigen::Index level_size(const Level& lv) const {
        const auto k = static_cast<Eigen::Index>(spec_.kernel);
        return k * lv.out * lv.in + lv.out + (lv.projected ? lv.out * lv.in + lv.out : 0);
    }
    Eigen::Index tap_offset(const Level& lv, Eigen::Index j) const { return lv.offset + j * lv.out * lv.in; }
    Eigen::Index bias_offset(const Level& lv) const {
        return lv.offset + static_cast<Eigen::Index>(spec_.kernel) * lv.out * lv.in;
    }
    Eigen::Index proj_offset(const Level& lv) const { return bias_offset(lv) + lv.out; }

    /// Pre-activation of one level: b + sum_j x_{t - j*d} W_j^T (rows = time).
    Matrix conv(const Eigen::Ref<const Vector>& params, const Level& lv, const Matrix& x) const {
        const auto steps = x.rows();
        Eigen::Map<const Vector> bias(params.data() + bias_offset(lv), lv.out);
        Matrix pre = bias.transpose().replicate(steps, 1);
        for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(spec_.kernel); ++j) {
            const Eigen::Index shift = j * lv.dilation;
            if (shift >= steps) break;
            const Eigen::Index n = steps - shift;
            Eigen::Map<const Matrix> w(params.data() + tap_offset(lv, j), lv.out, lv.in);
            pre.bottomRows(n).noalias() += x.topRows(n) * w.transpose();
        }
        return pre;
    }

    void check(const Eigen::Ref<const Vector>& params, std::span<const Matrix* const> batch) const {
        if (static_cast<std::size_t>(params.size()) != parameter_count())
            throw DimensionError("TCN parameter vector has length " + std::to_string(params.size()) +
                                 ", expected " + std::to_string(parameter_count()));
        if (batch.empty()) throw std::invalid_argument("empty batch");
        for (const Matrix* x : batch) {
            if (x->rows() < 1) throw DimensionError("window has no frames");
            if (x->cols() != input_dim())
                throw DimensionError("window has " + std::to_string(x->cols()) + " features, TCN expects " +
                                     std::to_string(input_dim()));
        }
    }

    TcnSpec spec_;
    std::vector<Level> levels_;
    Eigen::Index head_offset_ = 0;
};

}  // namespace skelgest::nn
