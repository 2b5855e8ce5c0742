#include "skelgest/preprocess.hpp"

namespace skelgest {

NormMethod norm_method_from_int(int method) {
    if (method < 1 || method > 5)
        throw std::invalid_argument("normalization method must be 1..5, got " + std::to_string(method));
    return static_cast<NormMethod>(method);
}

std::size_t feature_dim(NormMethod method, bool include_confidence) {
    const std::size_t base = (method == NormMethod::M4 || method == NormMethod::M5) ? 4 * kNumJoints
                                                                                  : 2 * kNumJoints;
    return base + (include_confidence ? kNumJoints : 0);
}

GestureSequence savgol_smooth(const GestureSequence& seq, const SavgolSpec& spec) {
    const Eigen::VectorXd coeffs = savgol_coefficients<double>(spec.m, spec.order);
    GestureSequence out = seq;
    const auto n = static_cast<Eigen::Index>(seq.frames.size());
    if (n < spec.m) return out;

    Eigen::VectorXd xs(n), ys(n);
    for (std::size_t j = 0; j < kNumJoints; ++j) {
        for (Eigen::Index t = 0; t < n; ++t) {
            xs(t) = seq.frames[t].joints[j].x;
            ys(t) = seq.frames[t].joints[j].y;
        }
        savgol_filter_inplace(xs, coeffs);
        savgol_filter_inplace(ys, coeffs);
        for (Eigen::Index t = 0; t < n; ++t) {
            out.frames[t].joints[j].x = xs(t);
            out.frames[t].joints[j].y = ys(t);
        }
    }
    return out;
}

std::size_t window_count(std::size_t frames, const WindowSpec& spec) {
    if (frames == 0) return 0;
    if (frames < spec.length) return 1;
    return (frames - spec.length) / spec.stride + 1;
}

std::vector<RawWindow> slide_windows(const GestureSequence& seq, const WindowSpec& spec) {
    if (spec.length < 1 || spec.stride < 1)
        throw std::invalid_argument("window length and stride must be >= 1");
    const std::span<const SkeletalFrame> all(seq.frames);
    const std::size_t t = all.size();
    std::vector<RawWindow> out;
    if (t == 0) return out;
    if (t < spec.length) {
        out.push_back(RawWindow{all, spec.length - t, 0});
        return out;
    }
    const std::size_t n = window_count(t, spec);
    out.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t start = k * spec.stride;
        out.push_back(RawWindow{all.subspan(start, spec.length), 0, start});
    }
    return out;
}

FeatureWindow normalize_window(const RawWindow& window, const FeatureOptions& opts,
                               const JointIndexMap& joint_map) {
    if (window.frames.empty()) throw std::invalid_argument("window has no real frames");
    const auto& first = window.frames.front();
    if (joint_map.chin_index >= first.joints.size()) throw std::invalid_argument("chin index out of range");
    const double cx = first.joints[joint_map.chin_index].x;
    const double cy = first.joints[joint_map.chin_index].y;

    const NormMethod m = opts.method;
    const bool cartesian = m == NormMethod::M1 || m == NormMethod::M4;
    const bool scaled = m == NormMethod::M2 || m == NormMethod::M5;
    const bool polar = m == NormMethod::M3 || m == NormMethod::M4 || m == NormMethod::M5;
    if (scaled && (cx == 0.0 || cy == 0.0))
        throw DegenerateReferenceError("scale-normalized features need a chin with nonzero x and y");

    const std::size_t d = feature_dim(m, opts.include_confidence);
    FeatureWindow fw;
    fw.data = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(window.length()), static_cast<Eigen::Index>(d));
    fw.pad_count = window.pad_count;

    constexpr auto J = static_cast<Eigen::Index>(kNumJoints);
    const Eigen::Index polar_offset = (cartesian || scaled) ? 2 * J : 0;
    const Eigen::Index conf_offset = polar_offset + (polar ? 2 * J : 0);
    for (std::size_t f = 0; f < window.frames.size(); ++f) {
        const auto row = static_cast<Eigen::Index>(window.pad_count + f);
        const auto& joints = window.frames[f].joints;
        if (joints.size() != kNumJoints) throw std::invalid_argument("frame without 14 joints");
        for (Eigen::Index j = 0; j < J; ++j) {
            const auto& jt = joints[static_cast<std::size_t>(j)];
            if (cartesian) {
                fw.data(row, 2 * j) = jt.x - cx;
                fw.data(row, 2 * j + 1) = jt.y - cy;
            } else if (scaled) {
                fw.data(row, 2 * j) = (jt.x - cx) / cx;
                fw.data(row, 2 * j + 1) = (jt.y - cy) / cy;
            }
            if (polar) {
                const auto [e, a] = to_polar<double>(jt.x, jt.y, cx, cy);
                fw.data(row, polar_offset + 2 * j) = e;
                fw.data(row, polar_offset + 2 * j + 1) = a;
            }
            if (opts.include_confidence) fw.data(row, conf_offset + j) = jt.confidence;
        }
    }
    return fw;
}

std::vector<FeatureWindow> extract_features(const GestureSequence& seq, const SavgolSpec& savgol,
                                            const WindowSpec& window, const FeatureOptions& opts,
                                            const JointIndexMap& joint_map) {
    const GestureSequence smoothed = savgol_smooth(seq, savgol);
    std::vector<FeatureWindow> out;
    for (const auto& raw : slide_windows(smoothed, window)) {
        auto fw = normalize_window(raw, opts, joint_map);
        fw.source = WindowSource{seq.patient_id, seq.label.id, raw.start};
        out.push_back(std::move(fw));
    }
    return out;
}

}  // namespace skelgest
