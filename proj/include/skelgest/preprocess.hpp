#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "skelgest/savgol.hpp"
#include "skelgest/skeleton.hpp"

namespace skelgest {

struct SavgolSpec {
    int m = 5;
    int order = 2;
};

enum class NormMethod { M1 = 1, M2 = 2, M3 = 3, M4 = 4, M5 = 5 };

/// Throws std::invalid_argument outside 1..5.
NormMethod norm_method_from_int(int method);

struct WindowSpec {
    std::size_t length = 32;
    std::size_t stride = 1;
};

/// A span of real frames preceded by `pad_count` all-zero frames.
struct RawWindow {
    std::span<const SkeletalFrame> frames;
    std::size_t pad_count = 0;
    std::size_t start = 0;

    std::size_t length() const { return pad_count + frames.size(); }
};

struct WindowSource {
    int patient_id = 0;
    std::string label;
    std::size_t start = 0;
};

/// W x D feature matrix; rows [0, pad_count) are exactly zero.
struct FeatureWindow {
    Eigen::MatrixXd data;
    std::size_t pad_count = 0;
    WindowSource source;
};

class DegenerateReferenceError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

struct FeatureOptions {
    NormMethod method = NormMethod::M3;
    bool include_confidence = false;
};

// ---------------------------------------------------------------------------

/// 28 for M1-M3, 56 for M4/M5; +14 when confidence is included.
std::size_t feature_dim(NormMethod method, bool include_confidence = false);

/// Distance and full-quadrant angle in (-pi, pi] of `p` relative to `ref`.
/// The angle is 0 when the points coincide.
template <typename Scalar>
std::pair<Scalar, Scalar> to_polar(Scalar px, Scalar py, Scalar ref_x, Scalar ref_y) {
    const Scalar dx = px - ref_x;
    const Scalar dy = py - ref_y;
    const Scalar e = std::hypot(dx, dy);
    if (e == Scalar(0)) return {Scalar(0), Scalar(0)};
    return {e, std::atan2(dy, dx)};
}

inline std::pair<double, double> to_polar(const Joint2D& p, const Joint2D& ref) {
    return to_polar<double>(p.x, p.y, ref.x, ref.y);
}

/// Smooths every joint's x and y series; confidence and aux rows untouched.
GestureSequence savgol_smooth(const GestureSequence& seq, const SavgolSpec& spec);

/// Stride-`spec.stride` windows. A sequence shorter than the window yields a
/// single window with leading zero padding.
std::vector<RawWindow> slide_windows(const GestureSequence& seq, const WindowSpec& spec);

std::size_t window_count(std::size_t frames, const WindowSpec& spec);

/// Chin-relative features. The reference is the chin of the first
/// non-padded frame. Throws DegenerateReferenceError for M2/M5 when a chin
/// coordinate is zero.
FeatureWindow normalize_window(const RawWindow& window, const FeatureOptions& opts,
                               const JointIndexMap& joint_map);

/// Smooth, window and normalize one sequence.
std::vector<FeatureWindow> extract_features(const GestureSequence& seq, const SavgolSpec& savgol,
                                            const WindowSpec& window, const FeatureOptions& opts,
                                            const JointIndexMap& joint_map);

}  // namespace skelgest
