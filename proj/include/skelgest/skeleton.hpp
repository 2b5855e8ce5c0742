#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace skelgest {

inline constexpr std::size_t kNumJoints = 14;

struct Joint2D {
    double x = 0.0;
    double y = 0.0;
    double confidence = 1.0;
};

/// One time step of detector output. `aux4`/`aux5` hold the trailing two rows
/// of the raw 5x14 block; they are kept for ingest fidelity and never reach a model.
struct SkeletalFrame {
    std::vector<Joint2D> joints;
    std::optional<std::vector<double>> aux4;
    std::optional<std::vector<double>> aux5;

    bool has_aux() const { return aux4.has_value() && aux5.has_value(); }
};

enum class GestureKind { Static, Dynamic };

struct GestureLabel {
    std::string id;
    GestureKind kind = GestureKind::Static;
    std::string description;
};

struct GestureSequence {
    int patient_id = 1;
    GestureLabel label;
    bool correct = true;
    std::vector<SkeletalFrame> frames;
};

struct JointIndexMap {
    std::vector<std::string> names;
    std::size_t chin_index = 0;

    /// Head-to-ankle order with the chin at column 0.
    static JointIndexMap default_map();
};

class UnknownLabelError : public std::invalid_argument {
public:
    explicit UnknownLabelError(const std::string& id)
        : std::invalid_argument("unknown gesture id '" + id + "'") {}
};

// ---------------------------------------------------------------------------
// Taxonomy

/// The 29 gestures in canonical order (A1_1 .. P2_5).
const std::vector<GestureLabel>& taxonomy();

/// Throws UnknownLabelError.
const GestureLabel& lookup_label(std::string_view id);

GestureKind label_kind(std::string_view id);

/// Index of `id` in taxonomy(), or nullopt.
std::optional<std::size_t> label_index(std::string_view id);

struct ClassCounts {
    std::size_t n_static = 0;
    std::size_t n_dynamic = 0;
    std::size_t n_total = 0;
};

ClassCounts class_counts();

/// Gesture ids of one kind, in taxonomy order.
std::vector<std::string> labels_of_kind(GestureKind kind);

std::string_view to_string(GestureKind kind);

// ---------------------------------------------------------------------------
// Validation

struct ValidationResult {
    std::vector<std::string> violations;

    bool ok() const { return violations.empty(); }
    explicit operator bool() const { return ok(); }
};

ValidationResult validate_sequence(const GestureSequence& seq);

ValidationResult validate_joint_map(const JointIndexMap& map);

}  // namespace skelgest
