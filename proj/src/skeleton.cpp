#include "skelgest/skeleton.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace skelgest {

namespace {

std::vector<GestureLabel> build_taxonomy() {
    using K = GestureKind;
    return {
        {"A1_1", K::Static, "Left hand on left ear"},
        {"A1_2", K::Static, "Left hand on right ear"},
        {"A1_3", K::Static, "Right hand on right ear"},
        {"A1_4", K::Static, "Right hand on left ear"},
        {"A1_5", K::Static, "Index and baby finger on table"},
        {"A2_1", K::Static, "Stick together index and baby fingers"},
        {"A2_2", K::Dynamic, "Hands on table, twist toward body"},
        {"A2_3", K::Static, "Bird"},
        {"A2_4", K::Static, "Diamond"},
        {"A2_5", K::Static, "ring together"},
        {"S1_1", K::Static, "Do a military salute"},
        {"S1_2", K::Static, "Ask for silence"},
        {"S1_3", K::Static, "Show something smells bad"},
        {"S1_4", K::Dynamic, "Tell someone is crazy"},
        {"S1_5", K::Dynamic, "Blow a kiss"},
        {"S2_1", K::Dynamic, "Twiddle your thumbs"},
        {"S2_2", K::Static, "Indicate there is unbearable noise"},
        {"S2_3", K::Static, "Indicate you want to sleep"},
        {"S2_4", K::Static, "Pray"},
        {"P1_1", K::Dynamic, "Comb hair"},
        {"P1_2", K::Dynamic, "Drink a glass of water"},
        {"P1_3", K::Dynamic, "Answer the phone"},
        {"P1_4", K::Dynamic, "Pick up a needle"},
        {"P1_5", K::Dynamic, "Smoke a cigarette"},
        {"P2_1", K::Dynamic, "Unscrew a stopper"},
        {"P2_2", K::Dynamic, "Play piano"},
        {"P2_3", K::Dynamic, "Hammer a nail"},
        {"P2_4", K::Dynamic, "Tear up a paper"},
        {"P2_5", K::Dynamic, "Strike a match"},
    };
}

}  // namespace

JointIndexMap JointIndexMap::default_map() {
    return JointIndexMap{
        {"head", "neck", "r_shoulder", "r_elbow", "r_wrist", "l_shoulder", "l_elbow",
         "l_wrist", "r_hip", "r_knee", "r_ankle", "l_hip", "l_knee", "l_ankle"},
        0};
}

const std::vector<GestureLabel>& taxonomy() {
    static const std::vector<GestureLabel> table = build_taxonomy();
    return table;
}

std::optional<std::size_t> label_index(std::string_view id) {
    const auto& table = taxonomy();
    auto it = std::find_if(table.begin(), table.end(),
                           [&](const GestureLabel& l) { return l.id == id; });
    if (it == table.end()) return std::nullopt;
    return static_cast<std::size_t>(it - table.begin());
}

const GestureLabel& lookup_label(std::string_view id) {
    auto idx = label_index(id);
    if (!idx) throw UnknownLabelError(std::string(id));
    return taxonomy()[*idx];
}

GestureKind label_kind(std::string_view id) { return lookup_label(id).kind; }

ClassCounts class_counts() {
    ClassCounts c;
    for (const auto& l : taxonomy()) {
        (l.kind == GestureKind::Static ? c.n_static : c.n_dynamic) += 1;
    }
    c.n_total = taxonomy().size();
    return c;
}

std::vector<std::string> labels_of_kind(GestureKind kind) {
    std::vector<std::string> out;
    for (const auto& l : taxonomy())
        if (l.kind == kind) out.push_back(l.id);
    return out;
}

std::string_view to_string(GestureKind kind) {
    return kind == GestureKind::Static ? "static" : "dynamic";
}

ValidationResult validate_sequence(const GestureSequence& seq) {
    ValidationResult r;
    auto add = [&](const std::string& s) { r.violations.push_back(s); };

    if (seq.patient_id < 1) add("patient_id must be >= 1, got " + std::to_string(seq.patient_id));
    if (!label_index(seq.label.id)) {
        add("unknown gesture id '" + seq.label.id + "'");
    } else if (label_kind(seq.label.id) != seq.label.kind) {
        add("gesture '" + seq.label.id + "' has the wrong static/dynamic kind");
    }
    if (seq.frames.empty()) add("sequence has no frames");

    const bool first_aux = !seq.frames.empty() && seq.frames.front().has_aux();
    for (std::size_t f = 0; f < seq.frames.size(); ++f) {
        const auto& frame = seq.frames[f];
        const std::string where = "frame " + std::to_string(f);
        if (frame.joints.size() != kNumJoints) {
            add(where + ": expected 14 joints, got " + std::to_string(frame.joints.size()));
        }
        for (std::size_t j = 0; j < frame.joints.size(); ++j) {
            const auto& jt = frame.joints[j];
            if (!std::isfinite(jt.x) || !std::isfinite(jt.y)) {
                add(where + ", joint " + std::to_string(j) + ": non-finite coordinate");
            }
            if (!(jt.confidence >= 0.0 && jt.confidence <= 1.0)) {
                std::ostringstream os;
                os << where << ", joint " << j << ": confidence " << jt.confidence
                   << " outside [0,1]";
                add(os.str());
            }
        }
        if (frame.aux4.has_value() != frame.aux5.has_value()) {
            add(where + ": aux rows must be both present or both absent");
        } else if (frame.has_aux()) {
            if (frame.aux4->size() != kNumJoints || frame.aux5->size() != kNumJoints)
                add(where + ": aux rows must have 14 values");
        }
        if (frame.has_aux() != first_aux) add(where + ": aux-row presence differs from frame 0");
    }
    return r;
}

ValidationResult validate_joint_map(const JointIndexMap& map) {
    ValidationResult r;
    if (map.names.size() != kNumJoints)
        r.violations.push_back("joint map must name 14 joints, got " +
                               std::to_string(map.names.size()));
    if (map.chin_index >= kNumJoints)
        r.violations.push_back("chin_index " + std::to_string(map.chin_index) +
                               " out of range");
    std::set<std::string> unique(map.names.begin(), map.names.end());
    if (unique.size() != map.names.size()) r.violations.push_back("joint names are not unique");
    return r;
}

}  // namespace skelgest
