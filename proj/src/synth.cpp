#include <cmath>
#include <numbers>
#include <random>

#include "skelgest/ingest.hpp"

namespace skelgest {

namespace {

struct Offset {
    double dx = 0.0;
    double dy = 0.0;
};

// Seated subject facing the camera, image coordinates (y grows downward).
// Order follows JointIndexMap::default_map().
constexpr std::array<Offset, kNumJoints> kNeutralPose{{
    {320, 120},  // head / chin
    {320, 160},  // neck
    {270, 175},  // r_shoulder
    {255, 240},  // r_elbow
    {265, 300},  // r_wrist
    {370, 175},  // l_shoulder
    {385, 240},  // l_elbow
    {375, 300},  // l_wrist
    {290, 320},  // r_hip
    {285, 400},  // r_knee
    {285, 470},  // r_ankle
    {350, 320},  // l_hip
    {355, 400},  // l_knee
    {355, 470},  // l_ankle
}};

constexpr std::size_t kRElbow = 3, kRWrist = 4, kLElbow = 6, kLWrist = 7;

/// Per-class arm displacement: wrists move by the given offsets, elbows by half.
struct ArmPose {
    Offset right;
    Offset left;
};

struct Motion {
    bool right = true;
    bool left = false;
    double amplitude = 20.0;
    double cycles_per_frame = 0.05;
    double direction = 0.0;
    double phase = 0.0;
};

struct ClassPrototype {
    ArmPose pose;
    std::optional<Motion> motion;
};

double pose_distance(const ArmPose& a, const ArmPose& b) {
    return std::hypot(a.right.dx - b.right.dx, a.right.dy - b.right.dy, 0.0) +
           std::hypot(a.left.dx - b.left.dx, a.left.dy - b.left.dy, 0.0);
}

std::vector<ClassPrototype> make_prototypes(std::uint64_t seed) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      0x5EEDu, 0xC1A55u};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    constexpr double pi = std::numbers::pi;

    auto random_offset = [&](double radius) {
        const double r = radius * std::sqrt(unit(rng));
        const double t = 2.0 * pi * unit(rng);
        return Offset{r * std::cos(t), r * std::sin(t)};
    };

    const auto& tax = taxonomy();
    std::vector<ClassPrototype> protos(tax.size());
    std::vector<ArmPose> static_poses;
    std::size_t dynamic_rank = 0;
    for (std::size_t c = 0; c < tax.size(); ++c) {
        if (tax[c].kind == GestureKind::Static) {
            // Rejection sampling keeps static poses pairwise well apart.
            ArmPose pose;
            for (int attempt = 0; attempt < 1000; ++attempt) {
                pose = {random_offset(90.0), random_offset(90.0)};
                bool far = true;
                for (const auto& other : static_poses) far = far && pose_distance(pose, other) >= 30.0;
                if (far) break;
            }
            static_poses.push_back(pose);
            protos[c].pose = pose;
        } else {
            protos[c].pose = {random_offset(30.0), random_offset(30.0)};
            Motion m;
            const auto which = dynamic_rank % 3;
            m.right = which != 1;
            m.left = which != 0;
            m.amplitude = 18.0 + 22.0 * unit(rng);
            m.cycles_per_frame = 0.035 + 0.0075 * static_cast<double>(dynamic_rank);
            m.direction = pi * unit(rng);
            m.phase = 2.0 * pi * unit(rng);
            protos[c].motion = m;
            ++dynamic_rank;
        }
    }
    return protos;
}

}  // namespace

void validate(const SynthConfig& cfg) {
    if (cfg.n_patients < 1) throw std::invalid_argument("synth: n_patients must be >= 1");
    auto check_range = [](std::pair<int, int> r, const char* what) {
        if (r.first < 1 || r.second < r.first)
            throw std::invalid_argument(std::string("synth: invalid frame range for ") + what);
    };
    check_range(cfg.frames_static, "static gestures");
    check_range(cfg.frames_dynamic, "dynamic gestures");
    if (!(cfg.noise_sigma >= 0.0)) throw std::invalid_argument("synth: noise_sigma must be >= 0");
    if (!(cfg.camera_offset_range >= 0.0) || cfg.camera_offset_range >= 100.0)
        throw std::invalid_argument("synth: camera_offset_range must be in [0, 100)");
}

Dataset generate_synthetic(const SynthConfig& cfg) {
    validate(cfg);
    const auto protos = make_prototypes(cfg.seed);
    const auto& tax = taxonomy();
    constexpr double two_pi = 2.0 * std::numbers::pi;

    Dataset ds;
    ds.provenance = Provenance::Synthetic;
    ds.joint_map = JointIndexMap::default_map();

    for (int p = 1; p <= cfg.n_patients; ++p) {
        std::seed_seq pseq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                           static_cast<std::uint32_t>(p), 0xCA3Eu};
        std::mt19937_64 prng(pseq);
        std::uniform_real_distribution<double> offset(-cfg.camera_offset_range, cfg.camera_offset_range);
        const Offset camera{offset(prng), offset(prng)};

        for (std::size_t c = 0; c < tax.size(); ++c) {
            std::seed_seq sseq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                               static_cast<std::uint32_t>(p), static_cast<std::uint32_t>(c), 0x5E0u};
            std::mt19937_64 rng(sseq);
            std::normal_distribution<double> normal(0.0, 1.0);
            std::uniform_real_distribution<double> unit(0.0, 1.0);

            const auto& proto = protos[c];
            const auto range = proto.motion ? cfg.frames_dynamic : cfg.frames_static;
            const int length = std::uniform_int_distribution<int>(range.first, range.second)(rng);
            const double seq_phase = proto.motion ? two_pi * 0.25 * unit(rng) : 0.0;

            GestureSequence seq;
            seq.patient_id = p;
            seq.label = tax[c];
            seq.correct = true;
            seq.frames.reserve(static_cast<std::size_t>(length));
            for (int t = 0; t < length; ++t) {
                std::array<Offset, kNumJoints> pos = kNeutralPose;
                auto shift = [&](std::size_t j, Offset o, double scale) {
                    pos[j].dx += scale * o.dx;
                    pos[j].dy += scale * o.dy;
                };
                shift(kRWrist, proto.pose.right, 1.0);
                shift(kRElbow, proto.pose.right, 0.5);
                shift(kLWrist, proto.pose.left, 1.0);
                shift(kLElbow, proto.pose.left, 0.5);
                if (proto.motion) {
                    const auto& m = *proto.motion;
                    const double s = m.amplitude *
                                     std::sin(two_pi * m.cycles_per_frame * t + m.phase + seq_phase);
                    const Offset d{s * std::cos(m.direction), s * std::sin(m.direction)};
                    if (m.right) {
                        shift(kRWrist, d, 1.0);
                        shift(kRElbow, d, 0.5);
                    }
                    if (m.left) {
                        // Mirrored so two-handed motions are not a rigid translation.
                        const Offset mirrored{-d.dx, d.dy};
                        shift(kLWrist, mirrored, 1.0);
                        shift(kLElbow, mirrored, 0.5);
                    }
                }
                SkeletalFrame frame;
                frame.joints.resize(kNumJoints);
                for (std::size_t j = 0; j < kNumJoints; ++j) {
                    const double nx = normal(rng);
                    const double ny = normal(rng);
                    frame.joints[j].x = pos[j].dx + camera.dx + cfg.noise_sigma * nx;
                    frame.joints[j].y = pos[j].dy + camera.dy + cfg.noise_sigma * ny;
                    frame.joints[j].confidence = 1.0;
                }
                seq.frames.push_back(std::move(frame));
            }
            ds.sequences.push_back(std::move(seq));
        }
    }
    return ds;
}

}  // namespace skelgest
