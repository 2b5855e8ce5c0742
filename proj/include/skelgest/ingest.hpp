#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "skelgest/skeleton.hpp"

namespace skelgest {

/// Malformed or inconsistent input data. Carries a human-readable location.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Provenance { Real, Synthetic };

struct Dataset {
    std::vector<GestureSequence> sequences;
    JointIndexMap joint_map = JointIndexMap::default_map();
    Provenance provenance = Provenance::Real;
};

// ---------------------------------------------------------------------------
// Frames file: consecutive 5-line blocks of 14 whitespace-separated numbers
// (x, y, confidence, aux4, aux5). Blank lines and lines starting with '#'
// are ignored.

std::vector<SkeletalFrame> parse_skeletal_file(std::string_view text);

/// Shortest round-trip decimal form. Frames without aux rows are written
/// with zero aux rows, so the block is always 5 lines.
std::string serialize_skeletal_frames(const std::vector<SkeletalFrame>& frames);

// ---------------------------------------------------------------------------
// Manifest: CSV `patient_id,gesture_id,correct,frames_path`, header required.

struct ManifestRow {
    int patient_id = 0;
    std::string gesture_id;
    bool correct = true;
    std::string frames_path;
};

std::vector<ManifestRow> parse_manifest(std::string_view text);
std::string serialize_manifest(const std::vector<ManifestRow>& rows);

/// Reads the manifest, drops rows with correct=false, parses and validates
/// each referenced frames file. `frames_path` is resolved relative to `root`.
Dataset load_dataset(const std::filesystem::path& root, const std::filesystem::path& manifest,
                     const JointIndexMap& joint_map = JointIndexMap::default_map());

/// Writes one frames file per sequence plus `manifest.csv` under `root`.
void write_dataset(const Dataset& ds, const std::filesystem::path& root);

/// FNV-1a over the canonical serialization of every sequence.
std::uint64_t dataset_checksum(const Dataset& ds);

// ---------------------------------------------------------------------------
// Folds

struct FoldBoundaries {
    int first = 15;
    int second = 35;
};

struct FoldSplit {
    FoldBoundaries boundaries;
    std::map<int, int> fold_of_patient;

    int fold_of(int patient_id) const;
    std::vector<int> patients_in(int fold) const;
};

/// Pure function of the patient id: 1 if p <= b1, 2 if p <= b2, else 3.
int fold_for_patient(int patient_id, FoldBoundaries b);

/// Throws std::invalid_argument unless boundaries are strictly increasing.
FoldSplit assign_folds(const Dataset& ds, FoldBoundaries b = {});

// ---------------------------------------------------------------------------
// Synthetic data

struct SynthConfig {
    int n_patients = 12;
    std::pair<int, int> frames_static{40, 60};
    std::pair<int, int> frames_dynamic{60, 90};
    double noise_sigma = 1.0;
    double camera_offset_range = 40.0;
    std::uint64_t seed = 0;
};

void validate(const SynthConfig& cfg);

/// Deterministic in `cfg`. One correct performance of every gesture per
/// patient; a per-patient camera translation is added to every joint.
Dataset generate_synthetic(const SynthConfig& cfg);

}  // namespace skelgest
