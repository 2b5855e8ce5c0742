#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "skelgest/skeleton.hpp"

namespace testutil {

/// Scratch directory removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("skelgest_" + tag + "_" + std::to_string(rd()) + "_" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

private:
    std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& p, const std::string& text) {
    std::filesystem::create_directories(p.parent_path());
    std::ofstream(p, std::ios::binary) << text;
}

inline std::string read_text(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Random frame with pixel-range coordinates.
template <typename Rng>
skelgest::SkeletalFrame random_frame(Rng& rng, bool aux = false) {
    std::uniform_real_distribution<double> px(1.0, 640.0), conf(0.0, 1.0);
    skelgest::SkeletalFrame f;
    for (std::size_t j = 0; j < skelgest::kNumJoints; ++j) f.joints.push_back({px(rng), px(rng), conf(rng)});
    if (aux) {
        f.aux4 = std::vector<double>(skelgest::kNumJoints);
        f.aux5 = std::vector<double>(skelgest::kNumJoints);
        for (std::size_t j = 0; j < skelgest::kNumJoints; ++j) {
            (*f.aux4)[j] = px(rng);
            (*f.aux5)[j] = -px(rng);
        }
    }
    return f;
}

inline std::string block(double base) {
    std::string out;
    for (int r = 0; r < 5; ++r) {
        for (int j = 0; j < 14; ++j) out += std::to_string(r == 2 ? 1.0 : base + j) + (j < 13 ? " " : "\n");
    }
    return out;
}

}  // namespace testutil
