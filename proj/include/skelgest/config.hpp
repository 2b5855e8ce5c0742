#pragma once

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "skelgest/ingest.hpp"
#include "skelgest/pipeline.hpp"

namespace skelgest {

/// Bad key, bad value, or a missing mandatory setting.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ConfigKey {
    std::string name;
    std::string default_value;
    std::string help;
};

/// Flat `key = value` configuration. Later layers override earlier ones:
/// built-in defaults, then a config file, then command-line settings.
class AppConfig {
public:
    AppConfig();

    static const std::vector<ConfigKey>& known_keys();

    /// Throws ConfigError for unknown keys.
    void set(const std::string& key, const std::string& value);
    const std::string& get(const std::string& key) const;
    bool is_set(const std::string& key) const { return !get(key).empty(); }

    /// Parses `key = value` lines; '#' starts a comment.
    void merge_text(const std::string& text, const std::string& origin = "<text>");
    void merge_file(const std::filesystem::path& path);

    int get_int(const std::string& key) const;
    std::uint64_t get_u64(const std::string& key) const;
    double get_double(const std::string& key) const;
    bool get_bool(const std::string& key) const;
    std::vector<std::size_t> get_sizes(const std::string& key) const;

    /// Sorted `key = value` lines; valid input for merge_text.
    std::string resolved_text(std::initializer_list<std::string_view> skip = {}) const;
    /// FNV-1a of the resolved text without `output.dir`.
    std::uint64_t digest() const;

    const std::map<std::string, std::string>& values() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

/// Throws ConfigError when `synth.seed` is unset.
SynthConfig synth_config(const AppConfig& cfg);

/// Throws ConfigError when `train.seed` is unset.
RunConfig run_config(const AppConfig& cfg);

JointIndexMap joint_map(const AppConfig& cfg);

FoldBoundaries fold_boundaries(const AppConfig& cfg);

}  // namespace skelgest
