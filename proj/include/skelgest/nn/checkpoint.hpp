#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "skelgest/nn/model.hpp"

namespace skelgest::nn {

/// On-disk layout:
///   bytes 0..7   magic "SKGCKPT1"
///   u32 LE       header length N
///   N bytes      UTF-8 JSON header (architecture, head, seed, config digest, extra)
///   u64 LE       parameter count P
///   P x f64 LE   flat parameter vector
struct Checkpoint {
    ModelParameters model;
    std::uint64_t seed = 0;
    std::uint64_t config_digest = 0;
    nlohmann::json extra = nlohmann::json::object();
};

class CheckpointError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(std::string_view bytes);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

nlohmann::json spec_to_json(const ModelSpec& spec);
ModelSpec spec_from_json(const nlohmann::json& j);

}  // namespace skelgest::nn
