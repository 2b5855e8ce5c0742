#include "skelgest/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace skelgest::nn {

namespace {

constexpr std::string_view kMagic = "SKGCKPT1";

template <typename T>
void put_le(std::string& out, T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

template <typename T>
T get_le(std::string_view bytes, std::size_t& pos) {
    if (pos + sizeof(T) > bytes.size()) throw CheckpointError("checkpoint truncated");
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
        v |= static_cast<T>(static_cast<unsigned char>(bytes[pos + i])) << (8 * i);
    pos += sizeof(T);
    return v;
}

std::string head_name(HeadType h) { return h == HeadType::Softmax ? "softmax" : "sigmoid"; }

HeadType head_from_name(const std::string& s) {
    if (s == "softmax") return HeadType::Softmax;
    if (s == "sigmoid") return HeadType::Sigmoid;
    throw CheckpointError("unknown head type '" + s + "'");
}

}  // namespace

nlohmann::json spec_to_json(const ModelSpec& spec) {
    nlohmann::json j;
    if (const auto* l = std::get_if<LstmSpec>(&spec.arch)) {
        j["kind"] = "lstm";
        j["input_dim"] = l->input_dim;
        j["hidden_dim"] = l->hidden_dim;
        j["n_classes"] = l->n_classes;
        j["head"] = head_name(l->head);
    } else {
        const auto& t = std::get<TcnSpec>(spec.arch);
        j["kind"] = "tcn";
        j["input_dim"] = t.input_dim;
        j["channels"] = t.channels;
        j["kernel"] = t.kernel;
        j["dilations"] = t.dilations;
        j["n_classes"] = t.n_classes;
        j["head"] = head_name(t.head);
    }
    return j;
}

ModelSpec spec_from_json(const nlohmann::json& j) {
    try {
        const std::string kind = j.at("kind");
        if (kind == "lstm") {
            LstmSpec s;
            s.input_dim = j.at("input_dim");
            s.hidden_dim = j.at("hidden_dim");
            s.n_classes = j.at("n_classes");
            s.head = head_from_name(j.at("head"));
            return ModelSpec{s};
        }
        if (kind == "tcn") {
            TcnSpec s;
            s.input_dim = j.at("input_dim");
            s.channels = j.at("channels");
            s.kernel = j.at("kernel");
            s.dilations = j.at("dilations").get<std::vector<std::size_t>>();
            s.n_classes = j.at("n_classes");
            s.head = head_from_name(j.at("head"));
            return ModelSpec{s};
        }
        throw CheckpointError("unknown architecture '" + kind + "'");
    } catch (const nlohmann::json::exception& e) {
        throw CheckpointError(std::string("bad architecture descriptor: ") + e.what());
    }
}

std::string encode_checkpoint(const Checkpoint& ckpt) {
    const auto expected = parameter_count(ckpt.model.spec);
    if (static_cast<std::size_t>(ckpt.model.values.size()) != expected)
        throw CheckpointError("parameter vector does not match architecture");
    if (!ckpt.model.values.allFinite()) throw CheckpointError("refusing to save non-finite parameters");

    nlohmann::json header;
    header["architecture"] = spec_to_json(ckpt.model.spec);
    header["seed"] = ckpt.seed;
    header["config_digest"] = ckpt.config_digest;
    header["extra"] = ckpt.extra;
    const std::string text = header.dump();

    std::string out(kMagic);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(text.size()));
    out += text;
    put_le<std::uint64_t>(out, static_cast<std::uint64_t>(expected));
    for (Eigen::Index i = 0; i < ckpt.model.values.size(); ++i)
        put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(ckpt.model.values(i)));
    return out;
}

Checkpoint decode_checkpoint(std::string_view bytes) {
    if (bytes.substr(0, kMagic.size()) != kMagic) throw CheckpointError("not a checkpoint (bad magic)");
    std::size_t pos = kMagic.size();
    const auto hlen = get_le<std::uint32_t>(bytes, pos);
    if (pos + hlen > bytes.size()) throw CheckpointError("checkpoint header truncated");
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(bytes.substr(pos, hlen));
    } catch (const nlohmann::json::exception& e) {
        throw CheckpointError(std::string("bad checkpoint header: ") + e.what());
    }
    pos += hlen;

    Checkpoint ckpt;
    ckpt.model.spec = spec_from_json(header.at("architecture"));
    ckpt.seed = header.value("seed", std::uint64_t{0});
    ckpt.config_digest = header.value("config_digest", std::uint64_t{0});
    ckpt.extra = header.value("extra", nlohmann::json::object());

    const auto n = get_le<std::uint64_t>(bytes, pos);
    if (n != parameter_count(ckpt.model.spec))
        throw CheckpointError("parameter count " + std::to_string(n) + " does not match architecture");
    if (bytes.size() - pos != n * 8) throw CheckpointError("checkpoint payload has the wrong size");
    ckpt.model.values.resize(static_cast<Eigen::Index>(n));
    for (std::uint64_t i = 0; i < n; ++i)
        ckpt.model.values(static_cast<Eigen::Index>(i)) = std::bit_cast<double>(get_le<std::uint64_t>(bytes, pos));
    if (!ckpt.model.values.allFinite()) throw CheckpointError("checkpoint contains non-finite parameters");
    return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
    const std::string bytes = encode_checkpoint(ckpt);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CheckpointError("cannot write '" + path.string() + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("cannot open '" + path.string() + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return decode_checkpoint(os.str());
}

}  // namespace skelgest::nn
