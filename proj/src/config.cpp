#include "skelgest/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace skelgest {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& v) {
    T out{};
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size() || v.empty())
        throw ConfigError("config '" + key + "': cannot parse '" + v + "' as a number");
    return out;
}

}  // namespace

const std::vector<ConfigKey>& AppConfig::known_keys() {
    static const std::vector<ConfigKey> keys{
        {"dataset.root", "", "directory containing the frames files"},
        {"dataset.manifest", "", "CSV manifest (default <dataset.root>/manifest.csv)"},
        {"folds.boundaries", "15,35", "last patient id of folds 1 and 2"},
        {"joints.chin_index", "0", "column of the chin joint"},
        {"synth.patients", "12", "number of synthetic patients"},
        {"synth.frames_static", "40,60", "frame-count range of static gestures"},
        {"synth.frames_dynamic", "60,90", "frame-count range of dynamic gestures"},
        {"synth.noise_sigma", "1.0", "per-joint Gaussian jitter (pixels)"},
        {"synth.camera_offset", "40", "per-patient camera translation range (pixels)"},
        {"synth.seed", "", "generator seed (required)"},
        {"preprocess.method", "3", "normalization method 1..5"},
        {"preprocess.window", "32", "window length, or short,long pair"},
        {"preprocess.stride", "1", "window stride"},
        {"preprocess.savgol.m", "5", "Savitzky-Golay window"},
        {"preprocess.savgol.order", "2", "Savitzky-Golay polynomial order"},
        {"preprocess.include_confidence", "false", "append joint confidences to the features"},
        {"pipeline.protocol", "multiclass", "multiclass or binary"},
        {"pipeline.route_threshold", "0", "frames routed to the short model (0 = short window)"},
        {"pipeline.rebalance", "false", "oversample positives for binary models"},
        {"pipeline.threads", "1", "worker threads for independent models"},
        {"model.net", "lstm", "lstm or tcn"},
        {"model.lstm.hidden", "128", "LSTM hidden units"},
        {"model.tcn.channels", "64", "TCN channels per level"},
        {"model.tcn.kernel", "3", "TCN kernel size"},
        {"model.tcn.dilations", "1,2,4,8", "TCN dilations"},
        {"train.optimizer", "adam", "adam or sgd"},
        {"train.lr", "0.001", "learning rate"},
        {"train.epochs", "50", "training epochs"},
        {"train.batch", "32", "mini-batch size"},
        {"train.clip", "5", "gradient clip norm (<= 0 disables)"},
        {"train.standardize", "true", "z-score features with training statistics"},
        {"train.seed", "", "training seed (required)"},
        {"output.dir", "out", "output directory"},
    };
    return keys;
}

AppConfig::AppConfig() {
    for (const auto& k : known_keys()) values_[k.name] = k.default_value;
}

void AppConfig::set(const std::string& key, const std::string& value) {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
    it->second = trim(value);
}

const std::string& AppConfig::get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
    return it->second;
}

void AppConfig::merge_text(const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(n) + ": expected 'key = value'");
        try {
            set(trim(line.substr(0, eq)), line.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError(origin + ":" + std::to_string(n) + ": " + e.what());
        }
    }
}

void AppConfig::merge_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
    std::ostringstream os;
    os << in.rdbuf();
    merge_text(os.str(), path.string());
}

int AppConfig::get_int(const std::string& key) const { return parse_number<int>(key, get(key)); }

std::uint64_t AppConfig::get_u64(const std::string& key) const {
    return parse_number<std::uint64_t>(key, get(key));
}

double AppConfig::get_double(const std::string& key) const { return parse_number<double>(key, get(key)); }

bool AppConfig::get_bool(const std::string& key) const {
    const auto& v = get(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("config '" + key + "': expected true/false, got '" + v + "'");
}

std::vector<std::size_t> AppConfig::get_sizes(const std::string& key) const {
    std::vector<std::size_t> out;
    std::istringstream in(get(key));
    std::string tok;
    while (std::getline(in, tok, ',')) out.push_back(parse_number<std::size_t>(key, trim(tok)));
    if (out.empty()) throw ConfigError("config '" + key + "' is empty");
    return out;
}

std::string AppConfig::resolved_text(std::initializer_list<std::string_view> skip) const {
    std::string out;
    for (const auto& [k, v] : values_) {
        if (std::find(skip.begin(), skip.end(), k) != skip.end()) continue;
        out += k + " = " + v + "\n";
    }
    return out;
}

std::uint64_t AppConfig::digest() const {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : resolved_text({"output.dir"})) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

// ---------------------------------------------------------------------------

FoldBoundaries fold_boundaries(const AppConfig& cfg) {
    const auto b = cfg.get_sizes("folds.boundaries");
    if (b.size() != 2 || !(b[0] < b[1])) throw ConfigError("folds.boundaries must be two increasing patient ids");
    return FoldBoundaries{static_cast<int>(b[0]), static_cast<int>(b[1])};
}

JointIndexMap joint_map(const AppConfig& cfg) {
    JointIndexMap m = JointIndexMap::default_map();
    const int chin = cfg.get_int("joints.chin_index");
    if (chin < 0 || chin >= static_cast<int>(kNumJoints)) throw ConfigError("joints.chin_index must be in [0, 14)");
    m.chin_index = static_cast<std::size_t>(chin);
    return m;
}

SynthConfig synth_config(const AppConfig& cfg) {
    if (!cfg.is_set("synth.seed")) throw ConfigError("synth.seed is required (pass --seed)");
    SynthConfig s;
    s.seed = cfg.get_u64("synth.seed");
    s.n_patients = cfg.get_int("synth.patients");
    auto range = [&](const std::string& key) {
        const auto r = cfg.get_sizes(key);
        if (r.size() != 2) throw ConfigError(key + " must be 'min,max'");
        return std::pair<int, int>{static_cast<int>(r[0]), static_cast<int>(r[1])};
    };
    s.frames_static = range("synth.frames_static");
    s.frames_dynamic = range("synth.frames_dynamic");
    s.noise_sigma = cfg.get_double("synth.noise_sigma");
    s.camera_offset_range = cfg.get_double("synth.camera_offset");
    try {
        validate(s);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return s;
}

RunConfig run_config(const AppConfig& cfg) {
    if (!cfg.is_set("train.seed")) throw ConfigError("train.seed is required (pass --seed)");
    RunConfig r;
    try {
        r.protocol = protocol_from_string(cfg.get("pipeline.protocol"));
        r.features.method = norm_method_from_int(cfg.get_int("preprocess.method"));
        r.features.include_confidence = cfg.get_bool("preprocess.include_confidence");
        r.savgol = SavgolSpec{cfg.get_int("preprocess.savgol.m"), cfg.get_int("preprocess.savgol.order")};
        r.windows = cfg.get_sizes("preprocess.window");
        r.stride = cfg.get_sizes("preprocess.stride").front();
        r.route_threshold = cfg.get_sizes("pipeline.route_threshold").front();
        r.rebalance = cfg.get_bool("pipeline.rebalance");
        r.threads = cfg.get_sizes("pipeline.threads").front();
        r.network.kind = nn::net_kind_from_string(cfg.get("model.net"));
        r.network.lstm_hidden = cfg.get_sizes("model.lstm.hidden").front();
        r.network.tcn_channels = cfg.get_sizes("model.tcn.channels").front();
        r.network.tcn_kernel = cfg.get_sizes("model.tcn.kernel").front();
        r.network.tcn_dilations = cfg.get_sizes("model.tcn.dilations");
        const auto& opt = cfg.get("train.optimizer");
        if (opt == "adam") r.train.optimizer = nn::OptimizerKind::Adam;
        else if (opt == "sgd") r.train.optimizer = nn::OptimizerKind::Sgd;
        else throw ConfigError("train.optimizer must be adam or sgd");
        r.train.learning_rate = cfg.get_double("train.lr");
        r.train.epochs = cfg.get_sizes("train.epochs").front();
        r.train.batch_size = cfg.get_sizes("train.batch").front();
        r.train.clip_norm = cfg.get_double("train.clip");
        r.train.seed = cfg.get_u64("train.seed");
        r.standardize = cfg.get_bool("train.standardize");
        r.folds = fold_boundaries(cfg);
        validate(r);
        // Architecture checks live in the network constructors; TCN keys are
        // validated even when the LSTM is selected.
        nn::TcnSpec probe;
        probe.channels = r.network.tcn_channels;
        probe.kernel = r.network.tcn_kernel;
        probe.dilations = r.network.tcn_dilations;
        (void)nn::Tcn<double>(probe);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    return r;
}

}  // namespace skelgest
