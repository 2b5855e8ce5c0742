#include "skelgest/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace skelgest {

namespace fs = std::filesystem;

namespace {

std::string_view trim(std::string_view s) {
    const auto* ws = " \t\r\n";
    auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        if (i >= line.size()) break;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
        out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

bool parse_double(std::string_view tok, double& out) {
    if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
    return ec == std::errc{} && ptr == tok.data() + tok.size();
}

void append_double(std::string& out, double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, ptr);
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw DataError("cannot open file '" + p.string() + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace

std::vector<SkeletalFrame> parse_skeletal_file(std::string_view text) {
    std::vector<SkeletalFrame> frames;
    std::array<std::vector<double>, 5> rows;
    std::size_t row = 0;
    std::size_t line_no = 0;
    std::size_t block_start = 0;

    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;

        auto t = trim(line);
        if (t.empty() || t.front() == '#') {
            if (nl == text.size()) break;
            continue;
        }
        if (row == 0) block_start = line_no;

        auto toks = split_ws(t);
        if (toks.size() != kNumJoints) {
            throw DataError("line " + std::to_string(line_no) + ": expected 14 values, got " +
                            std::to_string(toks.size()));
        }
        rows[row].assign(kNumJoints, 0.0);
        for (std::size_t j = 0; j < kNumJoints; ++j) {
            if (!parse_double(toks[j], rows[row][j])) {
                throw DataError("line " + std::to_string(line_no) + ": non-numeric token '" +
                                std::string(toks[j]) + "'");
            }
        }
        if (++row == 5) {
            SkeletalFrame f;
            f.joints.resize(kNumJoints);
            for (std::size_t j = 0; j < kNumJoints; ++j)
                f.joints[j] = Joint2D{rows[0][j], rows[1][j], rows[2][j]};
            f.aux4 = rows[3];
            f.aux5 = rows[4];
            frames.push_back(std::move(f));
            row = 0;
        }
        if (nl == text.size()) break;
    }
    if (row != 0) {
        throw DataError("line " + std::to_string(line_no) + ": truncated frame block starting at line " +
                        std::to_string(block_start) + " (" + std::to_string(row) + " of 5 rows)");
    }
    return frames;
}

std::string serialize_skeletal_frames(const std::vector<SkeletalFrame>& frames) {
    std::string out;
    auto write_row = [&](auto&& value_at) {
        for (std::size_t j = 0; j < kNumJoints; ++j) {
            if (j) out.push_back(' ');
            append_double(out, value_at(j));
        }
        out.push_back('\n');
    };
    for (std::size_t f = 0; f < frames.size(); ++f) {
        const auto& fr = frames[f];
        if (fr.joints.size() != kNumJoints)
            throw std::invalid_argument("cannot serialize frame without 14 joints");
        if (f) out.push_back('\n');
        write_row([&](std::size_t j) { return fr.joints[j].x; });
        write_row([&](std::size_t j) { return fr.joints[j].y; });
        write_row([&](std::size_t j) { return fr.joints[j].confidence; });
        write_row([&](std::size_t j) { return fr.aux4 ? (*fr.aux4)[j] : 0.0; });
        write_row([&](std::size_t j) { return fr.aux5 ? (*fr.aux5)[j] : 0.0; });
    }
    return out;
}

// ---------------------------------------------------------------------------

std::vector<ManifestRow> parse_manifest(std::string_view text) {
    std::vector<ManifestRow> rows;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        auto t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls{std::string(t)};
        while (std::getline(ls, cell, ',')) cells.emplace_back(trim(cell));
        if (!header_seen) {
            header_seen = true;
            if (cells != std::vector<std::string>{"patient_id", "gesture_id", "correct", "frames_path"})
                throw DataError("manifest line " + std::to_string(line_no) +
                                ": expected header 'patient_id,gesture_id,correct,frames_path'");
            continue;
        }
        if (cells.size() != 4)
            throw DataError("manifest line " + std::to_string(line_no) + ": expected 4 fields, got " +
                            std::to_string(cells.size()));
        ManifestRow r;
        auto [p, ec] = std::from_chars(cells[0].data(), cells[0].data() + cells[0].size(), r.patient_id);
        if (ec != std::errc{} || p != cells[0].data() + cells[0].size() || r.patient_id < 1)
            throw DataError("manifest line " + std::to_string(line_no) + ": bad patient_id '" +
                            cells[0] + "'");
        r.gesture_id = cells[1];
        const auto& c = cells[2];
        if (c == "1" || c == "true") r.correct = true;
        else if (c == "0" || c == "false") r.correct = false;
        else
            throw DataError("manifest line " + std::to_string(line_no) + ": bad correct flag '" + c + "'");
        r.frames_path = cells[3];
        if (r.frames_path.empty())
            throw DataError("manifest line " + std::to_string(line_no) + ": empty frames_path");
        rows.push_back(std::move(r));
    }
    if (!header_seen) throw DataError("manifest is empty");
    return rows;
}

std::string serialize_manifest(const std::vector<ManifestRow>& rows) {
    std::string out = "patient_id,gesture_id,correct,frames_path\n";
    for (const auto& r : rows) {
        out += std::to_string(r.patient_id) + "," + r.gesture_id + "," + (r.correct ? "1" : "0") +
               "," + r.frames_path + "\n";
    }
    return out;
}

Dataset load_dataset(const fs::path& root, const fs::path& manifest, const JointIndexMap& joint_map) {
    if (auto v = validate_joint_map(joint_map); !v)
        throw DataError("invalid joint map: " + v.violations.front());
    const auto rows = parse_manifest(read_file(manifest));

    Dataset ds;
    ds.joint_map = joint_map;
    ds.provenance = Provenance::Real;
    std::set<std::pair<int, std::string>> seen;
    for (const auto& r : rows) {
        // Unknown ids are an error even on rows that would be filtered out.
        const GestureLabel& label = [&]() -> const GestureLabel& {
            try {
                return lookup_label(r.gesture_id);
            } catch (const UnknownLabelError& e) {
                throw DataError(std::string("manifest: ") + e.what());
            }
        }();
        if (!r.correct) continue;
        if (!seen.insert({r.patient_id, r.gesture_id}).second)
            throw DataError("manifest: duplicate correct entry for patient " +
                            std::to_string(r.patient_id) + " gesture " + r.gesture_id);

        const fs::path p = root / r.frames_path;
        if (!fs::exists(p)) throw DataError("missing frames file '" + p.string() + "'");
        GestureSequence seq;
        seq.patient_id = r.patient_id;
        seq.label = label;
        seq.correct = true;
        try {
            seq.frames = parse_skeletal_file(read_file(p));
        } catch (const DataError& e) {
            throw DataError(p.string() + ": " + e.what());
        }
        if (seq.frames.empty())
            throw DataError("manifest/frame-file mismatch: '" + p.string() + "' contains no frames");
        if (auto v = validate_sequence(seq); !v)
            throw DataError(p.string() + ": " + v.violations.front());
        ds.sequences.push_back(std::move(seq));
    }
    if (ds.sequences.empty()) throw DataError("empty dataset after removing incorrect gestures");
    return ds;
}

namespace {

std::string frames_filename(const GestureSequence& s) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "p%03d_%s.txt", s.patient_id, s.label.id.c_str());
    return buf;
}

}  // namespace

void write_dataset(const Dataset& ds, const fs::path& root) {
    std::error_code ec;
    fs::create_directories(root / "frames", ec);
    if (ec) throw DataError("cannot create '" + (root / "frames").string() + "': " + ec.message());

    std::vector<ManifestRow> rows;
    for (const auto& s : ds.sequences) {
        const std::string rel = "frames/" + frames_filename(s);
        std::ofstream out(root / rel, std::ios::binary);
        if (!out) throw DataError("cannot write '" + (root / rel).string() + "'");
        out << serialize_skeletal_frames(s.frames);
        rows.push_back({s.patient_id, s.label.id, s.correct, rel});
    }
    std::ofstream m(root / "manifest.csv", std::ios::binary);
    if (!m) throw DataError("cannot write manifest under '" + root.string() + "'");
    m << serialize_manifest(rows);
}

std::uint64_t dataset_checksum(const Dataset& ds) {
    std::uint64_t h = 14695981039346656037ULL;
    auto feed = [&](std::string_view s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 1099511628211ULL;
        }
    };
    for (const auto& s : ds.sequences) {
        feed(std::to_string(s.patient_id) + "," + s.label.id + "," + (s.correct ? "1" : "0") + "\n");
        feed(serialize_skeletal_frames(s.frames));
    }
    return h;
}

// ---------------------------------------------------------------------------

int fold_for_patient(int patient_id, FoldBoundaries b) {
    if (patient_id <= b.first) return 1;
    if (patient_id <= b.second) return 2;
    return 3;
}

int FoldSplit::fold_of(int patient_id) const {
    auto it = fold_of_patient.find(patient_id);
    return it != fold_of_patient.end() ? it->second : fold_for_patient(patient_id, boundaries);
}

std::vector<int> FoldSplit::patients_in(int fold) const {
    std::vector<int> out;
    for (const auto& [p, f] : fold_of_patient)
        if (f == fold) out.push_back(p);
    return out;
}

FoldSplit assign_folds(const Dataset& ds, FoldBoundaries b) {
    if (!(b.first < b.second))
        throw std::invalid_argument("fold boundaries must be strictly increasing");
    FoldSplit split;
    split.boundaries = b;
    for (const auto& s : ds.sequences) split.fold_of_patient[s.patient_id] = fold_for_patient(s.patient_id, b);
    return split;
}

}  // namespace skelgest
