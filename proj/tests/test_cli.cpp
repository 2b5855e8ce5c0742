#include <doctest.h>

#include <cstdlib>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

#include "test_util.hpp"

using testutil::read_text;
using testutil::TempDir;

namespace {

int run(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + " \"" SKELGEST_BIN "\" " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string q(const std::filesystem::path& p) { return "\"" + p.string() + "\""; }

std::size_t count_files(const std::filesystem::path& dir) {
    std::size_t n = 0;
    for (const auto& e : std::filesystem::directory_iterator(dir)) n += e.is_regular_file();
    return n;
}

const std::string kFast = " --stride 16 --hidden 4 --epochs 1 --folds.boundaries 2,4";

}  // namespace

TEST_CASE("synth is deterministic and demands a seed") {
    TempDir dir("cli_synth");
    REQUIRE(run("synth --patients 6 --seed 42 --out " + q(dir / "a")) == 0);
    REQUIRE(run("synth --patients 6 --seed 42 --out " + q(dir / "b")) == 0);
    const auto manifest = read_text(dir / "a/manifest.csv");
    CHECK(std::count(manifest.begin(), manifest.end(), '\n') == 175);
    CHECK(manifest == read_text(dir / "b/manifest.csv"));
    CHECK(read_text(dir / "a/config.resolved") == read_text(dir / "b/config.resolved"));
    for (const auto& e : std::filesystem::directory_iterator(dir / "a/frames"))
        CHECK(read_text(e.path()) == read_text(dir / "b/frames" / e.path().filename()));
    CHECK(run("synth --patients 6 --out " + q(dir / "c")) == 2);
}

TEST_CASE("train writes one checkpoint per model") {
    TempDir dir("cli_train");
    REQUIRE(run("synth --patients 2 --seed 1 --out " + q(dir / "data")) == 0);
    const std::string data = " --data " + q(dir / "data") + " --seed 3" + kFast;
    CHECK(run("train --protocol multiclass --method 5 --frames 128,256 --net lstm" + data + " --out " +
              q(dir / "mc")) == 0);
    CHECK(count_files(dir / "mc/checkpoints") == 4);
    CHECK(std::filesystem::exists(dir / "mc/run_manifest.json"));
    CHECK(std::filesystem::exists(dir / "mc/config.resolved"));
    CHECK(run("train --protocol binary --method 3 --frames 256" + data + " --out " + q(dir / "bin")) == 0);
    CHECK(count_files(dir / "bin/checkpoints") == 29);
    CHECK(run("train --method 6" + data + " --out " + q(dir / "bad")) == 2);
    CHECK(run("train --method 3 --frames 32 --data " + q(dir / "nowhere") + " --seed 1") == 3);
    CHECK(run("train --method 3 --data " + q(dir / "data")) == 2);

    SUBCASE("checkpoints must match the evaluation config") {
        const std::string eval = "evaluate --protocol multiclass --frames 128,256 --net lstm" + data +
                                 " --checkpoints " + q(dir / "mc/checkpoints");
        CHECK(run(eval + " --method 5 --out " + q(dir / "ev")) == 0);
        CHECK(std::filesystem::exists(dir / "ev/report.json"));
        CHECK(run(eval + " --method 3 --out " + q(dir / "ev2")) == 3);
    }
}

TEST_CASE("evaluate writes a self-consistent, replayable report") {
    TempDir dir("cli_eval");
    REQUIRE(run("synth --patients 4 --seed 2 --out " + q(dir / "data")) == 0);
    REQUIRE(run("evaluate --data " + q(dir / "data") + " --seed 5 --frames 16" + kFast + " --out " +
                q(dir / "r1")) == 0);
    for (const char* f : {"report.json", "confusion_static.csv", "confusion_dynamic.csv", "run_manifest.json",
                          "config.resolved"})
        CHECK(std::filesystem::exists(dir / "r1" / f));
    const auto report = nlohmann::json::parse(read_text(dir / "r1/report.json"));
    CHECK(report["average_accuracy"].get<double>() ==
          doctest::Approx((report["static_accuracy"].get<double>() + report["dynamic_accuracy"].get<double>()) / 2));
    CHECK(report["folds"].size() == 2);

    REQUIRE(run("evaluate --run-manifest " + q(dir / "r1/run_manifest.json") + " --out " + q(dir / "r2")) == 0);
    CHECK(read_text(dir / "r1/report.json") == read_text(dir / "r2/report.json"));

    CHECK(run("report --input " + q(dir / "r1/report.json") + " --format csv") == 0);
    CHECK(run("report --input " + q(dir / "r1/report.json") + " --format xml") == 2);
    CHECK(run("report --input " + q(dir / "missing.json")) == 3);
}

TEST_CASE("gradcheck exit codes") {
    CHECK(run("gradcheck") == 0);
    CHECK(run("gradcheck --net tcn") == 0);
    CHECK(run("gradcheck --tolerance 0") == 1);
}

TEST_CASE("config file from the environment") {
    TempDir dir("cli_env");
    testutil::write_text(dir / "run.cfg", "synth.seed = 8\nsynth.patients = 1\n");
    CHECK(run("synth --out " + q(dir / "d"), "SKELGEST_CONFIG=" + q(dir / "run.cfg")) == 0);
    const auto manifest = read_text(dir / "d/manifest.csv");
    CHECK(std::count(manifest.begin(), manifest.end(), '\n') == 30);
    testutil::write_text(dir / "bad.cfg", "synth.seed = 8\nsynth.colour = red\n");
    CHECK(run("synth --out " + q(dir / "e"), "SKELGEST_CONFIG=" + q(dir / "bad.cfg")) == 2);
    CHECK(run("ingest --data " + q(dir / "d")) == 0);
    CHECK(run("frobnicate") == 2);
}
