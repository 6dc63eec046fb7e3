#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include "limbmap/cli.hpp"
#include "support.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
    int code = 0;
    std::string out;
    std::string err;
};

Result run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    auto* old_out = std::cout.rdbuf(out.rdbuf());
    auto* old_err = std::cerr.rdbuf(err.rdbuf());
    const int code = limbmap::run_cli(args);
    std::cout.rdbuf(old_out);
    std::cerr.rdbuf(old_err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void golden_path(const fs::path& d, const std::string& seed = "3") {
    const std::string rec = (d / "rec.csv").string();
    REQUIRE(run({"synth", "--out", rec, "--seed", seed, "--cycles", "30"}).code == 0);
    REQUIRE(run({"identify", "--rec", rec, "--out-map", (d / "M.txt").string(), "--out-band",
                 (d / "B.txt").string(), "--out-refs", (d / "F.txt").string(), "--holdout", "0.2"})
                .code == 0);
    REQUIRE(run({"simulate", "--rec", rec, "--map", (d / "M.txt").string(), "--band", (d / "B.txt").string(),
                 "--refs", (d / "F.txt").string(), "--out-dir", (d / "run").string()})
                .code == 0);
    REQUIRE(run({"analyze", "--out-dir", (d / "run").string()}).code == 0);
}

}  // namespace

TEST_CASE("golden path produces every artifact") {
    testing::TempDir dir("cli");
    golden_path(dir.path());
    for (const char* name : {"rec.csv", "rec.meta.csv", "M.txt", "B.txt", "F.txt", "run/trajectory.csv",
                             "run/features.csv", "run/cycles.csv", "run/error_report.csv"}) {
        CHECK_MESSAGE(fs::exists(dir / name), name);
    }
    const Result plot = run({"plot", "--out-dir", (dir / "run").string()});
    CHECK(plot.code == 0);
    CHECK(fs::exists(dir / "run/restoration.svg"));
    CHECK(fs::exists(dir / "run/coordination.svg"));
    CHECK(slurp(dir / "run/restoration.svg").rfind("<svg", 0) == 0);

    const std::string report = slurp(dir / "run/error_report.csv");
    CHECK(report.find("phase_difference_frac,original,") != std::string::npos);
    CHECK(report.find("phase_difference_frac,experiment1,") != std::string::npos);
}

TEST_CASE("identify prints the residual table") {
    testing::TempDir dir("cli");
    const std::string rec = (dir / "rec.csv").string();
    REQUIRE(run({"synth", "--out", rec, "--cycles", "30"}).code == 0);
    const Result r = run({"identify", "--rec", rec, "--out-map", (dir / "M.txt").string(), "--out-band",
                          (dir / "B.txt").string(), "--out-refs", (dir / "F.txt").string()});
    CHECK(r.code == 0);
    CHECK(r.out.find("Model error") != std::string::npos);
    CHECK(r.out.find("Std(degree)") != std::string::npos);
}

TEST_CASE("a missing required flag is a usage error naming the flag") {
    testing::TempDir dir("cli");
    golden_path(dir.path());
    const Result r = run({"simulate", "--rec", (dir / "rec.csv").string(), "--band", (dir / "B.txt").string(),
                          "--refs", (dir / "F.txt").string(), "--out-dir", (dir / "run2").string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("--map") != std::string::npos);
    CHECK_FALSE(fs::exists(dir / "run2"));
}

TEST_CASE("unknown subcommands and bad values are usage errors") {
    CHECK(run({"frobnicate"}).code == 1);
    CHECK(run({"synth", "--out", "x.csv", "--cycles", "-3"}).code == 1);
    CHECK(run({}).code == 1);
}

TEST_CASE("too few cycles for identification is a domain error") {
    testing::TempDir dir("cli");
    const std::string rec = (dir / "short.csv").string();
    REQUIRE(run({"synth", "--out", rec, "--cycles", "3"}).code == 0);
    const Result r = run({"identify", "--rec", rec, "--out-map", (dir / "M.txt").string(), "--out-band",
                          (dir / "B.txt").string(), "--out-refs", (dir / "F.txt").string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("TooFewSamples") != std::string::npos);
    CHECK_FALSE(fs::exists(dir / "M.txt"));
}

TEST_CASE("missing model files are a domain error") {
    testing::TempDir dir("cli");
    const std::string rec = (dir / "rec.csv").string();
    REQUIRE(run({"synth", "--out", rec, "--cycles", "10"}).code == 0);
    const Result r = run({"simulate", "--rec", rec, "--map", (dir / "nope.txt").string(), "--band",
                          (dir / "nope.txt").string(), "--refs", (dir / "nope.txt").string(), "--out-dir",
                          (dir / "run").string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("ModelMissing") != std::string::npos);
    CHECK(run({"analyze", "--out-dir", (dir / "empty").string()}).code == 2);
}

TEST_CASE("config file supplies flags and explicit flags win") {
    testing::TempDir dir("cli");
    {
        std::ofstream cfg(dir / "synth.ini");
        cfg << "cycles = 7\nseed = 99\nout = " << (dir / "from_config.csv").string() << "\n";
    }
    REQUIRE(run({"synth", "--config", (dir / "synth.ini").string()}).code == 0);
    const std::string a = slurp(dir / "from_config.csv");
    REQUIRE(run({"synth", "--config", (dir / "synth.ini").string(), "--out", (dir / "flag.csv").string(),
                 "--cycles", "9"})
                .code == 0);
    REQUIRE(fs::exists(dir / "flag.meta.csv"));
    const std::string meta = slurp(dir / "flag.meta.csv");
    CHECK(std::count(meta.begin(), meta.end(), '\n') == 10);
    REQUIRE(run({"synth", "--out", (dir / "direct.csv").string(), "--cycles", "7", "--seed", "99"}).code == 0);
    CHECK(slurp(dir / "direct.csv") == a);
}

TEST_CASE("a full run is byte-reproducible and leaves its inputs untouched") {
    testing::TempDir one("cli"), two("cli");
    golden_path(one.path(), "8");
    const std::string rec_before = slurp(one / "rec.csv");
    const std::string map_before = slurp(one / "M.txt");
    golden_path(two.path(), "8");
    for (const char* name : {"rec.csv", "rec.meta.csv", "M.txt", "B.txt", "F.txt", "run/trajectory.csv",
                             "run/features.csv", "run/cycles.csv", "run/run.txt", "run/error_report.csv"}) {
        CHECK_MESSAGE(slurp(one / name) == slurp(two / name), name);
    }
    REQUIRE(run({"analyze", "--out-dir", (one / "run").string(), "--out-dir", (two / "run").string(),
                 "--report", (one / "both.csv").string()})
                .code == 0);
    const std::string both = slurp(one / "both.csv");
    CHECK(both.find("experiment2/amplitude_error_deg,hip,") != std::string::npos);
    CHECK(slurp(one / "rec.csv") == rec_before);
    CHECK(slurp(one / "M.txt") == map_before);
}
