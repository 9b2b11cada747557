// Drives the earfit executable end to end. EARFIT_CLI is the path of the binary.
#include "earfit/io.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <filesystem>
#include <fstream>
#include <string>

using namespace earfit;
namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
    const std::string cmd = std::string(EARFIT_CLI) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("earfit_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write_text(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

const char* kParams = R"({
  "medium": {"density": 1.2, "speed_of_sound": 343},
  "area": {"S0": 6e-5, "cos": [3e-6], "sin": [1e-6], "length": 0.027},
  "eardrum": {"L01": 153, "dL": 4, "Q1": 1.1, "Q2": 1.5, "f01": 1000, "f02": 3500, "V": 2.62e-8}
})";

const char* kQuickConfig = R"({
  "order": 1,
  "multistart": {"n_starts": 2, "restarts": 0, "seed": 4},
  "optimizer": {"evals_per_dimension": 40}
})";

} // namespace

TEST(Cli, UsageErrors) {
    EXPECT_EQ(run(""), 2);
    EXPECT_EQ(run("frobnicate"), 2);
    EXPECT_EQ(run("simulate"), 2);
    EXPECT_EQ(run("simulate --params /nonexistent.json"), 2);
    EXPECT_EQ(run("--help"), 0);
}

TEST(Cli, SimulateWritesSpectra) {
    const auto dir = scratch("simulate");
    write_text(dir / "p.json", kParams);
    ASSERT_EQ(run("simulate --params " + (dir / "p.json").string() + " -o " + (dir / "out").string()), 0);
    const auto zin = io::read_spectrum(dir / "out" / "zin.csv", SpectrumKind::input);
    const auto ztr = io::read_spectrum(dir / "out" / "ztr.csv", SpectrumKind::transfer);
    EXPECT_EQ(zin.size(), 200u);
    EXPECT_EQ(ztr.frequencies().front(), 100.0);
    EXPECT_EQ(ztr.frequencies().back(), 20000.0);

    ASSERT_EQ(run("simulate --params " + (dir / "p.json").string() + " -o " + (dir / "few").string() +
                  " --f-start 500 --f-end 1500 --count 3"),
              0);
    EXPECT_EQ(io::read_spectrum(dir / "few" / "zin.csv", SpectrumKind::input).frequencies()[1], 1000.0);
}

TEST(Cli, SimulateBadParameters) {
    const auto dir = scratch("simulate_bad");
    write_text(dir / "p.json", R"({"area": {"S0": 6e-5, "cos": [1, 2], "sin": [0], "length": 0.03}})");
    EXPECT_EQ(run("simulate --params " + (dir / "p.json").string() + " -o " + dir.string()), 2);
    write_text(dir / "broken.json", "{");
    EXPECT_EQ(run("simulate --params " + (dir / "broken.json").string() + " -o " + dir.string()), 2);
    // zero cross-section everywhere makes the FEM system singular
    write_text(dir / "zero.json", R"({"area": {"S0": 0, "cos": [0], "sin": [0], "length": 0.03}})");
    EXPECT_EQ(run("simulate --params " + (dir / "zero.json").string() + " -o " + dir.string()), 3);
}

TEST(Cli, OracleOmitsPoles) {
    const auto dir = scratch("oracle");
    // poles of cot(k l) at multiples of c / (2 l) = 5000 Hz
    ASSERT_EQ(run("oracle --length 0.0343 -o " + (dir / "o.csv").string()), 0);
    std::ifstream in(dir / "o.csv");
    std::string line;
    int omitted = 0;
    while (std::getline(in, line))
        if (line.rfind("# omitted", 0) == 0)
            ++omitted;
    EXPECT_EQ(omitted, 4);
    const auto s = io::read_spectrum(dir / "o.csv", SpectrumKind::input);
    EXPECT_EQ(s.size(), 196u);
    const Complex ref = oracle::rigid_cylinder_zin(6e-5, 0.0343, 1.2, 343.0, 1000.0);
    EXPECT_NEAR(std::abs(s.at(1000.0) - ref), 0.0, 1e-9 * std::abs(ref));
    EXPECT_EQ(run("oracle --kind horn -o " + (dir / "x.csv").string()), 2);
    EXPECT_EQ(run("oracle --area -1 -o " + (dir / "x.csv").string()), 2);
}

TEST(Cli, FitAndValidateRoundTrip) {
    const auto dir = scratch("roundtrip");
    write_text(dir / "p.json", kParams);
    write_text(dir / "cfg.json", kQuickConfig);
    ASSERT_EQ(run("simulate --params " + (dir / "p.json").string() + " -o " + (dir / "data").string()), 0);
    ASSERT_EQ(run("fit --data " + (dir / "data" / "zin.csv").string() + " --config " +
                  (dir / "cfg.json").string() + " -o " + (dir / "fit").string()),
              0);
    for (const char* f : {"report.json", "fit_zin.csv", "fit_ztr.csv", "area.csv"})
        EXPECT_TRUE(fs::exists(dir / "fit" / f)) << f;
    const auto report = io::read_json(dir / "fit" / "report.json");
    EXPECT_EQ(report["starts"].size(), 2u);
    EXPECT_EQ(report["parameters"]["area"]["cos"].size(), 1u);

    // serial flag and seed override give the same winner as the config seed
    ASSERT_EQ(run("fit --data " + (dir / "data" / "zin.csv").string() + " --config " +
                  (dir / "cfg.json").string() + " --serial --seed 4 -o " + (dir / "fit_serial").string()),
              0);
    const auto serial = io::read_json(dir / "fit_serial" / "report.json");
    EXPECT_EQ(serial["parameters"], report["parameters"]);

    ASSERT_EQ(run("validate --report " + (dir / "fit" / "report.json").string() + " --reference " +
                  (dir / "data" / "ztr.csv").string() + " --report " + (dir / "fit_serial" / "report.json").string() +
                  " --reference " + (dir / "data" / "ztr.csv").string() + " -o " + (dir / "val").string()),
              0);
    const auto val = io::read_json(dir / "val" / "validation.json");
    ASSERT_EQ(val["pairs"].size(), 2u);
    EXPECT_TRUE(std::isfinite(val["pairs"][0]["jval"].get<double>()));
    EXPECT_TRUE(fs::exists(dir / "val" / "summary.csv"));
    EXPECT_TRUE(fs::exists(dir / "val" / "validation_1.csv"));
}

TEST(Cli, FitInputErrors) {
    const auto dir = scratch("fit_errors");
    write_text(dir / "p.json", kParams);
    ASSERT_EQ(run("simulate --params " + (dir / "p.json").string() + " -o " + dir.string() +
                  " --f-end 5000 --count 50"),
              0);
    // data ends at 5 kHz, below the 10 kHz cap
    EXPECT_EQ(run("fit --data " + (dir / "zin.csv").string() + " -o " + (dir / "f").string()), 2);
    EXPECT_EQ(run("fit --data " + (dir / "zin.csv").string() + " --f-cap 15000 -o " + (dir / "f").string()), 2);
    EXPECT_EQ(run("fit --data " + (dir / "zin.csv").string() + " -M 9 -o " + (dir / "f").string()), 2);
    write_text(dir / "cfg.json", R"({"weights": {"A": -1}})");
    EXPECT_EQ(run("fit --data " + (dir / "zin.csv").string() + " --config " + (dir / "cfg.json").string() +
                  " -o " + (dir / "f").string()),
              2);
    EXPECT_EQ(run("validate --report " + (dir / "p.json").string() + " --reference " +
                  (dir / "ztr.csv").string() + " -o " + (dir / "v").string()),
              2);
}
