// Copyright 2026 The sqbsm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "json.hpp"
#include "sqbsm/emit.hpp"

#ifndef SQBSM_CLI_PATH
#error "SQBSM_CLI_PATH must point at the sqbsm executable"
#endif

namespace sqbsm {
namespace {

namespace fs = std::filesystem;

struct Run {
    int code;
    std::string out;
};

Run run(const std::string &args) {
    const auto *info = ::testing::UnitTest::GetInstance()->current_test_info();
    const fs::path out = fs::temp_directory_path() / (std::string("sqbsm_cli_") + info->name() + ".out");
    const std::string cmd = std::string(SQBSM_CLI_PATH) + " --quiet " + args + " > " + out.string() + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    std::ifstream f(out);
    std::stringstream ss;
    ss << f.rdbuf();
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

TEST(Cli, TableJson) {
    const auto r = run("--format json table --r 0.6");
    ASSERT_EQ(r.code, 0);
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["labels"].size(), 4u);
    EXPECT_EQ(j["params"]["n_max"], "inf");
}

TEST(Cli, DiscriminateCsv) {
    const auto r = run("discriminate --r 0 --nmax 2 --pe-max 0,0.1");
    ASSERT_EQ(r.code, 0);
    std::istringstream is(r.out);
    const auto pts = read_points_csv(is);
    ASSERT_EQ(pts.size(), 2u);
    EXPECT_NEAR(pts[0].p_s, 0.5, 1e-12);
    EXPECT_EQ(pts[1].pe_max, 0.1);
}

TEST(Cli, DiscriminateFromTableFile) {
    for (const std::string fmt : {"json", "csv"}) {
        const fs::path table = fs::temp_directory_path() / ("sqbsm_cli_table." + fmt);
        ASSERT_EQ(run("--format " + fmt + " -o " + table.string() + " table --r 0.6 --nmax 4").code, 0);
        const auto from_file = run("--format json discriminate --table " + table.string() + " --pe-max 0.001");
        const auto direct = run("--format json discriminate --r 0.6 --nmax 4 --pe-max 0.001");
        ASSERT_EQ(from_file.code, 0) << fmt;
        const auto a = nlohmann::json::parse(from_file.out)["results"][0];
        const auto b = nlohmann::json::parse(direct.out)["results"][0];
        EXPECT_NEAR(a["p_s"].get<double>(), b["p_s"].get<double>(), 1e-12) << fmt;
        EXPECT_NEAR(a["p_e"].get<double>(), b["p_e"].get<double>(), 1e-12) << fmt;
    }
    EXPECT_EQ(run("discriminate --table /nonexistent/table.json").code, 2);
}

TEST(Cli, OracleFlag) {
    const auto greedy = run("--format json discriminate --r 0.6 --nmax 3 --pe-max 0.01");
    const auto oracle = run("--format json discriminate --r 0.6 --nmax 3 --pe-max 0.01 --oracle");
    ASSERT_EQ(greedy.code, 0);
    ASSERT_EQ(oracle.code, 0);
    const auto g = nlohmann::json::parse(greedy.out)["results"][0]["p_s"].get<double>();
    const auto o = nlohmann::json::parse(oracle.out)["results"][0]["p_s"].get<double>();
    EXPECT_GE(o, g - 1e-15);
}

TEST(Cli, SweepIsDeterministic) {
    const std::string args = "usd-sweep --r-grid 0:0.9:0.1 --nmax 3,inf";
    const auto a = run("--threads 1 " + args);
    const auto b = run("--threads 3 " + args);
    ASSERT_EQ(a.code, 0);
    EXPECT_EQ(a.out, b.out);
    EXPECT_EQ(a.out.substr(0, kPointCsvHeader.size()), kPointCsvHeader);
}

TEST(Cli, SingularToggle) {
    const auto with = run("usd-sweep --r-grid 0.6:0.7:0.1");
    const auto without = run("usd-sweep --r-grid 0.6:0.7:0.1 --no-include-singular");
    ASSERT_EQ(with.code, 0);
    ASSERT_EQ(without.code, 0);
    EXPECT_EQ(std::count(with.out.begin(), with.out.end(), '\n'), 4);
    EXPECT_EQ(std::count(without.out.begin(), without.out.end(), '\n'), 3);
}

TEST(Cli, EnvelopeAndSvg) {
    const auto env = run("envelope --r-grid 0:0.9:0.1 --nmax 5 --pe-max 0,0.01,0.1");
    ASSERT_EQ(env.code, 0);
    EXPECT_EQ(env.out.rfind(std::string(kEnvelopeCsvHeader), 0), 0u);
    const auto svg = run("--format svg psd-sweep --r-grid 0:0.9:0.1 --nmax 5 --pe-max 0,0.1");
    ASSERT_EQ(svg.code, 0);
    EXPECT_EQ(svg.out.rfind("<svg", 0), 0u);
}

TEST(Cli, ConfigFile) {
    const fs::path cfg = fs::temp_directory_path() / "sqbsm_cli_test.toml";
    {
        std::ofstream f(cfg);
        f << "format = \"json\"\n[table]\nr = 0.3\nnmax = \"5\"\n";
    }
    const auto r = run("--config " + cfg.string() + " table");
    ASSERT_EQ(r.code, 0);
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["params"]["n_max"], "5");
    EXPECT_EQ(j["params"]["r"][0].get<double>(), 0.3);
    // command line wins over the file
    const auto o = run("--config " + cfg.string() + " table --r 0.4");
    EXPECT_EQ(nlohmann::json::parse(o.out)["params"]["r"][0].get<double>(), 0.4);
    fs::remove(cfg);
}

TEST(Cli, InvalidSpecExitsTwo) {
    EXPECT_EQ(run("usd-sweep --r-grid 0:1.5:0.1").code, 2);
    EXPECT_EQ(run("usd-sweep --r-grid 0:0.5:0").code, 2);
    EXPECT_EQ(run("table --r 2").code, 2);
    EXPECT_EQ(run("table --nmax -3").code, 2);
    EXPECT_EQ(run("psd-sweep --eta 1.3").code, 2);
    EXPECT_EQ(run("--format svg table").code, 2);
    EXPECT_EQ(run("figures fig2").code, 2);
    EXPECT_EQ(run("bogus").code, 2);
    EXPECT_EQ(run("").code, 2);
}

TEST(Cli, UnwritablePathFails) {
    EXPECT_EQ(run("--out /proc/nonexistent/dir/x.csv table --r 0.1").code, 1);
}

}  // namespace
}  // namespace sqbsm
