#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "satuav/cli.hpp"
#include "satuav/sim.hpp"

using namespace satuav;
namespace fs = std::filesystem;

namespace {

struct CliRun {
    int code;
    std::string out;
    std::string err;
};

CliRun cli(std::vector<std::string> args) {
    args.insert(args.begin(), "satuav");
    std::vector<const char *> argv;
    for (const auto &a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        root_ = fs::temp_directory_path() /
                ("satuav_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(root_);
        fs::create_directories(root_);
        write("small.json", R"({
  "rng_seed": 3,
  "data_size": 5e6,
  "devices": [{"id": 1, "position": [150, 200, 0]}, {"id": 2, "position": [400, 100, 0]}],
  "planner": {"dqn": {"hidden_width": 16, "stage_distances": [40, 20], "episodes_per_stage": 10,
                      "minibatch": 16, "d_max": 40}}
})");
        write("trend.json", R"({
  "rng_seed": 7,
  "data_size": 5e6,
  "devices": [{"id": 1, "position": [150, 200, 0]}, {"id": 2, "position": [400, 100, 0]}],
  "control": {"state_noise_cov_diag": [2.5e-5, 2.5e-5, 2.5e-5, 2.5e-6, 2.5e-6, 2.5e-6],
              "instability_factor": 1.05},
  "planner": {"reference_fraction": 0.6}
})");
    }
    void TearDown() override { fs::remove_all(root_); }

    void write(const std::string &name, const std::string &text) {
        std::ofstream(root_ / name) << text;
    }
    std::string path(const std::string &name) const { return (root_ / name).string(); }

    fs::path root_;
};

std::vector<std::vector<std::string>> read_csv(const fs::path &p) {
    std::vector<std::vector<std::string>> rows;
    std::ifstream in(p);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string c;
        while (std::getline(ss, c, ',')) cells.push_back(c);
        rows.push_back(cells);
    }
    return rows;
}

std::size_t column(const std::vector<std::string> &header, const std::string &name) {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    ADD_FAILURE() << "no column " << name;
    return 0;
}

// metric_value of one (axis_value, metric) pair in a sweep CSV
double sweep_metric(const std::vector<std::vector<std::string>> &rows, double value,
                    const std::string &metric) {
    const auto &h = rows.at(0);
    const std::size_t v = column(h, "axis_value"), m = column(h, "metric"), x = column(h, "metric_value");
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (std::stod(rows[i][v]) == value && rows[i][m] == metric) return std::stod(rows[i][x]);
    ADD_FAILURE() << "no row " << value << " " << metric;
    return 0.0;
}

} // namespace

TEST_F(CliTest, MissingConfigIsUsageError) {
    EXPECT_EQ(cli({"simulate", "--out", path("o"), "--oracle"}).code, kExitUsage);
    EXPECT_EQ(cli({}).code, kExitUsage);
    EXPECT_EQ(cli({"bogus"}).code, kExitUsage);
}

TEST_F(CliTest, InvalidConfigIsConfigError) {
    write("bad.json", R"({"data_size": -1})");
    const CliRun r = cli({"simulate", "--config", path("bad.json"), "--out", path("o"), "--oracle"});
    EXPECT_EQ(r.code, kExitConfig);
    EXPECT_NE(r.err.find("data_size"), std::string::npos);
    EXPECT_EQ(cli({"simulate", "--config", path("none.json"), "--out", path("o"), "--oracle"}).code, kExitConfig);
}

TEST_F(CliTest, SimulateWithOracleWritesVersionedFiles) {
    const CliRun r = cli({"simulate", "--config", path("small.json"), "--out", path("sim"), "--oracle"});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    for (const char *f : {"manifest.json", "mission.csv", "sensing.csv", "result.json"})
        EXPECT_TRUE(fs::exists(root_ / "sim" / f)) << f;
    EXPECT_EQ(slurp(root_ / "sim" / "mission.csv").rfind("schema_version,", 0), 0u);
    EXPECT_EQ(slurp(root_ / "sim" / "sensing.csv").rfind("schema_version,", 0), 0u);
    const auto result = nlohmann::json::parse(slurp(root_ / "sim" / "result.json"));
    EXPECT_EQ(result.at("schema_version"), kSchemaVersion);
    const auto manifest = nlohmann::json::parse(slurp(root_ / "sim" / "manifest.json"));
    EXPECT_EQ(manifest.at("config_hash"), hex64(fnv1a64(slurp(root_ / "small.json"))));
    EXPECT_EQ(manifest.at("subcommand"), "simulate");
    EXPECT_EQ(manifest.at("seed"), 3);
}

TEST_F(CliTest, SimulateNeedsWeightsOrOracle) {
    EXPECT_EQ(cli({"simulate", "--config", path("small.json"), "--out", path("o")}).code, kExitUsage);
}

TEST_F(CliTest, ForcedIntervalFailsStabilityAudit) {
    const CliRun r = cli({"simulate", "--config", path("trend.json"), "--out", path("c7"), "--oracle",
                       "--force-sensing-interval", "60"});
    EXPECT_EQ(r.code, kExitAudit);
    const auto result = nlohmann::json::parse(slurp(root_ / "c7" / "result.json"));
    bool found = false;
    for (const auto &c : result.at("audit")) {
        if (c.at("constraint") == "C7") {
            EXPECT_EQ(c.at("pass"), false);
            EXPECT_GE(c.at("witness_slot").get<long>(), 0);
            found = true;
        }
    }
    EXPECT_TRUE(found);
}

TEST_F(CliTest, ReplayIsByteIdentical) {
    ASSERT_EQ(cli({"simulate", "--config", path("small.json"), "--out", path("a"), "--oracle", "--seed", "9"}).code,
              kExitOk);
    ASSERT_EQ(cli({"replay", "--manifest", path("a/manifest.json"), "--out", path("b")}).code, kExitOk);
    for (const char *f : {"mission.csv", "sensing.csv"})
        EXPECT_EQ(slurp(root_ / "a" / f), slurp(root_ / "b" / f)) << f;

    write("small.json", slurp(root_ / "small.json") + " ");
    EXPECT_NE(cli({"replay", "--manifest", path("a/manifest.json"), "--out", path("c")}).code, kExitOk);
}

TEST_F(CliTest, TrainingIsReproducibleAndRunningMinimumFalls) {
    ASSERT_EQ(cli({"train", "--config", path("small.json"), "--out", path("t1")}).code, kExitOk);
    ASSERT_EQ(cli({"train", "--config", path("small.json"), "--out", path("t2")}).code, kExitOk);
    EXPECT_EQ(slurp(root_ / "t1" / "training_log.csv"), slurp(root_ / "t2" / "training_log.csv"));
    EXPECT_EQ(slurp(root_ / "t1" / "weights.json"), slurp(root_ / "t2" / "weights.json"));

    const auto rows = read_csv(root_ / "t1" / "training_log.csv");
    ASSERT_EQ(rows.size(), 21u);
    const std::size_t stage = column(rows[0], "stage"), run_min = column(rows[0], "running_min_energy");
    for (std::size_t i = 2; i < rows.size(); ++i) {
        if (rows[i][stage] != rows[i - 1][stage]) continue;
        EXPECT_LE(std::stod(rows[i][run_min]), std::stod(rows[i - 1][run_min]));
    }

    const CliRun r = cli({"plan", "--config", path("small.json"), "--out", path("p"), "--weights",
                       path("t1/weights.json")});
    EXPECT_NE(r.code, kExitUsage) << r.err;
}

TEST_F(CliTest, SingleValueSweepMatchesSimulate) {
    ASSERT_EQ(cli({"simulate", "--config", path("small.json"), "--out", path("s"), "--oracle"}).code, kExitOk);
    ASSERT_EQ(cli({"sweep", "--config", path("small.json"), "--out", path("w"), "--oracle", "--axis", "data_size",
                   "--values", "5e6"})
                  .code,
              kExitOk);
    const auto rows = read_csv(root_ / "w" / "sweep.csv");
    const auto result = nlohmann::json::parse(slurp(root_ / "s" / "result.json"));
    EXPECT_EQ(sweep_metric(rows, 5e6, "ee"), result.at("ee").get<double>());
    EXPECT_EQ(sweep_metric(rows, 5e6, "total_energy"), result.at("energy").at("total").get<double>());
    EXPECT_EQ(sweep_metric(rows, 5e6, "audit_pass"), 1.0);
}

TEST_F(CliTest, SweepFailsOnlyWhenEveryRowFails) {
    EXPECT_EQ(cli({"sweep", "--config", path("small.json"), "--out", path("w1"), "--oracle", "--axis", "p_max",
                   "--values", "-1,10"})
                  .code,
              kExitOk);
    EXPECT_EQ(cli({"sweep", "--config", path("small.json"), "--out", path("w2"), "--oracle", "--axis", "p_max",
                   "--values", "-1,-2"})
                  .code,
              kExitRuntime);
    EXPECT_EQ(cli({"sweep", "--config", path("small.json"), "--out", path("w3"), "--oracle", "--axis", "speed",
                   "--values", "1"})
                  .code,
              kExitUsage);
}

TEST_F(CliTest, LambdaSweepSensingNonDecreasing) {
    ASSERT_EQ(cli({"sweep", "--config", path("trend.json"), "--out", path("l"), "--oracle", "--axis", "lambda",
                   "--values", "1.0,1.05,1.10"})
                  .code,
              kExitOk);
    const auto rows = read_csv(root_ / "l" / "sweep.csv");
    const double s1 = sweep_metric(rows, 1.0, "sensing_total"), s2 = sweep_metric(rows, 1.05, "sensing_total"),
                 s3 = sweep_metric(rows, 1.10, "sensing_total");
    EXPECT_LE(s1, s2);
    EXPECT_LE(s2, s3);
}

TEST(CliHash, Fnv1aKnownValues) {
    EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
    EXPECT_EQ(hex64(fnv1a64("a")), "af63dc4c8601ec8c");
}
