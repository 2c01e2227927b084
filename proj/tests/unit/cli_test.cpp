#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const std::string kCli = ZZSIM_CLI_PATH;
const fs::path kSamples = ZZSIM_SAMPLES_DIR;

int run_cli(const std::string& args) {
  const std::string cmd = "\"" + kCli + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / ("zzsim_cli_" + std::string(info->name()) + "_" +
                                        std::to_string(::getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const std::string& text) {
    const auto p = dir_ / name;
    std::ofstream(p) << text;
    return p;
  }

  fs::path dir_;
};

const char* kShortPair =
    "flow_count = 5\nloss.kind = gilbert\nloss.p = 0.01\nloss.q = 0.5\n"
    "policy = paired\nduration_s = 60\nwarmup_s = 20\nseed = 3\n";

}  // namespace

TEST_F(CliTest, ReferenceConfigRunsFullHorizon) {
  ASSERT_EQ(run_cli("run --config " + (kSamples / "reference.cfg").string() + " --out " + (dir_ / "o").string()),
            0);
  for (auto name : {"summary.csv", "baseline_timeseries.csv", "zigzag_timeseries.csv",
                    "zigzag_controller_trace.csv", "baseline_deliveries.csv", "zigzag_drops.csv"}) {
    EXPECT_TRUE(fs::exists(dir_ / "o" / name)) << name;
  }
  const auto series = slurp(dir_ / "o" / "zigzag_timeseries.csv");
  EXPECT_NE(series.find("\n499.000,all,"), std::string::npos);
  const auto summary = slurp(dir_ / "o" / "summary.csv");
  EXPECT_EQ(std::count(summary.begin(), summary.end(), '\n'), 2);
}

TEST_F(CliTest, RepeatedRunsAreByteIdentical) {
  const auto cfg = write("pair.cfg", kShortPair);
  ASSERT_EQ(run_cli("run --config " + cfg.string() + " --out " + (dir_ / "a").string() + " --event-log " +
                    (dir_ / "a.log").string()),
            0);
  ASSERT_EQ(run_cli("run --config " + cfg.string() + " --out " + (dir_ / "b").string() + " --event-log " +
                    (dir_ / "b.log").string()),
            0);
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(dir_ / "a")) {
    EXPECT_EQ(slurp(e.path()), slurp(dir_ / "b" / e.path().filename())) << e.path().filename();
    ++files;
  }
  EXPECT_EQ(files, 9u);
  EXPECT_EQ(slurp(dir_ / "a.log"), slurp(dir_ / "b.log"));
  EXPECT_FALSE(slurp(dir_ / "a.log").empty());
}

TEST_F(CliTest, SinglePolicyRun) {
  const auto cfg = write("one.cfg", "policy = zigzag\nduration_s = 30\nwarmup_s = 10\nloss.kind = uniform\n"
                                    "loss.plr = 0.02\n");
  ASSERT_EQ(run_cli("run --config " + cfg.string() + " --out " + (dir_ / "o").string()), 0);
  EXPECT_TRUE(fs::exists(dir_ / "o" / "timeseries.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "o" / "controller_trace.csv"));
}

TEST_F(CliTest, ConfigErrorsExitOne) {
  EXPECT_EQ(run_cli("run --config " + write("bad.cfg", "alpha = 0.6\n").string() + " --out " +
                    (dir_ / "o").string()),
            1);
  EXPECT_EQ(run_cli("run --config " + (dir_ / "missing.cfg").string() + " --out " + (dir_ / "o").string()), 1);
  EXPECT_EQ(run_cli("run --out " + (dir_ / "o").string()), 1);
  EXPECT_EQ(run_cli("frobnicate"), 1);
  EXPECT_EQ(run_cli("validate-loss --p 0.1 --q 0.6 --n 1000"), 1);
  EXPECT_EQ(run_cli("validate-loss --p 1.5 --q 0.6"), 1);
}

TEST_F(CliTest, UnwritableOutputExitsTwo) {
  const auto blocker = write("file", "x");
  EXPECT_EQ(run_cli("run --config " + write("ok.cfg", kShortPair).string() + " --out " +
                    (blocker / "sub").string()),
            2);
}

TEST_F(CliTest, ValidateLoss) {
  EXPECT_EQ(run_cli("validate-loss --p 0.1 --q 0.6 --n 1000000 --seed 1"), 0);
  EXPECT_EQ(run_cli("validate-loss --p 0 --q 0.6 --n 1000000"), 0);
  const auto trace = dir_ / "trace.csv";
  EXPECT_EQ(run_cli("validate-loss --p 0.01 --q 0.5 --n 100000 --trace " + trace.string()), 0);
  const auto text = slurp(trace);
  EXPECT_EQ(text.substr(0, 20), "index,dropped,state\n");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 100001);
}

TEST_F(CliTest, ValidateLossToleranceFailureExitsThree) {
  // 10^5 packets of a rare-loss chain cannot pin the burst length to 5%.
  EXPECT_EQ(run_cli("validate-loss --p 0.0001 --q 0.05 --n 100000 --seed 1"), 3);
}

TEST_F(CliTest, MatrixWritesPairedRows) {
  const auto spec = write("m.matrix",
                          "flow_counts = 1, 5\ncouples = 0.01:0.5\naggregate_rates_bps = 1.0e6\n"
                          "loss_kinds = gilbert, uniform\nduration_s = 40\nwarmup_s = 10\n");
  ASSERT_EQ(run_cli("matrix --spec " + spec.string() + " --out " + (dir_ / "m1").string() + " --jobs 1"), 0);
  ASSERT_EQ(run_cli("matrix --spec " + spec.string() + " --out " + (dir_ / "m4").string() + " --jobs 4"), 0);
  const auto summary = slurp(dir_ / "m1" / "summary.csv");
  EXPECT_EQ(std::count(summary.begin(), summary.end(), '\n'), 5);
  EXPECT_EQ(summary, slurp(dir_ / "m4" / "summary.csv"));
  std::size_t run_dirs = 0;
  for (const auto& e : fs::directory_iterator(dir_ / "m1")) {
    if (!e.is_directory()) continue;
    ++run_dirs;
    EXPECT_TRUE(fs::exists(e.path() / "baseline_timeseries.csv"));
    EXPECT_TRUE(fs::exists(e.path() / "zigzag_controller_trace.csv"));
  }
  EXPECT_EQ(run_dirs, 4u);
}

TEST_F(CliTest, EmptyMatrix) {
  ASSERT_EQ(run_cli("matrix --spec " + (kSamples / "empty.matrix").string() + " --out " + (dir_ / "e").string()),
            0);
  const auto summary = slurp(dir_ / "e" / "summary.csv");
  EXPECT_EQ(std::count(summary.begin(), summary.end(), '\n'), 1);
}

TEST_F(CliTest, MatrixWithInvalidCellIsConfigError) {
  const auto spec = write("m.matrix",
                          "flow_counts = 1\ncouples = 0.01:0.5, 0.1:0\naggregate_rates_bps = 1.0e6\n"
                          "loss_kinds = gilbert\nduration_s = 30\nwarmup_s = 10\n");
  EXPECT_EQ(run_cli("matrix --spec " + spec.string() + " --out " + (dir_ / "m").string()), 1);
}
