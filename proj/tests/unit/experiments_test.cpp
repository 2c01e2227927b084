#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "zzsim/experiments.hpp"

using namespace zzsim;

TEST(Matrix, DefaultCoversThirtySixPairs) {
  const auto all = ExperimentMatrix{}.expand();
  EXPECT_EQ(all.size(), 3u * 3u * 2u * 2u);
  std::set<std::string> ids;
  for (const auto& s : all) {
    ids.insert(run_id(s));
    EXPECT_EQ(s.policy, Policy::Baseline);
    EXPECT_FALSE(s.loss.kind == LossKind::Gilbert && s.loss.p == 0.1 && s.loss.q == 0.4);
  }
  EXPECT_EQ(ids.size(), all.size());
}

TEST(Matrix, UniformCellsUseStationaryRate) {
  ExperimentMatrix m;
  m.loss_kinds = {LossKind::Uniform};
  m.couples = {{0.01, 0.5}};
  m.flow_counts = {5};
  m.aggregate_rates_bps = {1.0e6};
  const auto s = m.expand();
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].loss.kind, LossKind::Uniform);
  EXPECT_DOUBLE_EQ(s[0].loss.plr, 0.01 / 0.51);
}

TEST(Matrix, ParsesLists) {
  const auto m = parse_matrix(
      "flow_counts = 5, 10\ncouples = 0.01:0.5\naggregate_rates_bps = 1.5e6\n"
      "loss_kinds = gilbert\nseeds = 1,2,3\nqueue_capacity_pkts = 30\n");
  const auto s = m.expand();
  EXPECT_EQ(s.size(), 2u * 3u);
  for (const auto& x : s) EXPECT_EQ(x.queue_capacity_pkts, 30u);
  EXPECT_EQ(run_id(s[0]), "f5_gilbert_p0.01_q0.5_r1500000_s1");
}

TEST(Matrix, EmptyListGivesEmptyMatrix) {
  EXPECT_TRUE(parse_matrix("flow_counts =\n").expand().empty());
}

TEST(Matrix, Errors) {
  EXPECT_THROW(parse_matrix("couples = 0.1\n"), ConfigError);
  EXPECT_THROW(parse_matrix("policy = zigzag\n"), ConfigError);
  EXPECT_THROW(parse_matrix("loss_kinds = rayleigh\n"), ConfigError);
  EXPECT_THROW(parse_matrix("nonsense = 1\n"), ConfigError);
  EXPECT_THROW(parse_matrix("couples = 0.1:0\n").expand(), ConfigError);
}

namespace {

std::vector<Scenario> small_matrix() {
  ExperimentMatrix m;
  m.flow_counts = {1, 5};
  m.couples = {{0.01, 0.5}, {0.1, 0.6}};
  m.aggregate_rates_bps = {1.0e6};
  m.base.duration_s = 60.0;
  m.base.warmup_s = 20.0;
  return m.expand();
}

}  // namespace

TEST(RunPair, SharesSeedAndScenario) {
  auto s = small_matrix()[0];
  const auto pair = run_pair(s);
  EXPECT_EQ(pair.baseline.scenario.policy, Policy::Baseline);
  EXPECT_EQ(pair.zigzag.scenario.policy, Policy::ZigZag);
  EXPECT_TRUE(pair.baseline.scenario.same_experiment(pair.zigzag.scenario));
  EXPECT_EQ(pair.row.baseline.wireless_events, 0u);
}

TEST(RunMatrix, ParallelEqualsSerial) {
  const auto scenarios = small_matrix();
  const auto serial = run_matrix(scenarios, 1);
  const auto parallel = run_matrix(scenarios, 4);
  ASSERT_TRUE(serial.ok());
  ASSERT_TRUE(parallel.ok());
  ASSERT_EQ(serial.rows.size(), parallel.rows.size());
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    ASSERT_TRUE(serial.rows[i] && parallel.rows[i]);
    EXPECT_EQ(serial.rows[i]->baseline.mean_throughput_bps, parallel.rows[i]->baseline.mean_throughput_bps);
    EXPECT_EQ(serial.rows[i]->zigzag.mean_throughput_bps, parallel.rows[i]->zigzag.mean_throughput_bps);
    EXPECT_EQ(serial.rows[i]->zigzag.wireless_events, parallel.rows[i]->zigzag.wireless_events);
  }
}

TEST(RunMatrix, CallbackSeesEveryPairOnce) {
  const auto scenarios = small_matrix();
  std::vector<int> seen(scenarios.size(), 0);
  run_matrix(scenarios, 3, {}, [&](std::size_t i, const PairResult& p) {
    ++seen[i];
    EXPECT_TRUE(p.baseline.scenario.same_experiment(scenarios[i]));
  });
  EXPECT_TRUE(std::all_of(seen.begin(), seen.end(), [](int n) { return n == 1; }));
}

TEST(RunMatrix, FailuresAreListedAndOthersKept) {
  auto scenarios = small_matrix();
  scenarios[1].warmup_s = 1000.0;  // invalid
  const auto out = run_matrix(scenarios, 2);
  ASSERT_EQ(out.failures.size(), 1u);
  EXPECT_EQ(out.failures[0].first, 1u);
  EXPECT_FALSE(out.rows[1].has_value());
  EXPECT_TRUE(out.rows[0].has_value());
  EXPECT_TRUE(out.rows[2].has_value());
}

TEST(RunMatrix, EmptyInput) {
  const auto out = run_matrix({}, 4);
  EXPECT_TRUE(out.ok());
  EXPECT_TRUE(out.rows.empty());
}

TEST(ValidateLoss, HighLossCouple) {
  const auto r = validate_loss_model(0.1, 0.6, 1000000, 1);
  EXPECT_TRUE(r.ok());
  EXPECT_NEAR(r.analytic_plr, 0.1 / 0.7, 1e-15);
  EXPECT_NEAR(r.stats.plr, 0.1429, 0.005);
  ASSERT_TRUE(r.reference_measured_plr.has_value());
  EXPECT_DOUBLE_EQ(*r.reference_measured_plr, 0.1394);
  EXPECT_LE(std::abs(r.reference_z), 3.0);
}

TEST(ValidateLoss, AbsorbingGoodIsExactlyZero) {
  const auto r = validate_loss_model(0.0, 0.6, 1000000, 1);
  EXPECT_EQ(r.stats.plr, 0.0);
  EXPECT_TRUE(r.ok());
  EXPECT_FALSE(r.reference_measured_plr.has_value());
}

TEST(ValidateLoss, MeanBurstNearTwo) {
  const auto r = validate_loss_model(0.01, 0.5, 1000000, 1);
  EXPECT_NEAR(r.stats.mean_burst, 2.0, 0.1);
  EXPECT_TRUE(r.ok());
}

TEST(ValidateLoss, Preconditions) {
  EXPECT_THROW(validate_loss_model(1.2, 0.5, 1000000, 1), std::invalid_argument);
  EXPECT_THROW(validate_loss_model(0.1, 0.0, 1000000, 1), std::invalid_argument);
  EXPECT_THROW(validate_loss_model(0.1, 0.5, 99999, 1), std::invalid_argument);
}

TEST(ValidateLoss, ReportText) {
  std::ostringstream out;
  print_loss_report(out, validate_loss_model(0.1, 0.4, 100000, 3));
  EXPECT_NE(out.str().find("reference sample 19.8000%"), std::string::npos);
}

TEST(TraceAudit, FlagsUnexplainedReductions) {
  std::vector<ControllerTraceRecord> t{
      {1.0, 0, 4.0, Phase::SlowStart, TraceEventType::Ack, std::nullopt, 0, 0.3, 0.3, 0.0},
      {2.0, 0, 2.0, Phase::CongestionAvoidance, TraceEventType::Loss, LossClass::Congestion, 1, 0.3, 0.3, 0.0},
      {3.0, 0, 1.5, Phase::CongestionAvoidance, TraceEventType::Ack, std::nullopt, 0, 0.3, 0.3, 0.0},
      {4.0, 0, 1.0, Phase::CongestionAvoidance, TraceEventType::Loss, LossClass::Wireless, 1, 0.3, 0.3, 0.0},
  };
  EXPECT_EQ(count_reduction_violations(t, Policy::ZigZag, 1, 2.0), 2u);
  EXPECT_EQ(count_reduction_violations(t, Policy::Baseline, 1, 2.0), 1u);
}
