#include <gtest/gtest.h>

#include "zzsim/scenario.hpp"

using namespace zzsim;

namespace {

std::string field_of(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

}  // namespace

TEST(Scenario, Defaults) {
  Scenario s;
  EXPECT_EQ(s.flow_count, 1u);
  EXPECT_DOUBLE_EQ(s.topology.bottleneck_bps(), 1.3e6);
  EXPECT_DOUBLE_EQ(s.duration_s, 500.0);
  EXPECT_DOUBLE_EQ(s.warmup_s, 100.0);
  EXPECT_EQ(s.seed, 1u);
  EXPECT_EQ(s.queue_capacity_pkts, 50u);
  EXPECT_EQ(s.packet_size_bytes, 1000u);
  EXPECT_NO_THROW(validate(s));
}

TEST(Scenario, ParsesKeyValues) {
  const auto cfg = parse_scenario(
      "# comment\n"
      "flow_count = 5\n"
      "aggregate_rate_bps = 1.5e6\n"
      "loss.kind = gilbert\nloss.p = 0.01\nloss.q = 0.5\n"
      "policy = zigzag\nseed = 42\napp_buffer_pkts = unbounded\n"
      "initial_ssthresh_pkts = inf\nlarge_burst_rule = congestion\n");
  EXPECT_FALSE(cfg.paired);
  EXPECT_EQ(cfg.scenario.flow_count, 5u);
  EXPECT_DOUBLE_EQ(cfg.scenario.per_flow_rate_bps(), 3.0e5);
  EXPECT_EQ(cfg.scenario.loss, LossSpec::gilbert(0.01, 0.5));
  EXPECT_EQ(cfg.scenario.policy, Policy::ZigZag);
  EXPECT_EQ(cfg.scenario.seed, 42u);
  EXPECT_FALSE(cfg.scenario.app_buffer_pkts.has_value());
  EXPECT_EQ(cfg.scenario.large_burst, LargeBurstRule::AlwaysCongestion);
}

TEST(Scenario, PairedPolicy) { EXPECT_TRUE(parse_scenario("policy = paired\n").paired); }

TEST(Scenario, FieldLevelErrors) {
  EXPECT_EQ(field_of("alpha = 0.6\n"), "alpha");
  EXPECT_EQ(field_of("flow_count = 0\n"), "flow_count");
  EXPECT_EQ(field_of("flow_count = many\n"), "flow_count");
  EXPECT_EQ(field_of("duration_s = 50\n"), "duration_s");
  EXPECT_EQ(field_of("bogus = 1\n"), "bogus");
  EXPECT_EQ(field_of("seed = 1\nseed = 2\n"), "seed");
  EXPECT_EQ(field_of("loss.kind = gilbert\nloss.p = 0.1\nloss.q = 0\n"), "loss.q");
  EXPECT_EQ(field_of("loss.kind = uniform\nloss.plr = 2\n"), "loss.plr");
  EXPECT_EQ(field_of("policy = reno\n"), "policy");
  EXPECT_EQ(field_of("just text\n"), "line 1");
}

TEST(Scenario, MalformedLineIsRejected) {
  EXPECT_THROW(parse_scenario("just text\n"), ConfigError);
}

TEST(Scenario, RoundTripsThroughKeyValues) {
  Scenario s;
  s.flow_count = 10;
  s.aggregate_rate_bps = 1.5e6;
  s.loss = LossSpec::uniform(0.01 / 0.51);
  s.policy = Policy::ZigZag;
  s.app_buffer_pkts.reset();
  s.seed = 99;
  EXPECT_EQ(parse_scenario(to_key_values(s)).scenario, s);
}

TEST(Scenario, SameExperimentIgnoresPolicy) {
  Scenario a, b;
  b.policy = Policy::ZigZag;
  EXPECT_TRUE(a.same_experiment(b));
  b.seed = 2;
  EXPECT_FALSE(a.same_experiment(b));
}

TEST(LossSpec, NominalRates) {
  EXPECT_NEAR(LossSpec::gilbert(0.01, 0.5).nominal_plr(), 0.01 / 0.51, 1e-15);
  EXPECT_DOUBLE_EQ(LossSpec::uniform(0.0192).nominal_plr(), 0.0192);
  EXPECT_EQ(LossSpec::none().nominal_plr(), 0.0);
  EXPECT_FALSE(LossSpec::none().make_model().enabled());
}

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(1.5e6), "1500000");
  EXPECT_EQ(format_double(std::numeric_limits<double>::infinity()), "inf");
  const double x = 0.01 / 0.51;
  EXPECT_EQ(std::stod(format_double(x)), x);
}
