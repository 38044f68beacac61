#include <gtest/gtest.h>

#include "satuav/scenario.hpp"

using namespace satuav;
using nlohmann::json;

namespace {

std::filesystem::path config(const char *name) { return std::filesystem::path(SATUAV_SOURCE_DIR) / "configs" / name; }

std::string error_field(const json &j) {
    try {
        scenario_from_json(j);
    } catch (const ConfigError &e) {
        return e.field();
    }
    return "";
}

} // namespace

TEST(Scenario, DefaultConfigMatchesTableValues) {
    const MissionScenario s = load_scenario(config("default.json"));
    EXPECT_DOUBLE_EQ(s.control.slot_length, 0.1);
    EXPECT_DOUBLE_EQ(s.control.v_max, 50.0);
    EXPECT_DOUBLE_EQ(s.control.u_max, 10.0);
    EXPECT_DOUBLE_EQ(s.channel.carrier_freq, 2e9);
    EXPECT_DOUBLE_EQ(s.channel.sat_bandwidth, 5e6);
    EXPECT_DOUBLE_EQ(s.channel.ground_bandwidth, 0.5e6);
    EXPECT_NEAR(s.channel.noise_power, 1e-14, 1e-26);
    EXPECT_NEAR(s.channel.ref_channel_gain, 1e-8, 1e-20);
    EXPECT_NEAR(s.channel.snr_threshold, 1.9952623149688795, 1e-12);
    EXPECT_DOUBLE_EQ(s.channel.sat_altitude, 1e6);
    EXPECT_DOUBLE_EQ(s.control.action_cost_weight(0, 0), 0.5);
    EXPECT_DOUBLE_EQ(s.control.state_noise_cov(0, 0), 1.0);
    EXPECT_DOUBLE_EQ(s.control.state_noise_cov(3, 3), 0.1);
    EXPECT_EQ(s.devices.size(), 10u);
}

TEST(Scenario, DefaultConfigEqualsBuiltInDefault) {
    const MissionScenario s = load_scenario(config("default.json"));
    MissionScenario d = default_scenario();
    // dB conversions are not bit-exact
    d.channel.noise_power = s.channel.noise_power;
    d.channel.ref_channel_gain = s.channel.ref_channel_gain;
    d.channel.snr_threshold = s.channel.snr_threshold;
    EXPECT_TRUE(s == d);
}

TEST(Scenario, MissingInstabilityFactorDefaultsToOne) {
    const MissionScenario s = scenario_from_json(json{{"control", {{"slot_length", 0.1}}}});
    EXPECT_DOUBLE_EQ(s.control.instability_factor, 1.0);
}

TEST(Scenario, NegativeDataSizeNamesField) { EXPECT_EQ(error_field(json{{"data_size", -1.0}}), "data_size"); }

TEST(Scenario, DuplicateVisitOrderRejected) {
    json j;
    j["devices"] = json::array({{{"id", 1}, {"position", {0, 0, 0}}}, {{"id", 2}, {"position", {100, 0, 0}}}});
    j["visit_order"] = {1, 1};
    EXPECT_EQ(error_field(j), "visit_order");
}

TEST(Scenario, NlosLossBelowLosIsRejected) {
    const MissionScenario s = [] {
        MissionScenario x = default_scenario();
        x.channel.excess_loss_nlos = 1.0;
        return x;
    }();
    EXPECT_FALSE(validate_scenario(s).empty());
    json j{{"channel", {{"excess_loss_nlos_db", 0.5}}}};
    EXPECT_FALSE(error_field(j).empty());
}

TEST(Scenario, WrongTypeNamesNestedField) {
    EXPECT_EQ(error_field(json{{"control", {{"v_max", "fast"}}}}), "control.v_max");
}

TEST(Scenario, RoundTripIsExact) {
    for (const char *name : {"default.json", "lambda_trend.json", "data_size_trend.json", "pmax_trend.json"}) {
        const MissionScenario s = load_scenario(config(name));
        EXPECT_TRUE(scenario_from_json(scenario_to_json(s)) == s) << name;
    }
}

TEST(Scenario, NearestNeighbourOrderIsPermutation) {
    const MissionScenario s = default_scenario();
    std::vector<int> order = s.visit_order;
    std::sort(order.begin(), order.end());
    for (int i = 0; i < 10; ++i) EXPECT_EQ(order[i], i + 1);
    EXPECT_TRUE(validate_scenario(s).empty());
}

TEST(Scenario, MissingFileIsConfigError) {
    EXPECT_THROW(load_scenario("/nonexistent/config.json"), ConfigError);
}
