#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "satuav/types.hpp"

namespace satuav {

struct GroundDevice {
    int id = 0;
    Vec3 position = Vec3::Zero();      // m
    double transmit_power = 0.1;       // W
    Vec3 hover_point = Vec3::Zero();   // m

    bool operator==(const GroundDevice &) const = default;
};

struct ControlParams {
    double slot_length = 0.1;                 // s; also the energy slot and the delay sampling interval
    Mat6 state_noise_cov = default_noise();   // process noise covariance R
    Mat3 action_cost_weight = 0.5 * Mat3::Identity();
    Mat6 state_weight = Mat6::Identity();
    double instability_factor = 1.0;          // scales the diagonal of the per-axis transition block
    double v_max = 50.0;                      // m/s, per component
    double u_max = 10.0;                      // m/s^2, per component
    int dare_max_iterations = 10000;
    double dare_tolerance = 1e-9;

    static Mat6 default_noise() {
        Vec6 d;
        d << 1.0, 1.0, 1.0, 0.1, 0.1, 0.1;
        return d.asDiagonal();
    }

    bool operator==(const ControlParams &) const = default;
};

struct ChannelParams {
    double carrier_freq = 2e9;           // Hz
    double sat_bandwidth = 5e6;          // Hz
    double ground_bandwidth = 0.5e6;     // Hz
    double noise_power = 1e-14;          // W (-110 dBm)
    double ref_channel_gain = 1e-8;      // -80 dB at 1 m, ground reference
    double sat_ref_gain = 1e-3;          // reference gain used on the UAV-satellite hop
    double sat_altitude = 1e6;           // m
    double env_a = 9.61;
    double env_b = 0.16;                 // per degree
    double excess_loss_los = 1.26;       // 1 dB
    double excess_loss_nlos = 100.0;     // 20 dB
    double rx_antenna_gain = 1.0;
    double earth_radius = 6.371e6;       // m
    double max_elevation_deg = 30.0;
    double min_central_angle_deg = 50.0;
    double snr_threshold = 1.9952623149688795;  // 3 dB
    bool apply_snr_threshold = false;
    double light_speed = 3e8;            // m/s

    bool operator==(const ChannelParams &) const = default;
};

struct EnergyParams {
    double kappa1 = 9.26e-4;
    double kappa2 = 2250.0;
    double gravity = 9.81;
    double hover_power = 100.0;   // W
    double sensing_energy = 0.05; // J per sensing slot
    double v_floor = 0.1;         // m/s, lower clamp on speed inside the propulsion model

    bool operator==(const EnergyParams &) const = default;
};

struct SensingParams {
    int q_cap = 50;                // upper bound on any sensing interval
    bool always_succeed = false;   // deterministic reception instead of Bernoulli(rho)
    int force_interval = 0;        // >0 overrides every phase interval (audit testing)
    bool search = true;            // false: sense every slot in flight
    int search_replications = 32;  // noise realizations averaged per candidate interval
    int hover_horizon = 100;       // slots simulated when choosing the hover interval

    bool operator==(const SensingParams &) const = default;
};

struct DqnHyperParams {
    int hidden_width = 64;
    double discount = 0.99;
    double epsilon_start = 1.0;
    double epsilon_end = 0.05;
    double epsilon_anneal_fraction = 0.5;
    int minibatch = 64;
    int buffer_capacity = 100000;
    double learning_rate = 1e-3;
    int target_update = 50;
    double reward_dest = 30000.0;
    double reward_scale = 1e-3;         // multiplies rewards before regression
    std::vector<double> stage_distances{250.0, 200.0, 150.0, 100.0};
    int episodes_per_stage = 150;
    int max_episode_steps = 2000;
    double d_max = 250.0;               // network input range for the distance feature

    bool operator==(const DqnHyperParams &) const = default;
};

struct PlannerParams {
    DqnHyperParams dqn;
    double oracle_d_step = 0.5;   // m
    double oracle_v_step = 0.1;   // m/s
    int segment_slot_budget = 10000;
    double reference_fraction = 1.0;  // share of u_max and v_max the reference may use

    bool operator==(const PlannerParams &) const = default;
};

struct SimParams {
    Vec3 start_position{0.0, 0.0, 100.0};
    bool upload_during_hover = true;
    long slot_budget = 1000000;
    double divergence_radius = 1000.0;  // m of tracking error that aborts a mission

    bool operator==(const SimParams &) const = default;
};

struct MissionScenario {
    std::vector<GroundDevice> devices;
    double data_size = 1e7;   // bits per device
    double p_max = 10.0;      // W
    ControlParams control;
    ChannelParams channel;
    EnergyParams energy;
    SensingParams sensing;
    PlannerParams planner;
    SimParams sim;
    std::vector<int> visit_order;
    std::uint64_t rng_seed = 1;

    const GroundDevice &device(int id) const;

    bool operator==(const MissionScenario &) const = default;
};

// Ten devices spread over a 1000 m x 1000 m area, hover points 100 m above each.
std::vector<GroundDevice> default_devices();

// Greedy nearest-neighbour tour from `start` over the devices' hover points.
std::vector<int> nearest_neighbor_order(const std::vector<GroundDevice> &devices, const Vec3 &start);

// All defaults, default devices, nearest-neighbour order.
MissionScenario default_scenario();

// One entry per violated invariant, "field: reason".
std::vector<std::string> validate_scenario(const MissionScenario &s);

// Builds a scenario from a config tree. Missing keys take defaults; keys ending in
// `_db` (`_dbm` for noise power) are converted to linear. Throws ConfigError.
MissionScenario scenario_from_json(const nlohmann::json &j);
MissionScenario load_scenario(const std::filesystem::path &path);

// Serializes with linear units only; scenario_from_json(scenario_to_json(s)) == s.
nlohmann::json scenario_to_json(const MissionScenario &s);

} // namespace satuav
