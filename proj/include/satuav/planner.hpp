#pragma once

#include <memory>
#include <vector>

#include "satuav/energy.hpp"
#include "satuav/scenario.hpp"

namespace satuav {

inline constexpr int kActionCount = 11;

// 1-D straight-line approach: remaining distance and speed.
struct PlannerState {
    double d = 0.0;  // m
    double v = 0.0;  // m/s
};

struct EnvStep {
    PlannerState next;
    double accel = 0.0;   // applied acceleration after the speed cap
    double energy = 0.0;  // propulsion energy of the slot, J
    double reward = 0.0;  // -energy, plus the destination bonus on arrival
    bool terminal = false;
};

// Acceleration-phase MDP: d' = d - dt v - dt^2 a / 2, v' = v + dt a.
struct PlannerEnv {
    EnergyParams energy;
    double slot = 0.1;
    double v_max = 50.0;
    double u_max = 10.0;  // acceleration of the top action
    double reward_dest = 30000.0;

    static PlannerEnv from_scenario(const MissionScenario &s);

    double action_accel(int action) const { return action * u_max / (kActionCount - 1); }

    // Throws std::out_of_range for an action outside [0, kActionCount).
    EnvStep step(const PlannerState &s, int action) const;
};

// Acceleration half of a segment: per-slot accelerations from rest until the
// remaining distance reaches zero.
struct HalfProfile {
    std::vector<double> accels;
    double energy = 0.0;   // J, sum of per-slot propulsion energy
    double covered = 0.0;  // m, >= requested distance (last slot overshoots)
};

class HalfPlanner {
public:
    virtual ~HalfPlanner() = default;
    // Throws InfeasibleError when no arrival within `slot_budget` slots.
    virtual HalfProfile plan_half(double distance, int slot_budget) const = 0;
};

// Replays an action sequence through the environment from rest.
HalfProfile replay_actions(const PlannerEnv &env, double distance, const std::vector<int> &actions);

struct OracleGrid {
    double d_step = 0.5;
    double v_step = 0.1;
};

struct OracleResult {
    double energy = 0.0;            // J, exact replay of `actions`
    double value_estimate = 0.0;    // J, interpolated grid value at (distance, 0)
    std::vector<int> actions;
    long sweeps = 0;
};

// Value iteration on a (d, v) grid for the minimum-energy acceleration phase.
// The table is built once for distances up to `max_distance` and reused.
class ValueIterationPlanner : public HalfPlanner {
public:
    ValueIterationPlanner(PlannerEnv env, double max_distance, OracleGrid grid = {}, long max_sweeps = 100000);

    HalfProfile plan_half(double distance, int slot_budget) const override;
    OracleResult solve(double distance, int slot_budget = 10000) const;

    double value(double d, double v) const;
    long sweeps() const { return sweeps_; }

private:
    double lookup(double d, double v) const;
    int greedy_action(const PlannerState &s) const;

    PlannerEnv env_;
    OracleGrid grid_;
    int nd_ = 0;
    int nv_ = 0;
    std::vector<double> table_;  // row-major [d index][v index]
    long sweeps_ = 0;
};

// Stand-alone oracle; throws ConvergenceError when value iteration stalls.
OracleResult plan_oracle(const PlannerEnv &env, double distance, OracleGrid grid = {});

// Per-slot reference for one straight flight leg.
struct ReferenceTrajectory {
    std::vector<Vec6> states;   // x_r(0..n), n = slot count
    std::vector<Vec3> accels;   // reference acceleration over each slot
    double energy = 0.0;        // J, twice the acceleration-phase energy
    double half_energy = 0.0;
    double scale = 1.0;         // shrink applied so the leg ends exactly at `to`

    int slots() const { return static_cast<int>(accels.size()); }
    double duration(double slot) const { return slots() * slot; }
};

// Accelerates over half the distance, mirrors the profile for braking and maps it onto
// the unit direction from `from` to `to`. Throws std::invalid_argument when from == to.
ReferenceTrajectory assemble_segment(const HalfPlanner &planner, const Vec3 &from, const Vec3 &to, double slot,
                                     int slot_budget = 10000);

} // namespace satuav
