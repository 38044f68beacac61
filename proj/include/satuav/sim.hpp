#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "satuav/control.hpp"
#include "satuav/energy.hpp"
#include "satuav/planner.hpp"
#include "satuav/power.hpp"
#include "satuav/scenario.hpp"

namespace satuav {

inline constexpr int kSchemaVersion = 1;

enum class MissionPhase { flight, residual_hover, collect_hover };

const char *phase_name(MissionPhase p);

struct SlotRecord {
    long slot = 0;
    MissionPhase phase = MissionPhase::flight;
    int segment = 0;
    int device = -1;           // device served by the hover, or the flight destination
    UavState state;            // true state at the start of the slot
    UavState estimate;         // controller state used for the command
    UavState reference;        // x_r(k)
    Vec3 command = Vec3::Zero();
    bool command_clamped = false;
    int gamma = 0;
    bool sense_success = false;
    int aoi = 0;
    double rho = 0.0;
    double q_max = 0.0;
    double power = 0.0;        // W
    double sat_rate = 0.0;     // bit/s at `power`
    double ground_rate = 0.0;  // bit/s from the served device, hover slots only
    double bits_collected = 0.0;
    double bits_uploaded = 0.0;
    SlotEnergy energy;
    double cum_collected = 0.0;
    double cum_uploaded = 0.0;
};

struct MissionLog {
    std::vector<int> device_ids;               // column order of cum_collected_device
    std::vector<SlotRecord> slots;
    std::vector<std::vector<double>> cum_collected_device;  // per slot, per device
};

struct ConstraintCheck {
    bool pass = true;
    long witness = -1;  // first violating slot
    std::string detail;
};

struct ConstraintAudit {
    std::array<ConstraintCheck, 7> checks;  // C1..C7
    bool pass() const;
};

struct SegmentSummary {
    int segment = 0;
    int device = 0;
    double length = 0.0;        // m
    int flight_slots = 0;
    int residual_slots = 0;
    int collect_slots = 0;
    double reference_energy = 0.0;
    SegmentPlan power;
    int sensing_interval = 1;
    int max_interval = 1;
    int hover_interval = 1;
    bool sensing_flagged = false;
};

struct MissionResult {
    EnergyReport energy;
    double ee = 0.0;
    double tracking = 0.0;             // mean squared tracking error over the mission
    double tracking_second_half = 0.0;
    ConstraintAudit audit;
    double wall_time = 0.0;  // s
    std::uint64_t seed = 0;
    long slots = 0;
    double mission_time = 0.0;  // s
    int delta = 0;
    long sensing_flight = 0;
    long sensing_hover = 0;
    long flight_slots = 0;
    long hover_slots = 0;
    double total_collected = 0.0;
    double total_uploaded = 0.0;
    std::vector<SegmentSummary> segments;

    long sensing_total() const { return sensing_flight + sensing_hover; }
    double flight_density() const;
    double hover_density() const;
};

struct Mission {
    MissionLog log;
    MissionResult result;
};

// Flies the visit order: each leg is planned, tracked under remote control with sensing and
// uploading, then the UAV hovers to finish the upload backlog and collect the device's data.
// Throws InfeasibleError when a collection or the whole mission exceeds its slot budget.
Mission run_mission(const MissionScenario &s, const HalfPlanner &planner);

// Longest half-leg the mission will ask the planner for.
double max_half_distance(const MissionScenario &s);

// C1..C7 over a log; used by run_mission and on edited logs.
ConstraintAudit audit_mission(const MissionLog &log, const MissionScenario &s);

double energy_efficiency(const MissionLog &log);

enum class SweepAxis { lambda, data_size, p_max };
SweepAxis parse_axis(const std::string &name);
const char *axis_name(SweepAxis a);
MissionScenario with_axis_value(MissionScenario s, SweepAxis axis, double value);

struct SweepRow {
    double value = 0.0;
    bool ok = false;
    std::string error;
    MissionResult result;
};

// One mission per value, run concurrently, returned in input order.
std::vector<SweepRow> sweep(const MissionScenario &s, SweepAxis axis, const std::vector<double> &values,
                            const HalfPlanner &planner);

// Shortest round-trip decimal form.
std::string format_double(double v);

void write_mission_csv(std::ostream &out, const MissionLog &log);
void write_sensing_csv(std::ostream &out, const MissionLog &log);
void write_sweep_csv(std::ostream &out, SweepAxis axis, const std::vector<SweepRow> &rows);
nlohmann::json result_to_json(const MissionResult &r);

} // namespace satuav
