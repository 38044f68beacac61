#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "satuav/control.hpp"
#include "satuav/planner.hpp"

namespace satuav {

struct AoiClock {
    int age = 0;    // slots since the sensed state now held by the controller was taken
    int delta = 0;  // round-trip delay in slots
};

// received -> age = delta, otherwise age + 1.
AoiClock aoi_update(AoiClock clock, bool received);

struct RemoteEstimator {
    UavState last_received_state;
    long last_received_slot = 0;
    UavState predicted_state;
    std::vector<ControlCommand> command_queue;
};

// A^delta x + sum_j A^j B u(k + delta - j - 1); `commands` oldest first.
// Throws std::invalid_argument unless commands.size() == delta.
UavState remote_estimate(const SystemMatrices &sm, const UavState &x_sensed, std::span<const Vec3> commands, int delta);

// u = -K (x~ - x_ref_next) clamped, x~ <- A x~ + B u; the command is queued.
std::pair<UavState, ControlCommand> remote_predict(const SystemMatrices &sm, RemoteEstimator &est,
                                                   const UavState &x_ref_next);

// Largest real q with rho > 1 - lambda^-q, i.e. -ln(1 - rho) / ln(lambda).
// +inf when lambda <= 1 or rho == 1. Throws std::invalid_argument for rho outside (0, 1].
double max_sensing_interval(double rho, double lambda);

// rho > 1 - lambda^-q for an integer interval.
bool interval_is_stable(double rho, double lambda, int q);

// Largest integer interval strictly below q_max, capped at q_cap and never below 1.
int admissible_interval(double q_max, int q_cap);

struct LoopSlot {
    UavState estimate;      // controller-side state used for the command
    ControlCommand command;
    UavState next;          // true state after the plant step
    bool sensed = false;
    bool success = false;
    bool received = false;  // a sensed state reached the controller this slot
    int aoi = 0;
};

// Remote control loop: sensing, delayed reception, prediction, LQR command, plant step.
// A state sensed at slot k reaches the controller at slot k + delta.
class ControlLoop {
public:
    ControlLoop(const SystemMatrices &sm, int delta, const UavState &x0);

    // `noise` may be null for a noiseless plant.
    LoopSlot step(const UavState &x_ref, const UavState &x_ref_next, bool sense, bool success,
                  std::mt19937_64 *noise);

    const UavState &state() const { return x_; }
    const UavState &estimate() const { return xc_; }
    long slot() const { return k_; }
    int aoi() const { return clock_.age; }
    int delta() const { return clock_.delta; }

private:
    const SystemMatrices *sm_;
    AoiClock clock_;
    UavState x_;
    UavState xc_;
    long k_ = 0;
    std::deque<std::pair<long, UavState>> in_flight_;
    std::deque<std::pair<Vec3, Vec6>> history_;  // (command, offset) of the last delta slots
};

struct SensingSchedule {
    std::vector<std::uint8_t> gamma;  // per slot
    std::vector<int> intervals;       // per phase
    std::vector<double> q_max_trace;  // per slot
};

// gamma = 1 at slots 0, q, 2q, ... of an n-slot phase.
std::vector<std::uint8_t> periodic_gamma(int slots, int interval);

struct IntervalSearch {
    int interval = 1;
    int max_interval = 1;
    bool flagged = false;            // min q_max <= 1: sensing every slot
    std::vector<double> costs;       // mean E_f + sum gamma E_s per candidate, index q - 1
    std::vector<int> sensing_counts;
    std::vector<double> tracking;    // mean ||x - x_r||^2 per candidate
    std::vector<std::uint8_t> diverged;
    double cost = 0.0;
};

struct SearchInputs {
    const SystemMatrices *system = nullptr;
    const EnergyParams *energy = nullptr;
    int delta = 0;
    int q_cap = 50;
    bool always_succeed = false;
    int replications = 1;
    std::uint64_t seed = 0;
    std::optional<UavState> start;        // rollout initial state, default the reference start
    double divergence_radius = 1000.0;    // m; a candidate with any rollout beyond it is rejected
};

// Exhaustive search over constant sensing intervals for one flight leg. Each candidate is
// averaged over `replications` rollouts; all candidates see the same noise and reception draws.
// Diverged candidates are skipped; q = 1 when every candidate diverges.
IntervalSearch search_interval(const SearchInputs &in, const ReferenceTrajectory &ref, std::span<const double> rho);

// Hover at a fixed point: hover energy does not depend on the interval, so the longest
// admissible interval is taken whose rollouts keep the mean squared tracking error within
// `tracking_budget`, checked upward from q = 1.
IntervalSearch search_hover_interval(const SearchInputs &in, const Vec3 &point, int horizon, double rho,
                                     double tracking_budget);

} // namespace satuav
