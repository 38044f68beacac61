#include "satuav/sensing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "satuav/energy.hpp"

namespace satuav {

AoiClock aoi_update(AoiClock clock, bool received) {
    clock.age = received ? clock.delta : clock.age + 1;
    return clock;
}

UavState remote_estimate(const SystemMatrices &sm, const UavState &x_sensed, std::span<const Vec3> commands,
                         int delta) {
    if (delta < 0 || static_cast<int>(commands.size()) != delta)
        throw std::invalid_argument("remote_estimate: expected " + std::to_string(delta) + " commands");
    Vec6 x = x_sensed.vector();
    Mat6 a_pow = Mat6::Identity();
    Vec6 forced = Vec6::Zero();
    for (int j = 0; j < delta; ++j) {
        forced += a_pow * sm.B * commands[delta - j - 1];
        a_pow = a_pow * sm.A;
    }
    return UavState::from_vector(a_pow * x + forced);
}

std::pair<UavState, ControlCommand> remote_predict(const SystemMatrices &sm, RemoteEstimator &est,
                                                   const UavState &x_ref_next) {
    const ControlCommand u = lqr_action(sm, est.predicted_state, x_ref_next);
    est.predicted_state = UavState::from_vector(sm.A * est.predicted_state.vector() + sm.B * u.accel);
    est.command_queue.push_back(u);
    return {est.predicted_state, u};
}

double max_sensing_interval(double rho, double lambda) {
    if (!(rho > 0.0 && rho <= 1.0)) throw std::invalid_argument("max_sensing_interval: rho outside (0, 1]");
    if (lambda <= 1.0 || rho == 1.0) return std::numeric_limits<double>::infinity();
    return -std::log1p(-rho) / std::log(lambda);
}

bool interval_is_stable(double rho, double lambda, int q) { return rho > 1.0 - std::pow(lambda, -q); }

int admissible_interval(double q_max, int q_cap) {
    if (!std::isfinite(q_max)) return std::max(1, q_cap);
    const double below = std::ceil(q_max) - 1.0;
    return static_cast<int>(std::clamp(below, 1.0, static_cast<double>(std::max(1, q_cap))));
}

ControlLoop::ControlLoop(const SystemMatrices &sm, int delta, const UavState &x0)
    : sm_(&sm), clock_{0, delta}, x_(x0), xc_(x0) {
    if (delta < 0) throw std::invalid_argument("ControlLoop: negative delay");
}

LoopSlot ControlLoop::step(const UavState &x_ref, const UavState &x_ref_next, bool sense, bool success,
                           std::mt19937_64 *noise) {
    LoopSlot out;
    out.sensed = sense;
    out.success = sense && success;
    if (out.success) in_flight_.emplace_back(k_, x_);

    bool received = false;
    while (!in_flight_.empty() && in_flight_.front().first + clock_.delta <= k_) {
        if (in_flight_.front().first + clock_.delta == k_) {
            UavState est = in_flight_.front().second;
            const std::size_t n = history_.size();
            for (std::size_t i = n - static_cast<std::size_t>(clock_.delta); i < n; ++i)
                est = propagate(*sm_, est, history_[i].first, history_[i].second);
            xc_ = est;
            received = true;
        }
        in_flight_.pop_front();
    }
    clock_ = aoi_update(clock_, received);
    out.received = received;
    out.aoi = clock_.age;
    out.estimate = xc_;

    out.command = lqr_action(*sm_, xc_, x_ref_next);
    const Vec6 offset = reference_offset(*sm_, x_ref);
    if (noise) {
        x_ = step_dynamics(*sm_, x_, out.command, *noise, offset);
    } else {
        x_ = propagate(*sm_, x_, out.command.accel, offset);
    }
    xc_ = propagate(*sm_, xc_, out.command.accel, offset);
    out.next = x_;

    history_.emplace_back(out.command.accel, offset);
    while (static_cast<int>(history_.size()) > clock_.delta) history_.pop_front();
    ++k_;
    return out;
}

std::vector<std::uint8_t> periodic_gamma(int slots, int interval) {
    if (interval < 1) throw std::invalid_argument("periodic_gamma: interval must be >= 1");
    std::vector<std::uint8_t> g(static_cast<std::size_t>(std::max(0, slots)), 0);
    for (int k = 0; k < slots; k += interval) g[k] = 1;
    return g;
}

namespace {

struct Rollout {
    double cost = 0.0;
    double tracking = 0.0;
    int count = 0;
    bool diverged = false;
};

// Mean over replications of one constant-interval schedule; `ref(k)` gives x_r(k).
template <class Ref>
Rollout rollout(const SearchInputs &in, const Ref &ref, int n, std::span<const double> rho, int q) {
    const SystemMatrices &sm = *in.system;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Rollout out;
    for (int r = 0; r < in.replications; ++r) {
        std::seed_seq seq{static_cast<std::uint32_t>(in.seed), static_cast<std::uint32_t>(in.seed >> 32),
                          static_cast<std::uint32_t>(r)};
        std::mt19937_64 noise(seq);
        std::mt19937_64 draws(noise());
        ControlLoop loop(sm, in.delta, in.start ? *in.start : ref(0));
        out.count = 0;
        for (int k = 0; k < n && !out.diverged; ++k) {
            const bool sense = k % q == 0;
            const bool ok = in.always_succeed || unit(draws) < rho[static_cast<std::size_t>(k)];
            const UavState xr = ref(k);
            const double err = (loop.state().pos - xr.pos).norm();
            if (!std::isfinite(err) || err > in.divergence_radius) out.diverged = true;
            out.tracking += (loop.state().vector() - xr.vector()).squaredNorm();
            const LoopSlot s = loop.step(xr, ref(k + 1), sense, ok, &noise);
            out.cost += propulsion_energy(*in.energy, s.next.vel, s.command.accel, sm.slot_length).joules;
            if (sense) {
                out.cost += in.energy->sensing_energy;
                ++out.count;
            }
        }
    }
    out.cost /= in.replications;
    out.tracking /= static_cast<double>(in.replications) * std::max(1, n);
    return out;
}

void check_inputs(const SearchInputs &in) {
    if (!in.system || !in.energy) throw std::invalid_argument("interval search: missing system or energy model");
    if (in.replications < 1) throw std::invalid_argument("interval search: replications must be >= 1");
}

} // namespace

IntervalSearch search_interval(const SearchInputs &in, const ReferenceTrajectory &ref, std::span<const double> rho) {
    check_inputs(in);
    const int n = ref.slots();
    if (static_cast<int>(rho.size()) < n) throw std::invalid_argument("search_interval: rho trace too short");

    double q_min = std::numeric_limits<double>::infinity();
    for (int k = 0; k < n; ++k) q_min = std::min(q_min, max_sensing_interval(rho[k], in.system->max_eigenvalue));

    IntervalSearch out;
    out.flagged = q_min <= 1.0;
    out.max_interval = admissible_interval(q_min, in.q_cap);
    auto at = [&](int k) { return UavState::from_vector(ref.states[static_cast<std::size_t>(k)]); };
    for (int q = 1; q <= out.max_interval; ++q) {
        const Rollout r = rollout(in, at, n, rho, q);
        out.costs.push_back(r.cost);
        out.sensing_counts.push_back(r.count);
        out.tracking.push_back(r.tracking);
        out.diverged.push_back(r.diverged ? 1 : 0);
    }
    out.interval = 1;
    out.cost = out.costs.front();
    bool found = false;
    for (std::size_t i = 0; i < out.costs.size(); ++i) {
        if (out.diverged[i]) continue;
        // costs within rounding of the best count as ties, which go to the smaller q
        if (!found || out.costs[i] < out.cost - 1e-9 * std::abs(out.cost)) {
            out.interval = static_cast<int>(i) + 1;
            out.cost = out.costs[i];
            found = true;
        }
    }
    return out;
}

IntervalSearch search_hover_interval(const SearchInputs &in, const Vec3 &point, int horizon, double rho,
                                     double tracking_budget) {
    check_inputs(in);
    if (horizon < 1) throw std::invalid_argument("search_hover_interval: horizon must be >= 1");
    const double q_max = max_sensing_interval(rho, in.system->max_eigenvalue);
    IntervalSearch out;
    out.flagged = q_max <= 1.0;
    out.max_interval = admissible_interval(q_max, in.q_cap);
    const std::vector<double> trace(static_cast<std::size_t>(horizon), rho);
    const UavState hold{point, Vec3::Zero()};
    auto at = [&](int) { return hold; };
    out.interval = 1;
    for (int q = 1; q <= out.max_interval; ++q) {
        const Rollout r = rollout(in, at, horizon, trace, q);
        out.costs.push_back(r.cost);
        out.sensing_counts.push_back(r.count);
        out.tracking.push_back(r.tracking);
        out.diverged.push_back(r.diverged ? 1 : 0);
        if (r.diverged || r.tracking > tracking_budget) break;
        out.interval = q;
        out.cost = r.cost;
    }
    return out;
}

} // namespace satuav
