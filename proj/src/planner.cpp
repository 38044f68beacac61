#include "satuav/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace satuav {

PlannerEnv PlannerEnv::from_scenario(const MissionScenario &s) {
    PlannerEnv env;
    env.energy = s.energy;
    env.slot = s.control.slot_length;
    env.v_max = s.control.v_max * s.planner.reference_fraction;
    env.u_max = s.control.u_max * s.planner.reference_fraction;
    env.reward_dest = s.planner.dqn.reward_dest;
    return env;
}

EnvStep PlannerEnv::step(const PlannerState &s, int action) const {
    if (action < 0 || action >= kActionCount) throw std::out_of_range("planner action " + std::to_string(action));
    double a = action_accel(action);
    if (s.v + slot * a > v_max) a = std::max(0.0, (v_max - s.v) / slot);
    EnvStep out;
    out.accel = a;
    out.next.d = s.d - slot * s.v - 0.5 * slot * slot * a;
    out.next.v = std::min(s.v + slot * a, v_max);
    out.energy = propulsion_energy_1d(energy, out.next.v, a, slot);
    out.terminal = out.next.d <= 0.0;
    out.reward = -out.energy + (out.terminal ? reward_dest : 0.0);
    return out;
}

HalfProfile replay_actions(const PlannerEnv &env, double distance, const std::vector<int> &actions) {
    HalfProfile h;
    PlannerState s{distance, 0.0};
    for (int a : actions) {
        const auto st = env.step(s, a);
        h.accels.push_back(st.accel);
        h.energy += st.energy;
        s = st.next;
        if (st.terminal) break;
    }
    h.covered = distance - s.d;
    return h;
}

ValueIterationPlanner::ValueIterationPlanner(PlannerEnv env, double max_distance, OracleGrid grid, long max_sweeps)
    : env_(env), grid_(grid) {
    if (!(grid.d_step > 0.0) || !(grid.v_step > 0.0)) throw std::invalid_argument("oracle grid steps must be positive");
    if (!(max_distance >= 0.0)) throw std::invalid_argument("oracle distance must be non-negative");
    nd_ = static_cast<int>(std::ceil(max_distance / grid.d_step)) + 1;
    nv_ = static_cast<int>(std::floor(env.v_max / grid.v_step + 1e-9)) + 1;
    const double inf = std::numeric_limits<double>::infinity();
    table_.assign(static_cast<std::size_t>(nd_) * nv_, inf);
    for (int j = 0; j < nv_; ++j) table_[j] = 0.0;

    double change = inf;
    const double tol = 1e-9;
    while (change > tol) {
        if (sweeps_ >= max_sweeps) throw ConvergenceError("value iteration did not converge", sweeps_, change);
        ++sweeps_;
        change = 0.0;
        for (int i = 1; i < nd_; ++i) {
            for (int j = nv_ - 1; j >= 0; --j) {
                const PlannerState s{i * grid_.d_step, j * grid_.v_step};
                double best = inf;
                for (int a = 0; a < kActionCount; ++a) {
                    const auto st = env_.step(s, a);
                    const double q = st.energy + (st.terminal ? 0.0 : lookup(st.next.d, st.next.v));
                    best = std::min(best, q);
                }
                double &cell = table_[static_cast<std::size_t>(i) * nv_ + j];
                if (std::isfinite(best)) {
                    const double diff = std::isfinite(cell) ? std::abs(best - cell) / std::max(1.0, std::abs(best)) : inf;
                    change = std::max(change, diff);
                    cell = best;
                }
            }
        }
    }
}

double ValueIterationPlanner::lookup(double d, double v) const {
    if (d <= 0.0) return 0.0;
    const double ti = std::min(d / grid_.d_step, static_cast<double>(nd_ - 1));
    const double tj = std::clamp(v / grid_.v_step, 0.0, static_cast<double>(nv_ - 1));
    const int i0 = std::min(static_cast<int>(ti), nd_ - 2 < 0 ? 0 : nd_ - 2);
    const int j0 = std::min(static_cast<int>(tj), nv_ - 2 < 0 ? 0 : nv_ - 2);
    const int i1 = std::min(i0 + 1, nd_ - 1);
    const int j1 = std::min(j0 + 1, nv_ - 1);
    const double wi = ti - i0;
    const double wj = tj - j0;
    auto at = [&](int i, int j) { return table_[static_cast<std::size_t>(i) * nv_ + j]; };
    auto mix = [](double x, double y, double w) {
        if (w == 0.0) return x;
        if (w == 1.0) return y;
        return (1.0 - w) * x + w * y;
    };
    return mix(mix(at(i0, j0), at(i0, j1), wj), mix(at(i1, j0), at(i1, j1), wj), wi);
}

double ValueIterationPlanner::value(double d, double v) const { return lookup(d, v); }

int ValueIterationPlanner::greedy_action(const PlannerState &s) const {
    int best_a = 0;
    double best = std::numeric_limits<double>::infinity();
    for (int a = 0; a < kActionCount; ++a) {
        const auto st = env_.step(s, a);
        const double q = st.energy + (st.terminal ? 0.0 : lookup(st.next.d, st.next.v));
        if (q < best) {
            best = q;
            best_a = a;
        }
    }
    return best_a;
}

OracleResult ValueIterationPlanner::solve(double distance, int slot_budget) const {
    if (distance > (nd_ - 1) * grid_.d_step + 1e-9) throw std::out_of_range("distance beyond the oracle table");
    OracleResult r;
    r.sweeps = sweeps_;
    r.value_estimate = lookup(distance, 0.0);
    if (distance <= 0.0) return r;
    PlannerState s{distance, 0.0};
    for (int k = 0; k < slot_budget; ++k) {
        const int a = greedy_action(s);
        const auto st = env_.step(s, a);
        r.actions.push_back(a);
        r.energy += st.energy;
        s = st.next;
        if (st.terminal) return r;
    }
    throw InfeasibleError("oracle rollout exceeded the slot budget");
}

HalfProfile ValueIterationPlanner::plan_half(double distance, int slot_budget) const {
    return replay_actions(env_, distance, solve(distance, slot_budget).actions);
}

OracleResult plan_oracle(const PlannerEnv &env, double distance, OracleGrid grid) {
    const ValueIterationPlanner vi(env, distance, grid);
    return vi.solve(distance);
}

ReferenceTrajectory assemble_segment(const HalfPlanner &planner, const Vec3 &from, const Vec3 &to, double slot,
                                     int slot_budget) {
    const Vec3 delta = to - from;
    const double length = delta.norm();
    if (!(length > 0.0)) throw std::invalid_argument("assemble_segment: start and end coincide");
    const Vec3 dir = delta / length;

    const HalfProfile half = planner.plan_half(0.5 * length, slot_budget);
    if (half.accels.empty() || !(half.covered > 0.0)) throw InfeasibleError("assemble_segment: empty half profile");

    std::vector<double> accels = half.accels;
    for (auto it = half.accels.rbegin(); it != half.accels.rend(); ++it) accels.push_back(-*it);

    ReferenceTrajectory ref;
    ref.half_energy = half.energy;
    ref.energy = 2.0 * half.energy;
    ref.scale = length / (2.0 * half.covered);

    double p = 0.0;
    double v = 0.0;
    Vec6 x;
    x << from, Vec3::Zero();
    ref.states.push_back(x);
    for (std::size_t k = 0; k < accels.size(); ++k) {
        const double a = ref.scale * accels[k];
        p += slot * v + 0.5 * slot * slot * a;
        v += slot * a;
        ref.accels.push_back(dir * a);
        x << from + dir * p, dir * v;
        ref.states.push_back(x);
    }
    ref.states.back() << to, Vec3::Zero();
    return ref;
}

} // namespace satuav
