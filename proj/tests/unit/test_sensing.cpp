#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "satuav/channel.hpp"
#include "satuav/sensing.hpp"

using namespace satuav;

namespace {

ControlParams params(double lambda, bool noisy) {
    ControlParams cp;
    cp.instability_factor = lambda;
    if (!noisy) cp.state_noise_cov = Mat6::Zero();
    return cp;
}

struct Leg {
    MissionScenario s;
    SystemMatrices sm;
    ReferenceTrajectory ref;
    std::vector<double> rho;
};

Leg first_leg(double lambda, bool noisy, double sensing_energy) {
    Leg l{default_scenario(), {}, {}, {}};
    l.s.control = params(lambda, noisy);
    l.s.energy.sensing_energy = sensing_energy;
    l.sm = build_system(l.s.control);
    const ValueIterationPlanner vi(PlannerEnv::from_scenario(l.s), 400.0);
    const Vec3 a = l.s.device(l.s.visit_order[0]).hover_point, b = l.s.device(l.s.visit_order[1]).hover_point;
    l.ref = assemble_segment(vi, a, b, 0.1);
    for (const Vec6 &x : l.ref.states) l.rho.push_back(success_probability(l.s.channel, x.head<3>(), l.s.devices));
    return l;
}

SearchInputs inputs(const Leg &l) {
    SearchInputs in;
    in.system = &l.sm;
    in.energy = &l.s.energy;
    in.delta = propagation_delay(l.s.channel, 0.1).delta_slots;
    in.q_cap = 50;
    in.replications = 32;
    in.seed = 5;
    return in;
}

} // namespace

TEST(Sensing, AoiExamples) {
    EXPECT_EQ(aoi_update({7, 0}, true).age, 0);
    EXPECT_EQ(aoi_update({7, 0}, false).age, 8);
    AoiClock c{3, 3};
    for (int k = 0; k < 20; ++k) {
        c = aoi_update(c, k % 2 == 0);
        if (k % 2 == 0) EXPECT_EQ(c.age, 3);
        else EXPECT_EQ(c.age, 4);
    }
    c = {0, 3};
    for (int k = 0; k < 10; ++k) {
        c = aoi_update(c, true);
        EXPECT_EQ(c.age, 3);
    }
}

TEST(Sensing, RemoteEstimateExamples) {
    const SystemMatrices sm = build_system(params(1.0, false));
    const UavState x{Vec3(1, 2, 3), Vec3(4, 5, 6)};
    EXPECT_EQ(remote_estimate(sm, x, {}, 0), x);

    const std::vector<Vec3> zero1{Vec3::Zero()};
    const UavState one = remote_estimate(sm, x, zero1, 1);
    EXPECT_LT((one.pos - (x.pos + 0.1 * x.vel)).norm(), 1e-14);
    EXPECT_EQ(one.vel, x.vel);

    const UavState still{Vec3(1, 2, 3), Vec3::Zero()};
    const std::vector<Vec3> zero2{Vec3::Zero(), Vec3::Zero()};
    EXPECT_EQ(remote_estimate(sm, still, zero2, 2), still);

    EXPECT_THROW(remote_estimate(sm, x, zero1, 2), std::invalid_argument);
}

TEST(Sensing, PredictionChainEqualsEstimate) {
    const SystemMatrices sm = build_system(params(1.05, false));
    RemoteEstimator est;
    est.predicted_state = UavState{Vec3(3, -1, 2), Vec3(0.5, 0, -0.2)};
    const UavState start = est.predicted_state;
    const UavState ref{Vec3(0, 0, 0), Vec3::Zero()};
    std::vector<Vec3> cmds;
    UavState last;
    for (int k = 0; k < 5; ++k) {
        const auto [next, u] = remote_predict(sm, est, ref);
        cmds.push_back(u.accel);
        last = next;
    }
    EXPECT_EQ(est.command_queue.size(), 5u);
    const UavState direct = remote_estimate(sm, start, cmds, 5);
    EXPECT_LT((direct.vector() - last.vector()).norm(), 1e-12);
}

TEST(Sensing, PredictionOnReferenceIssuesNoCommand) {
    const SystemMatrices sm = build_system(params(1.0, false));
    RemoteEstimator est;
    est.predicted_state = UavState{Vec3(0, 0, 100), Vec3::Zero()};
    const auto [next, u] = remote_predict(sm, est, est.predicted_state);
    EXPECT_EQ(u.accel, Vec3::Zero());
    EXPECT_EQ(next, (UavState{Vec3(0, 0, 100), Vec3::Zero()}));
}

TEST(Sensing, OpenLoopPredictionGrowsAndLqrBoundsIt) {
    const SystemMatrices sm = build_system(params(1.10, false));
    Vec6 x0;
    x0 << 1, 1, 1, 0, 0, 0;
    Vec6 open = x0;
    RemoteEstimator est;
    est.predicted_state = UavState::from_vector(x0);
    double max_closed = 0.0;
    for (int k = 0; k < 200; ++k) {
        open = sm.A * open;
        remote_predict(sm, est, UavState{});
        max_closed = std::max(max_closed, est.predicted_state.vector().norm());
    }
    EXPECT_GT(open.norm(), 1e8);
    EXPECT_LT(max_closed, 10.0);
}

TEST(Sensing, ZeroNoiseEstimatorIsExact) {
    for (int delta : {0, 1, 3}) {
        const SystemMatrices sm = build_system(params(1.05, false));
        ControlLoop loop(sm, delta, UavState{Vec3(0, 0, 100), Vec3::Zero()});
        double worst = 0.0;
        for (int k = 0; k < 500; ++k) {
            const double t = 0.1 * k;
            auto ref = [](double s) {
                return UavState{Vec3(20 * std::sin(0.2 * s), 5 * s, 100), Vec3(4 * std::cos(0.2 * s), 5, 0)};
            };
            loop.step(ref(t), ref(t + 0.1), k % 4 == 0, k % 3 != 0, nullptr);
            worst = std::max(worst, (loop.estimate().vector() - loop.state().vector()).norm());
        }
        EXPECT_LE(worst, 1e-10) << delta;
    }
}

TEST(Sensing, MaxIntervalExamples) {
    EXPECT_NEAR(max_sensing_interval(0.99, 1.05), 94.39, 0.01);
    EXPECT_NEAR(max_sensing_interval(0.9, 1.1), 24.16, 0.01);
    EXPECT_TRUE(std::isinf(max_sensing_interval(0.5, 1.0)));
    EXPECT_TRUE(std::isinf(max_sensing_interval(1.0, 1.05)));
    EXPECT_THROW(max_sensing_interval(0.0, 1.05), std::invalid_argument);
    EXPECT_THROW(max_sensing_interval(1.5, 1.05), std::invalid_argument);
}

TEST(Sensing, FloorOfMaxIntervalIsLastStableInteger) {
    for (double rho : {0.6, 0.9, 0.99}) {
        for (double lambda : {1.02, 1.05, 1.1, 1.3}) {
            const double q = max_sensing_interval(rho, lambda);
            const int f = static_cast<int>(std::floor(q));
            ASSERT_NE(static_cast<double>(f), q);
            EXPECT_TRUE(interval_is_stable(rho, lambda, f));
            EXPECT_FALSE(interval_is_stable(rho, lambda, f + 1));
            // direct form of the bound
            EXPECT_GT(rho, 1.0 - std::pow(lambda, -f));
            EXPECT_LE(rho, 1.0 - std::pow(lambda, -(f + 1)));
        }
    }
}

TEST(Sensing, AdmissibleInterval) {
    EXPECT_EQ(admissible_interval(94.39, 200), 94);
    EXPECT_EQ(admissible_interval(5.0, 50), 4);
    EXPECT_EQ(admissible_interval(std::numeric_limits<double>::infinity(), 50), 50);
    EXPECT_EQ(admissible_interval(0.5, 50), 1);
    EXPECT_EQ(admissible_interval(94.39, 20), 20);
}

TEST(Sensing, PeriodicGamma) {
    const auto g = periodic_gamma(10, 3);
    const std::vector<std::uint8_t> want{1, 0, 0, 1, 0, 0, 1, 0, 0, 1};
    EXPECT_EQ(g, want);
    EXPECT_THROW(periodic_gamma(10, 0), std::invalid_argument);
}

TEST(Sensing, FreeSensingOnNoiselessPlantSensesEverySlot) {
    const Leg l = first_leg(1.05, false, 0.0);
    const IntervalSearch r = search_interval(inputs(l), l.ref, l.rho);
    EXPECT_GT(r.max_interval, 1);
    EXPECT_EQ(r.interval, 1);
}

TEST(Sensing, ExpensiveSensingPicksFewestSensingSlots) {
    const Leg l = first_leg(1.05, false, 1e6);
    const IntervalSearch r = search_interval(inputs(l), l.ref, l.rho);
    int fewest = std::numeric_limits<int>::max();
    for (std::size_t i = 0; i < r.costs.size(); ++i)
        if (!r.diverged[i]) fewest = std::min(fewest, r.sensing_counts[i]);
    EXPECT_EQ(r.sensing_counts[r.interval - 1], fewest);
    EXPECT_GT(r.interval, r.max_interval / 2);
}

TEST(Sensing, TableNoiseSearchIsInteriorAndLocallyOptimal) {
    const Leg l = first_leg(1.05, true, 0.05);
    const IntervalSearch r = search_interval(inputs(l), l.ref, l.rho);
    EXPECT_GT(r.interval, 1);
    EXPECT_LT(r.interval, r.max_interval);
    const std::size_t i = static_cast<std::size_t>(r.interval - 1);
    EXPECT_FALSE(r.diverged[i]);
    EXPECT_DOUBLE_EQ(r.cost, r.costs[i]);
    for (std::size_t j : {i - 1, i + 1})
        if (!r.diverged[j]) EXPECT_LE(r.costs[i], r.costs[j]);
}

TEST(Sensing, SearchIsDeterministic) {
    const Leg l = first_leg(1.05, true, 0.05);
    const IntervalSearch a = search_interval(inputs(l), l.ref, l.rho);
    const IntervalSearch b = search_interval(inputs(l), l.ref, l.rho);
    EXPECT_EQ(a.costs, b.costs);
    EXPECT_EQ(a.interval, b.interval);
}

TEST(Sensing, HoverSearchRespectsBudget) {
    const Leg l = first_leg(1.05, true, 0.05);
    SearchInputs in = inputs(l);
    const Vec3 p = l.s.device(l.s.visit_order[0]).hover_point;
    const IntervalSearch loose = search_hover_interval(in, p, 100, 0.99, std::numeric_limits<double>::infinity());
    // without a budget the search only stops at the cap or at a diverging candidate
    EXPECT_TRUE(loose.interval == loose.max_interval || loose.diverged.back());
    EXPECT_EQ(static_cast<int>(loose.costs.size()), std::min(loose.max_interval, loose.interval + 1));
    const IntervalSearch tight = search_hover_interval(in, p, 100, 0.99, 0.0);
    EXPECT_EQ(tight.interval, 1);
    const IntervalSearch mid = search_hover_interval(in, p, 100, 0.99, loose.tracking.front() * 1.5);
    for (int q = 1; q <= mid.interval; ++q) EXPECT_LE(mid.tracking[q - 1], loose.tracking.front() * 1.5);
}
