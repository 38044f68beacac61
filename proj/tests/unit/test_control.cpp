#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "satuav/control.hpp"

using namespace satuav;

namespace {

ControlParams noiseless(double lambda = 1.0) {
    ControlParams cp;
    cp.instability_factor = lambda;
    cp.state_noise_cov = Mat6::Zero();
    return cp;
}

// run a plain closed loop (state known every slot) towards a fixed point
double closed_loop_tracking(const SystemMatrices &sm, int slots, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const UavState ref{Vec3(0, 0, 100), Vec3::Zero()};
    UavState x = ref;
    double sum = 0.0;
    for (int k = 0; k < slots; ++k) {
        sum += (x.vector() - ref.vector()).squaredNorm();
        x = step_dynamics(sm, x, lqr_action(sm, x, ref), rng);
    }
    return sum / slots;
}

} // namespace

TEST(Control, TransitionHasKroneckerStructure) {
    const SystemMatrices sm = build_system(noiseless());
    for (int i = 0; i < 6; ++i) EXPECT_DOUBLE_EQ(sm.A(i, i), 1.0);
    for (int i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(sm.A(i, i + 3), 0.1);
    EXPECT_DOUBLE_EQ(sm.A.sum(), 6.0 + 0.3);
    for (int i = 0; i < 3; ++i) {
        EXPECT_DOUBLE_EQ(sm.B(i, i), 0.005);
        EXPECT_DOUBLE_EQ(sm.B(i + 3, i), 0.1);
    }
    EXPECT_DOUBLE_EQ(sm.max_eigenvalue, 1.0);
}

TEST(Control, MaxEigenvalueEqualsInstabilityFactor) {
    const SystemMatrices sm = build_system(noiseless(1.05));
    EXPECT_DOUBLE_EQ(sm.max_eigenvalue, 1.05);
    EXPECT_NEAR(spectral_radius(sm.A), 1.05, 1e-12);
}

TEST(Control, ScalarDareIsGoldenRatio) {
    using M1 = Eigen::Matrix<double, 1, 1>;
    const M1 one = M1::Ones();
    const auto [P, K] = solve_dare<1, 1>(one, one, one, one, 1e-12);
    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    EXPECT_NEAR(P(0, 0), phi, 1e-9);
    EXPECT_NEAR(K(0, 0), phi / (phi + 1.0), 1e-9);
    EXPECT_NEAR(K(0, 0), 0.6180, 1e-4);
}

TEST(Control, ZeroTransitionGivesQ) {
    Mat6 Q = Mat6::Identity() * 2.0;
    Mat63 B = Mat63::Ones();
    const DareSolution d = solve_dare(Mat6::Zero(), B, Q, 0.5 * Mat3::Identity());
    EXPECT_LT((d.P - Q).norm(), 1e-12);
    EXPECT_LT(d.K.norm(), 1e-12);
}

TEST(Control, DareResidualAndStability) {
    for (double lambda : {1.0, 1.05, 1.10}) {
        const SystemMatrices sm = build_system(noiseless(lambda));
        const Mat6 rhs = riccati_rhs<6, 3>(sm.A, sm.B, Mat6::Identity(), Mat3(0.5 * Mat3::Identity()), sm.P);
        EXPECT_LE((rhs - sm.P).norm(), 1e-9 * sm.P.norm() * 1.01) << lambda;
        EXPECT_LT(spectral_radius(sm.A - sm.B * sm.K), 1.0) << lambda;
        Eigen::SelfAdjointEigenSolver<Mat6> es(sm.P);
        EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
        EXPECT_LT((sm.P - sm.P.transpose()).norm(), 1e-9 * sm.P.norm());
    }
}

TEST(Control, DareNonConvergenceReportsIterations) {
    Mat63 B = Mat63::Zero();  // unstabilizable
    try {
        solve_dare(Mat6(1.2 * Mat6::Identity()), B, Mat6::Identity(), Mat3::Identity(), 1e-9, 50);
        FAIL();
    } catch (const ConvergenceError &e) {
        EXPECT_EQ(e.iterations(), 50);
    }
}

TEST(Control, LqrZeroErrorGivesZeroCommand) {
    const SystemMatrices sm = build_system(noiseless());
    const UavState x{Vec3(5, 6, 7), Vec3(1, 2, 3)};
    const ControlCommand u = lqr_action(sm, x, x);
    EXPECT_EQ(u.accel, Vec3::Zero());
    EXPECT_FALSE(u.clamped);
}

TEST(Control, LqrIsLinearBeforeClamping) {
    const SystemMatrices sm = build_system(noiseless());
    Vec6 e;
    e << 0.3, -0.2, 0.1, 0.05, 0.0, -0.04;
    const Vec3 base = lqr_feedback(sm, e);
    for (double a : {-1.0, 0.5, 2.0}) EXPECT_LT((lqr_feedback(sm, a * e) - a * base).norm(), 1e-12);
    const UavState ref{Vec3::Zero(), Vec3::Zero()};
    const ControlCommand u1 = lqr_action(sm, UavState::from_vector(e), ref);
    const ControlCommand u2 = lqr_action(sm, UavState::from_vector(2.0 * e), ref);
    EXPECT_LT((u2.accel - 2.0 * u1.accel).norm(), 1e-12);
}

TEST(Control, HugeErrorIsClamped) {
    const SystemMatrices sm = build_system(noiseless());
    const ControlCommand u = lqr_action(sm, UavState{Vec3(1e4, -1e4, 1e4), Vec3::Zero()}, UavState{});
    EXPECT_TRUE(u.clamped);
    for (int i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(std::abs(u.accel[i]), 10.0);
}

TEST(Control, StepExamples) {
    const SystemMatrices sm = build_system(noiseless());
    std::mt19937_64 rng(1);
    EXPECT_EQ(step_dynamics(sm, UavState{}, ControlCommand{}, rng), UavState{});
    const UavState x1 = step_dynamics(sm, UavState{Vec3::Zero(), Vec3(10, 0, 0)}, ControlCommand{}, rng);
    EXPECT_NEAR((x1.pos - Vec3(1, 0, 0)).norm(), 0.0, 1e-15);
    EXPECT_NEAR((x1.vel - Vec3(10, 0, 0)).norm(), 0.0, 1e-15);
}

TEST(Control, VelocityIsClampedPerComponent) {
    const SystemMatrices sm = build_system(noiseless());
    ControlCommand u;
    u.accel = Vec3(10, -10, 0);
    std::mt19937_64 rng(1);
    const UavState x = step_dynamics(sm, UavState{Vec3::Zero(), Vec3(49.5, -49.5, 0)}, u, rng);
    EXPECT_DOUBLE_EQ(x.vel.x(), 50.0);
    EXPECT_DOUBLE_EQ(x.vel.y(), -50.0);
}

TEST(Control, SeededStepIsDeterministic) {
    const SystemMatrices sm = build_system(ControlParams{});
    std::mt19937_64 a(42), b(42);
    UavState xa, xb;
    for (int k = 0; k < 100; ++k) {
        xa = step_dynamics(sm, xa, lqr_action(sm, xa, UavState{}), a);
        xb = step_dynamics(sm, xb, lqr_action(sm, xb, UavState{}), b);
    }
    EXPECT_EQ(xa, xb);
}

TEST(Control, KroneckerSeparability) {
    const SystemMatrices sm = build_system(noiseless(1.05));
    const UavState x{Vec3(1, -2, 3), Vec3(0.5, 0.25, -1)};
    ControlCommand u;
    u.accel = Vec3(0.3, -0.7, 1.1);
    std::mt19937_64 rng(1);
    const UavState full = step_dynamics(sm, x, u, rng);
    const double ts = 0.1, l = 1.05;
    for (int i = 0; i < 3; ++i) {
        const double p = l * x.pos[i] + ts * x.vel[i] + ts * ts / 2 * u.accel[i];
        const double v = l * x.vel[i] + ts * u.accel[i];
        EXPECT_NEAR(full.pos[i], p, 1e-14);
        EXPECT_NEAR(full.vel[i], v, 1e-14);
    }
}

TEST(Control, NoiseFreeConvergenceToFixedReference) {
    for (double lambda : {1.0, 1.05, 1.10}) {
        const SystemMatrices sm = build_system(noiseless(lambda));
        std::mt19937_64 rng(1);
        const UavState ref{Vec3(1, -0.5, 100), Vec3::Zero()};
        UavState x{Vec3(0, 0, 100), Vec3::Zero()};
        double prev = std::numeric_limits<double>::infinity();
        int rises = 0;
        for (int k = 0; k < 600; ++k) {
            const Vec6 e = x.vector() - ref.vector();
            // cost-to-go e'Pe; the Euclidean norm ripples because the closed-loop poles are complex
            const double v = e.dot(sm.P * e);
            if (v > 1e-18 && v > prev) ++rises;
            prev = v;
            x = step_dynamics(sm, x, lqr_action(sm, x, ref), rng, reference_offset(sm, ref));
        }
        EXPECT_LT((x.vector() - ref.vector()).norm(), 1e-6) << lambda;
        EXPECT_EQ(rises, 0) << lambda;
    }
}

TEST(Control, TrackingMetricCases) {
    const UavState a{Vec3(1, 2, 3), Vec3::Zero()};
    std::vector<std::pair<UavState, UavState>> perfect(5, {a, a});
    EXPECT_DOUBLE_EQ(tracking_error_metric(perfect), 0.0);
    const UavState b{Vec3(1, 2, 5), Vec3::Zero()};
    std::vector<std::pair<UavState, UavState>> off(7, {a, b});
    EXPECT_DOUBLE_EQ(tracking_error_metric(off), 4.0);
    std::vector<std::pair<UavState, UavState>> empty;
    EXPECT_THROW(tracking_error_metric(empty), std::invalid_argument);
}

TEST(Control, NoisyTrackingStableAcrossHorizons) {
    const SystemMatrices sm = build_system(ControlParams{});
    const double short_run = closed_loop_tracking(sm, 1000, 3);
    const double long_run = closed_loop_tracking(sm, 10000, 3);
    EXPECT_TRUE(std::isfinite(long_run));
    EXPECT_NEAR(short_run / long_run, 1.0, 0.2);
}

TEST(Control, NoiseSampleCovariance) {
    const SystemMatrices sm = build_system(ControlParams{});
    std::mt19937_64 rng(9);
    Mat6 cov = Mat6::Zero();
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const Vec6 w = draw_noise(sm, rng);
        cov += w * w.transpose();
    }
    cov /= n;
    EXPECT_LT((cov - ControlParams::default_noise()).cwiseAbs().maxCoeff(), 0.05);
}
