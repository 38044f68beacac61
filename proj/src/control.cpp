#include "satuav/control.hpp"

#include <algorithm>
#include <stdexcept>

namespace satuav {

DareSolution solve_dare(const Mat6 &A, const Mat63 &B, const Mat6 &Q, const Mat3 &eps, double tol, long max_iter) {
    long iterations = 0;
    auto [P, K] = solve_dare<6, 3>(A, B, Q, eps, tol, max_iter, &iterations);
    const Mat6 check = riccati_rhs<6, 3>(A, B, Q, eps, P);
    const double scale = P.norm();
    return {P, K, iterations, scale > 0.0 ? (check - P).norm() / scale : 0.0};
}

SystemMatrices build_system(const ControlParams &cp) {
    const double ts = cp.slot_length;
    const double lambda = cp.instability_factor;

    Eigen::Matrix2d a1;
    a1 << lambda, ts, 0.0, lambda;
    Eigen::Matrix2d a1_nominal;
    a1_nominal << 1.0, ts, 0.0, 1.0;
    Eigen::Vector2d b1(0.5 * ts * ts, ts);

    SystemMatrices sm;
    const Mat3 I = Mat3::Identity();
    for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 2; ++c) {
            sm.A.block<3, 3>(3 * r, 3 * c) = a1(r, c) * I;
            sm.A_nominal.block<3, 3>(3 * r, 3 * c) = a1_nominal(r, c) * I;
        }
        sm.B.block<3, 3>(3 * r, 0) = b1(r) * I;
    }
    sm.max_eigenvalue = lambda;  // upper-triangular blocks: eigenvalues are the diagonal
    sm.slot_length = ts;
    sm.v_max = cp.v_max;
    sm.u_max = cp.u_max;

    const auto dare = solve_dare(sm.A, sm.B, cp.state_weight, cp.action_cost_weight, cp.dare_tolerance,
                                 cp.dare_max_iterations);
    sm.P = dare.P;
    sm.K = dare.K;
    sm.dare_iterations = dare.iterations;

    Eigen::SelfAdjointEigenSolver<Mat6> es(cp.state_noise_cov);
    const Vec6 root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    sm.noise_factor = es.eigenvectors() * root.asDiagonal();
    return sm;
}

double spectral_radius(const Mat6 &M) {
    Eigen::EigenSolver<Mat6> es(M, false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

Vec3 lqr_feedback(const SystemMatrices &sm, const Vec6 &error) { return -sm.K * error; }

ControlCommand lqr_action(const SystemMatrices &sm, const UavState &x, const UavState &x_ref_next) {
    ControlCommand cmd;
    const Vec3 raw = lqr_feedback(sm, x.vector() - x_ref_next.vector());
    cmd.accel = raw.cwiseMax(-sm.u_max).cwiseMin(sm.u_max);
    cmd.clamped = (cmd.accel != raw);
    return cmd;
}

UavState clamp_velocity(const SystemMatrices &sm, UavState x) {
    x.vel = x.vel.cwiseMax(-sm.v_max).cwiseMin(sm.v_max);
    return x;
}

UavState propagate(const SystemMatrices &sm, const UavState &x, const Vec3 &accel, const Vec6 &offset) {
    const Vec6 next = sm.A * x.vector() + sm.B * accel + offset;
    return clamp_velocity(sm, UavState::from_vector(next));
}

Vec6 reference_offset(const SystemMatrices &sm, const UavState &x_ref) {
    return (sm.A_nominal - sm.A) * x_ref.vector();
}

Vec6 draw_noise(const SystemMatrices &sm, std::mt19937_64 &rng) {
    std::normal_distribution<double> n01(0.0, 1.0);
    Vec6 z;
    for (int i = 0; i < 6; ++i) z[i] = n01(rng);
    return sm.noise_factor * z;
}

UavState step_dynamics(const SystemMatrices &sm, const UavState &x, const ControlCommand &u, std::mt19937_64 &rng,
                       const Vec6 &offset) {
    const Vec6 w = draw_noise(sm, rng);
    return propagate(sm, x, u.accel, offset + w);
}

double tracking_error_metric(std::span<const std::pair<UavState, UavState>> log) {
    if (log.empty()) throw std::invalid_argument("tracking_error_metric: empty sequence");
    double sum = 0.0;
    for (const auto &[x, xr] : log) sum += (x.vector() - xr.vector()).squaredNorm();
    return sum / static_cast<double>(log.size());
}

} // namespace satuav
