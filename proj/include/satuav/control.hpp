#pragma once

#include <random>
#include <span>
#include <utility>

#include "satuav/scenario.hpp"
#include "satuav/types.hpp"

namespace satuav {

// Position and velocity, world frame. Layout matches the 6-vector [p; v].
struct UavState {
    Vec3 pos = Vec3::Zero();
    Vec3 vel = Vec3::Zero();

    static UavState from_vector(const Vec6 &x) { return {x.head<3>(), x.tail<3>()}; }
    Vec6 vector() const {
        Vec6 x;
        x << pos, vel;
        return x;
    }

    bool operator==(const UavState &) const = default;
};

struct ControlCommand {
    Vec3 accel = Vec3::Zero();
    bool clamped = false;

    bool operator==(const ControlCommand &) const = default;
};

struct SystemMatrices {
    Mat6 A = Mat6::Identity();          // instability-scaled transition
    Mat6 A_nominal = Mat6::Identity();  // unit-diagonal double integrator
    Mat63 B = Mat63::Zero();
    Mat36 K = Mat36::Zero();
    Mat6 P = Mat6::Zero();              // DARE solution
    double max_eigenvalue = 1.0;
    Mat6 noise_factor = Mat6::Zero();   // L with L L^T = R
    double slot_length = 0.1;
    double v_max = 50.0;
    double u_max = 10.0;
    long dare_iterations = 0;
};

struct DareSolution {
    Mat6 P;
    Mat36 K;
    long iterations = 0;
    double residual = 0.0;  // ||rhs(P) - P||_F / ||P||_F
};

// Riccati right-hand side A'PA - A'PB (B'PB + eps)^-1 B'PA + Q.
template <int N, int M>
Eigen::Matrix<double, N, N> riccati_rhs(const Eigen::Matrix<double, N, N> &A, const Eigen::Matrix<double, N, M> &B,
                                        const Eigen::Matrix<double, N, N> &Q, const Eigen::Matrix<double, M, M> &eps,
                                        const Eigen::Matrix<double, N, N> &P) {
    const Eigen::Matrix<double, M, M> S = B.transpose() * P * B + eps;
    const Eigen::Matrix<double, M, N> BtPA = B.transpose() * P * A;
    return A.transpose() * P * A - BtPA.transpose() * S.ldlt().solve(BtPA) + Q;
}

// Fixed-point iteration of the Riccati recursion from P0 = Q. Stops once the relative
// Frobenius residual drops below `tol`; throws ConvergenceError after `max_iter`.
template <int N, int M>
std::pair<Eigen::Matrix<double, N, N>, Eigen::Matrix<double, M, N>>
solve_dare(const Eigen::Matrix<double, N, N> &A, const Eigen::Matrix<double, N, M> &B,
           const Eigen::Matrix<double, N, N> &Q, const Eigen::Matrix<double, M, M> &eps, double tol = 1e-9,
           long max_iter = 10000, long *iterations = nullptr) {
    Eigen::Matrix<double, N, N> P = Q;
    double residual = 0.0;
    for (long it = 1; it <= max_iter; ++it) {
        Eigen::Matrix<double, N, N> next = riccati_rhs<N, M>(A, B, Q, eps, P);
        next = 0.5 * (next + next.transpose());
        P = next;
        const Eigen::Matrix<double, N, N> check = riccati_rhs<N, M>(A, B, Q, eps, P);
        const double scale = P.norm();
        residual = scale > 0.0 ? (check - P).norm() / scale : (check - P).norm();
        if (residual <= tol) {
            if (iterations) *iterations = it;
            const Eigen::Matrix<double, M, M> S = B.transpose() * P * B + eps;
            Eigen::Matrix<double, M, N> K = S.ldlt().solve(B.transpose() * P * A);
            return {P, K};
        }
        if (!P.allFinite()) break;
    }
    throw ConvergenceError("DARE fixed-point iteration did not converge", max_iter, residual);
}

DareSolution solve_dare(const Mat6 &A, const Mat63 &B, const Mat6 &Q, const Mat3 &eps, double tol = 1e-9,
                        long max_iter = 10000);

// A = (lambda * I2 + Ts * E12) (x) I3, B = [Ts^2/2; Ts] (x) I3, plus the LQR gain.
SystemMatrices build_system(const ControlParams &cp);

double spectral_radius(const Mat6 &M);

// u = -K (x - x_ref_next), each component clamped to [-u_max, u_max].
ControlCommand lqr_action(const SystemMatrices &sm, const UavState &x, const UavState &x_ref_next);

// Unclamped feedback for an error vector.
Vec3 lqr_feedback(const SystemMatrices &sm, const Vec6 &error);

// Per-component velocity clamp to [-v_max, v_max].
UavState clamp_velocity(const SystemMatrices &sm, UavState x);

// Deterministic part of the plant step: A x + B u + offset, velocity clamped.
UavState propagate(const SystemMatrices &sm, const UavState &x, const Vec3 &accel, const Vec6 &offset);

// Offset applied when the instability factor exceeds one: the excess growth acts on the
// deviation from the reference, so a state sitting on the reference is not pushed away.
Vec6 reference_offset(const SystemMatrices &sm, const UavState &x_ref);

// Zero-mean Gaussian draw with covariance R.
Vec6 draw_noise(const SystemMatrices &sm, std::mt19937_64 &rng);

// x(k+1) = A x + B u + w, w ~ N(0, R); velocity clamped.
UavState step_dynamics(const SystemMatrices &sm, const UavState &x, const ControlCommand &u, std::mt19937_64 &rng,
                       const Vec6 &offset = Vec6::Zero());

// (1/T) sum ||x(t) - x_r(t)||^2. Throws std::invalid_argument on an empty sequence.
double tracking_error_metric(std::span<const std::pair<UavState, UavState>> log);

} // namespace satuav
