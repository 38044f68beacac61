#pragma once

#include <random>
#include <string>
#include <vector>

#include "json.hpp"

#include "satuav/dqn.hpp"
#include "satuav/sim.hpp"
#include "satuav/types.hpp"

namespace satuav {

struct OracleReport {
    std::string name;
    double primary = 0.0;
    double oracle = 0.0;
    double abs_dev = 0.0;
    double rel_dev = 0.0;  // abs_dev / |oracle|, inf when the oracle is zero and abs_dev > 0
    double rel_tol = 0.0;
    double abs_tol = 0.0;
    bool pass = false;
};

// pass iff |primary - oracle| <= max(abs_tol, rel_tol |oracle|).
// Throws std::invalid_argument on non-finite values or negative tolerances.
OracleReport compare(const std::string &name, double primary, double oracle, double rel_tol, double abs_tol);

nlohmann::json report_to_json(const OracleReport &r);

// Positive root of b^2 P^2 + (eps - a^2 eps - q b^2) P - q eps = 0, the scalar Riccati fixed point.
double scalar_dare_oracle(double a, double b, double q, double eps);

// Stabilizing DARE solution from the stable invariant subspace of the symplectic pencil.
// Requires A invertible. Throws std::runtime_error when the subspace split fails.
Eigen::MatrixXd dare_symplectic_oracle(const Eigen::MatrixXd &A, const Eigen::MatrixXd &B, const Eigen::MatrixXd &Q,
                                       const Eigen::MatrixXd &eps);

// Root of r / (1 + P r) = ln(1 + P r) by a uniform scan of `points` cells on [0, 1] W
// (x ln x = r with x = 1 + P r forces P <= 1) and linear interpolation in the bracketing cell.
double root_power_scan(double gain_over_noise, int points = 1000000);

// (1 - rho) lambda^q < 1 with lambda^q built by repeated multiplication.
bool interval_stable_oracle(double rho, double lambda, int q);

struct IntervalEquivalence {
    long checked = 0;
    long disagreements = 0;
    double first_rho = 0.0;
    double first_lambda = 0.0;
    int first_q = 0;
};

// Compares q < max_sensing_interval(rho, lambda) with the integer oracle over the grid
// rho = 0.50..0.99, lambda = 1.01..1.50 (step 0.01), q = 1..q_limit.
IntervalEquivalence interval_equivalence(int q_limit = 200);

struct LogTotals {
    double energy = 0.0;
    double propulsion = 0.0;
    double hover = 0.0;
    double sensing = 0.0;
    double comm = 0.0;
    double uploaded = 0.0;
    double collected = 0.0;
    double max_slot_rate_bits = 0.0;  // largest single-slot upload
    long sensing_slots = 0;
    std::vector<double> collected_per_device;

    double ee() const { return energy > 0.0 ? uploaded / energy : 0.0; }
};

// Sums the per-slot records from scratch.
LogTotals resum_log(const MissionLog &log);

struct GradientCheck {
    double max_abs_error = 0.0;
    double max_abs_gradient = 0.0;
    double relative_error = 0.0;  // max |analytic - numeric| / max |numeric|
    long parameters = 0;
};

// Central differences of QNetwork::loss against loss_and_gradient on a fixed batch.
GradientCheck gradient_check(const QNetwork &net, const Eigen::MatrixXd &x, const std::vector<int> &actions,
                             const Eigen::VectorXd &targets, double step = 1e-6);

// Fixed 8-transition batch and network used by the self-check and the tests.
struct GradientFixture {
    QNetwork net;
    Eigen::MatrixXd x;
    std::vector<int> actions;
    Eigen::VectorXd targets;
};
GradientFixture gradient_fixture(std::uint64_t seed = 11, int hidden = 16);

// Every oracle against its primary counterpart. `mission` adds a short mission re-summation.
std::vector<OracleReport> self_check(bool mission = true);

} // namespace satuav
