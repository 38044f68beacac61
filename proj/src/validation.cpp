#include "satuav/validation.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "satuav/channel.hpp"
#include "satuav/control.hpp"
#include "satuav/power.hpp"
#include "satuav/sensing.hpp"

namespace satuav {

OracleReport compare(const std::string &name, double primary, double oracle, double rel_tol, double abs_tol) {
    if (!std::isfinite(primary) || !std::isfinite(oracle)) {
        throw std::invalid_argument("compare(" + name + "): non-finite input");
    }
    if (!(rel_tol >= 0.0) || !(abs_tol >= 0.0)) {
        throw std::invalid_argument("compare(" + name + "): tolerances must be >= 0");
    }
    OracleReport r;
    r.name = name;
    r.primary = primary;
    r.oracle = oracle;
    r.rel_tol = rel_tol;
    r.abs_tol = abs_tol;
    r.abs_dev = std::abs(primary - oracle);
    if (oracle != 0.0) {
        r.rel_dev = r.abs_dev / std::abs(oracle);
    } else {
        r.rel_dev = r.abs_dev > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    }
    r.pass = r.abs_dev <= std::max(abs_tol, rel_tol * std::abs(oracle));
    return r;
}

nlohmann::json report_to_json(const OracleReport &r) {
    nlohmann::json j;
    j["oracle"] = r.name;
    j["primary"] = r.primary;
    j["oracle_value"] = r.oracle;
    j["abs_dev"] = r.abs_dev;
    j["rel_dev"] = std::isfinite(r.rel_dev) ? nlohmann::json(r.rel_dev) : nlohmann::json("inf");
    j["rel_tol"] = r.rel_tol;
    j["abs_tol"] = r.abs_tol;
    j["pass"] = r.pass;
    return j;
}

double scalar_dare_oracle(double a, double b, double q, double eps) {
    if (b == 0.0) {
        if (std::abs(a) >= 1.0) throw std::invalid_argument("scalar_dare_oracle: unstabilizable");
        return q / (1.0 - a * a);
    }
    const double qa = b * b;
    const double qb = eps - a * a * eps - q * b * b;
    const double qc = -q * eps;
    const double disc = std::sqrt(qb * qb - 4.0 * qa * qc);
    // numerically stable positive root
    return qb < 0.0 ? (-qb + disc) / (2.0 * qa) : (-2.0 * qc) / (qb + disc);
}

Eigen::MatrixXd dare_symplectic_oracle(const Eigen::MatrixXd &A, const Eigen::MatrixXd &B, const Eigen::MatrixXd &Q,
                                       const Eigen::MatrixXd &eps) {
    const Eigen::Index n = A.rows();
    const Eigen::MatrixXd AinvT = A.inverse().transpose();
    const Eigen::MatrixXd G = B * eps.inverse() * B.transpose();
    Eigen::MatrixXd Z(2 * n, 2 * n);
    Z.topLeftCorner(n, n) = A + G * AinvT * Q;
    Z.topRightCorner(n, n) = -G * AinvT;
    Z.bottomLeftCorner(n, n) = -AinvT * Q;
    Z.bottomRightCorner(n, n) = AinvT;

    Eigen::EigenSolver<Eigen::MatrixXd> es(Z);
    if (es.info() != Eigen::Success) throw std::runtime_error("dare_symplectic_oracle: eigen decomposition failed");
    Eigen::MatrixXcd U(2 * n, n);
    Eigen::Index m = 0;
    for (Eigen::Index i = 0; i < 2 * n; ++i) {
        if (std::abs(es.eigenvalues()[i]) < 1.0) {
            if (m == n) throw std::runtime_error("dare_symplectic_oracle: too many stable eigenvalues");
            U.col(m++) = es.eigenvectors().col(i);
        }
    }
    if (m != n) throw std::runtime_error("dare_symplectic_oracle: stable subspace has wrong dimension");
    const Eigen::MatrixXcd U1 = U.topRows(n);
    const Eigen::MatrixXcd U2 = U.bottomRows(n);
    const Eigen::MatrixXd P = (U2 * U1.inverse()).real();
    return 0.5 * (P + P.transpose());
}

double root_power_scan(double r, int points) {
    if (!(r > 0.0)) throw std::invalid_argument("root_power_scan: gain over noise must be positive");
    if (points < 2) throw std::invalid_argument("root_power_scan: need at least two points");
    auto f = [r](double p) { return r / (1.0 + p * r) - std::log(1.0 + p * r); };
    const double h = 1.0 / points;
    double p0 = 0.0;
    double f0 = f(p0);
    for (int i = 1; i <= points; ++i) {
        const double p1 = i * h;
        const double f1 = f(p1);
        if (f1 == 0.0) return p1;
        if ((f0 > 0.0) != (f1 > 0.0)) return p0 + h * f0 / (f0 - f1);
        p0 = p1;
        f0 = f1;
    }
    throw std::runtime_error("root_power_scan: no sign change on [0, 1]");
}

bool interval_stable_oracle(double rho, double lambda, int q) {
    double growth = 1.0;
    for (int i = 0; i < q; ++i) growth *= lambda;
    return (1.0 - rho) * growth < 1.0;
}

IntervalEquivalence interval_equivalence(int q_limit) {
    IntervalEquivalence out;
    for (int i = 50; i <= 99; ++i) {
        const double rho = i / 100.0;
        for (int j = 101; j <= 150; ++j) {
            const double lambda = j / 100.0;
            const double q_max = max_sensing_interval(rho, lambda);
            for (int q = 1; q <= q_limit; ++q) {
                ++out.checked;
                if ((q < q_max) != interval_stable_oracle(rho, lambda, q)) {
                    if (out.disagreements == 0) {
                        out.first_rho = rho;
                        out.first_lambda = lambda;
                        out.first_q = q;
                    }
                    ++out.disagreements;
                }
            }
        }
    }
    return out;
}

LogTotals resum_log(const MissionLog &log) {
    LogTotals t;
    t.collected_per_device.assign(log.device_ids.size(), 0.0);
    for (const auto &r : log.slots) {
        t.propulsion += r.energy.propulsion;
        t.hover += r.energy.hover;
        t.sensing += r.energy.sensing;
        t.comm += r.energy.comm;
        t.uploaded += r.bits_uploaded;
        t.collected += r.bits_collected;
        t.max_slot_rate_bits = std::max(t.max_slot_rate_bits, r.bits_uploaded);
        t.sensing_slots += r.gamma;
        if (r.bits_collected > 0.0) {
            for (std::size_t i = 0; i < log.device_ids.size(); ++i)
                if (log.device_ids[i] == r.device) t.collected_per_device[i] += r.bits_collected;
        }
    }
    t.energy = t.propulsion + t.hover + t.sensing + t.comm;
    return t;
}

GradientCheck gradient_check(const QNetwork &net, const Eigen::MatrixXd &x, const std::vector<int> &actions,
                             const Eigen::VectorXd &targets, double step) {
    Eigen::VectorXd analytic;
    net.loss_and_gradient(x, actions, targets, analytic);
    const Eigen::VectorXd theta = net.parameters();
    QNetwork probe = net;
    GradientCheck out;
    out.parameters = theta.size();
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        Eigen::VectorXd t = theta;
        t[i] = theta[i] + step;
        probe.set_parameters(t);
        const double up = probe.loss(x, actions, targets);
        t[i] = theta[i] - step;
        probe.set_parameters(t);
        const double down = probe.loss(x, actions, targets);
        const double numeric = (up - down) / (2.0 * step);
        out.max_abs_error = std::max(out.max_abs_error, std::abs(numeric - analytic[i]));
        out.max_abs_gradient = std::max(out.max_abs_gradient, std::abs(numeric));
    }
    out.relative_error = out.max_abs_gradient > 0.0 ? out.max_abs_error / out.max_abs_gradient : out.max_abs_error;
    return out;
}

GradientFixture gradient_fixture(std::uint64_t seed, int hidden) {
    std::mt19937_64 rng(seed);
    GradientFixture f;
    f.net = QNetwork(hidden, 250.0, 50.0, rng);
    // perturb every weight so no unit sits exactly at a kink
    Eigen::VectorXd theta = f.net.parameters();
    std::normal_distribution<double> n01(0.0, 1.0);
    for (Eigen::Index i = 0; i < theta.size(); ++i) theta[i] += 0.05 * n01(rng);
    f.net.set_parameters(theta);
    const int batch = 8;
    std::uniform_real_distribution<double> ud(0.0, 250.0), uv(0.0, 50.0);
    std::uniform_int_distribution<int> ua(0, kActionCount - 1);
    f.x.resize(2, batch);
    f.targets.resize(batch);
    for (int j = 0; j < batch; ++j) {
        f.x.col(j) = f.net.features(PlannerState{ud(rng), uv(rng)});
        f.actions.push_back(ua(rng));
        f.targets[j] = 2.0 * n01(rng);
    }
    return f;
}

namespace {

std::string tag(double v) {
    std::string s = format_double(v);
    std::replace(s.begin(), s.end(), '.', '_');
    return s;
}

} // namespace

std::vector<OracleReport> self_check(bool mission) {
    std::vector<OracleReport> out;

    {
        const auto [P, K] = solve_dare<1, 1>(Eigen::Matrix<double, 1, 1>::Ones(), Eigen::Matrix<double, 1, 1>::Ones(),
                                             Eigen::Matrix<double, 1, 1>::Ones(), Eigen::Matrix<double, 1, 1>::Ones(),
                                             1e-14, 100000);
        out.push_back(compare("dare_scalar_golden_ratio", P(0, 0), scalar_dare_oracle(1, 1, 1, 1), 0.0, 1e-6));
    }
    for (double lambda : {1.0, 1.05, 1.10}) {
        ControlParams cp;
        cp.instability_factor = lambda;
        const SystemMatrices sm = build_system(cp);
        const Eigen::MatrixXd P = dare_symplectic_oracle(sm.A, sm.B, cp.state_weight, cp.action_cost_weight);
        out.push_back(compare("dare_table1_lambda_" + tag(lambda), (sm.P - P).norm(), 0.0, 0.0, 1e-6 * P.norm()));
        out.push_back(
            compare("closed_loop_stable_lambda_" + tag(lambda), spectral_radius(sm.A - sm.B * sm.K) < 1.0, 1.0, 0, 0));
    }

    for (double r : {0.1, 1.0, 10.0}) {
        ChannelParams ch;
        ch.noise_power = ch.sat_ref_gain / (ch.sat_altitude * ch.sat_altitude) / r;
        const double p = solve_root_power(ch);
        out.push_back(compare("root_power_residual_r_" + tag(r), root_equation_residual(ch, p), 0.0, 0.0, 1e-12));
        out.push_back(compare("root_power_scan_r_" + tag(r), p, root_power_scan(r), 1e-6, 0.0));
    }

    {
        const IntervalEquivalence eq = interval_equivalence(200);
        out.push_back(compare("sensing_interval_equivalence", static_cast<double>(eq.disagreements), 0.0, 0.0, 0.0));
    }

    for (int delta : {0, 1, 3}) {
        ControlParams cp;
        cp.instability_factor = 1.05;
        const SystemMatrices sm = build_system(cp);
        ControlLoop loop(sm, delta, UavState{Vec3(3, -2, 100), Vec3(1, 0, 0)});
        double worst = 0.0;
        for (int k = 0; k < 500; ++k) {
            const UavState ref{Vec3(0.2 * k, 0.0, 100.0), Vec3(2.0, 0.0, 0.0)};
            const UavState ref_next{Vec3(0.2 * (k + 1), 0.0, 100.0), Vec3(2.0, 0.0, 0.0)};
            const LoopSlot s = loop.step(ref, ref_next, k % 4 == 0, k % 3 != 0, nullptr);
            worst = std::max(worst, (loop.estimate().vector() - s.next.vector()).norm());
        }
        out.push_back(compare("estimator_exact_delta_" + std::to_string(delta), worst, 0.0, 0.0, 1e-10));
    }

    {
        const GradientFixture f = gradient_fixture();
        const GradientCheck g = gradient_check(f.net, f.x, f.actions, f.targets);
        out.push_back(compare("qnetwork_gradient", g.relative_error, 0.0, 0.0, 1e-4));
    }

    {
        MissionScenario s = default_scenario();
        const PlannerEnv env = PlannerEnv::from_scenario(s);
        ValueIterationPlanner coarse(env, 126.0, {0.5, 0.1});
        ValueIterationPlanner fine(env, 126.0, {0.25, 0.05});
        out.push_back(compare("oracle_grid_refinement_d125", coarse.solve(125.0).energy, fine.solve(125.0).energy,
                              0.02, 0.0));
    }

    if (mission) {
        MissionScenario s = default_scenario();
        s.devices.resize(3);
        s.visit_order = nearest_neighbor_order(s.devices, s.sim.start_position);
        s.data_size = 2e6;
        ValueIterationPlanner vi(PlannerEnv::from_scenario(s), max_half_distance(s) + 1.0);
        const Mission m = run_mission(s, vi);
        const LogTotals t = resum_log(m.log);
        out.push_back(compare("mission_ee_resum", m.result.ee, t.ee(), 1e-9, 0.0));
        out.push_back(compare("mission_energy_resum", m.result.energy.total_energy, t.energy, 1e-9, 0.0));
        out.push_back(compare("mission_uploaded_bits", t.uploaded, s.data_size * static_cast<double>(s.devices.size()),
                              0.0, t.max_slot_rate_bits));
        out.push_back(compare("mission_audit_pass", m.result.audit.pass() ? 1.0 : 0.0, 1.0, 0.0, 0.0));
    }
    return out;
}

} // namespace satuav
