#include "satuav/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace satuav {

using nlohmann::json;

const GroundDevice &MissionScenario::device(int id) const {
    auto it = std::find_if(devices.begin(), devices.end(), [id](const GroundDevice &d) { return d.id == id; });
    if (it == devices.end()) {
        throw ConfigError("visit_order", "unknown device id " + std::to_string(id));
    }
    return *it;
}

std::vector<GroundDevice> default_devices() {
    static const double xy[10][2] = {{150, 200}, {400, 100}, {650, 250}, {900, 150}, {850, 450},
                                     {600, 550}, {300, 450}, {150, 700}, {450, 850}, {800, 800}};
    std::vector<GroundDevice> out;
    for (int i = 0; i < 10; ++i) {
        GroundDevice d;
        d.id = i + 1;
        d.position = Vec3(xy[i][0], xy[i][1], 0.0);
        d.transmit_power = 0.1;
        d.hover_point = d.position + Vec3(0.0, 0.0, 100.0);
        out.push_back(d);
    }
    return out;
}

std::vector<int> nearest_neighbor_order(const std::vector<GroundDevice> &devices, const Vec3 &start) {
    std::vector<int> order;
    std::vector<bool> used(devices.size(), false);
    Vec3 here = start;
    for (std::size_t n = 0; n < devices.size(); ++n) {
        std::size_t best = devices.size();
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < devices.size(); ++i) {
            if (used[i]) continue;
            const double d = (devices[i].hover_point - here).norm();
            // strict comparison keeps the lowest index on ties
            if (d < best_d) {
                best_d = d;
                best = i;
            }
        }
        used[best] = true;
        order.push_back(devices[best].id);
        here = devices[best].hover_point;
    }
    return order;
}

MissionScenario default_scenario() {
    MissionScenario s;
    s.devices = default_devices();
    s.visit_order = nearest_neighbor_order(s.devices, s.sim.start_position);
    return s;
}

namespace {

bool is_symmetric(const Eigen::MatrixXd &m) { return (m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + m.cwiseAbs().maxCoeff()); }

double min_eigenvalue(const Eigen::MatrixXd &m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    return es.eigenvalues().minCoeff();
}

void check_matrix(std::vector<std::string> &out, const std::string &name, const Eigen::MatrixXd &m, bool strict) {
    if (!m.allFinite()) {
        out.push_back(name + ": entries must be finite");
        return;
    }
    if (!is_symmetric(m)) {
        out.push_back(name + ": must be symmetric");
        return;
    }
    const double ev = min_eigenvalue(m);
    if (strict && ev <= 0.0) {
        out.push_back(name + ": must be positive definite (min eigenvalue " + std::to_string(ev) + ")");
    } else if (!strict && ev < -1e-12) {
        out.push_back(name + ": must be positive semidefinite (min eigenvalue " + std::to_string(ev) + ")");
    }
}

void positive(std::vector<std::string> &out, const std::string &name, double v) {
    if (!(v > 0.0) || !std::isfinite(v)) out.push_back(name + ": must be > 0 (got " + std::to_string(v) + ")");
}

} // namespace

std::vector<std::string> validate_scenario(const MissionScenario &s) {
    std::vector<std::string> out;

    if (s.devices.empty()) out.push_back("devices: at least one device required");
    std::set<int> ids;
    double max_hover_z = 0.0;
    for (const auto &d : s.devices) {
        const std::string p = "devices[" + std::to_string(d.id) + "]";
        if (!ids.insert(d.id).second) out.push_back(p + ".id: duplicate id");
        if (!d.position.allFinite() || d.position.z() < 0.0) out.push_back(p + ".position: z must be >= 0");
        positive(out, p + ".transmit_power", d.transmit_power);
        if (!d.hover_point.allFinite() || d.hover_point.z() <= 0.0) out.push_back(p + ".hover_point: z must be > 0");
        if (d.hover_point.z() <= d.position.z()) out.push_back(p + ".hover_point: must be above the device");
        max_hover_z = std::max(max_hover_z, d.hover_point.z());
    }

    std::vector<int> order = s.visit_order;
    std::sort(order.begin(), order.end());
    if (order != std::vector<int>(ids.begin(), ids.end()) || order.size() != s.devices.size()) {
        out.push_back("visit_order: must be a permutation of the device ids");
    }

    if (!(s.data_size >= 0.0) || !std::isfinite(s.data_size)) out.push_back("data_size: must be >= 0");
    positive(out, "p_max", s.p_max);

    const auto &c = s.control;
    positive(out, "control.slot_length", c.slot_length);
    check_matrix(out, "control.state_noise_cov", c.state_noise_cov, false);
    check_matrix(out, "control.action_cost_weight", c.action_cost_weight, true);
    check_matrix(out, "control.state_weight", c.state_weight, true);
    if (!(c.instability_factor >= 1.0) || !std::isfinite(c.instability_factor)) {
        out.push_back("control.instability_factor: must be >= 1");
    }
    positive(out, "control.v_max", c.v_max);
    positive(out, "control.u_max", c.u_max);
    if (c.dare_max_iterations < 1) out.push_back("control.dare_max_iterations: must be >= 1");
    positive(out, "control.dare_tolerance", c.dare_tolerance);

    const auto &ch = s.channel;
    positive(out, "channel.carrier_freq", ch.carrier_freq);
    positive(out, "channel.sat_bandwidth", ch.sat_bandwidth);
    positive(out, "channel.ground_bandwidth", ch.ground_bandwidth);
    positive(out, "channel.noise_power", ch.noise_power);
    positive(out, "channel.ref_channel_gain", ch.ref_channel_gain);
    positive(out, "channel.sat_ref_gain", ch.sat_ref_gain);
    positive(out, "channel.sat_altitude", ch.sat_altitude);
    positive(out, "channel.env_a", ch.env_a);
    positive(out, "channel.env_b", ch.env_b);
    positive(out, "channel.excess_loss_los", ch.excess_loss_los);
    positive(out, "channel.excess_loss_nlos", ch.excess_loss_nlos);
    if (ch.excess_loss_nlos < ch.excess_loss_los) {
        out.push_back("channel.excess_loss_nlos: must not be below excess_loss_los");
    }
    positive(out, "channel.rx_antenna_gain", ch.rx_antenna_gain);
    positive(out, "channel.earth_radius", ch.earth_radius);
    if (!(ch.max_elevation_deg >= 0.0 && ch.max_elevation_deg <= 90.0)) {
        out.push_back("channel.max_elevation_deg: must lie in [0, 90]");
    }
    if (!(ch.min_central_angle_deg >= 0.0 && ch.min_central_angle_deg < 90.0)) {
        out.push_back("channel.min_central_angle_deg: must lie in [0, 90)");
    }
    positive(out, "channel.snr_threshold", ch.snr_threshold);
    positive(out, "channel.light_speed", ch.light_speed);
    if (ch.sat_altitude > 0.0 && max_hover_z > 0.0 && ch.sat_altitude < 100.0 * max_hover_z) {
        out.push_back("channel.sat_altitude: must be at least 100x the highest hover point");
    }

    const auto &e = s.energy;
    positive(out, "energy.kappa1", e.kappa1);
    positive(out, "energy.kappa2", e.kappa2);
    positive(out, "energy.gravity", e.gravity);
    positive(out, "energy.hover_power", e.hover_power);
    positive(out, "energy.sensing_energy", e.sensing_energy);
    positive(out, "energy.v_floor", e.v_floor);

    if (s.sensing.q_cap < 1) out.push_back("sensing.q_cap: must be >= 1");
    if (s.sensing.force_interval < 0) out.push_back("sensing.force_interval: must be >= 0");
    if (s.sensing.search_replications < 1) out.push_back("sensing.search_replications: must be >= 1");
    if (s.sensing.hover_horizon < 1) out.push_back("sensing.hover_horizon: must be >= 1");

    const auto &q = s.planner.dqn;
    if (q.hidden_width < 1) out.push_back("planner.dqn.hidden_width: must be >= 1");
    if (!(q.discount >= 0.0 && q.discount < 1.0)) out.push_back("planner.dqn.discount: must lie in [0, 1)");
    if (!(q.epsilon_end >= 0.0 && q.epsilon_end <= q.epsilon_start && q.epsilon_start <= 1.0)) {
        out.push_back("planner.dqn.epsilon: need 0 <= epsilon_end <= epsilon_start <= 1");
    }
    if (!(q.epsilon_anneal_fraction > 0.0 && q.epsilon_anneal_fraction <= 1.0)) {
        out.push_back("planner.dqn.epsilon_anneal_fraction: must lie in (0, 1]");
    }
    if (q.minibatch < 1) out.push_back("planner.dqn.minibatch: must be >= 1");
    if (q.buffer_capacity < q.minibatch) out.push_back("planner.dqn.buffer_capacity: must be >= minibatch");
    positive(out, "planner.dqn.learning_rate", q.learning_rate);
    if (q.target_update < 1) out.push_back("planner.dqn.target_update: must be >= 1");
    positive(out, "planner.dqn.reward_dest", q.reward_dest);
    positive(out, "planner.dqn.reward_scale", q.reward_scale);
    if (q.stage_distances.empty()) out.push_back("planner.dqn.stage_distances: must not be empty");
    for (double d : q.stage_distances) {
        if (!(d > 0.0 && d <= q.d_max)) out.push_back("planner.dqn.stage_distances: each must lie in (0, d_max]");
    }
    if (q.episodes_per_stage < 1) out.push_back("planner.dqn.episodes_per_stage: must be >= 1");
    if (q.max_episode_steps < 1) out.push_back("planner.dqn.max_episode_steps: must be >= 1");
    positive(out, "planner.dqn.d_max", q.d_max);
    positive(out, "planner.oracle_d_step", s.planner.oracle_d_step);
    positive(out, "planner.oracle_v_step", s.planner.oracle_v_step);
    if (s.planner.oracle_d_step > 0.5) out.push_back("planner.oracle_d_step: must be <= 0.5 m");
    if (s.planner.oracle_v_step > 0.5) out.push_back("planner.oracle_v_step: must be <= 0.5 m/s");
    if (s.planner.segment_slot_budget < 1) out.push_back("planner.segment_slot_budget: must be >= 1");
    if (!(s.planner.reference_fraction > 0.0 && s.planner.reference_fraction <= 1.0))
        out.push_back("planner.reference_fraction: must be in (0, 1]");

    if (!s.sim.start_position.allFinite()) out.push_back("sim.start_position: must be finite");
    if (s.sim.slot_budget < 1) out.push_back("sim.slot_budget: must be >= 1");
    if (!(s.sim.divergence_radius > 0.0)) out.push_back("sim.divergence_radius: must be > 0");
    return out;
}

// ---------------------------------------------------------------------------
// config tree reading

namespace {

class Reader {
public:
    Reader(const json &node, std::string path) : node_(node), path_(std::move(path)) {}

    bool has(const std::string &key) const { return node_.is_object() && node_.contains(key); }

    std::string field(const std::string &key) const { return path_.empty() ? key : path_ + "." + key; }

    Reader child(const std::string &key) const {
        static const json empty = json::object();
        if (!has(key)) return Reader(empty, field(key));
        if (!node_.at(key).is_object()) throw ConfigError(field(key), "expected an object");
        return Reader(node_.at(key), field(key));
    }

    double number(const std::string &key, double fallback) const {
        if (!has(key)) return fallback;
        const auto &v = node_.at(key);
        if (!v.is_number()) throw ConfigError(field(key), "expected a number");
        return v.get<double>();
    }

    // `key` in linear units, or `key_db` in decibels.
    double linear_or_db(const std::string &key, double fallback) const {
        if (has(key) && has(key + "_db")) throw ConfigError(field(key), "given both linear and _db forms");
        if (has(key + "_db")) return db_to_linear(number(key + "_db", 0.0));
        return number(key, fallback);
    }

    long integer(const std::string &key, long fallback) const {
        if (!has(key)) return fallback;
        const auto &v = node_.at(key);
        if (v.is_number_integer()) return v.get<long>();
        if (v.is_number_float()) {
            const double d = v.get<double>();
            if (d == std::floor(d) && std::abs(d) < 9.0e15) return static_cast<long>(d);
        }
        throw ConfigError(field(key), "expected an integer");
    }

    bool boolean(const std::string &key, bool fallback) const {
        if (!has(key)) return fallback;
        const auto &v = node_.at(key);
        if (!v.is_boolean()) throw ConfigError(field(key), "expected true or false");
        return v.get<bool>();
    }

    Vec3 vec3(const std::string &key, const Vec3 &fallback) const {
        if (!has(key)) return fallback;
        const auto &v = node_.at(key);
        if (!v.is_array() || v.size() != 3) throw ConfigError(field(key), "expected an array of 3 numbers");
        Vec3 out;
        for (int i = 0; i < 3; ++i) {
            if (!v[i].is_number()) throw ConfigError(field(key), "expected an array of 3 numbers");
            out[i] = v[i].get<double>();
        }
        return out;
    }

    std::vector<double> numbers(const std::string &key, const std::vector<double> &fallback) const {
        if (!has(key)) return fallback;
        const auto &v = node_.at(key);
        if (!v.is_array()) throw ConfigError(field(key), "expected an array of numbers");
        std::vector<double> out;
        for (const auto &e : v) {
            if (!e.is_number()) throw ConfigError(field(key), "expected an array of numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }

    // Square matrix given either in full under `key` or as `key_diag`.
    template <int N>
    Eigen::Matrix<double, N, N> matrix(const std::string &key, const Eigen::Matrix<double, N, N> &fallback) const {
        if (has(key) && has(key + "_diag")) throw ConfigError(field(key), "given both full and _diag forms");
        if (has(key + "_diag")) {
            const auto d = numbers(key + "_diag", {});
            if (d.size() != N) throw ConfigError(field(key + "_diag"), "expected " + std::to_string(N) + " numbers");
            Eigen::Matrix<double, N, 1> v;
            for (int i = 0; i < N; ++i) v[i] = d[i];
            return v.asDiagonal();
        }
        if (!has(key)) return fallback;
        const auto &v = node_.at(key);
        const std::string msg = "expected a " + std::to_string(N) + "x" + std::to_string(N) + " array of numbers";
        if (!v.is_array() || v.size() != N) throw ConfigError(field(key), msg);
        Eigen::Matrix<double, N, N> m;
        for (int r = 0; r < N; ++r) {
            if (!v[r].is_array() || v[r].size() != N) throw ConfigError(field(key), msg);
            for (int c = 0; c < N; ++c) {
                if (!v[r][c].is_number()) throw ConfigError(field(key), msg);
                m(r, c) = v[r][c].get<double>();
            }
        }
        return m;
    }

    const json &node() const { return node_; }

private:
    const json &node_;
    std::string path_;
};

template <int N>
json matrix_json(const Eigen::Matrix<double, N, N> &m) {
    json rows = json::array();
    for (int r = 0; r < N; ++r) {
        json row = json::array();
        for (int c = 0; c < N; ++c) row.push_back(m(r, c));
        rows.push_back(row);
    }
    return rows;
}

json vec_json(const Vec3 &v) { return json::array({v.x(), v.y(), v.z()}); }

} // namespace

MissionScenario scenario_from_json(const json &root) {
    if (!root.is_object()) throw ConfigError("<root>", "config must be an object");
    Reader r(root, "");
    MissionScenario s;

    if (r.has("rng_seed")) {
        const auto &seed = root.at("rng_seed");
        if (!seed.is_number_integer()) throw ConfigError("rng_seed", "expected a non-negative integer");
        if (seed.is_number_unsigned()) {
            s.rng_seed = seed.get<std::uint64_t>();
        } else {
            const auto v = seed.get<std::int64_t>();
            if (v < 0) throw ConfigError("rng_seed", "expected a non-negative integer");
            s.rng_seed = static_cast<std::uint64_t>(v);
        }
    }
    s.data_size = r.number("data_size", s.data_size);
    s.p_max = r.number("p_max", s.p_max);

    {
        const Reader c = r.child("control");
        auto &cp = s.control;
        cp.slot_length = c.number("slot_length", cp.slot_length);
        cp.state_noise_cov = c.matrix<6>("state_noise_cov", cp.state_noise_cov);
        cp.action_cost_weight = c.matrix<3>("action_cost_weight", cp.action_cost_weight);
        cp.state_weight = c.matrix<6>("state_weight", cp.state_weight);
        cp.instability_factor = c.number("instability_factor", cp.instability_factor);
        cp.v_max = c.number("v_max", cp.v_max);
        cp.u_max = c.number("u_max", cp.u_max);
        cp.dare_max_iterations = static_cast<int>(c.integer("dare_max_iterations", cp.dare_max_iterations));
        cp.dare_tolerance = c.number("dare_tolerance", cp.dare_tolerance);
    }
    {
        const Reader c = r.child("channel");
        auto &ch = s.channel;
        ch.carrier_freq = c.number("carrier_freq", ch.carrier_freq);
        ch.sat_bandwidth = c.number("sat_bandwidth", ch.sat_bandwidth);
        ch.ground_bandwidth = c.number("ground_bandwidth", ch.ground_bandwidth);
        if (c.has("noise_power") && c.has("noise_power_dbm")) {
            throw ConfigError(c.field("noise_power"), "given both linear and _dbm forms");
        }
        ch.noise_power = c.has("noise_power_dbm") ? dbm_to_watts(c.number("noise_power_dbm", 0.0))
                                                  : c.number("noise_power", ch.noise_power);
        ch.ref_channel_gain = c.linear_or_db("ref_channel_gain", ch.ref_channel_gain);
        ch.sat_ref_gain = c.linear_or_db("sat_ref_gain", ch.sat_ref_gain);
        ch.sat_altitude = c.number("sat_altitude", ch.sat_altitude);
        ch.env_a = c.number("env_a", ch.env_a);
        ch.env_b = c.number("env_b", ch.env_b);
        ch.excess_loss_los = c.linear_or_db("excess_loss_los", ch.excess_loss_los);
        ch.excess_loss_nlos = c.linear_or_db("excess_loss_nlos", ch.excess_loss_nlos);
        ch.rx_antenna_gain = c.linear_or_db("rx_antenna_gain", ch.rx_antenna_gain);
        ch.earth_radius = c.number("earth_radius", ch.earth_radius);
        ch.max_elevation_deg = c.number("max_elevation_deg", ch.max_elevation_deg);
        ch.min_central_angle_deg = c.number("min_central_angle_deg", ch.min_central_angle_deg);
        ch.snr_threshold = c.linear_or_db("snr_threshold", ch.snr_threshold);
        ch.apply_snr_threshold = c.boolean("apply_snr_threshold", ch.apply_snr_threshold);
        ch.light_speed = c.number("light_speed", ch.light_speed);
    }
    {
        const Reader c = r.child("energy");
        auto &e = s.energy;
        e.kappa1 = c.number("kappa1", e.kappa1);
        e.kappa2 = c.number("kappa2", e.kappa2);
        e.gravity = c.number("gravity", e.gravity);
        e.hover_power = c.number("hover_power", e.hover_power);
        e.sensing_energy = c.number("sensing_energy", e.sensing_energy);
        e.v_floor = c.number("v_floor", e.v_floor);
    }
    {
        const Reader c = r.child("sensing");
        auto &sp = s.sensing;
        sp.q_cap = static_cast<int>(c.integer("q_cap", sp.q_cap));
        sp.always_succeed = c.boolean("always_succeed", sp.always_succeed);
        sp.force_interval = static_cast<int>(c.integer("force_interval", sp.force_interval));
        sp.search = c.boolean("search", sp.search);
        sp.search_replications = static_cast<int>(c.integer("search_replications", sp.search_replications));
        sp.hover_horizon = static_cast<int>(c.integer("hover_horizon", sp.hover_horizon));
    }
    {
        const Reader p = r.child("planner");
        auto &pp = s.planner;
        pp.oracle_d_step = p.number("oracle_d_step", pp.oracle_d_step);
        pp.oracle_v_step = p.number("oracle_v_step", pp.oracle_v_step);
        pp.segment_slot_budget = static_cast<int>(p.integer("segment_slot_budget", pp.segment_slot_budget));
        pp.reference_fraction = p.number("reference_fraction", pp.reference_fraction);
        const Reader q = p.child("dqn");
        auto &h = pp.dqn;
        h.hidden_width = static_cast<int>(q.integer("hidden_width", h.hidden_width));
        h.discount = q.number("discount", h.discount);
        h.epsilon_start = q.number("epsilon_start", h.epsilon_start);
        h.epsilon_end = q.number("epsilon_end", h.epsilon_end);
        h.epsilon_anneal_fraction = q.number("epsilon_anneal_fraction", h.epsilon_anneal_fraction);
        h.minibatch = static_cast<int>(q.integer("minibatch", h.minibatch));
        h.buffer_capacity = static_cast<int>(q.integer("buffer_capacity", h.buffer_capacity));
        h.learning_rate = q.number("learning_rate", h.learning_rate);
        h.target_update = static_cast<int>(q.integer("target_update", h.target_update));
        h.reward_dest = q.number("reward_dest", h.reward_dest);
        h.reward_scale = q.number("reward_scale", h.reward_scale);
        h.stage_distances = q.numbers("stage_distances", h.stage_distances);
        h.episodes_per_stage = static_cast<int>(q.integer("episodes_per_stage", h.episodes_per_stage));
        h.max_episode_steps = static_cast<int>(q.integer("max_episode_steps", h.max_episode_steps));
        h.d_max = q.number("d_max", h.d_max);
    }
    {
        const Reader c = r.child("sim");
        s.sim.start_position = c.vec3("start_position", s.sim.start_position);
        s.sim.upload_during_hover = c.boolean("upload_during_hover", s.sim.upload_during_hover);
        s.sim.slot_budget = c.integer("slot_budget", s.sim.slot_budget);
        s.sim.divergence_radius = c.number("divergence_radius", s.sim.divergence_radius);
    }

    const double hover_altitude = r.number("hover_altitude", 100.0);
    if (r.has("devices")) {
        const auto &arr = root.at("devices");
        if (!arr.is_array()) throw ConfigError("devices", "expected an array");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            if (!arr[i].is_object()) throw ConfigError("devices[" + std::to_string(i) + "]", "expected an object");
            const Reader d(arr[i], "devices[" + std::to_string(i) + "]");
            GroundDevice g;
            g.id = static_cast<int>(d.integer("id", static_cast<long>(i) + 1));
            if (!d.has("position")) throw ConfigError(d.field("position"), "required");
            g.position = d.vec3("position", Vec3::Zero());
            g.transmit_power = d.number("transmit_power", g.transmit_power);
            g.hover_point = d.vec3("hover_point", g.position + Vec3(0.0, 0.0, hover_altitude));
            s.devices.push_back(g);
        }
    } else {
        s.devices = default_devices();
        for (auto &d : s.devices) d.hover_point = d.position + Vec3(0.0, 0.0, hover_altitude);
    }

    if (r.has("visit_order")) {
        for (double v : r.numbers("visit_order", {})) s.visit_order.push_back(static_cast<int>(v));
    } else if (!s.devices.empty()) {
        s.visit_order = nearest_neighbor_order(s.devices, s.sim.start_position);
    }

    const auto violations = validate_scenario(s);
    if (!violations.empty()) {
        const auto &first = violations.front();
        const auto colon = first.find(':');
        std::ostringstream all;
        for (std::size_t i = 0; i < violations.size(); ++i) all << (i ? "; " : "") << violations[i];
        throw ConfigError(first.substr(0, colon), "invalid scenario: " + all.str());
    }
    return s;
}

MissionScenario load_scenario(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("<file>", "cannot open " + path.string());
    json j;
    try {
        j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error &e) {
        throw ConfigError("<file>", std::string("parse error in ") + path.string() + ": " + e.what());
    }
    return scenario_from_json(j);
}

json scenario_to_json(const MissionScenario &s) {
    json j;
    j["schema_version"] = 1;
    j["rng_seed"] = s.rng_seed;
    j["data_size"] = s.data_size;
    j["p_max"] = s.p_max;
    j["visit_order"] = s.visit_order;
    json devs = json::array();
    for (const auto &d : s.devices) {
        devs.push_back({{"id", d.id},
                        {"position", vec_json(d.position)},
                        {"transmit_power", d.transmit_power},
                        {"hover_point", vec_json(d.hover_point)}});
    }
    j["devices"] = devs;

    const auto &c = s.control;
    j["control"] = {{"slot_length", c.slot_length},
                    {"state_noise_cov", matrix_json<6>(c.state_noise_cov)},
                    {"action_cost_weight", matrix_json<3>(c.action_cost_weight)},
                    {"state_weight", matrix_json<6>(c.state_weight)},
                    {"instability_factor", c.instability_factor},
                    {"v_max", c.v_max},
                    {"u_max", c.u_max},
                    {"dare_max_iterations", c.dare_max_iterations},
                    {"dare_tolerance", c.dare_tolerance}};
    const auto &ch = s.channel;
    j["channel"] = {{"carrier_freq", ch.carrier_freq},
                    {"sat_bandwidth", ch.sat_bandwidth},
                    {"ground_bandwidth", ch.ground_bandwidth},
                    {"noise_power", ch.noise_power},
                    {"ref_channel_gain", ch.ref_channel_gain},
                    {"sat_ref_gain", ch.sat_ref_gain},
                    {"sat_altitude", ch.sat_altitude},
                    {"env_a", ch.env_a},
                    {"env_b", ch.env_b},
                    {"excess_loss_los", ch.excess_loss_los},
                    {"excess_loss_nlos", ch.excess_loss_nlos},
                    {"rx_antenna_gain", ch.rx_antenna_gain},
                    {"earth_radius", ch.earth_radius},
                    {"max_elevation_deg", ch.max_elevation_deg},
                    {"min_central_angle_deg", ch.min_central_angle_deg},
                    {"snr_threshold", ch.snr_threshold},
                    {"apply_snr_threshold", ch.apply_snr_threshold},
                    {"light_speed", ch.light_speed}};
    const auto &e = s.energy;
    j["energy"] = {{"kappa1", e.kappa1},
                   {"kappa2", e.kappa2},
                   {"gravity", e.gravity},
                   {"hover_power", e.hover_power},
                   {"sensing_energy", e.sensing_energy},
                   {"v_floor", e.v_floor}};
    const auto &sp = s.sensing;
    j["sensing"] = {{"q_cap", sp.q_cap},
                    {"always_succeed", sp.always_succeed},
                    {"force_interval", sp.force_interval},
                    {"search", sp.search},
                    {"search_replications", sp.search_replications},
                    {"hover_horizon", sp.hover_horizon}};
    const auto &h = s.planner.dqn;
    j["planner"] = {{"oracle_d_step", s.planner.oracle_d_step},
                    {"oracle_v_step", s.planner.oracle_v_step},
                    {"segment_slot_budget", s.planner.segment_slot_budget},
                    {"reference_fraction", s.planner.reference_fraction},
                    {"dqn",
                     {{"hidden_width", h.hidden_width},
                      {"discount", h.discount},
                      {"epsilon_start", h.epsilon_start},
                      {"epsilon_end", h.epsilon_end},
                      {"epsilon_anneal_fraction", h.epsilon_anneal_fraction},
                      {"minibatch", h.minibatch},
                      {"buffer_capacity", h.buffer_capacity},
                      {"learning_rate", h.learning_rate},
                      {"target_update", h.target_update},
                      {"reward_dest", h.reward_dest},
                      {"reward_scale", h.reward_scale},
                      {"stage_distances", h.stage_distances},
                      {"episodes_per_stage", h.episodes_per_stage},
                      {"max_episode_steps", h.max_episode_steps},
                      {"d_max", h.d_max}}}};
    j["sim"] = {{"start_position", vec_json(s.sim.start_position)},
                {"upload_during_hover", s.sim.upload_during_hover},
                {"slot_budget", s.sim.slot_budget},
                {"divergence_radius", s.sim.divergence_radius}};
    return j;
}

} // namespace satuav
