#include "satuav/sim.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <limits>
#include <cmath>
#include <ostream>
#include <random>
#include <stdexcept>
#include <thread>

#include "satuav/channel.hpp"
#include "satuav/sensing.hpp"

namespace satuav {

const char *phase_name(MissionPhase p) {
    switch (p) {
    case MissionPhase::flight: return "flight";
    case MissionPhase::residual_hover: return "residual_hover";
    case MissionPhase::collect_hover: return "collect_hover";
    }
    return "?";
}

bool ConstraintAudit::pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const ConstraintCheck &c) { return c.pass; });
}

double MissionResult::flight_density() const {
    return flight_slots > 0 ? static_cast<double>(sensing_flight) / flight_slots : 0.0;
}

double MissionResult::hover_density() const {
    return hover_slots > 0 ? static_cast<double>(sensing_hover) / hover_slots : 0.0;
}

namespace {

std::uint64_t derive_seed(std::uint64_t seed, std::uint32_t stream, std::uint32_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream, index};
    std::mt19937_64 g(seq);
    return g();
}

Vec6 hold(const Vec3 &p) {
    Vec6 x;
    x << p, Vec3::Zero();
    return x;
}

class MissionRunner {
public:
    MissionRunner(const MissionScenario &s, const HalfPlanner &planner)
        : s_(s), planner_(planner), sm_(build_system(s.control)),
          delta_(propagation_delay(s.channel, s.control.slot_length).delta_slots),
          loop_(sm_, delta_, UavState{s.sim.start_position, Vec3::Zero()}),
          noise_(derive_seed(s.rng_seed, 1, 0)), draws_(derive_seed(s.rng_seed, 2, 0)),
          collected_(s.devices.size(), 0.0) {
        for (const auto &d : s.devices) mission_.log.device_ids.push_back(d.id);
    }

    Mission run() {
        const auto t0 = std::chrono::steady_clock::now();
        const double dt = s_.control.slot_length;
        Vec3 pos = s_.sim.start_position;
        int seg = 0;
        for (int id : s_.visit_order) {
            const auto idx = device_index(id);
            const GroundDevice &dev = s_.devices[idx];
            SegmentSummary sum;
            sum.segment = seg;
            sum.device = id;
            sum.length = (dev.hover_point - pos).norm();

            if (sum.length > 1e-9) fly(pos, dev.hover_point, seg, id, sum);

            sum.hover_interval = hover_interval(dev.hover_point, seg);
            const Vec6 h = hold(dev.hover_point);
            sum.residual_slots = residual_hover(h, seg, id, sum.hover_interval);

            const double rate = ground_link_budget(s_.channel, dev.hover_point, dev).rate;
            if (s_.data_size > 0.0 && (!(rate > 0.0) || s_.data_size / (rate * dt) > s_.sim.slot_budget)) {
                throw InfeasibleError("device " + std::to_string(id) + ": collection at " + std::to_string(rate) +
                                      " bit/s exceeds the slot budget");
            }
            const double upload_power = s_.sim.upload_during_hover ? s_.p_max : 0.0;
            int j = 0;
            while (collected_[idx] < s_.data_size) {
                slot(MissionPhase::collect_hover, seg, id, h, h, due(sum.hover_interval), upload_power,
                     static_cast<int>(idx));
                ++j;
            }
            sum.collect_slots = j;
            mission_.result.segments.push_back(sum);
            pos = dev.hover_point;
            ++seg;
        }
        if (backlog() > 0.0) {
            SegmentSummary tail;
            tail.segment = seg;
            tail.device = -1;
            tail.hover_interval = hover_interval(pos, seg);
            tail.residual_slots = residual_hover(hold(pos), seg, -1, tail.hover_interval);
            mission_.result.segments.push_back(tail);
        }
        finish(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        return std::move(mission_);
    }

private:
    std::size_t device_index(int id) const {
        for (std::size_t i = 0; i < s_.devices.size(); ++i)
            if (s_.devices[i].id == id) return i;
        throw std::out_of_range("unknown device id " + std::to_string(id));
    }

    double backlog() const { return cum_collected_ - cum_uploaded_; }

    void fly(const Vec3 &from, const Vec3 &to, int seg, int id, SegmentSummary &sum) {
        const double dt = s_.control.slot_length;
        const ReferenceTrajectory ref =
            assemble_segment(planner_, from, to, dt, s_.planner.segment_slot_budget);
        const int n = ref.slots();
        std::vector<double> rho;
        rho.reserve(ref.states.size());
        for (const auto &x : ref.states) rho.push_back(success_probability(s_.channel, x.head<3>(), s_.devices));

        int q = 1;
        if (s_.sensing.force_interval > 0) {
            q = s_.sensing.force_interval;
        } else if (s_.sensing.search) {
            SearchInputs in;
            in.system = &sm_;
            in.energy = &s_.energy;
            in.delta = delta_;
            in.q_cap = s_.sensing.q_cap;
            in.always_succeed = s_.sensing.always_succeed;
            in.replications = s_.sensing.search_replications;
            in.seed = derive_seed(s_.rng_seed, 3, static_cast<std::uint32_t>(seg));
            in.start = loop_.estimate();
            in.divergence_radius = s_.sim.divergence_radius;
            const IntervalSearch found = search_interval(in, ref, rho);
            q = found.interval;
            tracking_budget_ = found.tracking[static_cast<std::size_t>(q - 1)];
            sum.max_interval = found.max_interval;
            sum.sensing_flagged = found.flagged;
        }
        sum.sensing_interval = q;
        sum.flight_slots = n;
        sum.reference_energy = ref.energy;

        const double bits = backlog();
        const double flight_time = n * dt;
        const int sensed = (n + q - 1) / q;
        sum.power = plan_segment(s_.channel, bits, flight_time, s_.p_max,
                                 ref.energy + sensed * s_.energy.sensing_energy, seg);
        const double p = bits > 0.0 ? sum.power.p_final : 0.0;
        for (int k = 0; k < n; ++k) {
            slot(MissionPhase::flight, seg, id, ref.states[k], ref.states[k + 1], k % q == 0, p, -1);
        }
    }

    // Hover sensing keeps counting from the last sensed slot, whatever phase it was in.
    bool due(int q) const {
        return last_sense_ < 0 || static_cast<long>(mission_.log.slots.size()) - last_sense_ >= q;
    }

    int residual_hover(const Vec6 &h, int seg, int id, int q) {
        int j = 0;
        while (backlog() > 0.0) {
            slot(MissionPhase::residual_hover, seg, id, h, h, due(q), s_.p_max, -1);
            ++j;
        }
        return j;
    }

    int hover_interval(const Vec3 &point, int seg) {
        if (s_.sensing.force_interval > 0) return s_.sensing.force_interval;
        if (!s_.sensing.search) return 1;
        SearchInputs in;
        in.system = &sm_;
        in.energy = &s_.energy;
        in.delta = delta_;
        in.q_cap = s_.sensing.q_cap;
        in.always_succeed = s_.sensing.always_succeed;
        in.replications = s_.sensing.search_replications;
        in.seed = derive_seed(s_.rng_seed, 4, static_cast<std::uint32_t>(seg));
        in.divergence_radius = s_.sim.divergence_radius;
        const double rho = success_probability(s_.channel, point, s_.devices);
        double budget = tracking_budget_;
        if (!std::isfinite(budget)) {
            budget = search_hover_interval(in, point, s_.sensing.hover_horizon, rho, 0.0).tracking.front();
        }
        return search_hover_interval(in, point, s_.sensing.hover_horizon, rho, budget).interval;
    }

    void slot(MissionPhase phase, int seg, int id, const Vec6 &ref, const Vec6 &ref_next, bool sense, double power,
              int collect_idx) {
        const long k = static_cast<long>(mission_.log.slots.size());
        if (k >= s_.sim.slot_budget) {
            throw InfeasibleError("mission exceeded the slot budget of " + std::to_string(s_.sim.slot_budget) +
                                  " slots in segment " + std::to_string(seg) + " (" + phase_name(phase) + ")");
        }
        const double dt = s_.control.slot_length;
        SlotRecord r;
        r.slot = k;
        r.phase = phase;
        r.segment = seg;
        r.device = id;
        r.state = loop_.state();
        r.reference = UavState::from_vector(ref);
        r.rho = success_probability(s_.channel, r.reference.pos, s_.devices);
        r.q_max = max_sensing_interval(r.rho, sm_.max_eigenvalue);
        const bool ok = s_.sensing.always_succeed || unit_(draws_) < r.rho;

        const double err = (r.state.pos - r.reference.pos).norm();
        if (!std::isfinite(err) || err > s_.sim.divergence_radius) {
            throw DivergenceError("closed loop diverged at slot " + std::to_string(k) + " (segment " +
                                  std::to_string(seg) + ", " + phase_name(phase) + "): tracking error " +
                                  std::to_string(err) + " m");
        }
        const LoopSlot ls = loop_.step(r.reference, UavState::from_vector(ref_next), sense, ok, &noise_);
        r.estimate = ls.estimate;
        r.command = ls.command.accel;
        r.command_clamped = ls.command.clamped;
        r.gamma = sense ? 1 : 0;
        if (sense) last_sense_ = k;
        r.sense_success = ls.success;
        r.aoi = ls.aoi;

        if (collect_idx >= 0) {
            const GroundDevice &dev = s_.devices[static_cast<std::size_t>(collect_idx)];
            r.ground_rate = ground_link_budget(s_.channel, r.state.pos, dev).rate;
            r.bits_collected = std::min(r.ground_rate * dt, s_.data_size - collected_[collect_idx]);
            collected_[collect_idx] += r.bits_collected;
            cum_collected_ += r.bits_collected;
        }
        if (power > 0.0 && backlog() > 0.0) {
            r.power = power;
            r.sat_rate = sat_rate(s_.channel, power);
            const double cap = r.sat_rate * dt;
            r.bits_uploaded = backlog() <= cap * (1.0 + 1e-9) ? backlog() : cap;
            cum_uploaded_ += r.bits_uploaded;
        }
        r.energy = slot_energy(phase == MissionPhase::flight ? FlightPhase::flying : FlightPhase::hovering, sense,
                               r.power, ls.next.vel, ls.command.accel, s_.energy, dt, s_.p_max);
        ledger_.add(r.energy, r.bits_uploaded);
        r.cum_collected = cum_collected_;
        r.cum_uploaded = cum_uploaded_;

        auto &res = mission_.result;
        if (phase == MissionPhase::flight) {
            ++res.flight_slots;
            res.sensing_flight += r.gamma;
        } else {
            ++res.hover_slots;
            res.sensing_hover += r.gamma;
        }
        mission_.log.slots.push_back(r);
        mission_.log.cum_collected_device.push_back(collected_);
    }

    void finish(double wall) {
        auto &res = mission_.result;
        res.energy = ledger_.report();
        res.ee = res.energy.ee;
        res.seed = s_.rng_seed;
        res.delta = delta_;
        res.slots = static_cast<long>(mission_.log.slots.size());
        res.mission_time = res.slots * s_.control.slot_length;
        res.total_collected = cum_collected_;
        res.total_uploaded = cum_uploaded_;
        double sum = 0.0;
        double late = 0.0;
        const long half = res.slots / 2;
        for (long k = 0; k < res.slots; ++k) {
            const auto &r = mission_.log.slots[static_cast<std::size_t>(k)];
            const double e = (r.state.vector() - r.reference.vector()).squaredNorm();
            sum += e;
            if (k >= half) late += e;
        }
        res.tracking = res.slots > 0 ? sum / res.slots : 0.0;
        res.tracking_second_half = res.slots - half > 0 ? late / (res.slots - half) : 0.0;
        res.audit = audit_mission(mission_.log, s_);
        res.wall_time = wall;
    }

    const MissionScenario &s_;
    const HalfPlanner &planner_;
    SystemMatrices sm_;
    int delta_;
    ControlLoop loop_;
    std::mt19937_64 noise_;
    std::mt19937_64 draws_;
    std::uniform_real_distribution<double> unit_{0.0, 1.0};
    std::vector<double> collected_;
    double cum_collected_ = 0.0;
    double cum_uploaded_ = 0.0;
    double tracking_budget_ = std::numeric_limits<double>::infinity();
    long last_sense_ = -1;
    EnergyLedger ledger_;
    Mission mission_;
};

} // namespace

Mission run_mission(const MissionScenario &s, const HalfPlanner &planner) {
    const auto problems = validate_scenario(s);
    if (!problems.empty()) throw ConfigError(problems.front().substr(0, problems.front().find(':')), problems.front());
    return MissionRunner(s, planner).run();
}

double max_half_distance(const MissionScenario &s) {
    double best = 0.0;
    Vec3 pos = s.sim.start_position;
    for (int id : s.visit_order) {
        const Vec3 &next = s.device(id).hover_point;
        best = std::max(best, 0.5 * (next - pos).norm());
        pos = next;
    }
    return best;
}

ConstraintAudit audit_mission(const MissionLog &log, const MissionScenario &s) {
    ConstraintAudit a;
    auto fail = [&](int c, long slot, const std::string &why) {
        auto &chk = a.checks[static_cast<std::size_t>(c - 1)];
        if (chk.pass) {
            chk.pass = false;
            chk.witness = slot;
            chk.detail = why;
        }
    };
    const auto &slots = log.slots;
    const double dt = s.control.slot_length;
    const double lambda = s.control.instability_factor;
    const double upload_tol = sat_rate(s.channel, s.p_max) * dt;

    for (std::size_t i = 0; i < slots.size(); ++i) {
        const SlotRecord &r = slots[i];
        const long k = r.slot;
        if (r.gamma != 0 && r.gamma != 1) fail(1, k, "gamma not binary");
        if (r.cum_uploaded > r.cum_collected * (1.0 + 1e-12) + 1e-6) fail(2, k, "uploaded more than collected");
        if (!(r.power >= 0.0) || r.power > s.p_max * (1.0 + 1e-12)) fail(4, k, "power outside [0, p_max]");
        if ((r.state.vel.cwiseAbs().array() > s.control.v_max + 1e-9).any()) fail(5, k, "velocity above v_max");
        if ((r.command.cwiseAbs().array() > s.control.u_max + 1e-9).any()) fail(6, k, "acceleration above u_max");
    }
    if (!slots.empty()) {
        const SlotRecord &last = slots.back();
        if (last.cum_collected - last.cum_uploaded > upload_tol)
            fail(2, last.slot, "backlog left at mission end");
        const auto &per_device = log.cum_collected_device.back();
        for (std::size_t d = 0; d < per_device.size(); ++d) {
            if (per_device[d] < s.data_size * (1.0 - 1e-12) - 1e-9)
                fail(3, last.slot, "device " + std::to_string(log.device_ids[d]) + " short of data_size");
        }
    } else if (s.data_size > 0.0 && !s.visit_order.empty()) {
        fail(3, 0, "no slots executed");
    }

    // every sensing gap must satisfy the stability bound at each slot it spans
    std::size_t start = 0;
    while (start < slots.size() && slots[start].gamma == 0) {
        fail(7, slots[start].slot, "no sensing before this slot");
        ++start;
    }
    while (start < slots.size()) {
        std::size_t next = start + 1;
        while (next < slots.size() && slots[next].gamma == 0) ++next;
        const int q = static_cast<int>(next - start);
        for (std::size_t i = start; i < next; ++i) {
            if (!interval_is_stable(slots[i].rho, lambda, q)) {
                fail(7, slots[i].slot, "interval " + std::to_string(q) + " violates the stability bound");
                break;
            }
        }
        start = next;
    }
    return a;
}

double energy_efficiency(const MissionLog &log) {
    double bits = 0.0;
    double energy = 0.0;
    for (const auto &r : log.slots) {
        bits += r.bits_uploaded;
        energy += r.energy.total();
    }
    if (!(energy > 0.0)) throw std::domain_error("energy_efficiency: zero energy");
    return bits / energy;
}

SweepAxis parse_axis(const std::string &name) {
    if (name == "lambda") return SweepAxis::lambda;
    if (name == "data_size") return SweepAxis::data_size;
    if (name == "p_max") return SweepAxis::p_max;
    throw std::invalid_argument("unknown sweep axis '" + name + "' (lambda, data_size, p_max)");
}

const char *axis_name(SweepAxis a) {
    switch (a) {
    case SweepAxis::lambda: return "lambda";
    case SweepAxis::data_size: return "data_size";
    case SweepAxis::p_max: return "p_max";
    }
    return "?";
}

MissionScenario with_axis_value(MissionScenario s, SweepAxis axis, double value) {
    switch (axis) {
    case SweepAxis::lambda: s.control.instability_factor = value; break;
    case SweepAxis::data_size: s.data_size = value; break;
    case SweepAxis::p_max: s.p_max = value; break;
    }
    return s;
}

std::vector<SweepRow> sweep(const MissionScenario &s, SweepAxis axis, const std::vector<double> &values,
                            const HalfPlanner &planner) {
    if (values.empty()) throw std::invalid_argument("sweep: no values");
    std::vector<SweepRow> rows(values.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < values.size(); i = next++) {
            rows[i].value = values[i];
            try {
                rows[i].result = run_mission(with_axis_value(s, axis, values[i]), planner).result;
                rows[i].ok = true;
            } catch (const std::exception &e) {
                rows[i].error = e.what();
            }
        }
    };
    const std::size_t n = std::min<std::size_t>(values.size(), std::max(1u, std::thread::hardware_concurrency()));
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto &t : pool) t.join();
    return rows;
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void write_mission_csv(std::ostream &out, const MissionLog &log) {
    out << "schema_version,slot,phase,segment,device,px,py,pz,vx,vy,vz,est_px,est_py,est_pz,est_vx,est_vy,est_vz,"
           "ref_px,ref_py,ref_pz,ref_vx,ref_vy,ref_vz,ux,uy,uz,clamped,gamma,sense_success,aoi,rho,q_max,power,"
           "sat_rate,ground_rate,bits_collected,bits_uploaded,e_propulsion,e_hover,e_sensing,e_comm,cum_collected,"
           "cum_uploaded";
    for (int id : log.device_ids) out << ",cum_collected_dev" << id;
    out << '\n';
    auto vec = [&](const Eigen::Ref<const Eigen::VectorXd> &v) {
        for (Eigen::Index i = 0; i < v.size(); ++i) out << ',' << format_double(v(i));
    };
    for (std::size_t i = 0; i < log.slots.size(); ++i) {
        const SlotRecord &r = log.slots[i];
        out << kSchemaVersion << ',' << r.slot << ',' << phase_name(r.phase) << ',' << r.segment << ',' << r.device;
        vec(r.state.vector());
        vec(r.estimate.vector());
        vec(r.reference.vector());
        vec(r.command);
        out << ',' << (r.command_clamped ? 1 : 0) << ',' << r.gamma << ',' << (r.sense_success ? 1 : 0) << ','
            << r.aoi;
        for (double v : {r.rho, r.q_max, r.power, r.sat_rate, r.ground_rate, r.bits_collected, r.bits_uploaded,
                         r.energy.propulsion, r.energy.hover, r.energy.sensing, r.energy.comm, r.cum_collected,
                         r.cum_uploaded})
            out << ',' << format_double(v);
        for (double v : log.cum_collected_device[i]) out << ',' << format_double(v);
        out << '\n';
    }
}

void write_sensing_csv(std::ostream &out, const MissionLog &log) {
    out << "schema_version,slot,phase,segment,gamma,sense_success,aoi,rho,q_max\n";
    for (const auto &r : log.slots) {
        out << kSchemaVersion << ',' << r.slot << ',' << phase_name(r.phase) << ',' << r.segment << ',' << r.gamma
            << ',' << (r.sense_success ? 1 : 0) << ',' << r.aoi << ',' << format_double(r.rho) << ','
            << format_double(r.q_max) << '\n';
    }
}

namespace {

std::vector<std::pair<const char *, double>> metrics(const MissionResult &r) {
    return {{"ee", r.ee},
            {"total_energy", r.energy.total_energy},
            {"propulsion_energy", r.energy.propulsion},
            {"hover_energy", r.energy.hover},
            {"sensing_energy", r.energy.sensing},
            {"comm_energy", r.energy.comm},
            {"bits_uploaded", r.total_uploaded},
            {"mission_time", r.mission_time},
            {"tracking", r.tracking},
            {"sensing_total", static_cast<double>(r.sensing_total())},
            {"sensing_flight", static_cast<double>(r.sensing_flight)},
            {"sensing_hover", static_cast<double>(r.sensing_hover)},
            {"flight_density", r.flight_density()},
            {"hover_density", r.hover_density()},
            {"audit_pass", r.audit.pass() ? 1.0 : 0.0}};
}

std::string csv_quote(const std::string &s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

} // namespace

void write_sweep_csv(std::ostream &out, SweepAxis axis, const std::vector<SweepRow> &rows) {
    out << "schema_version,axis,axis_value,status,metric,metric_value,error\n";
    for (const auto &row : rows) {
        const std::string head = std::to_string(kSchemaVersion) + ',' + axis_name(axis) + ',' + format_double(row.value);
        if (!row.ok) {
            out << head << ",error,,," << csv_quote(row.error) << '\n';
            continue;
        }
        for (const auto &[name, v] : metrics(row.result)) out << head << ",ok," << name << ',' << format_double(v) << ",\n";
    }
}

nlohmann::json result_to_json(const MissionResult &r) {
    nlohmann::json j;
    j["schema_version"] = kSchemaVersion;
    j["seed"] = r.seed;
    j["ee"] = r.ee;
    j["energy"] = {{"propulsion", r.energy.propulsion}, {"hover", r.energy.hover},   {"sensing", r.energy.sensing},
                   {"comm", r.energy.comm},             {"total", r.energy.total_energy}};
    j["bits_collected"] = r.total_collected;
    j["bits_uploaded"] = r.total_uploaded;
    j["tracking"] = r.tracking;
    j["tracking_second_half"] = r.tracking_second_half;
    j["slots"] = r.slots;
    j["mission_time"] = r.mission_time;
    j["delta_slots"] = r.delta;
    j["sensing"] = {{"flight", r.sensing_flight},
                    {"hover", r.sensing_hover},
                    {"flight_slots", r.flight_slots},
                    {"hover_slots", r.hover_slots},
                    {"flight_density", r.flight_density()},
                    {"hover_density", r.hover_density()}};
    nlohmann::json audit = nlohmann::json::array();
    for (std::size_t c = 0; c < r.audit.checks.size(); ++c) {
        const auto &chk = r.audit.checks[c];
        audit.push_back({{"constraint", "C" + std::to_string(c + 1)},
                         {"pass", chk.pass},
                         {"witness_slot", chk.witness},
                         {"detail", chk.detail}});
    }
    j["audit"] = audit;
    j["audit_pass"] = r.audit.pass();
    nlohmann::json segs = nlohmann::json::array();
    for (const auto &s : r.segments) {
        segs.push_back({{"segment", s.segment},
                        {"device", s.device},
                        {"length", s.length},
                        {"flight_slots", s.flight_slots},
                        {"residual_slots", s.residual_slots},
                        {"collect_slots", s.collect_slots},
                        {"reference_energy", s.reference_energy},
                        {"upload_bits", s.power.data_bits},
                        {"p_root", s.power.p_root},
                        {"p_min", s.power.p_min},
                        {"p_final", s.power.p_final},
                        {"extra_hover", s.power.extra_hover},
                        {"sensing_interval", s.sensing_interval},
                        {"max_interval", s.max_interval},
                        {"hover_interval", s.hover_interval},
                        {"sensing_flagged", s.sensing_flagged}});
    }
    j["segments"] = segs;
    j["wall_time_s"] = r.wall_time;
    return j;
}

} // namespace satuav
