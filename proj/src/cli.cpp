#include "satuav/cli.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"

#include "satuav/planner.hpp"
#include "satuav/scenario.hpp"
#include "satuav/sim.hpp"
#include "satuav/validation.hpp"

namespace satuav {

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    std::ostringstream s;
    s << std::hex << std::setw(16) << std::setfill('0') << v;
    return s.str();
}

nlohmann::json RunManifest::to_json() const {
    return {{"schema_version", kSchemaVersion},
            {"subcommand", subcommand},
            {"config_path", config_path},
            {"config_hash", config_hash},
            {"seed", seed},
            {"out_dir", out_dir},
            {"tool_version", tool_version},
            {"args", args}};
}

RunManifest RunManifest::from_json(const nlohmann::json &j) {
    RunManifest m;
    m.subcommand = j.at("subcommand").get<std::string>();
    m.config_path = j.at("config_path").get<std::string>();
    m.config_hash = j.at("config_hash").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.out_dir = j.at("out_dir").get<std::string>();
    m.tool_version = j.at("tool_version").get<std::string>();
    m.args = j.at("args").get<std::vector<std::string>>();
    return m;
}

void write_training_log_csv(std::ostream &out, const std::vector<EpisodeLog> &log) {
    out << "schema_version,episode,stage,stage_distance,steps,energy,running_min_energy,return,epsilon,mean_loss,"
           "reached\n";
    double best = 0.0;
    int stage = -1;
    for (const auto &e : log) {
        if (e.stage != stage) {
            stage = e.stage;
            best = e.energy;
        }
        best = std::min(best, e.energy);
        out << kSchemaVersion << ',' << e.episode << ',' << e.stage << ',' << format_double(e.stage_distance) << ','
            << e.steps << ',' << format_double(e.energy) << ',' << format_double(best) << ','
            << format_double(e.ret) << ',' << format_double(e.epsilon) << ',' << format_double(e.mean_loss) << ','
            << (e.reached ? 1 : 0) << '\n';
    }
}

namespace {

// Thrown for problems with the command line itself.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    bool oracle = false;
    std::string weights;
    std::string axis;
    std::string values;
    std::string upload_during_hover;
    int force_interval = 0;
    std::string manifest;
};

bool parse_bool(const std::string &s) {
    std::string v = s;
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "off" || v == "no") return false;
    throw UsageError("--upload-during-hover: expected true or false, got '" + s + "'");
}

std::vector<double> parse_values(const std::string &csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception &) {
            throw UsageError("--values: cannot parse '" + item + "'");
        }
        if (used != item.size() || !std::isfinite(v)) throw UsageError("--values: cannot parse '" + item + "'");
        out.push_back(v);
    }
    if (out.empty()) throw UsageError("--values: empty list");
    return out;
}

std::string read_file(const std::filesystem::path &p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ConfigError("<file>", "cannot open " + p.string());
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write_text(const std::filesystem::path &p, const std::string &text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << text;
    if (!out) throw std::runtime_error("write failed for " + p.string());
}

template <class F>
void write_with(const std::filesystem::path &p, F &&fill) {
    std::ostringstream s;
    fill(s);
    write_text(p, s.str());
}

class Session {
public:
    Session(std::string sub, const Options &o, std::vector<std::string> args, std::ostream &out)
        : sub_(std::move(sub)), o_(o), args_(std::move(args)), out_(out) {}

    int run() {
        if (o_.config.empty()) throw UsageError(sub_ + ": --config is required");
        if (o_.out.empty()) throw UsageError(sub_ + ": --out is required");
        const std::string bytes = read_file(o_.config);
        nlohmann::json root;
        try {
            root = nlohmann::json::parse(bytes, nullptr, true, true);
        } catch (const nlohmann::json::parse_error &e) {
            throw ConfigError("<file>", std::string("parse error in ") + o_.config + ": " + e.what());
        }
        s_ = scenario_from_json(root);
        if (o_.seed) s_.rng_seed = *o_.seed;
        if (!o_.upload_during_hover.empty()) s_.sim.upload_during_hover = parse_bool(o_.upload_during_hover);
        if (o_.force_interval < 0) throw UsageError("--force-sensing-interval must be >= 1");
        if (o_.force_interval > 0) s_.sensing.force_interval = o_.force_interval;

        dir_ = o_.out;
        std::filesystem::create_directories(dir_);
        RunManifest m;
        m.subcommand = sub_;
        m.config_path = o_.config;
        m.config_hash = hex64(fnv1a64(bytes));
        m.seed = s_.rng_seed;
        m.out_dir = o_.out;
        m.args = args_;
        write_text(dir_ / "manifest.json", m.to_json().dump(2) + "\n");

        if (sub_ == "train") return train();
        if (sub_ == "plan") return plan();
        if (sub_ == "simulate") return simulate();
        if (sub_ == "sweep") return run_sweep();
        throw UsageError("unknown subcommand " + sub_);
    }

private:
    std::unique_ptr<HalfPlanner> planner() const {
        const PlannerEnv env = PlannerEnv::from_scenario(s_);
        if (o_.oracle) {
            return std::make_unique<ValueIterationPlanner>(
                env, max_half_distance(s_) + 1.0, OracleGrid{s_.planner.oracle_d_step, s_.planner.oracle_v_step});
        }
        if (o_.weights.empty()) throw UsageError(sub_ + ": give --weights FILE or --oracle");
        QNetwork net;
        try {
            net = QNetwork::load(o_.weights);
        } catch (const std::exception &e) {
            throw ConfigError("--weights", e.what());
        }
        return std::make_unique<DqnPlanner>(env, std::move(net));
    }

    int train() {
        const TrainingResult r = train_dqn(PlannerEnv::from_scenario(s_), s_.planner.dqn, s_.rng_seed);
        r.network.save(dir_ / "weights.json");
        write_with(dir_ / "training_log.csv", [&](std::ostream &o) { write_training_log_csv(o, r.log); });
        out_ << "trained " << r.log.size() << " episodes, " << r.gradient_steps << " gradient steps\n";
        return kExitOk;
    }

    int plan() {
        const auto p = planner();
        const double dt = s_.control.slot_length;
        nlohmann::json segs = nlohmann::json::array();
        std::ostringstream csv;
        csv << "schema_version,segment,device,slot,t,px,py,pz,vx,vy,vz,ax,ay,az\n";
        Vec3 pos = s_.sim.start_position;
        int seg = 0;
        for (int id : s_.visit_order) {
            const Vec3 to = s_.device(id).hover_point;
            if ((to - pos).norm() > 1e-9) {
                const ReferenceTrajectory ref = assemble_segment(*p, pos, to, dt, s_.planner.segment_slot_budget);
                for (int k = 0; k <= ref.slots(); ++k) {
                    csv << kSchemaVersion << ',' << seg << ',' << id << ',' << k << ',' << format_double(k * dt);
                    for (int i = 0; i < 6; ++i) csv << ',' << format_double(ref.states[k][i]);
                    const Vec3 a = k < ref.slots() ? ref.accels[k] : Vec3::Zero();
                    for (int i = 0; i < 3; ++i) csv << ',' << format_double(a[i]);
                    csv << '\n';
                }
                segs.push_back({{"segment", seg},
                                {"device", id},
                                {"length", (to - pos).norm()},
                                {"slots", ref.slots()},
                                {"duration", ref.duration(dt)},
                                {"energy", ref.energy},
                                {"half_energy", ref.half_energy}});
            }
            pos = to;
            ++seg;
        }
        write_text(dir_ / "references.csv", csv.str());
        write_text(dir_ / "plan.json",
                   nlohmann::json{{"schema_version", kSchemaVersion}, {"segments", segs}}.dump(2) + "\n");
        return kExitOk;
    }

    int simulate() {
        const auto p = planner();
        const Mission m = run_mission(s_, *p);
        write_with(dir_ / "mission.csv", [&](std::ostream &o) { write_mission_csv(o, m.log); });
        write_with(dir_ / "sensing.csv", [&](std::ostream &o) { write_sensing_csv(o, m.log); });
        write_text(dir_ / "result.json", result_to_json(m.result).dump(2) + "\n");
        if (!m.result.audit.pass()) {
            for (std::size_t c = 0; c < m.result.audit.checks.size(); ++c) {
                const auto &chk = m.result.audit.checks[c];
                if (!chk.pass) out_ << "audit C" << c + 1 << " failed at slot " << chk.witness << "\n";
            }
            return kExitAudit;
        }
        return kExitOk;
    }

    int run_sweep() {
        if (o_.axis.empty()) throw UsageError("sweep: --axis is required");
        if (o_.values.empty()) throw UsageError("sweep: --values is required");
        SweepAxis axis;
        try {
            axis = parse_axis(o_.axis);
        } catch (const std::exception &e) {
            throw UsageError(e.what());
        }
        const std::vector<double> values = parse_values(o_.values);
        const auto p = planner();
        const auto rows = sweep(s_, axis, values, *p);
        write_with(dir_ / "sweep.csv", [&](std::ostream &o) { write_sweep_csv(o, axis, rows); });
        const bool any_ok = std::any_of(rows.begin(), rows.end(), [](const SweepRow &r) { return r.ok; });
        return any_ok ? kExitOk : kExitRuntime;
    }

    std::string sub_;
    Options o_;
    std::vector<std::string> args_;
    std::ostream &out_;
    MissionScenario s_;
    std::filesystem::path dir_;
};

int self_check_cmd(std::ostream &out) {
    bool all = true;
    for (const auto &r : self_check()) {
        out << report_to_json(r).dump() << '\n';
        all = all && r.pass;
    }
    return all ? kExitOk : kExitAudit;
}

void add_common(CLI::App *cmd, Options &o) {
    cmd->add_option("--config", o.config, "scenario JSON");
    cmd->add_option("--seed", o.seed, "overrides rng_seed");
    cmd->add_option("--out", o.out, "output directory");
}

void add_planner(CLI::App *cmd, Options &o) {
    cmd->add_flag("--oracle", o.oracle, "value-iteration planner instead of trained weights");
    cmd->add_option("--weights", o.weights, "trained network JSON");
}

void add_mission(CLI::App *cmd, Options &o) {
    cmd->add_option("--upload-during-hover", o.upload_during_hover, "true or false");
    cmd->add_option("--force-sensing-interval", o.force_interval, "sense every N slots in every phase");
}

int dispatch(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

int replay(const Options &o, std::ostream &out, std::ostream &err) {
    if (o.manifest.empty()) throw UsageError("replay: --manifest is required");
    if (o.out.empty()) throw UsageError("replay: --out is required");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(o.manifest));
    } catch (const nlohmann::json::exception &e) {
        throw ConfigError("--manifest", e.what());
    }
    RunManifest m;
    try {
        m = RunManifest::from_json(j);
    } catch (const nlohmann::json::exception &e) {
        throw ConfigError("--manifest", e.what());
    }
    if (hex64(fnv1a64(read_file(m.config_path))) != m.config_hash) {
        throw ConfigError("--manifest", "config " + m.config_path + " no longer matches the recorded hash");
    }
    std::vector<std::string> args = m.args;
    for (std::size_t i = 0; i + 1 < args.size(); ++i) {
        if (args[i] == "--out") args[i + 1] = o.out;
        if (args[i].rfind("--out=", 0) == 0) args[i] = "--out=" + o.out;
    }
    if (std::find(args.begin(), args.end(), "--seed") == args.end()) {
        args.push_back("--seed");
        args.push_back(std::to_string(m.seed));
    }
    return dispatch(args, out, err);
}

int dispatch(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
    CLI::App app{"Remote UAV control and data collection simulator"};
    app.set_version_flag("--version", kToolVersion);
    bool self = false;
    app.add_flag("--self-check", self, "run every oracle and print one JSON line per report");

    Options o;
    auto *train = app.add_subcommand("train", "train the trajectory network");
    add_common(train, o);
    auto *plan = app.add_subcommand("plan", "reference trajectories for every leg");
    add_common(plan, o);
    add_planner(plan, o);
    auto *sim = app.add_subcommand("simulate", "run one mission");
    add_common(sim, o);
    add_planner(sim, o);
    add_mission(sim, o);
    auto *sw = app.add_subcommand("sweep", "one mission per value of a parameter");
    add_common(sw, o);
    add_planner(sw, o);
    add_mission(sw, o);
    sw->add_option("--axis", o.axis, "lambda, data_size or p_max");
    sw->add_option("--values", o.values, "comma-separated values");
    auto *rep = app.add_subcommand("replay", "rerun the command recorded in a manifest");
    rep->add_option("--manifest", o.manifest, "manifest.json of an earlier run");
    rep->add_option("--out", o.out, "output directory");
    app.require_subcommand(0, 1);

    // CLI11 consumes the vector from the back
    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::ParseError &e) {
        std::ostringstream o_msg, e_msg;
        const int code = app.exit(e, o_msg, e_msg);
        out << o_msg.str();
        err << e_msg.str();
        return code == 0 ? kExitOk : kExitUsage;
    }

    if (self) return self_check_cmd(out);
    if (app.got_subcommand(rep)) return replay(o, out, err);
    for (auto *cmd : {train, plan, sim, sw}) {
        if (app.got_subcommand(cmd)) return Session(cmd->get_name(), o, args, out).run();
    }
    err << app.help();
    return kExitUsage;
}

} // namespace

int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    try {
        return dispatch(args, out, err);
    } catch (const UsageError &e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ConfigError &e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception &e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}

} // namespace satuav
