#include "satuav/dqn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace satuav {

namespace {

Eigen::MatrixXd uniform_matrix(int rows, int cols, double bound, std::mt19937_64 &rng) {
    std::uniform_real_distribution<double> dist(-bound, bound);
    Eigen::MatrixXd m(rows, cols);
    for (int c = 0; c < cols; ++c)
        for (int r = 0; r < rows; ++r) m(r, c) = dist(rng);
    return m;
}

Eigen::MatrixXd relu(const Eigen::MatrixXd &z) { return z.cwiseMax(0.0); }

nlohmann::json matrix_json(const Eigen::MatrixXd &m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from(const nlohmann::json &j, Eigen::Index rows, Eigen::Index cols) {
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) throw std::runtime_error("weights: bad row count");
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        if (static_cast<Eigen::Index>(j[r].size()) != cols) throw std::runtime_error("weights: bad column count");
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
    }
    return m;
}

Eigen::VectorXd vector_from(const nlohmann::json &j, Eigen::Index n) {
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != n) throw std::runtime_error("weights: bad bias size");
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = j[i].get<double>();
    return v;
}

} // namespace

QNetwork::QNetwork(int hidden, double d_max, double v_max, std::mt19937_64 &rng) : d_max_(d_max), v_max_(v_max) {
    if (hidden < 1) throw std::invalid_argument("hidden width must be positive");
    w1_ = uniform_matrix(hidden, 2, std::sqrt(6.0 / 2.0), rng);
    w2_ = uniform_matrix(hidden, hidden, std::sqrt(6.0 / hidden), rng);
    w3_ = uniform_matrix(kActionCount, hidden, std::sqrt(6.0 / hidden) * 0.1, rng);
    b1_ = Eigen::VectorXd::Zero(hidden);
    b2_ = Eigen::VectorXd::Zero(hidden);
    b3_ = Eigen::VectorXd::Zero(kActionCount);
}

Eigen::Vector2d QNetwork::features(const PlannerState &s) const {
    return {std::clamp(s.d, 0.0, d_max_) / d_max_, s.v / v_max_};
}

Eigen::MatrixXd QNetwork::forward(const Eigen::MatrixXd &x) const {
    const Eigen::MatrixXd h1 = relu((w1_ * x).colwise() + b1_);
    const Eigen::MatrixXd h2 = relu((w2_ * h1).colwise() + b2_);
    return (w3_ * h2).colwise() + b3_;
}

Eigen::VectorXd QNetwork::q_values(const PlannerState &s) const {
    const Eigen::MatrixXd x = features(s);
    return forward(x).col(0);
}

int QNetwork::greedy(const PlannerState &s) const {
    const Eigen::VectorXd q = q_values(s);
    Eigen::Index best = 0;
    q.maxCoeff(&best);
    return static_cast<int>(best);
}

double QNetwork::loss(const Eigen::MatrixXd &x, const std::vector<int> &actions, const Eigen::VectorXd &targets) const {
    const Eigen::MatrixXd q = forward(x);
    double l = 0.0;
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const double e = q(actions[j], j) - targets(j);
        l += 0.5 * e * e;
    }
    return l / static_cast<double>(x.cols());
}

double QNetwork::loss_and_gradient(const Eigen::MatrixXd &x, const std::vector<int> &actions,
                                   const Eigen::VectorXd &targets, Eigen::VectorXd &grad) const {
    const Eigen::Index n = x.cols();
    if (static_cast<Eigen::Index>(actions.size()) != n || targets.size() != n)
        throw std::invalid_argument("minibatch size mismatch");
    const Eigen::MatrixXd z1 = (w1_ * x).colwise() + b1_;
    const Eigen::MatrixXd h1 = relu(z1);
    const Eigen::MatrixXd z2 = (w2_ * h1).colwise() + b2_;
    const Eigen::MatrixXd h2 = relu(z2);
    const Eigen::MatrixXd q = (w3_ * h2).colwise() + b3_;

    Eigen::MatrixXd dq = Eigen::MatrixXd::Zero(q.rows(), n);
    double l = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        const double e = q(actions[j], j) - targets(j);
        l += 0.5 * e * e;
        dq(actions[j], j) = e / static_cast<double>(n);
    }
    const Eigen::MatrixXd gw3 = dq * h2.transpose();
    const Eigen::VectorXd gb3 = dq.rowwise().sum();
    const Eigen::MatrixXd dz2 = (w3_.transpose() * dq).cwiseProduct((z2.array() > 0.0).cast<double>().matrix());
    const Eigen::MatrixXd gw2 = dz2 * h1.transpose();
    const Eigen::VectorXd gb2 = dz2.rowwise().sum();
    const Eigen::MatrixXd dz1 = (w2_.transpose() * dz2).cwiseProduct((z1.array() > 0.0).cast<double>().matrix());
    const Eigen::MatrixXd gw1 = dz1 * x.transpose();
    const Eigen::VectorXd gb1 = dz1.rowwise().sum();

    grad.resize(parameter_count());
    Eigen::Index o = 0;
    auto put = [&](const Eigen::MatrixXd &m) {
        grad.segment(o, m.size()) = Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
        o += m.size();
    };
    put(gw1);
    put(gb1);
    put(gw2);
    put(gb2);
    put(gw3);
    put(gb3);
    return l / static_cast<double>(n);
}

Eigen::Index QNetwork::parameter_count() const {
    return w1_.size() + b1_.size() + w2_.size() + b2_.size() + w3_.size() + b3_.size();
}

Eigen::VectorXd QNetwork::parameters() const {
    Eigen::VectorXd theta(parameter_count());
    Eigen::Index o = 0;
    auto put = [&](const Eigen::MatrixXd &m) {
        theta.segment(o, m.size()) = Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
        o += m.size();
    };
    put(w1_);
    put(b1_);
    put(w2_);
    put(b2_);
    put(w3_);
    put(b3_);
    return theta;
}

void QNetwork::set_parameters(const Eigen::VectorXd &theta) {
    if (theta.size() != parameter_count()) throw std::invalid_argument("parameter vector size mismatch");
    Eigen::Index o = 0;
    auto get = [&](auto &m) {
        m = Eigen::Map<const Eigen::MatrixXd>(theta.data() + o, m.rows(), m.cols());
        o += m.size();
    };
    get(w1_);
    get(b1_);
    get(w2_);
    get(b2_);
    get(w3_);
    get(b3_);
}

bool QNetwork::finite() const {
    return w1_.allFinite() && w2_.allFinite() && w3_.allFinite() && b1_.allFinite() && b2_.allFinite() &&
           b3_.allFinite();
}

nlohmann::json QNetwork::to_json() const {
    nlohmann::json j;
    j["format"] = "satuav-qnetwork";
    j["version"] = 1;
    j["inputs"] = 2;
    j["hidden"] = hidden();
    j["actions"] = kActionCount;
    j["d_max"] = d_max_;
    j["v_max"] = v_max_;
    j["layers"] = nlohmann::json::array({
        {{"weights", matrix_json(w1_)}, {"bias", matrix_json(b1_.transpose())[0]}},
        {{"weights", matrix_json(w2_)}, {"bias", matrix_json(b2_.transpose())[0]}},
        {{"weights", matrix_json(w3_)}, {"bias", matrix_json(b3_.transpose())[0]}},
    });
    return j;
}

QNetwork QNetwork::from_json(const nlohmann::json &j) {
    if (j.value("format", "") != "satuav-qnetwork") throw std::runtime_error("weights: unknown format");
    if (j.value("version", 0) != 1) throw std::runtime_error("weights: unsupported version");
    if (j.at("actions").get<int>() != kActionCount || j.at("inputs").get<int>() != 2)
        throw std::runtime_error("weights: layer shape mismatch");
    QNetwork net;
    const int h = j.at("hidden").get<int>();
    net.d_max_ = j.at("d_max").get<double>();
    net.v_max_ = j.at("v_max").get<double>();
    const auto &layers = j.at("layers");
    if (layers.size() != 3) throw std::runtime_error("weights: expected three layers");
    net.w1_ = matrix_from(layers[0].at("weights"), h, 2);
    net.b1_ = vector_from(layers[0].at("bias"), h);
    net.w2_ = matrix_from(layers[1].at("weights"), h, h);
    net.b2_ = vector_from(layers[1].at("bias"), h);
    net.w3_ = matrix_from(layers[2].at("weights"), kActionCount, h);
    net.b3_ = vector_from(layers[2].at("bias"), kActionCount);
    return net;
}

void QNetwork::save(const std::filesystem::path &path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << to_json().dump(1) << '\n';
}

QNetwork QNetwork::load(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    return from_json(nlohmann::json::parse(in));
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("replay capacity must be positive");
    data_.reserve(std::min<std::size_t>(capacity, 1 << 16));
}

void ReplayBuffer::push(const Transition &t) {
    if (data_.size() < capacity_) {
        data_.push_back(t);
    } else {
        data_[head_] = t;
        head_ = (head_ + 1) % capacity_;
    }
}

std::vector<std::size_t> ReplayBuffer::sample(std::size_t n, std::mt19937_64 &rng) const {
    if (n > data_.size()) throw std::invalid_argument("sample larger than replay buffer");
    std::vector<std::size_t> out;
    out.reserve(n);
    std::uniform_int_distribution<std::size_t> pick(0, data_.size() - 1);
    while (out.size() < n) {
        const std::size_t i = pick(rng);
        if (std::find(out.begin(), out.end(), i) == out.end()) out.push_back(i);
    }
    return out;
}

double epsilon_at(const DqnHyperParams &hp, int episode, int total_episodes) {
    const double horizon = hp.epsilon_anneal_fraction * total_episodes;
    if (horizon <= 0.0) return hp.epsilon_end;
    const double t = std::min(1.0, episode / horizon);
    return hp.epsilon_start + (hp.epsilon_end - hp.epsilon_start) * t;
}

TrainingResult train_dqn(const PlannerEnv &env, const DqnHyperParams &hp, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    TrainingResult result;
    result.network = QNetwork(hp.hidden_width, hp.d_max, env.v_max, rng);
    QNetwork &net = result.network;
    QNetwork target = net;
    ReplayBuffer buffer(static_cast<std::size_t>(hp.buffer_capacity));

    const int total = static_cast<int>(hp.stage_distances.size()) * hp.episodes_per_stage;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> random_action(0, kActionCount - 1);

    const auto batch = static_cast<std::size_t>(hp.minibatch);
    Eigen::MatrixXd x(2, hp.minibatch);
    Eigen::MatrixXd xn(2, hp.minibatch);
    Eigen::VectorXd y(hp.minibatch);
    std::vector<int> acts(batch);
    Eigen::VectorXd grad;

    int episode = 0;
    for (std::size_t stage = 0; stage < hp.stage_distances.size(); ++stage) {
        const double d0 = hp.stage_distances[stage];
        for (int e = 0; e < hp.episodes_per_stage; ++e, ++episode) {
            EpisodeLog log;
            log.episode = episode;
            log.stage = static_cast<int>(stage);
            log.stage_distance = d0;
            log.epsilon = epsilon_at(hp, episode, total);
            double loss_sum = 0.0;
            int loss_count = 0;

            PlannerState s{d0, 0.0};
            for (int k = 0; k < hp.max_episode_steps; ++k) {
                const int a = unit(rng) < log.epsilon ? random_action(rng) : net.greedy(s);
                const EnvStep st = env.step(s, a);
                buffer.push({s, a, st.reward * hp.reward_scale, st.next, st.terminal});
                log.energy += st.energy;
                log.ret += st.reward;
                ++log.steps;
                s = st.next;

                if (buffer.size() >= batch) {
                    const auto idx = buffer.sample(batch, rng);
                    for (std::size_t b = 0; b < batch; ++b) {
                        const Transition &t = buffer.at(idx[b]);
                        x.col(b) = net.features(t.state);
                        xn.col(b) = net.features(t.next);
                        acts[b] = t.action;
                    }
                    const Eigen::MatrixXd qn = target.forward(xn);
                    for (std::size_t b = 0; b < batch; ++b) {
                        const Transition &t = buffer.at(idx[b]);
                        y(b) = t.reward + (t.terminal ? 0.0 : hp.discount * qn.col(b).maxCoeff());
                    }
                    const double l = net.loss_and_gradient(x, acts, y, grad);
                    if (!std::isfinite(l)) {
                        throw DivergenceError("dqn loss became non-finite at episode " + std::to_string(episode) +
                                              ", step " + std::to_string(k));
                    }
                    net.set_parameters(net.parameters() - hp.learning_rate * grad);
                    if (!net.finite()) {
                        throw DivergenceError("dqn weights became non-finite at episode " + std::to_string(episode) +
                                              ", step " + std::to_string(k) + ", loss " + std::to_string(l));
                    }
                    loss_sum += l;
                    ++loss_count;
                    ++result.gradient_steps;
                    if (result.gradient_steps % hp.target_update == 0) target = net;
                }
                if (st.terminal) {
                    log.reached = true;
                    break;
                }
            }
            log.mean_loss = loss_count > 0 ? loss_sum / loss_count : 0.0;
            result.log.push_back(log);
        }
    }
    return result;
}

std::vector<int> DqnPlanner::rollout(double distance, int slot_budget) const {
    std::vector<int> actions;
    if (distance <= 0.0) return actions;
    PlannerState s{distance, 0.0};
    for (int k = 0; k < slot_budget; ++k) {
        const int a = net_.greedy(s);
        const auto st = env_.step(s, a);
        actions.push_back(a);
        s = st.next;
        if (st.terminal) return actions;
    }
    throw InfeasibleError("dqn rollout did not reach the destination within " + std::to_string(slot_budget) +
                          " slots");
}

HalfProfile DqnPlanner::plan_half(double distance, int slot_budget) const {
    return replay_actions(env_, distance, rollout(distance, slot_budget));
}

} // namespace satuav
