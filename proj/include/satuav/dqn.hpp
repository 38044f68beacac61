#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "satuav/planner.hpp"

namespace satuav {

// Fully connected 2 -> H -> H -> 11 network with ReLU hidden layers.
class QNetwork {
public:
    QNetwork() = default;
    QNetwork(int hidden, double d_max, double v_max, std::mt19937_64 &rng);

    int hidden() const { return static_cast<int>(b1_.size()); }
    double d_max() const { return d_max_; }
    double v_max() const { return v_max_; }

    Eigen::Vector2d features(const PlannerState &s) const;

    // Q-values for each column of `x` (2 x N feature matrix).
    Eigen::MatrixXd forward(const Eigen::MatrixXd &x) const;
    Eigen::VectorXd q_values(const PlannerState &s) const;
    int greedy(const PlannerState &s) const;

    // Loss (1/N) sum 0.5 (Q(x_j, a_j) - y_j)^2 and its gradient in flat parameter order.
    double loss(const Eigen::MatrixXd &x, const std::vector<int> &actions, const Eigen::VectorXd &targets) const;
    double loss_and_gradient(const Eigen::MatrixXd &x, const std::vector<int> &actions,
                             const Eigen::VectorXd &targets, Eigen::VectorXd &grad) const;

    Eigen::VectorXd parameters() const;
    void set_parameters(const Eigen::VectorXd &theta);
    Eigen::Index parameter_count() const;

    bool finite() const;

    nlohmann::json to_json() const;
    static QNetwork from_json(const nlohmann::json &j);
    void save(const std::filesystem::path &path) const;
    static QNetwork load(const std::filesystem::path &path);

private:
    Eigen::MatrixXd w1_, w2_, w3_;
    Eigen::VectorXd b1_, b2_, b3_;
    double d_max_ = 250.0;
    double v_max_ = 50.0;
};

struct Transition {
    PlannerState state;
    int action = 0;
    double reward = 0.0;  // scaled
    PlannerState next;
    bool terminal = false;
};

// Fixed-capacity FIFO; sampling is uniform without replacement inside a batch.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity);

    void push(const Transition &t);
    std::size_t size() const { return data_.size(); }
    std::size_t capacity() const { return capacity_; }
    const Transition &at(std::size_t i) const { return data_[i]; }

    // Throws std::invalid_argument when n exceeds the current size.
    std::vector<std::size_t> sample(std::size_t n, std::mt19937_64 &rng) const;

private:
    std::size_t capacity_;
    std::size_t head_ = 0;
    std::vector<Transition> data_;
};

struct EpisodeLog {
    int episode = 0;
    int stage = 0;
    double stage_distance = 0.0;
    int steps = 0;
    double energy = 0.0;   // J
    double ret = 0.0;      // undiscounted, unscaled
    double epsilon = 0.0;
    double mean_loss = 0.0;
    bool reached = false;
};

struct TrainingResult {
    QNetwork network;
    std::vector<EpisodeLog> log;
    long gradient_steps = 0;
};

double epsilon_at(const DqnHyperParams &hp, int episode, int total_episodes);

// Curriculum DQN training. Throws DivergenceError on non-finite weights or loss.
TrainingResult train_dqn(const PlannerEnv &env, const DqnHyperParams &hp, std::uint64_t seed);

// Greedy policy of a trained network.
class DqnPlanner : public HalfPlanner {
public:
    DqnPlanner(PlannerEnv env, QNetwork net) : env_(env), net_(std::move(net)) {}
    HalfProfile plan_half(double distance, int slot_budget) const override;
    std::vector<int> rollout(double distance, int slot_budget) const;
    const QNetwork &network() const { return net_; }

private:
    PlannerEnv env_;
    QNetwork net_;
};

} // namespace satuav
