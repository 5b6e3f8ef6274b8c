#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "steersman/env.hpp"

namespace steersman::agent {

/// Equidistant atoms z_i on [v_min, v_max].
struct SupportSpec {
    int atom_count = 51;
    double v_min = -1.0;
    double v_max = 1.0;

    void validate() const;
    double spacing() const { return (v_max - v_min) / (atom_count - 1); }
    Eigen::VectorXd atoms() const;
};

/// Per-action categorical distributions, one column per action (atoms x actions).
using Distributions = Eigen::MatrixXd;

/// Fully connected ReLU network with a softmax head per action. All weights
/// and biases live in one flat vector; layer l stores its weight matrix
/// (out x in, column-major) followed by its bias.
class ValueNetwork {
public:
    ValueNetwork() = default;
    ValueNetwork(int input_size, std::vector<int> hidden, int action_count, int atom_count);

    /// Uniform fan-in initialization U(-1/sqrt(in), 1/sqrt(in)) for weights and biases.
    void initialize(std::mt19937_64& rng);
    /// Zeroes the output layer so every head is uniform.
    void zero_output_layer();

    int input_size() const { return dims_.front(); }
    int action_count() const { return actions_; }
    int atom_count() const { return atoms_; }
    const std::vector<int>& dims() const { return dims_; }
    int layer_count() const { return static_cast<int>(dims_.size()) - 1; }

    Eigen::VectorXd& parameters() { return params_; }
    const Eigen::VectorXd& parameters() const { return params_; }

    struct Cache {
        std::vector<Eigen::MatrixXd> activations;  // input, hidden activations
        Eigen::MatrixXd probs;                     // (actions * atoms) x batch
    };

    /// Batched forward: observations are columns. Returns probabilities with
    /// row a * atoms + i holding p_i(a).
    Eigen::MatrixXd forward(const Eigen::MatrixXd& observations) const;
    void forward(const Eigen::MatrixXd& observations, Cache& cache) const;
    Distributions forward_one(std::span<const double> observation) const;
    /// Accumulates dLoss/dparams into `gradient` given dLoss/dlogits.
    void backward(const Cache& cache, const Eigen::MatrixXd& dlogits, Eigen::VectorXd& gradient) const;

private:
    Eigen::Map<const Eigen::MatrixXd> weight(int layer) const;
    Eigen::Map<const Eigen::VectorXd> bias(int layer) const;

    std::vector<int> dims_;
    std::vector<Eigen::Index> offsets_;
    int actions_ = 0;
    int atoms_ = 0;
    Eigen::VectorXd params_;
};

/// Expected value per action: Q(a) = sum_i z_i p_i(a).
Eigen::VectorXd q_values(const Distributions& dists, const SupportSpec& support);

/// Greedy action with lowest-code tie-break.
int greedy_action(const Eigen::VectorXd& q);
/// Epsilon-greedy action selection.
env::ActionCode act(const ValueNetwork& net, std::span<const double> observation, double epsilon,
                    const SupportSpec& support, std::mt19937_64& rng);

/// Categorical projection of r + discount * z (or r alone when done) onto the support.
Eigen::VectorXd project_target(const SupportSpec& support, double reward_n, double discount_n,
                               const Eigen::VectorXd& next_dist, bool done);

struct LossResult {
    double loss = 0.0;
    Eigen::VectorXd kl;        // per sample
    Eigen::VectorXd gradient;  // dLoss/dparams
};

/// Importance-weighted mean KL(target || online(action)) and its gradient.
LossResult categorical_loss(const ValueNetwork& net, const Eigen::MatrixXd& observations, std::span<const int> actions,
                            const Eigen::MatrixXd& targets, std::span<const double> weights);

struct Batch {
    Eigen::MatrixXd observations;
    Eigen::MatrixXd next_observations;
    std::vector<int> actions;
    std::vector<double> returns;
    std::vector<double> discounts;
    std::vector<std::uint8_t> dones;
    std::vector<double> weights;
};

struct TdResult {
    double loss = 0.0;
    Eigen::VectorXd gradient;
    std::vector<double> priorities;
};

inline constexpr double kPriorityFloor = 1e-6;

/// Double-Q categorical TD step: next action from the online expectation,
/// target distribution from the target network, projected onto the support.
TdResult td_update(const ValueNetwork& online, const ValueNetwork& target, const Batch& batch, const SupportSpec& support);

struct AdamConfig {
    double learning_rate = 6.25e-5;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1.5e-4;
    double max_grad_norm = 10.0;
};

class Adam {
public:
    Adam() = default;
    Adam(AdamConfig config, Eigen::Index parameter_count);
    void step(Eigen::VectorXd& params, Eigen::VectorXd gradient);

    const AdamConfig& config() const { return config_; }
    Eigen::VectorXd first_moment;
    Eigen::VectorXd second_moment;
    std::int64_t steps = 0;

private:
    AdamConfig config_;
};

/// Compact state key stored in replay: sensor positions then the condition index.
using StateKey = std::vector<std::int32_t>;

struct Transition {
    StateKey state;
    int action = 0;
    double return_n = 0.0;
    double discount_n = 1.0;
    StateKey next_state;
    bool done = false;
};

/// Proportional prioritized replay over a sum tree.
class ReplayBuffer {
public:
    ReplayBuffer() = default;
    ReplayBuffer(std::size_t capacity, std::size_t key_size, double alpha);

    void add(const Transition& t);
    std::size_t size() const { return size_; }
    std::size_t capacity() const { return capacity_; }
    double alpha() const { return alpha_; }
    double total_priority() const { return tree_[1]; }
    double max_priority() const { return max_priority_; }
    /// Sampling probability of slot i.
    double probability(std::size_t i) const;

    struct Sample {
        std::vector<std::size_t> indices;
        std::vector<double> weights;
    };
    /// Stratified proportional sampling; weights are (N P(i))^-beta over the batch maximum.
    Sample sample(std::size_t batch, double beta, std::mt19937_64& rng) const;
    void update_priorities(std::span<const std::size_t> indices, std::span<const double> priorities);
    Transition get(std::size_t i) const;

    void write(std::ostream& out) const;
    void read(std::istream& in);

private:
    void set_leaf(std::size_t i, double value);

    std::size_t capacity_ = 0;
    std::size_t key_size_ = 0;
    std::size_t leaves_ = 1;
    double alpha_ = 0.5;
    std::size_t size_ = 0;
    std::size_t next_ = 0;
    double max_priority_ = 1.0;
    std::vector<double> tree_;
    std::vector<std::int32_t> states_;
    std::vector<std::int32_t> next_states_;
    std::vector<std::int32_t> actions_;
    std::vector<double> returns_;
    std::vector<double> discounts_;
    std::vector<std::uint8_t> dones_;
};

/// Accumulates n-step returns along one trajectory.
class NStepAccumulator {
public:
    NStepAccumulator() = default;
    NStepAccumulator(int horizon, double gamma) : horizon_(horizon), gamma_(gamma) {}

    /// Records (s, a, r, s') and returns transitions that became complete.
    /// `episode_end` flushes the remaining partial returns.
    std::vector<Transition> push(const StateKey& state, int action, double reward, const StateKey& next_state,
                                 bool terminal, bool episode_end);
    void clear() { pending_.clear(); }

    struct Pending {
        StateKey state;
        int action;
        double reward;
    };
    const std::deque<Pending>& pending() const { return pending_; }
    std::deque<Pending>& pending() { return pending_; }

private:
    Transition emit(const StateKey& next_state, bool terminal) const;

    int horizon_ = 1;
    double gamma_ = 0.9;
    std::deque<Pending> pending_;
};

struct TrainConfig {
    double gamma = 0.9;
    int target_sync_period = 3200;
    double learning_rate = 6.25e-5;
    double adam_epsilon = 1.5e-4;
    double max_grad_norm = 10.0;
    double epsilon_start = 1.0;
    double epsilon_final = 0.01;
    std::int64_t epsilon_anneal_steps = 250000;
    int epochs = 100;
    int epoch_steps = 10000;
    int test_episodes = 3;
    double test_epsilon = 0.0;
    int batch_size = 32;
    int buffer_capacity = 100000;
    int warmup_steps = 1000;
    double priority_exponent = 0.5;
    double beta_start = 0.4;
    double beta_final = 1.0;
    int multi_step = 3;
    std::vector<int> hidden{256, 128};
    SupportSpec support;
    int checkpoint_every = 10;
    std::uint64_t seed = 0;

    void validate() const;
    std::int64_t total_steps() const { return static_cast<std::int64_t>(epochs) * epoch_steps; }
    /// Annealing horizon min(epsilon_anneal_steps, total steps).
    std::int64_t anneal_horizon() const;
    double epsilon_at(std::int64_t step) const;
    double beta_at(std::int64_t step) const;
};

struct EpochMetrics {
    int epoch = 0;
    double mean_episode_reward = 0.0;
    double reward_std = 0.0;
    double final_score = 0.0;
    double episode_score_sum = 0.0;
    double epsilon = 0.0;
    double wall_time = 0.0;
};

struct EpisodeTrace {
    std::string condition;
    std::vector<double> scores;  // score after each step, index 0 = initial
    std::vector<std::vector<int>> positions;
    double reward_sum = 0.0;
};

/// Runs one greedy (or epsilon) episode on `env` from its current state.
EpisodeTrace run_episode(env::SteerEnv& env, const std::function<env::ActionCode(const env::EnvState&)>& policy,
                         int max_steps, bool record_positions = false);

/// The training loop: env step -> store -> sample -> gradient step.
class Trainer {
public:
    Trainer(std::shared_ptr<const env::ModelLibrary> library, env::EnvConfig env_config, TrainConfig config,
            std::string config_digest = {});

    /// One epoch of training followed by the test episodes.
    EpochMetrics run_epoch();
    const std::vector<EpochMetrics>& history() const { return history_; }
    int epoch() const { return epoch_; }
    std::int64_t global_step() const { return global_step_; }
    std::int64_t gradient_steps() const { return gradient_steps_; }
    const ValueNetwork& online() const { return online_; }
    const ValueNetwork& target() const { return target_; }
    const ReplayBuffer& replay() const { return replay_; }
    const TrainConfig& config() const { return config_; }
    const env::SteerEnv& train_env() const { return train_env_; }
    const std::vector<std::int64_t>& condition_counts() const { return condition_counts_; }
    const std::string& config_digest() const { return digest_; }

    void save_checkpoint(const std::filesystem::path& path) const;
    /// Restores the full training state; the digest must match.
    void load_checkpoint(const std::filesystem::path& path);

    /// Wall-clock source used for the wall_time metric; nullptr records 0.
    void set_clock(std::function<double()> clock) { clock_ = std::move(clock); }

private:
    void train_step();
    void gradient_step();
    Eigen::MatrixXd encode_batch(const std::vector<StateKey>& keys) const;
    StateKey key_of(const env::EnvState& s) const;
    EpochMetrics test_epoch();

    std::shared_ptr<const env::ModelLibrary> library_;
    TrainConfig config_;
    std::string digest_;
    env::SteerEnv train_env_;
    env::SteerEnv test_env_;
    ValueNetwork online_;
    ValueNetwork target_;
    Adam optimizer_;
    ReplayBuffer replay_;
    NStepAccumulator nstep_;
    std::mt19937_64 agent_rng_;
    std::mt19937_64 test_rng_;
    std::int64_t global_step_ = 0;
    std::int64_t gradient_steps_ = 0;
    int epoch_ = 0;
    std::vector<EpochMetrics> history_;
    std::vector<std::int64_t> condition_counts_;
    std::function<double()> clock_;
    double elapsed_offset_ = 0.0;
};

/// Greedy policy backed by a frozen network (checkpoint).
class GreedyPolicy {
public:
    GreedyPolicy(ValueNetwork net, SupportSpec support, const env::SteerEnv& env)
        : net_(std::move(net)), support_(support), env_(&env) {}
    env::ActionCode operator()(const env::EnvState& state) const;

private:
    ValueNetwork net_;
    SupportSpec support_;
    const env::SteerEnv* env_;
};

inline constexpr int kCheckpointVersion = 1;

/// Reads only the online network and metadata from a checkpoint.
struct CheckpointSummary {
    std::string config_digest;
    ValueNetwork online;
    SupportSpec support;
    std::int64_t global_step = 0;
    int epoch = 0;
};
CheckpointSummary read_checkpoint_summary(const std::filesystem::path& path);

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace steersman::agent
