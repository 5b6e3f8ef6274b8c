#include <algorithm>
#include <cmath>

#include "steersman/agent.hpp"
#include "steersman/error.hpp"

namespace steersman::agent {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

void TrainConfig::validate() const {
    std::vector<std::string> problems;
    if (!(gamma > 0.0 && gamma <= 1.0)) problems.emplace_back("gamma must lie in (0, 1]");
    if (target_sync_period < 1) problems.emplace_back("target_sync_period must be positive");
    if (!(learning_rate > 0.0)) problems.emplace_back("learning_rate must be positive");
    if (!(epsilon_final >= 0.0 && epsilon_final <= epsilon_start && epsilon_start <= 1.0))
        problems.emplace_back("epsilon schedule must satisfy 0 <= final <= start <= 1");
    if (epochs < 1) problems.emplace_back("epochs must be positive");
    if (epoch_steps < 1) problems.emplace_back("epoch_steps must be positive");
    if (test_episodes < 1) problems.emplace_back("test_episodes must be positive");
    if (batch_size < 1) problems.emplace_back("batch_size must be positive");
    if (buffer_capacity < batch_size) problems.emplace_back("buffer_capacity must be at least batch_size");
    if (priority_exponent < 0.0) problems.emplace_back("priority_exponent must be non-negative");
    if (multi_step < 1) problems.emplace_back("multi_step must be positive");
    if (support.atom_count < 2 || !(support.v_min < support.v_max)) problems.emplace_back("invalid support");
    if (!problems.empty()) {
        std::string msg = "invalid training config:";
        for (const auto& p : problems) msg += " " + p + ";";
        throw ConfigError(msg);
    }
}

std::int64_t TrainConfig::anneal_horizon() const { return std::max<std::int64_t>(1, std::min(epsilon_anneal_steps, total_steps())); }

double TrainConfig::epsilon_at(std::int64_t step) const {
    const double frac = std::min(1.0, static_cast<double>(step) / static_cast<double>(anneal_horizon()));
    return epsilon_start + frac * (epsilon_final - epsilon_start);
}

double TrainConfig::beta_at(std::int64_t step) const {
    const double frac = std::min(1.0, static_cast<double>(step) / static_cast<double>(std::max<std::int64_t>(1, total_steps())));
    return beta_start + frac * (beta_final - beta_start);
}

EpisodeTrace run_episode(env::SteerEnv& env, const std::function<env::ActionCode(const env::EnvState&)>& policy,
                         int max_steps, bool record_positions) {
    EpisodeTrace trace;
    trace.condition = env.state().condition_label;
    trace.scores.push_back(env.state().last_score);
    if (record_positions) trace.positions.push_back(env.state().positions);
    for (int t = 0; t < max_steps && env.state().step_count < env.config().episode_length; ++t) {
        const auto result = env.step(policy(env.state()));
        trace.reward_sum += result.reward;
        trace.scores.push_back(result.info.score);
        if (record_positions) trace.positions.push_back(result.state.positions);
        if (result.truncated) break;
    }
    return trace;
}

env::ActionCode GreedyPolicy::operator()(const env::EnvState& state) const {
    const auto obs = env_->observation(state);
    return {greedy_action(q_values(net_.forward_one(obs), support_))};
}

namespace {

env::EnvConfig seeded(env::EnvConfig config, std::uint64_t seed) {
    config.seed = seed;
    return config;
}

}  // namespace

Trainer::Trainer(std::shared_ptr<const env::ModelLibrary> library, env::EnvConfig env_config, TrainConfig config,
                 std::string config_digest)
    : library_(library),
      config_((config.validate(), std::move(config))),
      digest_(std::move(config_digest)),
      train_env_(library, seeded(env_config, splitmix64(config_.seed ^ 0x01))),
      test_env_(library, seeded(env_config, splitmix64(config_.seed ^ 0x02))),
      agent_rng_(splitmix64(config_.seed ^ 0x03)),
      test_rng_(splitmix64(config_.seed ^ 0x05)) {
    online_ = ValueNetwork(train_env_.observation_size(), config_.hidden, train_env_.action_count(),
                           config_.support.atom_count);
    std::mt19937_64 init_rng(splitmix64(config_.seed ^ 0x04));
    online_.initialize(init_rng);
    target_ = online_;
    optimizer_ = Adam({config_.learning_rate, 0.9, 0.999, config_.adam_epsilon, config_.max_grad_norm},
                      online_.parameters().size());
    replay_ = ReplayBuffer(static_cast<std::size_t>(config_.buffer_capacity),
                           static_cast<std::size_t>(train_env_.config().sensors + 1), config_.priority_exponent);
    nstep_ = NStepAccumulator(config_.multi_step, config_.gamma);
    condition_counts_.assign(library_->size(), 0);
    train_env_.reset();
    ++condition_counts_[train_env_.state().condition];
}

StateKey Trainer::key_of(const env::EnvState& s) const {
    StateKey key(s.positions.begin(), s.positions.end());
    key.push_back(s.condition);
    return key;
}

Eigen::MatrixXd Trainer::encode_batch(const std::vector<StateKey>& keys) const {
    const int rows = train_env_.observation_size();
    Eigen::MatrixXd obs(rows, static_cast<Eigen::Index>(keys.size()));
    const std::size_t p = static_cast<std::size_t>(train_env_.config().sensors);
    for (std::size_t b = 0; b < keys.size(); ++b) {
        const std::vector<int> positions(keys[b].begin(), keys[b].begin() + static_cast<std::ptrdiff_t>(p));
        train_env_.encode(positions, keys[b][p], {obs.col(static_cast<Eigen::Index>(b)).data(), static_cast<std::size_t>(rows)});
    }
    return obs;
}

void Trainer::gradient_step() {
    const auto sample = replay_.sample(static_cast<std::size_t>(config_.batch_size), config_.beta_at(global_step_), agent_rng_);
    std::vector<StateKey> states;
    std::vector<StateKey> next_states;
    Batch batch;
    for (std::size_t k = 0; k < sample.indices.size(); ++k) {
        auto t = replay_.get(sample.indices[k]);
        states.push_back(std::move(t.state));
        next_states.push_back(std::move(t.next_state));
        batch.actions.push_back(t.action);
        batch.returns.push_back(t.return_n);
        batch.discounts.push_back(t.discount_n);
        batch.dones.push_back(t.done ? 1 : 0);
    }
    batch.weights = sample.weights;
    batch.observations = encode_batch(states);
    batch.next_observations = encode_batch(next_states);
    auto td = td_update(online_, target_, batch, config_.support);
    optimizer_.step(online_.parameters(), std::move(td.gradient));
    replay_.update_priorities(sample.indices, td.priorities);
    ++gradient_steps_;
}

void Trainer::train_step() {
    const double epsilon = config_.epsilon_at(global_step_);
    const auto& state = train_env_.state();
    const auto obs = train_env_.observation(state);
    const auto action = act(online_, obs, epsilon, config_.support, agent_rng_);
    const StateKey key = key_of(state);
    const auto result = train_env_.step(action);
    const StateKey next_key = key_of(result.state);
    for (const auto& t : nstep_.push(key, action.code, result.reward, next_key, false, result.truncated)) replay_.add(t);
    ++global_step_;
    if (global_step_ % config_.target_sync_period == 0) target_.parameters() = online_.parameters();
    if (replay_.size() >= static_cast<std::size_t>(std::max(config_.warmup_steps, config_.batch_size))) gradient_step();
    if (result.truncated) {
        nstep_.clear();
        train_env_.reset();
        ++condition_counts_[train_env_.state().condition];
    }
}

EpochMetrics Trainer::test_epoch() {
    std::vector<double> rewards;
    std::vector<double> finals;
    std::vector<double> sums;
    const double test_epsilon = config_.test_epsilon;
    auto policy = [&](const env::EnvState& s) {
        return act(online_, test_env_.observation(s), test_epsilon, config_.support, test_rng_);
    };
    for (int e = 0; e < config_.test_episodes; ++e) {
        test_env_.reset();
        const auto trace = run_episode(test_env_, policy, test_env_.config().episode_length);
        rewards.push_back(trace.reward_sum);
        finals.push_back(trace.scores.back());
        double sum = 0.0;
        for (std::size_t t = 1; t < trace.scores.size(); ++t) sum += trace.scores[t];
        sums.push_back(sum);
    }
    auto mean = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x;
        return s / static_cast<double>(v.size());
    };
    EpochMetrics m;
    m.mean_episode_reward = mean(rewards);
    double var = 0.0;
    for (double r : rewards) var += (r - m.mean_episode_reward) * (r - m.mean_episode_reward);
    m.reward_std = std::sqrt(var / static_cast<double>(rewards.size()));
    m.final_score = mean(finals);
    m.episode_score_sum = mean(sums);
    m.epsilon = config_.epsilon_at(global_step_);
    return m;
}

EpochMetrics Trainer::run_epoch() {
    const double start = clock_ ? clock_() : 0.0;
    for (int s = 0; s < config_.epoch_steps; ++s) train_step();
    EpochMetrics m = test_epoch();
    ++epoch_;
    m.epoch = epoch_;
    if (clock_) {
        elapsed_offset_ += clock_() - start;
        m.wall_time = elapsed_offset_;
    }
    if (!std::isfinite(m.mean_episode_reward) || !std::isfinite(m.final_score) || !std::isfinite(m.episode_score_sum))
        throw NumericalError("non-finite test metrics at epoch " + std::to_string(epoch_));
    history_.push_back(m);
    return m;
}

}  // namespace steersman::agent
