#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "steersman/info.hpp"
#include "steersman/modal.hpp"

namespace steersman::env {

struct LibraryOptions {
    modal::PlateSpec plate;
    std::vector<modal::ConditionSpec> conditions;
    int modes = 3;
    int sensors = 3;
    double delta = info::kDefaultCorrelationLength;
    double c2 = 0.0;
};

/// Precomputed scoring pipeline (modal basis, covariance, normalizer) for
/// every structural condition. Immutable once built; share it read-only.
class ModelLibrary {
public:
    ModelLibrary(modal::CandidateGrid grid, std::vector<modal::ConditionSpec> conditions,
                 std::vector<info::ConditionScorer> scorers, int sensors);

    static ModelLibrary build(const LibraryOptions& options);

    const modal::CandidateGrid& grid() const { return grid_; }
    int size() const { return static_cast<int>(scorers_.size()); }
    int sensors() const { return sensors_; }
    const std::string& label(int index) const { return conditions_.at(index).label; }
    const modal::ConditionSpec& condition(int index) const { return conditions_.at(index); }
    /// Throws InvalidArgument naming the known labels when absent.
    int index_of(const std::string& label) const;
    const info::ConditionScorer& scorer(int index) const { return scorers_.at(index); }

private:
    modal::CandidateGrid grid_;
    std::vector<modal::ConditionSpec> conditions_;
    std::vector<info::ConditionScorer> scorers_;
    int sensors_;
};

struct EnvConfig {
    /// Labels sampled at reset; empty means every condition in the library.
    std::vector<std::string> conditions;
    int sensors = 3;
    int modes = 3;
    int episode_length = 1000;
    bool observe_condition = false;
    std::uint64_t seed = 0;
};

struct EnvState {
    std::vector<int> positions;
    std::vector<std::uint8_t> occupancy;
    std::string condition_label;
    int condition = 0;
    int step_count = 0;
    double last_score = 0.0;

    bool operator==(const EnvState&) const = default;
};

/// Flat discrete action: sensor = code / 4, direction = code % 4 with
/// 0 left, 1 right, 2 up, 3 down.
struct ActionCode {
    int code = 0;

    int sensor() const { return code / 4; }
    modal::Direction direction() const { return static_cast<modal::Direction>(code % 4); }
    static ActionCode of(int sensor, modal::Direction dir) { return {sensor * 4 + static_cast<int>(dir)}; }
};

struct StepInfo {
    double score = 0.0;
    bool null_action = false;
};

struct StepResult {
    EnvState state;
    double reward = 0.0;
    bool truncated = false;
    StepInfo info;
};

/// Sensors spread evenly along the mid-width row: column
/// round((k + 1) * cols / (p + 1)) - 1 for k = 0..p-1, row = (rows - 1) / 2.
std::vector<int> initial_layout(const modal::CandidateGrid& grid, int p);

class SteerEnv {
public:
    SteerEnv(std::shared_ptr<const ModelLibrary> library, EnvConfig config);

    /// Reseeds the generator when `seed` is given; samples the condition
    /// uniformly over the configured labels unless `condition` names one.
    const EnvState& reset(std::optional<std::uint64_t> seed = std::nullopt,
                          std::optional<std::string> condition = std::nullopt);
    StepResult step(ActionCode action);
    /// Pure transition: reads nothing but (state, action).
    StepResult transition(const EnvState& state, ActionCode action) const;

    const EnvState& state() const { return state_; }
    void restore(EnvState state) { state_ = std::move(state); }
    const EnvConfig& config() const { return config_; }
    const ModelLibrary& library() const { return *library_; }
    std::shared_ptr<const ModelLibrary> library_ptr() const { return library_; }
    /// Library indices of the configured conditions, in configuration order.
    const std::vector<int>& condition_indices() const { return condition_indices_; }

    int action_count() const { return 4 * config_.sensors; }
    int observation_size() const;
    /// Occupancy (plus a one-hot of the condition slot when observed).
    void encode(std::span<const int> positions, int condition, std::span<double> out) const;
    std::vector<double> observation(const EnvState& state) const;
    std::vector<double> observation() const { return observation(state_); }

    double score(std::span<const int> positions, int condition) const;
    EnvState make_state(std::vector<int> positions, int condition) const;

    std::string rng_state() const;
    void set_rng_state(const std::string& state);

private:
    std::shared_ptr<const ModelLibrary> library_;
    EnvConfig config_;
    std::vector<int> condition_indices_;
    std::mt19937_64 rng_;
    EnvState state_;
};

}  // namespace steersman::env
