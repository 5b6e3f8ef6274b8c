#include <algorithm>
#include <cmath>
#include <sstream>

#include "steersman/env.hpp"
#include "steersman/error.hpp"

namespace steersman::env {

std::vector<int> initial_layout(const modal::CandidateGrid& grid, int p) {
    if (p < 1) throw InvalidArgument("sensor count must be at least 1");
    if (p > grid.cols)
        throw InvalidArgument("cannot place " + std::to_string(p) + " sensors on a row of " + std::to_string(grid.cols) +
                              " columns");
    const int row = (grid.rows - 1) / 2;
    std::vector<int> out;
    out.reserve(p);
    for (int k = 0; k < p; ++k) {
        const long col = std::lround(static_cast<double>(k + 1) * grid.cols / (p + 1)) - 1;
        out.push_back(grid.id(static_cast<int>(col), row));
    }
    return out;
}

SteerEnv::SteerEnv(std::shared_ptr<const ModelLibrary> library, EnvConfig config)
    : library_(std::move(library)), config_(std::move(config)), rng_(config_.seed) {
    if (!library_) throw InvalidArgument("environment requires a model library");
    if (config_.sensors != library_->sensors())
        throw InvalidArgument("environment sensor count " + std::to_string(config_.sensors) +
                              " differs from the library's " + std::to_string(library_->sensors()));
    if (config_.episode_length < 1) throw InvalidArgument("episode_length must be at least 1");
    if (config_.conditions.empty())
        for (int i = 0; i < library_->size(); ++i) config_.conditions.push_back(library_->label(i));
    for (const auto& label : config_.conditions) condition_indices_.push_back(library_->index_of(label));
    state_ = make_state(initial_layout(library_->grid(), config_.sensors), condition_indices_.front());
}

int SteerEnv::observation_size() const {
    return library_->grid().size() + (config_.observe_condition ? static_cast<int>(condition_indices_.size()) : 0);
}

void SteerEnv::encode(std::span<const int> positions, int condition, std::span<double> out) const {
    std::fill(out.begin(), out.end(), 0.0);
    for (int p : positions) out[p] = 1.0;
    if (config_.observe_condition) {
        const auto slot = std::find(condition_indices_.begin(), condition_indices_.end(), condition);
        if (slot != condition_indices_.end())
            out[library_->grid().size() + static_cast<int>(slot - condition_indices_.begin())] = 1.0;
    }
}

std::vector<double> SteerEnv::observation(const EnvState& state) const {
    std::vector<double> out(observation_size());
    encode(state.positions, state.condition, out);
    return out;
}

double SteerEnv::score(std::span<const int> positions, int condition) const {
    return library_->scorer(condition).score(positions);
}

EnvState SteerEnv::make_state(std::vector<int> positions, int condition) const {
    EnvState s;
    s.occupancy.assign(library_->grid().size(), 0);
    for (int p : positions) {
        if (p < 0 || p >= library_->grid().size()) throw InvalidArgument("sensor position " + std::to_string(p) + " off grid");
        if (s.occupancy[p]) throw InvalidArgument("two sensors on node " + std::to_string(p));
        s.occupancy[p] = 1;
    }
    s.positions = std::move(positions);
    s.condition = condition;
    s.condition_label = library_->label(condition);
    s.last_score = score(s.positions, condition);
    return s;
}

const EnvState& SteerEnv::reset(std::optional<std::uint64_t> seed, std::optional<std::string> condition) {
    if (seed) rng_.seed(*seed);
    int index = 0;
    if (condition) {
        index = library_->index_of(*condition);
    } else {
        std::uniform_int_distribution<std::size_t> pick(0, condition_indices_.size() - 1);
        index = condition_indices_[pick(rng_)];
    }
    state_ = make_state(initial_layout(library_->grid(), config_.sensors), index);
    return state_;
}

StepResult SteerEnv::transition(const EnvState& state, ActionCode action) const {
    if (action.code < 0 || action.code >= action_count())
        throw InvalidArgument("action code " + std::to_string(action.code) + " outside [0, " +
                              std::to_string(action_count()) + ")");
    if (state.step_count >= config_.episode_length)
        throw InvalidArgument("episode already truncated at step " + std::to_string(state.step_count) + "; reset first");

    StepResult out;
    out.state = state;
    out.state.step_count = state.step_count + 1;
    out.truncated = out.state.step_count == config_.episode_length;

    const int sensor = action.sensor();
    const int from = state.positions.at(sensor);
    const int target = library_->grid().neighbor(from, action.direction());
    if (target == modal::kNoNeighbor || state.occupancy[target]) {
        out.info.null_action = true;
        out.info.score = state.last_score;
        return out;
    }
    out.state.positions[sensor] = target;
    out.state.occupancy[from] = 0;
    out.state.occupancy[target] = 1;
    out.state.last_score = score(out.state.positions, state.condition);
    out.reward = info::reward(state.last_score, out.state.last_score);
    out.info.score = out.state.last_score;
    return out;
}

StepResult SteerEnv::step(ActionCode action) {
    StepResult out = transition(state_, action);
    state_ = out.state;
    return out;
}

std::string SteerEnv::rng_state() const {
    std::ostringstream out;
    out << rng_;
    return out.str();
}

void SteerEnv::set_rng_state(const std::string& state) {
    std::istringstream in(state);
    in >> rng_;
    if (!in) throw FormatError("malformed environment RNG state");
}

}  // namespace steersman::env
