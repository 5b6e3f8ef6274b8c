#include <algorithm>
#include <cmath>

#include "binary_io.hpp"
#include "steersman/agent.hpp"
#include "steersman/error.hpp"

namespace steersman::agent {

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::size_t key_size, double alpha)
    : capacity_(capacity), key_size_(key_size), alpha_(alpha) {
    if (capacity == 0) throw InvalidArgument("replay capacity must be positive");
    if (alpha < 0.0) throw InvalidArgument("priority exponent must be non-negative");
    while (leaves_ < capacity_) leaves_ <<= 1;
    tree_.assign(2 * leaves_, 0.0);
    states_.resize(capacity_ * key_size_);
    next_states_.resize(capacity_ * key_size_);
    actions_.resize(capacity_);
    returns_.resize(capacity_);
    discounts_.resize(capacity_);
    dones_.resize(capacity_);
}

void ReplayBuffer::set_leaf(std::size_t i, double value) {
    std::size_t node = leaves_ + i;
    tree_[node] = value;
    for (node >>= 1; node >= 1; node >>= 1) tree_[node] = tree_[2 * node] + tree_[2 * node + 1];
}

void ReplayBuffer::add(const Transition& t) {
    if (t.state.size() != key_size_ || t.next_state.size() != key_size_)
        throw InvalidArgument("transition key size does not match the replay layout");
    const std::size_t i = next_;
    std::copy(t.state.begin(), t.state.end(), states_.begin() + static_cast<std::ptrdiff_t>(i * key_size_));
    std::copy(t.next_state.begin(), t.next_state.end(), next_states_.begin() + static_cast<std::ptrdiff_t>(i * key_size_));
    actions_[i] = t.action;
    returns_[i] = t.return_n;
    discounts_[i] = t.discount_n;
    dones_[i] = t.done ? 1 : 0;
    set_leaf(i, std::pow(max_priority_, alpha_));
    next_ = (next_ + 1) % capacity_;
    size_ = std::min(size_ + 1, capacity_);
}

double ReplayBuffer::probability(std::size_t i) const { return tree_[leaves_ + i] / tree_[1]; }

ReplayBuffer::Sample ReplayBuffer::sample(std::size_t batch, double beta, std::mt19937_64& rng) const {
    if (size_ == 0) throw InvalidArgument("cannot sample from an empty replay buffer");
    Sample out;
    out.indices.reserve(batch);
    out.weights.reserve(batch);
    const double total = tree_[1];
    const double segment = total / static_cast<double>(batch);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double max_weight = 0.0;
    for (std::size_t k = 0; k < batch; ++k) {
        double u = segment * (static_cast<double>(k) + unit(rng));
        std::size_t node = 1;
        while (node < leaves_) {
            const std::size_t left = 2 * node;
            if (u < tree_[left] || tree_[left + 1] <= 0.0) {
                node = left;
            } else {
                u -= tree_[left];
                node = left + 1;
            }
        }
        std::size_t index = std::min(node - leaves_, size_ - 1);
        const double w = std::pow(static_cast<double>(size_) * probability(index), -beta);
        max_weight = std::max(max_weight, w);
        out.indices.push_back(index);
        out.weights.push_back(w);
    }
    for (double& w : out.weights) w /= max_weight;
    return out;
}

void ReplayBuffer::update_priorities(std::span<const std::size_t> indices, std::span<const double> priorities) {
    for (std::size_t k = 0; k < indices.size(); ++k) {
        const double p = std::max(priorities[k], kPriorityFloor);
        max_priority_ = std::max(max_priority_, p);
        set_leaf(indices[k], std::pow(p, alpha_));
    }
}

Transition ReplayBuffer::get(std::size_t i) const {
    Transition t;
    const auto begin = static_cast<std::ptrdiff_t>(i * key_size_);
    const auto end = begin + static_cast<std::ptrdiff_t>(key_size_);
    t.state.assign(states_.begin() + begin, states_.begin() + end);
    t.next_state.assign(next_states_.begin() + begin, next_states_.begin() + end);
    t.action = actions_[i];
    t.return_n = returns_[i];
    t.discount_n = discounts_[i];
    t.done = dones_[i] != 0;
    return t;
}

void ReplayBuffer::write(std::ostream& out) const {
    io::write_pod<std::uint64_t>(out, capacity_);
    io::write_pod<std::uint64_t>(out, key_size_);
    io::write_pod(out, alpha_);
    io::write_pod<std::uint64_t>(out, size_);
    io::write_pod<std::uint64_t>(out, next_);
    io::write_pod(out, max_priority_);
    io::write_vector(out, tree_);
    io::write_vector(out, states_);
    io::write_vector(out, next_states_);
    io::write_vector(out, actions_);
    io::write_vector(out, returns_);
    io::write_vector(out, discounts_);
    io::write_vector(out, dones_);
}

void ReplayBuffer::read(std::istream& in) {
    ReplayBuffer r;
    r.capacity_ = io::read_pod<std::uint64_t>(in);
    r.key_size_ = io::read_pod<std::uint64_t>(in);
    r.alpha_ = io::read_pod<double>(in);
    r.size_ = io::read_pod<std::uint64_t>(in);
    r.next_ = io::read_pod<std::uint64_t>(in);
    r.max_priority_ = io::read_pod<double>(in);
    r.tree_ = io::read_vector<double>(in);
    r.states_ = io::read_vector<std::int32_t>(in);
    r.next_states_ = io::read_vector<std::int32_t>(in);
    r.actions_ = io::read_vector<std::int32_t>(in);
    r.returns_ = io::read_vector<double>(in);
    r.discounts_ = io::read_vector<double>(in);
    r.dones_ = io::read_vector<std::uint8_t>(in);
    while (r.leaves_ < r.capacity_) r.leaves_ <<= 1;
    if (r.tree_.size() != 2 * r.leaves_ || r.states_.size() != r.capacity_ * r.key_size_ || r.size_ > r.capacity_)
        throw FormatError("inconsistent replay buffer section in checkpoint");
    *this = std::move(r);
}

Transition NStepAccumulator::emit(const StateKey& next_state, bool terminal) const {
    Transition t;
    t.state = pending_.front().state;
    t.action = pending_.front().action;
    double g = 1.0;
    for (const auto& p : pending_) {
        t.return_n += g * p.reward;
        g *= gamma_;
    }
    t.discount_n = g;
    t.next_state = next_state;
    t.done = terminal;
    return t;
}

std::vector<Transition> NStepAccumulator::push(const StateKey& state, int action, double reward,
                                               const StateKey& next_state, bool terminal, bool episode_end) {
    std::vector<Transition> out;
    pending_.push_back({state, action, reward});
    if (terminal || episode_end) {
        while (!pending_.empty()) {
            out.push_back(emit(next_state, terminal));
            pending_.pop_front();
        }
        return out;
    }
    if (static_cast<int>(pending_.size()) == horizon_) {
        out.push_back(emit(next_state, false));
        pending_.pop_front();
    }
    return out;
}

}  // namespace steersman::agent
