#include <cmath>

#include "steersman/agent.hpp"
#include "steersman/error.hpp"

namespace steersman::agent {

void SupportSpec::validate() const {
    if (atom_count < 2) throw InvalidArgument("support needs at least 2 atoms");
    if (!(v_min < v_max)) throw InvalidArgument("support requires v_min < v_max");
}

Eigen::VectorXd SupportSpec::atoms() const {
    Eigen::VectorXd z(atom_count);
    const double dz = spacing();
    for (int i = 0; i < atom_count; ++i) z(i) = v_min + i * dz;
    return z;
}

ValueNetwork::ValueNetwork(int input_size, std::vector<int> hidden, int action_count, int atom_count)
    : actions_(action_count), atoms_(atom_count) {
    if (input_size < 1 || action_count < 1 || atom_count < 2)
        throw InvalidArgument("network needs positive input/action sizes and at least 2 atoms");
    dims_.push_back(input_size);
    for (int h : hidden) {
        if (h < 1) throw InvalidArgument("hidden layer widths must be positive");
        dims_.push_back(h);
    }
    dims_.push_back(action_count * atom_count);
    Eigen::Index total = 0;
    for (int l = 0; l < layer_count(); ++l) {
        offsets_.push_back(total);
        total += static_cast<Eigen::Index>(dims_[l + 1]) * dims_[l] + dims_[l + 1];
    }
    params_ = Eigen::VectorXd::Zero(total);
}

void ValueNetwork::initialize(std::mt19937_64& rng) {
    for (int l = 0; l < layer_count(); ++l) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(dims_[l]));
        std::uniform_real_distribution<double> uniform(-bound, bound);
        const Eigen::Index count = static_cast<Eigen::Index>(dims_[l + 1]) * dims_[l] + dims_[l + 1];
        for (Eigen::Index k = 0; k < count; ++k) params_(offsets_[l] + k) = uniform(rng);
    }
}

void ValueNetwork::zero_output_layer() {
    const int l = layer_count() - 1;
    const Eigen::Index count = static_cast<Eigen::Index>(dims_[l + 1]) * dims_[l] + dims_[l + 1];
    params_.segment(offsets_[l], count).setZero();
}

Eigen::Map<const Eigen::MatrixXd> ValueNetwork::weight(int layer) const {
    return {params_.data() + offsets_[layer], dims_[layer + 1], dims_[layer]};
}

Eigen::Map<const Eigen::VectorXd> ValueNetwork::bias(int layer) const {
    return {params_.data() + offsets_[layer] + static_cast<Eigen::Index>(dims_[layer + 1]) * dims_[layer],
            dims_[layer + 1]};
}

void ValueNetwork::forward(const Eigen::MatrixXd& observations, Cache& cache) const {
    if (observations.rows() != input_size())
        throw InvalidArgument("observation length " + std::to_string(observations.rows()) + " does not match input width " +
                              std::to_string(input_size()));
    cache.activations.resize(layer_count());
    cache.activations[0] = observations;
    Eigen::MatrixXd z;
    for (int l = 0; l < layer_count(); ++l) {
        z.noalias() = weight(l) * cache.activations[l];
        z.colwise() += bias(l);
        if (l + 1 < layer_count()) cache.activations[l + 1] = z.cwiseMax(0.0);
    }
    // Softmax per action block.
    const Eigen::Index batch = z.cols();
    for (Eigen::Index b = 0; b < batch; ++b) {
        for (int a = 0; a < actions_; ++a) {
            auto block = z.col(b).segment(static_cast<Eigen::Index>(a) * atoms_, atoms_);
            const double top = block.maxCoeff();
            block = (block.array() - top).exp();
            block /= block.sum();
        }
    }
    cache.probs = std::move(z);
}

Eigen::MatrixXd ValueNetwork::forward(const Eigen::MatrixXd& observations) const {
    Cache cache;
    forward(observations, cache);
    return std::move(cache.probs);
}

Distributions ValueNetwork::forward_one(std::span<const double> observation) const {
    const Eigen::Map<const Eigen::MatrixXd> obs(observation.data(), static_cast<Eigen::Index>(observation.size()), 1);
    const Eigen::MatrixXd probs = forward(Eigen::MatrixXd(obs));
    return Eigen::Map<const Eigen::MatrixXd>(probs.data(), atoms_, actions_);
}

void ValueNetwork::backward(const Cache& cache, const Eigen::MatrixXd& dlogits, Eigen::VectorXd& gradient) const {
    if (gradient.size() != params_.size()) gradient = Eigen::VectorXd::Zero(params_.size());
    Eigen::MatrixXd delta = dlogits;
    for (int l = layer_count() - 1; l >= 0; --l) {
        const auto& input = cache.activations[l];
        Eigen::Map<Eigen::MatrixXd> gw(gradient.data() + offsets_[l], dims_[l + 1], dims_[l]);
        Eigen::Map<Eigen::VectorXd> gb(gradient.data() + offsets_[l] + static_cast<Eigen::Index>(dims_[l + 1]) * dims_[l],
                                       dims_[l + 1]);
        gw.noalias() += delta * input.transpose();
        gb += delta.rowwise().sum();
        if (l > 0) {
            Eigen::MatrixXd upstream = weight(l).transpose() * delta;
            delta = (input.array() > 0.0).select(upstream, 0.0);
        }
    }
}

Eigen::VectorXd q_values(const Distributions& dists, const SupportSpec& support) {
    return dists.transpose() * support.atoms();
}

int greedy_action(const Eigen::VectorXd& q) {
    int best = 0;
    for (int a = 1; a < q.size(); ++a)
        if (q(a) > q(best)) best = a;
    return best;
}

env::ActionCode act(const ValueNetwork& net, std::span<const double> observation, double epsilon,
                    const SupportSpec& support, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    if (unit(rng) < epsilon) {
        std::uniform_int_distribution<int> pick(0, net.action_count() - 1);
        return {pick(rng)};
    }
    return {greedy_action(q_values(net.forward_one(observation), support))};
}

Adam::Adam(AdamConfig config, Eigen::Index parameter_count)
    : first_moment(Eigen::VectorXd::Zero(parameter_count)),
      second_moment(Eigen::VectorXd::Zero(parameter_count)),
      config_(config) {}

void Adam::step(Eigen::VectorXd& params, Eigen::VectorXd gradient) {
    if (config_.max_grad_norm > 0.0) {
        const double norm = gradient.norm();
        if (norm > config_.max_grad_norm) gradient *= config_.max_grad_norm / norm;
    }
    ++steps;
    first_moment = config_.beta1 * first_moment + (1.0 - config_.beta1) * gradient;
    second_moment = config_.beta2 * second_moment + (1.0 - config_.beta2) * gradient.cwiseAbs2();
    const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(steps));
    const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(steps));
    params.array() -= config_.learning_rate * (first_moment.array() / c1) /
                      ((second_moment.array() / c2).sqrt() + config_.epsilon);
}

}  // namespace steersman::agent
