#include <algorithm>
#include <cmath>
#include <sstream>

#include "steersman/agent.hpp"
#include "steersman/error.hpp"

namespace steersman::agent {

Eigen::VectorXd project_target(const SupportSpec& support, double reward_n, double discount_n,
                               const Eigen::VectorXd& next_dist, bool done) {
    const int n = support.atom_count;
    const double dz = support.spacing();
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
    for (int j = 0; j < n; ++j) {
        const double z = support.v_min + j * dz;
        const double tz = std::clamp(reward_n + (done ? 0.0 : discount_n * z), support.v_min, support.v_max);
        const double b = std::clamp((tz - support.v_min) / dz, 0.0, static_cast<double>(n - 1));
        const int lower = static_cast<int>(std::floor(b));
        const int upper = static_cast<int>(std::ceil(b));
        if (lower == upper) {
            out(lower) += next_dist(j);
        } else {
            out(lower) += next_dist(j) * (upper - b);
            out(upper) += next_dist(j) * (b - lower);
        }
    }
    return out;
}

LossResult categorical_loss(const ValueNetwork& net, const Eigen::MatrixXd& observations, std::span<const int> actions,
                            const Eigen::MatrixXd& targets, std::span<const double> weights) {
    const Eigen::Index batch = observations.cols();
    const int atoms = net.atom_count();
    ValueNetwork::Cache cache;
    net.forward(observations, cache);

    LossResult out;
    out.kl.resize(batch);
    Eigen::MatrixXd dlogits = Eigen::MatrixXd::Zero(cache.probs.rows(), batch);
    for (Eigen::Index b = 0; b < batch; ++b) {
        const Eigen::Index row = static_cast<Eigen::Index>(actions[b]) * atoms;
        const auto p = cache.probs.col(b).segment(row, atoms);
        double kl = 0.0;
        for (int i = 0; i < atoms; ++i) {
            const double m = targets(i, b);
            if (m > 0.0) kl += m * (std::log(m) - std::log(std::max(p(i), 1e-300)));
        }
        out.kl(b) = kl;
        out.loss += weights[b] * kl;
        // d/dlogits of sum_i m_i (log m_i - log softmax_i) is (p - m) since sum m = 1.
        dlogits.col(b).segment(row, atoms) = weights[b] * (p - targets.col(b)) / static_cast<double>(batch);
    }
    out.loss /= static_cast<double>(batch);
    out.gradient = Eigen::VectorXd::Zero(net.parameters().size());
    net.backward(cache, dlogits, out.gradient);
    return out;
}

TdResult td_update(const ValueNetwork& online, const ValueNetwork& target, const Batch& batch, const SupportSpec& support) {
    const Eigen::Index size = batch.observations.cols();
    const int atoms = support.atom_count;
    const Eigen::VectorXd z = support.atoms();

    const Eigen::MatrixXd online_next = online.forward(batch.next_observations);
    const Eigen::MatrixXd target_next = target.forward(batch.next_observations);
    Eigen::MatrixXd projected(atoms, size);
    for (Eigen::Index b = 0; b < size; ++b) {
        const Eigen::Map<const Eigen::MatrixXd> dists(online_next.col(b).data(), atoms, online.action_count());
        const int next_action = greedy_action(dists.transpose() * z);
        const Eigen::VectorXd next_dist = target_next.col(b).segment(static_cast<Eigen::Index>(next_action) * atoms, atoms);
        projected.col(b) = project_target(support, batch.returns[b], batch.discounts[b], next_dist, batch.dones[b] != 0);
    }

    LossResult loss = categorical_loss(online, batch.observations, batch.actions, projected, batch.weights);
    if (!std::isfinite(loss.loss) || !loss.gradient.allFinite()) {
        std::ostringstream msg;
        msg << "non-finite TD loss " << loss.loss << " over a batch of " << size << " (returns:";
        for (Eigen::Index b = 0; b < std::min<Eigen::Index>(size, 8); ++b) msg << ' ' << batch.returns[b];
        msg << (size > 8 ? " ..." : "") << ")";
        throw NumericalError(msg.str());
    }
    TdResult out;
    out.loss = loss.loss;
    out.gradient = std::move(loss.gradient);
    out.priorities.resize(size);
    for (Eigen::Index b = 0; b < size; ++b) out.priorities[b] = std::max(loss.kl(b), kPriorityFloor);
    return out;
}

}  // namespace steersman::agent
