#include <set>

#include "steersman/env.hpp"
#include "steersman/error.hpp"

namespace steersman::env {

ModelLibrary::ModelLibrary(modal::CandidateGrid grid, std::vector<modal::ConditionSpec> conditions,
                           std::vector<info::ConditionScorer> scorers, int sensors)
    : grid_(std::move(grid)), conditions_(std::move(conditions)), scorers_(std::move(scorers)), sensors_(sensors) {
    if (conditions_.size() != scorers_.size()) throw InvalidArgument("one scorer per condition required");
    if (conditions_.empty()) throw InvalidArgument("model library needs at least one condition");
    std::set<std::string> seen;
    for (const auto& c : conditions_)
        if (!seen.insert(c.label).second) throw InvalidArgument("condition '" + c.label + "' defined more than once");
}

ModelLibrary ModelLibrary::build(const LibraryOptions& options) {
    if (options.sensors < 1) throw InvalidArgument("sensor count must be at least 1");
    if (options.modes < 1) throw InvalidArgument("mode count must be at least 1");
    const auto base = modal::build_plate(options.plate);
    std::vector<info::ConditionScorer> scorers;
    scorers.reserve(options.conditions.size());
    for (const auto& cond : options.conditions) {
        auto model = modal::apply_condition(base, cond);
        auto basis = modal::solve_modes(model, options.modes);
        auto cov = info::build_covariance(basis, base.grid, options.delta, options.c2);
        const double norm = info::normalizer(basis.phi, cov, options.sensors);
        scorers.emplace_back(std::move(basis), std::move(cov), norm);
    }
    return ModelLibrary(base.grid, options.conditions, std::move(scorers), options.sensors);
}

int ModelLibrary::index_of(const std::string& label) const {
    for (int i = 0; i < size(); ++i)
        if (conditions_[i].label == label) return i;
    std::string known;
    for (const auto& c : conditions_) known += (known.empty() ? "" : ", ") + c.label;
    throw InvalidArgument("unknown condition '" + label + "' (library has: " + known + ")");
}

}  // namespace steersman::env
