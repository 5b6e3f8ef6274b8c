#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "steersman/agent.hpp"
#include "steersman/env.hpp"
#include "steersman/info.hpp"

namespace steersman::baselines {

struct PlacementResult {
    std::vector<int> selected;
    double det = 0.0;
    double score = 0.0;
    std::string method;
};

/// One backward-elimination round of EFI: the retained nodes before the
/// removal and their effective-independence values.
struct EfiRound {
    std::vector<int> retained;
    std::vector<double> ed;
    int removed = -1;
};

/// Effective independence with a correlated error covariance: backward
/// elimination on the modal matrix prewhitened by the Cholesky factor of
/// the retained nodes' covariance.
PlacementResult efi_select(const Eigen::MatrixXd& phi, const info::CovarianceCache& cov, int p,
                           double normalizer = 1.0, std::vector<EfiRound>* rounds = nullptr);
PlacementResult fssp_select(const Eigen::MatrixXd& phi, const info::CovarianceCache& cov, int p,
                            double normalizer = 1.0, std::vector<double>* history = nullptr);
/// Throws InvalidArgument (pointing at fssp) when C(n, p) exceeds the budget.
PlacementResult brute_force_optimum(const Eigen::MatrixXd& phi, const info::CovarianceCache& cov, int p,
                                    double normalizer = 1.0);

PlacementResult efi_select(const info::ConditionScorer& scorer, int p);
PlacementResult fssp_select(const info::ConditionScorer& scorer, int p);
PlacementResult brute_force_optimum(const info::ConditionScorer& scorer, int p);

/// Uniform random actions for `steps` steps from the env's current state.
/// Returns the score after each step, index 0 holding the initial score.
std::vector<double> random_policy(env::SteerEnv& env, std::mt19937_64& rng, int steps);

/// Policy used by evaluate_policy; the generator belongs to the episode.
using Policy = std::function<env::ActionCode(const env::EnvState&, std::mt19937_64&)>;

Policy greedy_policy(agent::ValueNetwork net, agent::SupportSpec support, const env::SteerEnv& encoder);
Policy uniform_policy(int action_count);

struct ConditionCurves {
    std::string condition;
    /// Per-episode score trajectories (length max_steps + 1).
    std::vector<std::vector<double>> episodes;
    std::vector<double> mean_curve;
    std::vector<double> final_scores;
    double mean_final = 0.0;
    /// Sensor positions of the first episode after every step (index 0 = reset).
    std::vector<std::vector<int>> first_path;
};

struct EvaluationOptions {
    int episodes = 1;
    int max_steps = 1000;
    std::uint64_t seed = 0;
    /// 0 reads STEERSMAN_THREADS (default 1).
    int threads = 0;
};

/// Runs `options.episodes` episodes per condition with reset(condition)
/// semantics. Episodes are independent and may run on several threads;
/// results do not depend on the thread count.
std::vector<ConditionCurves> evaluate_policy(const Policy& policy, std::shared_ptr<const env::ModelLibrary> library,
                                             const env::EnvConfig& env_config,
                                             const std::vector<std::string>& conditions,
                                             const EvaluationOptions& options);

/// Constant curve of a fixed placement scored under `condition`.
ConditionCurves fixed_placement_curve(const env::ModelLibrary& library, const std::string& condition,
                                      const std::vector<int>& selected, int max_steps);

int worker_threads();

}  // namespace steersman::baselines
