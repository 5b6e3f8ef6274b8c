#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

#include "steersman/baselines.hpp"
#include "steersman/error.hpp"

namespace steersman::baselines {

std::vector<double> random_policy(env::SteerEnv& env, std::mt19937_64& rng, int steps) {
    std::vector<double> scores{env.state().last_score};
    std::uniform_int_distribution<int> pick(0, env.action_count() - 1);
    for (int t = 0; t < steps && env.state().step_count < env.config().episode_length; ++t)
        scores.push_back(env.step({pick(rng)}).info.score);
    return scores;
}

Policy greedy_policy(agent::ValueNetwork net, agent::SupportSpec support, const env::SteerEnv& encoder) {
    auto shared = std::make_shared<const agent::GreedyPolicy>(std::move(net), support, encoder);
    return [shared](const env::EnvState& s, std::mt19937_64&) { return (*shared)(s); };
}

Policy uniform_policy(int action_count) {
    return [action_count](const env::EnvState&, std::mt19937_64& rng) {
        return env::ActionCode{std::uniform_int_distribution<int>(0, action_count - 1)(rng)};
    };
}

int worker_threads() {
    if (const char* v = std::getenv("STEERSMAN_THREADS")) {
        const int n = std::atoi(v);
        if (n >= 1) return n;
    }
    return 1;
}

std::vector<ConditionCurves> evaluate_policy(const Policy& policy, std::shared_ptr<const env::ModelLibrary> library,
                                             const env::EnvConfig& env_config,
                                             const std::vector<std::string>& conditions,
                                             const EvaluationOptions& options) {
    if (options.episodes < 1) throw InvalidArgument("episodes must be positive");
    for (const auto& c : conditions) library->index_of(c);

    struct Job {
        std::size_t condition;
        int episode;
    };
    std::vector<Job> jobs;
    for (std::size_t c = 0; c < conditions.size(); ++c)
        for (int e = 0; e < options.episodes; ++e) jobs.push_back({c, e});

    std::vector<agent::EpisodeTrace> traces(jobs.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t j = next++; j < jobs.size(); j = next++) {
            try {
                const auto& job = jobs[j];
                const std::uint64_t seed =
                    agent::splitmix64(options.seed ^ agent::splitmix64(job.condition * 1000003ULL + static_cast<std::uint64_t>(job.episode)));
                env::EnvConfig cfg = env_config;
                cfg.seed = seed;
                env::SteerEnv env(library, cfg);
                env.reset(std::nullopt, conditions[job.condition]);
                std::mt19937_64 rng(agent::splitmix64(seed));
                traces[j] = agent::run_episode(
                    env, [&](const env::EnvState& s) { return policy(s, rng); }, options.max_steps, job.episode == 0);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const int threads = std::max(1, std::min<int>(options.threads > 0 ? options.threads : worker_threads(),
                                                   static_cast<int>(jobs.size())));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    std::vector<ConditionCurves> out(conditions.size());
    for (std::size_t j = 0; j < jobs.size(); ++j) {
        auto& curves = out[jobs[j].condition];
        curves.condition = conditions[jobs[j].condition];
        if (jobs[j].episode == 0) curves.first_path = std::move(traces[j].positions);
        curves.final_scores.push_back(traces[j].scores.back());
        curves.episodes.push_back(std::move(traces[j].scores));
    }
    for (auto& curves : out) {
        std::size_t len = 0;
        for (const auto& e : curves.episodes) len = std::max(len, e.size());
        curves.mean_curve.assign(len, 0.0);
        for (std::size_t t = 0; t < len; ++t) {
            for (const auto& e : curves.episodes) curves.mean_curve[t] += t < e.size() ? e[t] : e.back();
            curves.mean_curve[t] /= static_cast<double>(curves.episodes.size());
        }
        double sum = 0.0;
        for (double f : curves.final_scores) sum += f;
        curves.mean_final = sum / static_cast<double>(curves.final_scores.size());
    }
    return out;
}

ConditionCurves fixed_placement_curve(const env::ModelLibrary& library, const std::string& condition,
                                      const std::vector<int>& selected, int max_steps) {
    const int index = library.index_of(condition);
    const double score = library.scorer(index).score(selected);
    ConditionCurves out;
    out.condition = condition;
    out.episodes.emplace_back(static_cast<std::size_t>(max_steps) + 1, score);
    out.mean_curve = out.episodes.front();
    out.final_scores = {score};
    out.mean_final = score;
    out.first_path.assign(static_cast<std::size_t>(max_steps) + 1, selected);
    return out;
}

}  // namespace steersman::baselines
