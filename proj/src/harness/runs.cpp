#include <chrono>
#include <fstream>

#include <fmt/format.h>

#include "steersman/error.hpp"
#include "steersman/harness.hpp"

namespace steersman::harness {

namespace fs = std::filesystem;

std::shared_ptr<const env::ModelLibrary> build_library(const ExperimentConfig& config) {
    return std::make_shared<const env::ModelLibrary>(env::ModelLibrary::build(config.library_options()));
}

namespace {

std::string join(const std::vector<int>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? " " : "") + std::to_string(v[i]);
    return out;
}

std::string file_stem(const std::string& label) {
    std::string out;
    for (char c : label) out += std::isalnum(static_cast<unsigned char>(c)) || c == '-' ? c : '_';
    return out;
}

std::vector<agent::EpochMetrics> csv_rows(const std::vector<agent::EpochMetrics>& history, bool wall_time) {
    auto rows = history;
    if (!wall_time)
        for (auto& r : rows) r.wall_time = 0.0;
    return rows;
}

void write_timing(const fs::path& path, const std::vector<agent::EpochMetrics>& history) {
    std::string text = "epoch,wall_time\n";
    for (const auto& m : history) text += fmt::format("{},{}\n", m.epoch, format_double(m.wall_time));
    write_text(path, text);
}

}  // namespace

TrainArtifacts run_train(const ExperimentConfig& config, const fs::path& dir, const TrainOptions& options) {
    fs::create_directories(dir / "checkpoints");
    write_text(dir / "config.yaml", canonical_text(config));
    const auto library = build_library(config);
    agent::Trainer trainer(library, config.env_config(), config.train_config(), config_digest(config));
    const auto start = std::chrono::steady_clock::now();
    trainer.set_clock([start] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    });

    const fs::path latest = dir / "checkpoints" / "latest.ckpt";
    if (options.resume && fs::exists(latest)) trainer.load_checkpoint(latest);

    const int target = options.stop_after > 0 ? std::min(options.stop_after, config.agent.epochs) : config.agent.epochs;
    auto flush = [&] {
        write_metrics_csv(dir / "metrics.csv", csv_rows(trainer.history(), config.record_wall_time));
        write_timing(dir / "timing.csv", trainer.history());
    };
    while (trainer.epoch() < target) {
        try {
            const auto m = trainer.run_epoch();
            if (options.progress) options.progress(m);
        } catch (...) {
            flush();
            throw;
        }
        flush();
        if (trainer.epoch() % config.agent.checkpoint_every == 0) {
            trainer.save_checkpoint(dir / "checkpoints" / fmt::format("epoch_{:04d}.ckpt", trainer.epoch()));
            trainer.save_checkpoint(latest);
        }
    }

    TrainArtifacts out;
    out.dir = dir;
    out.metrics = csv_rows(trainer.history(), config.record_wall_time);
    out.final_checkpoint = dir / "checkpoints" / "final.ckpt";
    trainer.save_checkpoint(latest);
    if (trainer.epoch() == config.agent.epochs) trainer.save_checkpoint(out.final_checkpoint);

    std::string counts = "condition,resets\n";
    for (int i = 0; i < library->size(); ++i)
        counts += fmt::format("{},{}\n", library->label(i), trainer.condition_counts()[static_cast<std::size_t>(i)]);
    write_text(dir / "conditions.csv", counts);
    plot_run(dir);
    return out;
}

std::vector<ConditionSummary> run_eval(const ExperimentConfig& config, const fs::path& checkpoint, const fs::path& dir,
                                       std::vector<std::string> conditions) {
    const auto summary = agent::read_checkpoint_summary(checkpoint);
    const auto digest = config_digest(config);
    if (summary.config_digest != digest)
        throw ConfigError(fmt::format("checkpoint '{}' has config digest {} but the config digests to {}",
                                      checkpoint.string(), summary.config_digest, digest));
    const auto library = build_library(config);
    const auto env_config = config.env_config();
    if (conditions.empty()) conditions = config.train_conditions.empty() ? config.labels() : config.train_conditions;
    for (const auto& c : conditions) library->index_of(c);

    const env::SteerEnv encoder(library, env_config);
    const auto greedy = baselines::evaluate_policy(
        baselines::greedy_policy(summary.online, summary.support, encoder), library, env_config, conditions,
        {config.eval.greedy_episodes, config.eval.steps, agent::splitmix64(config.seed ^ 0x6772656564ULL), 0});
    const auto random = baselines::evaluate_policy(
        baselines::uniform_policy(encoder.action_count()), library, env_config, conditions,
        {config.eval.random_seeds, config.eval.steps, agent::splitmix64(config.seed ^ 0x72616e646fULL), 0});

    fs::create_directories(dir);
    std::vector<ConditionSummary> out;
    std::string comparison = "condition,step,agent,efi,random\n";
    std::string snapshots = "condition,step,positions\n";
    for (std::size_t k = 0; k < conditions.size(); ++k) {
        const auto& label = conditions[k];
        const auto& scorer = library->scorer(library->index_of(label));
        ConditionSummary s;
        s.condition = label;
        const auto efi = baselines::efi_select(scorer, config.sensors);
        s.efi_score = efi.score;
        s.efi_positions = efi.selected;
        const int n = library->grid().size();
        const auto oracle = info::combinations(n, config.sensors) <= info::kExhaustiveBudget
                                ? baselines::brute_force_optimum(scorer, config.sensors)
                                : baselines::fssp_select(scorer, config.sensors);
        s.oracle_score = oracle.score;
        s.oracle_positions = oracle.selected;

        const auto& g = greedy[k];
        s.agent_final = g.mean_final;
        s.agent_steps = static_cast<int>(g.episodes.front().size()) - 1;
        double sum = 0.0;
        for (const auto& e : g.episodes)
            for (std::size_t t = 1; t < e.size(); ++t) sum += e[t];
        s.agent_score_sum = sum / static_cast<double>(g.episodes.size());
        s.agent_final_positions = g.first_path.back();
        s.random_mean_final = random[k].mean_final;

        std::vector<double> steps;
        for (std::size_t t = 0; t < g.mean_curve.size(); ++t) {
            steps.push_back(static_cast<double>(t));
            const double r = t < random[k].mean_curve.size() ? random[k].mean_curve[t] : random[k].mean_curve.back();
            comparison += fmt::format("{},{},{},{},{}\n", label, t, format_double(g.mean_curve[t]),
                                      format_double(efi.score), format_double(r));
        }
        std::vector<double> random_curve(random[k].mean_curve.begin(),
                                         random[k].mean_curve.begin() + static_cast<std::ptrdiff_t>(steps.size()));
        write_text(dir / fmt::format("eval_{}.svg", file_stem(label)),
                   line_plot_svg("Score vs step: " + label, "step", "score",
                                 {{"agent (greedy)", steps, g.mean_curve, "#1f77b4"},
                                  {"EFI", steps, std::vector<double>(steps.size(), efi.score), "#2ca02c", true},
                                  {fmt::format("random (mean of {})", config.eval.random_seeds), steps, random_curve,
                                   "#ff7f0e"}}));
        for (int mark : config.eval.snapshot_steps) {
            const auto idx = std::min<std::size_t>(static_cast<std::size_t>(mark), g.first_path.size() - 1);
            snapshots += fmt::format("{},{},{}\n", label, idx, join(g.first_path[idx]));
            write_text(dir / fmt::format("snapshot_{}_{:04d}.svg", file_stem(label), idx),
                       layout_svg(fmt::format("{}: agent layout at step {}", label, idx), library->grid(),
                                  g.first_path[idx]));
        }
        out.push_back(std::move(s));
    }

    std::string table =
        "condition,agent_final,agent_score_sum,agent_steps,random_mean_final,efi_score,oracle_score,agent_positions,"
        "efi_positions,oracle_positions\n";
    for (const auto& s : out)
        table += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", s.condition, format_double(s.agent_final),
                             format_double(s.agent_score_sum), s.agent_steps, format_double(s.random_mean_final),
                             format_double(s.efi_score), format_double(s.oracle_score), join(s.agent_final_positions),
                             join(s.efi_positions), join(s.oracle_positions));
    write_text(dir / "comparison.csv", comparison);
    write_text(dir / "summary.csv", table);
    write_text(dir / "snapshots.csv", snapshots);
    return out;
}

}  // namespace steersman::harness
