#include <cstdio>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "steersman/baselines.hpp"
#include "steersman/error.hpp"
#include "steersman/harness.hpp"

namespace fs = std::filesystem;
using namespace steersman;

namespace {

std::string join(const std::vector<int>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? " " : "") + std::to_string(v[i]);
    return out;
}

harness::ExperimentConfig load(const std::string& path, std::optional<std::uint64_t> seed) {
    auto config = harness::load_config(path);
    if (seed) {
        config.seed = *seed;
        config.agent.seed = *seed;
    }
    return config;
}

fs::path output_dir(const std::string& flag, const harness::ExperimentConfig& config) {
    if (!flag.empty()) return flag;
    if (!config.output.empty()) return config.output;
    return fs::path("runs") / (config.name.empty() ? "run" : config.name);
}

void model_build(const harness::ExperimentConfig& config, const fs::path& out, const std::string& only) {
    const auto library = harness::build_library(config);
    fs::create_directories(out);
    std::string freqs = "condition,mode,frequency_hz\n";
    for (int i = 0; i < library->size(); ++i) {
        const auto& basis = library->scorer(i).basis();
        if (!only.empty() && basis.condition_label != only) continue;
        modal::save_basis(out / fmt::format("basis_{}.json", basis.condition_label), basis);
        for (int k = 0; k < basis.mode_count(); ++k)
            freqs += fmt::format("{},{},{}\n", basis.condition_label, k + 1, harness::format_double(basis.frequencies(k)));
        fmt::print("{}: {} candidates, f = [", basis.condition_label, basis.node_count());
        for (int k = 0; k < basis.mode_count(); ++k) fmt::print("{}{:.4f}", k ? ", " : "", basis.frequencies(k));
        fmt::print("] Hz, normalizer {:.6g}\n", library->scorer(i).normalizer());
    }
    harness::write_text(out / "frequencies.csv", freqs);
}

void baseline(const harness::ExperimentConfig& config, const std::string& method, const std::string& condition,
              int sensors, int steps) {
    auto cfg = config;
    if (sensors > 0) cfg.sensors = sensors;
    const auto library = harness::build_library(cfg);
    const int index = library->index_of(condition.empty() ? library->label(0) : condition);
    const auto& scorer = library->scorer(index);
    const std::string label = library->label(index);

    baselines::PlacementResult r;
    if (method == "efi") {
        r = baselines::efi_select(scorer, cfg.sensors);
    } else if (method == "fssp") {
        r = baselines::fssp_select(scorer, cfg.sensors);
    } else if (method == "oracle") {
        r = baselines::brute_force_optimum(scorer, cfg.sensors);
    } else {
        const auto curves = baselines::evaluate_policy(
            baselines::uniform_policy(4 * cfg.sensors), library, cfg.env_config(), {label},
            {cfg.eval.random_seeds, steps > 0 ? steps : cfg.eval.steps, cfg.seed, 0});
        r.method = "random";
        r.score = curves.front().mean_final;
        r.det = r.score * scorer.normalizer();
        r.selected = curves.front().first_path.back();
    }
    fmt::print("method: {}\ncondition: {}\nsensors: {}\nselected: {}\ndet: {}\nscore: {}\n", r.method, label,
               cfg.sensors, join(r.selected), harness::format_double(r.det), harness::format_double(r.score));
    fmt::print("csv: method,condition,sensors,selected,det,score\n");
    fmt::print("csv: {},{},{},{},{},{}\n", r.method, label, cfg.sensors, join(r.selected),
               harness::format_double(r.det), harness::format_double(r.score));
}

void oracle(const harness::ExperimentConfig& config) {
    const auto library = harness::build_library(config);
    const int n = library->grid().size();
    const bool exact = info::combinations(n, config.sensors) <= info::kExhaustiveBudget;
    fmt::print("condition,method,selected,det\n");
    for (int i = 0; i < library->size(); ++i) {
        const auto r = exact ? baselines::brute_force_optimum(library->scorer(i), config.sensors)
                             : baselines::fssp_select(library->scorer(i), config.sensors);
        fmt::print("{},{},{},{}\n", library->label(i), r.method, join(r.selected), harness::format_double(r.det));
    }
}

int report(const std::string& kind, const std::string& message) {
    nlohmann::json j{{"error", {{"kind", kind}, {"message", message}}}};
    std::cerr << j.dump() << '\n';
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"steersman: adaptive sensor steering for structural monitoring"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::string checkpoint;
    std::vector<std::string> conditions;
    int steps = 0;

    auto* model = app.add_subcommand("model", "modal model operations");
    auto* build = model->add_subcommand("build", "solve and export the modal basis of every condition");
    model->require_subcommand(1);
    build->add_option("--config", config_path, "experiment config")->required();
    build->add_option("--out", out, "output directory");
    build->add_option("--condition", conditions, "only export this condition");

    auto* train = app.add_subcommand("train", "train the steering agent");
    bool resume = false;
    int stop_after = 0;
    train->add_option("--config", config_path, "experiment config")->required();
    train->add_option("--out", out, "run directory");
    train->add_option("--seed", seed, "override the config seed");
    train->add_flag("--resume", resume, "continue from checkpoints/latest.ckpt");
    train->add_option("--stop-after", stop_after, "stop once this many epochs are complete");
    bool quiet = false;
    train->add_flag("--quiet", quiet, "no per-epoch progress lines");

    auto* eval = app.add_subcommand("eval", "compare a trained agent with EFI and random policies");
    eval->add_option("--config", config_path, "experiment config")->required();
    eval->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
    eval->add_option("--out", out, "output directory");
    eval->add_option("--condition", conditions, "conditions to evaluate (default: all)");
    eval->add_option("--steps", steps, "steps per episode");
    eval->add_option("--seed", seed, "override the config seed");

    auto* base = app.add_subcommand("baseline", "classical placement baselines");
    std::string method = "efi";
    int sensors = 0;
    base->add_option("--config", config_path, "experiment config")->required();
    base->add_option("--method", method, "efi|fssp|oracle|random")
        ->check(CLI::IsMember({"efi", "fssp", "oracle", "random"}));
    base->add_option("--condition", conditions, "condition label")->expected(0, 1);
    base->add_option("--sensors", sensors, "sensor count (default: config)");
    base->add_option("--steps", steps, "random-policy steps");
    base->add_option("--seed", seed, "override the config seed");

    auto* orc = app.add_subcommand("oracle", "best placement per condition (exhaustive when affordable)");
    orc->add_option("--config", config_path, "experiment config")->required();
    orc->add_option("--sensors", sensors, "sensor count (default: config)");

    auto* met = app.add_subcommand("metrics", "validate metrics.csv in a run directory and redraw its plots");
    met->add_option("--out", out, "run directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (model->parsed()) {
            const auto config = load(config_path, seed);
            model_build(config, output_dir(out, config) / "model", conditions.empty() ? "" : conditions.front());
        } else if (train->parsed()) {
            const auto config = load(config_path, seed);
            const auto dir = output_dir(out, config);
            harness::TrainOptions options;
            options.resume = resume;
            options.stop_after = stop_after;
            if (!quiet)
                options.progress = [](const agent::EpochMetrics& m) {
                    fmt::print("epoch {:4d}  reward {:+.4f} (sd {:.4f})  final {:.4f}  sum {:.2f}  eps {:.3f}  t {:.1f}s\n",
                               m.epoch, m.mean_episode_reward, m.reward_std, m.final_score, m.episode_score_sum,
                               m.epsilon, m.wall_time);
                    std::fflush(stdout);
                };
            const auto result = harness::run_train(config, dir, options);
            fmt::print("wrote {} epochs to {}\n", result.metrics.size(), dir.string());
        } else if (eval->parsed()) {
            auto config = load(config_path, seed);
            if (steps > 0) config.eval.steps = steps;
            const auto dir = out.empty() ? fs::path(checkpoint).parent_path().parent_path() / "eval" : fs::path(out);
            const auto rows = harness::run_eval(config, checkpoint, dir, conditions);
            fmt::print("condition,agent_final,random_mean_final,efi_score,oracle_score\n");
            for (const auto& r : rows)
                fmt::print("{},{:.6f},{:.6f},{:.6f},{:.6f}\n", r.condition, r.agent_final, r.random_mean_final,
                           r.efi_score, r.oracle_score);
        } else if (base->parsed()) {
            const auto config = load(config_path, seed);
            baseline(config, method, conditions.empty() ? "" : conditions.front(), sensors, steps);
        } else if (orc->parsed()) {
            auto config = load(config_path, seed);
            if (sensors > 0) config.sensors = sensors;
            oracle(config);
        } else if (met->parsed()) {
            const auto rows = harness::read_metrics_csv(fs::path(out) / "metrics.csv");
            harness::plot_run(out);
            fmt::print("{} epochs; plots written to {}\n", rows.size(), out);
        }
    } catch (const Error& e) {
        return report(e.kind(), e.what());
    } catch (const std::exception& e) {
        return report("internal", e.what());
    }
    return 0;
}
