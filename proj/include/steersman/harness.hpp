#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "steersman/agent.hpp"
#include "steersman/baselines.hpp"
#include "steersman/env.hpp"
#include "steersman/modal.hpp"

namespace steersman::harness {

struct EvalSettings {
    int greedy_episodes = 1;
    int random_seeds = 20;
    int steps = 1000;
    std::vector<int> snapshot_steps{0, 35};
};

struct ExperimentConfig {
    std::string name;
    std::uint64_t seed = 0;
    modal::PlateSpec plate;
    std::vector<modal::ConditionSpec> conditions;
    int sensors = 3;
    int modes = 3;
    double correlation_length = 0.42981;
    double noise = 0.0;
    int episode_length = 1000;
    bool observe_condition = false;
    std::vector<std::string> train_conditions;
    agent::TrainConfig agent;
    bool record_wall_time = true;
    EvalSettings eval;
    std::string output;

    env::LibraryOptions library_options() const;
    env::EnvConfig env_config() const;
    agent::TrainConfig train_config() const;
    std::vector<std::string> labels() const;
};

/// Parses and validates a YAML experiment file. Every violation (missing
/// field, unknown key, contradictory value) is reported in one ConfigError.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(const std::string& text, const std::string& origin = "<string>");

/// Canonical YAML rendering; round-trips through parse_config.
std::string canonical_text(const ExperimentConfig& config);
/// FNV-1a digest of everything that shapes the trained network (not the
/// seed, output directory, or evaluation settings), as 16 hex digits.
std::string config_digest(const ExperimentConfig& config);

inline const std::vector<std::string>& metric_columns() {
    static const std::vector<std::string> columns{"epoch",           "mean_episode_reward", "reward_std", "final_score",
                                                  "episode_score_sum", "epsilon",           "wall_time"};
    return columns;
}

std::string format_double(double v);
void write_metrics_csv(const std::filesystem::path& path, std::span<const agent::EpochMetrics> rows);
std::vector<agent::EpochMetrics> read_metrics_csv(const std::filesystem::path& path);

/// Trailing moving average over up to `window` points.
std::vector<double> moving_average(std::span<const double> values, int window = 10);

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    std::string color = "#1f77b4";
    bool dashed = false;
    double opacity = 1.0;
};

std::string line_plot_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                          const std::vector<Series>& series);
/// Candidate grid with sensor markers.
std::string layout_svg(const std::string& title, const modal::CandidateGrid& grid, const std::vector<int>& positions);

void write_text(const std::filesystem::path& path, const std::string& text);

/// Writes reward.svg and score.svg (raw and smoothed) from a run directory's metrics.csv.
void plot_run(const std::filesystem::path& dir);

struct TrainOptions {
    bool resume = false;
    /// Stop after this many epochs in total (0 = config epochs).
    int stop_after = 0;
    std::function<void(const agent::EpochMetrics&)> progress;
};

struct TrainArtifacts {
    std::filesystem::path dir;
    std::vector<agent::EpochMetrics> metrics;
    std::filesystem::path final_checkpoint;
};

std::shared_ptr<const env::ModelLibrary> build_library(const ExperimentConfig& config);

/// Trains per the config into `dir`: metrics.csv, timing.csv, reward.svg,
/// score.svg, conditions.csv, config.yaml and checkpoints/.
TrainArtifacts run_train(const ExperimentConfig& config, const std::filesystem::path& dir,
                         const TrainOptions& options = {});

struct ConditionSummary {
    std::string condition;
    double agent_final = 0.0;
    double agent_score_sum = 0.0;
    int agent_steps = 0;
    double random_mean_final = 0.0;
    double efi_score = 0.0;
    double oracle_score = 0.0;
    std::vector<int> agent_final_positions;
    std::vector<int> efi_positions;
    std::vector<int> oracle_positions;
};

/// Greedy agent vs EFI vs random on each condition: comparison.csv,
/// summary.csv, snapshots.csv and per-condition plots under `dir`.
std::vector<ConditionSummary> run_eval(const ExperimentConfig& config, const std::filesystem::path& checkpoint,
                                       const std::filesystem::path& dir, std::vector<std::string> conditions = {});

}  // namespace steersman::harness
