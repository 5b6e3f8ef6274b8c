#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "steersman/error.hpp"
#include "steersman/harness.hpp"

namespace steersman::harness {

std::string format_double(double v) { return fmt::format("{}", v); }

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw FormatError("failed writing '" + path.string() + "'");
}

void write_metrics_csv(const std::filesystem::path& path, std::span<const agent::EpochMetrics> rows) {
    std::string text;
    const auto& cols = metric_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) text += (i ? "," : "") + cols[i];
    text += '\n';
    for (const auto& m : rows) {
        text += fmt::format("{},{},{},{},{},{},{}\n", m.epoch, format_double(m.mean_episode_reward),
                            format_double(m.reward_std), format_double(m.final_score),
                            format_double(m.episode_score_sum), format_double(m.epsilon), format_double(m.wall_time));
    }
    write_text(path, text);
}

namespace {

double parse_double(const std::string& field, const std::filesystem::path& path, int line) {
    double v = 0.0;
    const auto* end = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(field.data(), end, v);
    if (ec != std::errc() || ptr != end)
        throw FormatError(fmt::format("{}:{}: malformed number '{}'", path.string(), line, field));
    return v;
}

}  // namespace

std::vector<agent::EpochMetrics> read_metrics_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("missing metrics file '" + path.string() + "'");
    std::string line;
    std::getline(in, line);
    std::string expected;
    for (const auto& c : metric_columns()) expected += (expected.empty() ? "" : ",") + c;
    if (line != expected) throw FormatError(path.string() + ": unexpected metrics header '" + line + "'");
    std::vector<agent::EpochMetrics> rows;
    int number = 1;
    while (std::getline(in, line)) {
        ++number;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string f;
        while (std::getline(ss, f, ',')) fields.push_back(f);
        if (fields.size() != metric_columns().size())
            throw FormatError(fmt::format("{}:{}: expected {} fields", path.string(), number, metric_columns().size()));
        agent::EpochMetrics m;
        m.epoch = static_cast<int>(parse_double(fields[0], path, number));
        m.mean_episode_reward = parse_double(fields[1], path, number);
        m.reward_std = parse_double(fields[2], path, number);
        m.final_score = parse_double(fields[3], path, number);
        m.episode_score_sum = parse_double(fields[4], path, number);
        m.epsilon = parse_double(fields[5], path, number);
        m.wall_time = parse_double(fields[6], path, number);
        rows.push_back(m);
    }
    return rows;
}

std::vector<double> moving_average(std::span<const double> values, int window) {
    if (window < 1) throw InvalidArgument("moving-average window must be positive");
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const std::size_t first = i + 1 >= static_cast<std::size_t>(window) ? i + 1 - window : 0;
        double sum = 0.0;
        for (std::size_t k = first; k <= i; ++k) sum += values[k];
        out[i] = sum / static_cast<double>(i + 1 - first);
    }
    return out;
}

void plot_run(const std::filesystem::path& dir) {
    const auto rows = read_metrics_csv(dir / "metrics.csv");
    std::vector<double> epochs;
    std::vector<double> reward;
    std::vector<double> final_score;
    std::vector<double> score_sum;
    for (const auto& m : rows) {
        epochs.push_back(m.epoch);
        reward.push_back(m.mean_episode_reward);
        final_score.push_back(m.final_score);
        score_sum.push_back(m.episode_score_sum);
    }
    write_text(dir / "reward.svg",
               line_plot_svg("Mean test episode reward", "epoch", "reward",
                             {{"raw", epochs, reward, "#1f77b4", false, 0.35},
                              {"moving average (10)", epochs, moving_average(reward), "#1f77b4"}}));
    write_text(dir / "score.svg",
               line_plot_svg("Test episode score", "epoch", "score",
                             {{"final score", epochs, final_score, "#1f77b4", false, 0.35},
                              {"final score (avg 10)", epochs, moving_average(final_score), "#1f77b4"}}));
    write_text(dir / "score_sum.svg",
               line_plot_svg("Episode score sum", "epoch", "score sum",
                             {{"score sum", epochs, score_sum, "#d62728", false, 0.35},
                              {"score sum (avg 10)", epochs, moving_average(score_sum), "#d62728"}}));
}

}  // namespace steersman::harness
