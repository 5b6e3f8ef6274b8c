#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "steersman/harness.hpp"

namespace steersman::harness {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 170.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::vector<double> ticks(double lo, double hi) {
    const double span = hi - lo;
    const double raw = span / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double f : {1.0, 2.0, 5.0, 10.0})
        if (raw <= f * mag) {
            step = f * mag;
            break;
        }
    std::vector<double> out;
    for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * span; t += step) out.push_back(t);
    return out;
}

}  // namespace

std::string line_plot_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                          const std::vector<Series>& series) {
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : series)
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, s.y[i]);
            y1 = std::max(y1, s.y[i]);
        }
    if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (x1 - x0 <= 0) x1 = x0 + 1;
    if (y1 - y0 <= 1e-12 * std::max(1.0, std::abs(y0))) {
        const double pad = std::max(std::abs(y0) * 0.05, 0.05);
        y0 -= pad;
        y1 += pad;
    } else {
        const double pad = 0.05 * (y1 - y0);
        y0 -= pad;
        y1 += pad;
    }
    const double pw = kWidth - kLeft - kRight;
    const double ph = kHeight - kTop - kBottom;
    auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
    auto py = [&](double y) { return kTop + (1.0 - (y - y0) / (y1 - y0)) * ph; };

    std::string out = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
        "font-family=\"sans-serif\" font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
        kWidth, kHeight);
    out += fmt::format("<text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
                       kLeft + pw / 2, escape(title));
    out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#444\"/>\n", kLeft,
                       kTop, pw, ph);
    for (double t : ticks(x0, x1)) {
        out += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1}\" x2=\"{0:.2f}\" y2=\"{2}\" stroke=\"#ddd\"/>\n", px(t), kTop,
                           kTop + ph);
        out += fmt::format("<text x=\"{:.2f}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", px(t), kTop + ph + 16,
                           fmt::format("{:g}", t));
    }
    for (double t : ticks(y0, y1)) {
        out += fmt::format("<line x1=\"{0}\" y1=\"{1:.2f}\" x2=\"{2}\" y2=\"{1:.2f}\" stroke=\"#ddd\"/>\n", kLeft, py(t),
                           kLeft + pw);
        out += fmt::format("<text x=\"{}\" y=\"{:.2f}\" text-anchor=\"end\">{}</text>\n", kLeft - 6, py(t) + 4,
                           fmt::format("{:g}", t));
    }
    out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", kLeft + pw / 2, kHeight - 12,
                       escape(x_label));
    out += fmt::format("<text x=\"16\" y=\"{0}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {0})\">{1}</text>\n",
                       kTop + ph / 2, escape(y_label));

    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        std::string points;
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
            if (!std::isfinite(s.y[i])) continue;
            points += fmt::format("{:.2f},{:.2f} ", px(s.x[i]), py(s.y[i]));
        }
        out += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.6\" stroke-opacity=\"{}\"{} points=\"{}\"/>\n",
                           s.color, s.opacity, s.dashed ? " stroke-dasharray=\"6 4\"" : "", points);
        const double ly = kTop + 14 + 18 * static_cast<double>(k);
        out += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"{3}\" stroke-width=\"2\" stroke-opacity=\"{4}\"{5}/>\n",
                           kLeft + pw + 12, ly, kLeft + pw + 36, s.color, s.opacity,
                           s.dashed ? " stroke-dasharray=\"6 4\"" : "");
        out += fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", kLeft + pw + 42, ly + 4, escape(s.label));
    }
    out += "</svg>\n";
    return out;
}

std::string layout_svg(const std::string& title, const modal::CandidateGrid& grid, const std::vector<int>& positions) {
    const double cell = std::clamp(600.0 / std::max(grid.cols, 1), 6.0, 40.0);
    const double w = cell * grid.cols + 40;
    const double h = cell * grid.rows + 60;
    std::string out = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
        "font-family=\"sans-serif\" font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
        w, h);
    out += fmt::format("<text x=\"20\" y=\"22\">{}</text>\n", escape(title));
    // Row 0 (y = 0) is drawn at the bottom.
    auto cx = [&](int node) { return 20 + cell * (grid.col_of(node) + 0.5); };
    auto cy = [&](int node) { return 40 + cell * (grid.rows - grid.row_of(node) - 0.5); };
    for (int node = 0; node < grid.size(); ++node)
        out += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"{:.2f}\" fill=\"#ccc\"/>\n", cx(node), cy(node),
                           cell * 0.12);
    for (std::size_t k = 0; k < positions.size(); ++k) {
        const int node = positions[k];
        out += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"{:.2f}\" fill=\"#d62728\"/>\n", cx(node), cy(node),
                           cell * 0.38);
        out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\" fill=\"white\" font-size=\"{:.1f}\">{}</text>\n",
                           cx(node), cy(node) + cell * 0.14, std::min(cell * 0.45, 12.0), k);
    }
    out += "</svg>\n";
    return out;
}

}  // namespace steersman::harness
