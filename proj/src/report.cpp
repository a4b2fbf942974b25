#include "privmeter/report.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace privmeter {

namespace {

constexpr Rgb kWeak{0xFF, 0xEB, 0x3B};
constexpr Rgb kNeutral{0x4C, 0xAF, 0x50};
constexpr Rgb kStrong{0x21, 0x96, 0xF3};

std::uint8_t mix(std::uint8_t a, std::uint8_t b, double t) {
    const double v = a + t * (static_cast<double>(b) - a);
    return static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
}

std::string escape_xml(std::string_view s) {
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

std::string num(double v) { return fmt::format("{:.2f}", v); }

constexpr std::array<const char*, 8> kSeriesColors = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                                      "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

}  // namespace

std::string Rgb::hex() const { return fmt::format("#{:02X}{:02X}{:02X}", r, g, b); }

Rgb strength_color(double m) {
    if (std::isnan(m)) m = 0.0;
    m = std::clamp(m, -1.0, 1.0);
    const Rgb& to = m < 0 ? kWeak : kStrong;
    const double t = std::abs(m);
    return {mix(kNeutral.r, to.r, t), mix(kNeutral.g, to.g, t), mix(kNeutral.b, to.b, t)};
}

std::string heatmap_svg(const StrengthHeatMap& map) {
    constexpr double cell_w = 96;
    constexpr double cell_h = 48;
    constexpr double left = 110;
    constexpr double top = 64;
    const double width = left + cell_w * static_cast<double>(map.models.size()) + 20;
    const double height = top + cell_h * static_cast<double>(map.scenarios.size()) + 20;

    std::string svg = fmt::format(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{}\" height=\"{}\" "
        "viewBox=\"0 0 {} {}\" font-family=\"sans-serif\" font-size=\"12\">\n",
        num(width), num(height), num(width), num(height));
    svg += fmt::format("  <text x=\"{}\" y=\"22\" font-size=\"14\" font-weight=\"bold\">{} ({}%)</text>\n",
                       num(left), escape_xml(to_string(map.metric)), num(map.overall_pct));
    for (std::size_t c = 0; c < map.models.size(); ++c) {
        svg += fmt::format("  <text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
                           num(left + cell_w * (static_cast<double>(c) + 0.5)), num(top - 8),
                           to_string(map.models[c]));
    }
    for (std::size_t r = 0; r < map.scenarios.size(); ++r) {
        const double y = top + cell_h * static_cast<double>(r);
        svg += fmt::format("  <text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n", num(left - 8),
                           num(y + cell_h / 2 + 4), escape_xml(map.scenarios[r]));
        for (std::size_t c = 0; c < map.models.size(); ++c) {
            const auto& cell = map.at(r, c);
            const double x = left + cell_w * static_cast<double>(c);
            svg += fmt::format(
                "  <rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\" stroke=\"#ffffff\"/>\n",
                num(x), num(y), num(cell_w), num(cell_h), strength_color(cell.m_normalized).hex());
            svg += fmt::format("  <text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
                               num(x + cell_w / 2), num(y + cell_h / 2 + 4), num(cell.m_normalized));
        }
    }
    svg += "</svg>\n";
    return svg;
}

double radar_normalize(double value, double p10, double p90, Direction direction) {
    double v = 0.5;
    if (p90 != p10) v = std::clamp((value - p10) / (p90 - p10), 0.0, 1.0);
    return direction == Direction::kLowerIsPrivate ? 1.0 - v : v;
}

RadarPlot build_radar(std::string title, std::span<const MetricId> metrics,
                      std::vector<std::string> level_labels,
                      const std::vector<std::vector<double>>& values,
                      const std::vector<std::vector<double>>& bound_samples) {
    if (metrics.size() < 3) throw UsageError("a radar plot needs at least three metric axes");
    if (bound_samples.size() != metrics.size()) throw UsageError("one bound sample per radar axis is required");
    if (values.size() != level_labels.size()) throw UsageError("one value row per radar level is required");
    RadarPlot plot;
    plot.title = std::move(title);
    plot.level_labels = std::move(level_labels);
    for (std::size_t a = 0; a < metrics.size(); ++a) {
        plot.axes.push_back({metrics[a], percentile(bound_samples[a], 10), percentile(bound_samples[a], 90)});
    }
    for (const auto& row : values) {
        if (row.size() != metrics.size()) throw UsageError("radar value row does not match the axes");
        std::vector<double> radius;
        for (std::size_t a = 0; a < row.size(); ++a) {
            const auto& axis = plot.axes[a];
            radius.push_back(radar_normalize(row[a], axis.p10, axis.p90, metric_info(axis.metric).direction));
        }
        plot.radius.push_back(std::move(radius));
    }
    return plot;
}

std::string radar_svg(const RadarPlot& plot) {
    constexpr double size = 520;
    constexpr double cx = 260;
    constexpr double cy = 270;
    constexpr double r_max = 170;
    const std::size_t n = plot.axes.size();
    auto point = [&](std::size_t axis, double radius) {
        const double angle = -std::numbers::pi / 2 + 2 * std::numbers::pi * static_cast<double>(axis) /
                                                         static_cast<double>(n);
        return std::pair(cx + r_max * radius * std::cos(angle), cy + r_max * radius * std::sin(angle));
    };

    std::string svg = fmt::format(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{0}\" height=\"{1}\" "
        "viewBox=\"0 0 {0} {1}\" font-family=\"sans-serif\" font-size=\"11\">\n",
        num(size), num(size + 40));
    svg += fmt::format("  <text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
                       num(cx), escape_xml(plot.title));
    for (double ring : {0.25, 0.5, 0.75, 1.0}) {
        std::string pts;
        for (std::size_t a = 0; a < n; ++a) {
            const auto [x, y] = point(a, ring);
            pts += fmt::format("{}{},{}", a ? " " : "", num(x), num(y));
        }
        svg += fmt::format("  <polygon points=\"{}\" fill=\"none\" stroke=\"#cccccc\"/>\n", pts);
    }
    for (std::size_t a = 0; a < n; ++a) {
        const auto [x, y] = point(a, 1.0);
        const auto [lx, ly] = point(a, 1.12);
        svg += fmt::format("  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#999999\"/>\n", num(cx),
                           num(cy), num(x), num(y));
        svg += fmt::format("  <text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", num(lx), num(ly),
                           escape_xml(to_string(plot.axes[a].metric)));
    }
    for (std::size_t l = 0; l < plot.radius.size(); ++l) {
        const char* color = kSeriesColors[l % kSeriesColors.size()];
        std::string pts;
        for (std::size_t a = 0; a < n; ++a) {
            const auto [x, y] = point(a, plot.radius[l][a]);
            pts += fmt::format("{}{},{}", a ? " " : "", num(x), num(y));
        }
        svg += fmt::format(
            "  <polygon class=\"level\" points=\"{}\" fill=\"{}\" fill-opacity=\"0.15\" stroke=\"{}\" "
            "stroke-width=\"2\"/>\n",
            pts, color, color);
        svg += fmt::format("  <text x=\"12\" y=\"{}\" fill=\"{}\">{}</text>\n",
                           num(size + 10 - 14.0 * static_cast<double>(plot.radius.size() - 1 - l)), color,
                           escape_xml(plot.level_labels[l]));
    }
    svg += "</svg>\n";
    return svg;
}

ViolinBundle violin_export(MetricId metric,
                           std::span<const std::pair<std::string, std::vector<double>>> levels,
                           std::size_t grid_points) {
    ViolinBundle bundle;
    bundle.metric = metric;
    for (const auto& [label, values] : levels) {
        if (values.empty()) {
            throw DataError(fmt::format("violin level '{}' of {} has no values", label, to_string(metric)));
        }
        ViolinLevel v;
        v.level = label;
        const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
        v.min = *lo;
        v.max = *hi;
        v.mean = mean(values);
        v.median = percentile(values, 50);
        v.q1 = percentile(values, 25);
        v.q3 = percentile(values, 75);
        if (values.size() >= 2) v.ci_half_width = mean_ci(values).half_width;
        v.kde = gaussian_kde(values, grid_points);
        bundle.levels.push_back(std::move(v));
    }
    return bundle;
}

std::string violin_json(std::span<const ViolinBundle> bundles) {
    nlohmann::ordered_json doc = nlohmann::ordered_json::array();
    for (const auto& b : bundles) {
        nlohmann::ordered_json levels = nlohmann::ordered_json::array();
        for (const auto& l : b.levels) {
            nlohmann::ordered_json kde;
            if (l.kde.spike) {
                kde["spike"] = *l.kde.spike;
            } else {
                kde["bandwidth"] = l.kde.bandwidth;
                kde["x"] = l.kde.x;
                kde["density"] = l.kde.density;
            }
            levels.push_back({{"level", l.level},
                              {"min", l.min},
                              {"max", l.max},
                              {"mean", l.mean},
                              {"median", l.median},
                              {"q1", l.q1},
                              {"q3", l.q3},
                              {"ci_half_width", l.ci_half_width},
                              {"kde", kde}});
        }
        doc.push_back({{"metric", to_string(b.metric)}, {"levels", levels}});
    }
    return doc.dump(2) + "\n";
}

}  // namespace privmeter
