#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "privmeter/metrics.hpp"
#include "privmeter/stats.hpp"
#include "privmeter/strength.hpp"

namespace privmeter {

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    [[nodiscard]] std::string hex() const;
    friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Yellow (-1) through green (0) to blue (+1), linear per channel, rounded half up.
Rgb strength_color(double m);

std::string heatmap_svg(const StrengthHeatMap& map);

/// clamp((v - p10) / (p90 - p10), 0, 1), inverted for lower-is-private metrics;
/// 0.5 when p90 == p10.
double radar_normalize(double value, double p10, double p90, Direction direction);

struct RadarAxis {
    MetricId metric;
    double p10;
    double p90;
};

struct RadarPlot {
    std::string title;
    std::vector<RadarAxis> axes;
    std::vector<std::string> level_labels;
    std::vector<std::vector<double>> radius;  // [level][axis], in [0, 1]
};

/// `values[level][axis]` are the plotted (typically mean) metric values;
/// `bound_samples[axis]` are all values the percentile bounds are taken from.
/// Needs at least three axes.
RadarPlot build_radar(std::string title, std::span<const MetricId> metrics,
                      std::vector<std::string> level_labels,
                      const std::vector<std::vector<double>>& values,
                      const std::vector<std::vector<double>>& bound_samples);

std::string radar_svg(const RadarPlot& plot);

struct ViolinLevel {
    std::string level;
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
    double ci_half_width = 0.0;
    DensityCurve kde;
};

struct ViolinBundle {
    MetricId metric = MetricId::kEntropy;
    std::vector<ViolinLevel> levels;
};

ViolinBundle violin_export(MetricId metric,
                           std::span<const std::pair<std::string, std::vector<double>>> levels,
                           std::size_t grid_points = 256);

std::string violin_json(std::span<const ViolinBundle> bundles);

}  // namespace privmeter
