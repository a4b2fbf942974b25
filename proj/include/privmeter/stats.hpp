#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace privmeter {

struct TestResult {
    double statistic = 0.0;
    double p_value = 1.0;
    double degrees_of_freedom = 0.0;  // Welch only
};

/// Two-sided Welch t-test of mean(a) - mean(b). Requires two values per side.
/// With both variances zero: equal means give (0, p = 1), different means give
/// (±inf, p = 0).
TestResult welch_t_test(std::span<const double> a, std::span<const double> b);

/// Wilcoxon rank-sum, normal approximation with midranks, tie-corrected
/// variance and a 0.5 continuity correction. The statistic is z, positive when
/// a tends to rank above b.
TestResult rank_sum_test(std::span<const double> a, std::span<const double> b);

double student_t_cdf(double x, double df);
double standard_normal_cdf(double x);

struct ConfidenceInterval {
    double mean = 0.0;
    double half_width = 0.0;
    double confidence = 0.95;
    double relative_error = 0.0;  // half_width / |mean|; inf when mean = 0 and half_width > 0
};

/// Student-t interval for the mean. Requires at least two values.
ConfidenceInterval mean_ci(std::span<const double> sample, double confidence = 0.95);

double mean(std::span<const double> sample);
/// Unbiased sample variance (n - 1 denominator).
double sample_variance(std::span<const double> sample);

/// Linear interpolation at index q/100 * (n - 1) of the sorted sample.
double percentile(std::span<const double> sample, double q);

struct DensityCurve {
    std::vector<double> x;
    std::vector<double> density;
    double bandwidth = 0.0;
    /// Set instead of a curve when the sample has no spread.
    std::optional<double> spike;
};

/// Gaussian KDE with Silverman's bandwidth on an equispaced grid over [min, max].
DensityCurve gaussian_kde(std::span<const double> sample, std::size_t grid_points = 256);

}  // namespace privmeter
