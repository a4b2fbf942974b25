#include "privmeter/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>
#include <fmt/format.h>

#include "privmeter/errors.hpp"

namespace privmeter {

double mean(std::span<const double> sample) {
    if (sample.empty()) throw DataError("mean of an empty sample");
    return std::accumulate(sample.begin(), sample.end(), 0.0) / static_cast<double>(sample.size());
}

double sample_variance(std::span<const double> sample) {
    if (sample.size() < 2) throw DataError("variance needs at least two values");
    const double m = mean(sample);
    double ss = 0.0;
    for (double v : sample) ss += (v - m) * (v - m);
    return ss / static_cast<double>(sample.size() - 1);
}

double standard_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double student_t_cdf(double x, double df) {
    if (!(df > 0.0)) throw UsageError(fmt::format("Student-t degrees of freedom {} must be positive", df));
    if (std::isinf(df)) return standard_normal_cdf(x);
    if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
    return boost::math::cdf(boost::math::students_t_distribution<double>(df), x);
}

TestResult welch_t_test(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) throw UsageError("Welch's t-test needs at least two values per sample");
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    const double ma = mean(a);
    const double mb = mean(b);
    const double qa = sample_variance(a) / na;
    const double qb = sample_variance(b) / nb;
    const double se2 = qa + qb;

    TestResult r;
    if (se2 == 0.0) {
        if (ma == mb) return r;
        r.statistic = ma > mb ? std::numeric_limits<double>::infinity()
                              : -std::numeric_limits<double>::infinity();
        r.p_value = 0.0;
        return r;
    }
    r.statistic = (ma - mb) / std::sqrt(se2);
    r.degrees_of_freedom = se2 * se2 / (qa * qa / (na - 1) + qb * qb / (nb - 1));
    const boost::math::students_t_distribution<double> dist(r.degrees_of_freedom);
    r.p_value = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.statistic))));
    return r;
}

TestResult rank_sum_test(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw UsageError("rank-sum test needs non-empty samples");
    const std::size_t n1 = a.size();
    const std::size_t n = a.size() + b.size();

    std::vector<std::pair<double, bool>> pooled;
    pooled.reserve(n);
    for (double v : a) pooled.emplace_back(v, true);
    for (double v : b) pooled.emplace_back(v, false);
    std::sort(pooled.begin(), pooled.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });

    double rank_a = 0.0;
    double tie_term = 0.0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && pooled[j].first == pooled[i].first) ++j;
        const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k) {
            if (pooled[k].second) rank_a += midrank;
        }
        const double t = static_cast<double>(j - i);
        tie_term += t * t * t - t;
        i = j;
    }

    const double dn = static_cast<double>(n);
    const double dn1 = static_cast<double>(n1);
    const double dn2 = dn - dn1;
    const double var = dn1 * dn2 / 12.0 * ((dn + 1.0) - tie_term / (dn * (dn - 1.0)));
    TestResult r;
    if (!(var > 0.0)) return r;

    const double d = rank_a - dn1 * (dn + 1.0) / 2.0;
    const double corrected = std::copysign(std::max(std::abs(d) - 0.5, 0.0), d);
    r.statistic = corrected / std::sqrt(var);
    r.p_value = std::min(1.0, std::erfc(std::abs(r.statistic) / std::numbers::sqrt2));
    return r;
}

ConfidenceInterval mean_ci(std::span<const double> sample, double confidence) {
    if (sample.size() < 2) throw DataError("a confidence interval needs at least two values");
    if (!(confidence > 0.0 && confidence < 1.0)) throw UsageError("confidence level must be in (0, 1)");
    ConfidenceInterval ci;
    ci.confidence = confidence;
    ci.mean = mean(sample);
    const double n = static_cast<double>(sample.size());
    const boost::math::students_t_distribution<double> dist(n - 1);
    const double t = boost::math::quantile(boost::math::complement(dist, (1.0 - confidence) / 2.0));
    ci.half_width = t * std::sqrt(sample_variance(sample) / n);
    if (ci.half_width == 0.0) {
        ci.relative_error = 0.0;
    } else if (ci.mean == 0.0) {
        ci.relative_error = std::numeric_limits<double>::infinity();
    } else {
        ci.relative_error = ci.half_width / std::abs(ci.mean);
    }
    return ci;
}

double percentile(std::span<const double> sample, double q) {
    if (sample.empty()) throw DataError("percentile of an empty sample");
    if (!(q >= 0.0 && q <= 100.0)) throw UsageError(fmt::format("percentile {} not in [0, 100]", q));
    std::vector<double> sorted(sample.begin(), sample.end());
    std::sort(sorted.begin(), sorted.end());
    const double idx = q / 100.0 * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(idx));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = idx - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

DensityCurve gaussian_kde(std::span<const double> sample, std::size_t grid_points) {
    if (sample.empty()) throw DataError("density estimate of an empty sample");
    if (grid_points < 2) throw UsageError("density grid needs at least two points");
    DensityCurve curve;
    const auto [lo_it, hi_it] = std::minmax_element(sample.begin(), sample.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    if (sample.size() < 2 || lo == hi) {
        curve.spike = lo;
        return curve;
    }
    const double n = static_cast<double>(sample.size());
    const double h = 1.06 * std::sqrt(sample_variance(sample)) * std::pow(n, -0.2);
    curve.bandwidth = h;
    const double norm = 1.0 / (n * h * std::sqrt(2.0 * std::numbers::pi));
    curve.x.resize(grid_points);
    curve.density.resize(grid_points);
    for (std::size_t g = 0; g < grid_points; ++g) {
        const double x = lo + (hi - lo) * static_cast<double>(g) / static_cast<double>(grid_points - 1);
        double acc = 0.0;
        for (double v : sample) {
            const double z = (x - v) / h;
            acc += std::exp(-0.5 * z * z);
        }
        curve.x[g] = x;
        curve.density[g] = acc * norm;
    }
    return curve;
}

}  // namespace privmeter
