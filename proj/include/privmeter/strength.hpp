#pragma once

#include <array>
#include <compare>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "privmeter/adversary.hpp"
#include "privmeter/metrics.hpp"
#include "privmeter/stats.hpp"

namespace privmeter {

struct StrengthConfig {
    double points_right = 1.0;
    double points_wrong = -1.0;
    double points_insignificant = -0.2;
    double points_peak = -2.0;
    double alpha = 0.05;

    void validate() const;
};

enum class PairTest { kWelch, kRankSum };
std::string_view to_string(PairTest t) noexcept;

struct PairDetail {
    PairTest test = PairTest::kWelch;
    std::size_t pair = 0;  // compares level `pair` (weaker) with `pair + 1`
    double statistic = 0.0;
    int sign = 0;
    double p_value = 1.0;
    double points = 0.0;  // including any peak penalty
    bool sign_change = false;
};

struct StrengthCell {
    std::string scenario;
    AdversaryModel model = AdversaryModel::kNormal;
    double m_raw = 0.0;
    double m_normalized = 0.0;
    std::vector<PairDetail> pairs;
};

/// Test outcomes for the successive pairs of one series. Scoring is separate
/// so a cell can be rescored under many configurations.
struct PairTests {
    std::vector<TestResult> welch;
    std::vector<TestResult> rank_sum;

    [[nodiscard]] std::size_t levels() const noexcept { return welch.size() + 1; }
};

/// `series` holds one sample per level, weakest first.
PairTests run_pair_tests(std::span<const std::vector<double>> series);

StrengthCell score_pairs(const PairTests& tests, Direction direction, const StrengthConfig& config);

StrengthCell monotonicity_score(std::span<const std::vector<double>> series, Direction direction,
                                const StrengthConfig& config = {});

// ---------------------------------------------------------------------------

struct SeriesKey {
    std::string scenario;
    AdversaryModel model;
    MetricId metric;

    friend auto operator<=>(const SeriesKey&, const SeriesKey&) = default;
};

/// Metric samples grouped by (scenario, model, metric) and strength level.
class MetricSeries {
public:
    void add(const SeriesKey& key, std::size_t level, double value);
    void set_level(const SeriesKey& key, std::size_t level, std::vector<double> values);

    /// nullptr when the combination is absent.
    [[nodiscard]] const std::vector<std::vector<double>>* find(const SeriesKey& key) const;
    [[nodiscard]] const std::map<SeriesKey, std::vector<std::vector<double>>>& entries() const noexcept {
        return data_;
    }

private:
    std::map<SeriesKey, std::vector<std::vector<double>>> data_;
};

struct HeatMapLayout {
    std::vector<std::string> scenarios = {"utah", "kin", "comparison", "alzheimer"};
    std::vector<AdversaryModel> models = {AdversaryModel::kUniform, AdversaryModel::kNormal,
                                          AdversaryModel::kReference};
    /// Levels every series of a model must have; defaults to the standard ladders.
    std::map<AdversaryModel, std::size_t> ladder_sizes = default_ladder_sizes();

    static std::map<AdversaryModel, std::size_t> default_ladder_sizes();
};

struct StrengthHeatMap {
    MetricId metric = MetricId::kEntropy;
    std::vector<std::string> scenarios;
    std::vector<AdversaryModel> models;
    std::vector<StrengthCell> cells;  // row-major, rows = scenarios
    double overall_pct = 0.0;

    [[nodiscard]] const StrengthCell& at(std::size_t row, std::size_t column) const {
        return cells.at(row * models.size() + column);
    }
};

/// Mean of (m + 1) / 2 * 100 over the cells.
double overall_strength(std::span<const StrengthCell> cells);

/// Throws DataError naming the first missing (scenario, model) or short ladder.
StrengthHeatMap evaluate_strength(const MetricSeries& series, MetricId metric,
                                  const StrengthConfig& config = {},
                                  const HeatMapLayout& layout = {});

/// One heat map per evaluated metric, in catalogue order.
std::vector<StrengthHeatMap> evaluate_all_strength(const MetricSeries& series,
                                                   const StrengthConfig& config = {},
                                                   const HeatMapLayout& layout = {},
                                                   std::size_t threads = 0);

std::string heatmap_json(std::span<const StrengthHeatMap> maps);

// ---------------------------------------------------------------------------
// Point-value sensitivity

struct SweepGrid {
    std::vector<double> right = {0.5, 0.75, 1.0, 1.25, 1.5};
    std::vector<double> wrong = {-1.5, -1.25, -1.0, -0.75, -0.5};
    std::vector<double> insignificant = {-0.4, -0.3, -0.2, -0.1, 0.0};
    std::vector<double> peak = {-3.0, -2.5, -2.0, -1.5, -1.0};
};

struct SweepRow {
    StrengthConfig config;
    std::vector<double> overall_pct;  // aligned with SweepReport::metrics
};

struct SweepSummary {
    MetricId metric;
    double default_pct;
    double mean_pct;
    double max_abs_deviation;
    double fraction_within;  // share of grid points within `tolerance` points of default_pct
};

struct SweepReport {
    std::vector<MetricId> metrics;
    std::vector<SweepRow> rows;
    std::vector<SweepSummary> summary;
    double tolerance = 6.0;
};

SweepReport sensitivity_sweep(const MetricSeries& series, const SweepGrid& grid = {},
                              const StrengthConfig& base = {}, const HeatMapLayout& layout = {},
                              std::size_t threads = 0);

std::string sweep_csv(const SweepReport& report);
std::string sweep_summary_csv(const SweepReport& report);

}  // namespace privmeter
