#include "privmeter/strength.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "privmeter/parallel.hpp"
#include "text_util.hpp"

namespace privmeter {

namespace {

int sign_of(double v) noexcept { return (v > 0.0) - (v < 0.0); }

void score_one_test(const std::vector<TestResult>& results, PairTest kind, int expected,
                    const StrengthConfig& config, StrengthCell& cell) {
    int previous = 0;
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& r = results[i];
        PairDetail d;
        d.test = kind;
        d.pair = i;
        d.statistic = r.statistic;
        d.sign = sign_of(r.statistic);
        d.p_value = r.p_value;
        if (r.p_value < config.alpha) {
            if (d.sign == expected) {
                d.points = config.points_right;
            } else if (d.sign != 0) {
                d.points = config.points_wrong;
            }
        } else {
            d.points = config.points_insignificant;
        }
        if (d.sign != 0 && previous != 0 && d.sign != previous) {
            d.sign_change = true;
            d.points += config.points_peak;
        }
        previous = d.sign;
        cell.m_raw += d.points;
        cell.pairs.push_back(d);
    }
}

struct CellTests {
    std::size_t row;
    std::size_t column;
    PairTests tests;
};

std::vector<CellTests> collect_cell_tests(const MetricSeries& series, MetricId metric,
                                          const HeatMapLayout& layout) {
    std::vector<CellTests> out;
    for (std::size_t r = 0; r < layout.scenarios.size(); ++r) {
        for (std::size_t c = 0; c < layout.models.size(); ++c) {
            const SeriesKey key{layout.scenarios[r], layout.models[c], metric};
            const auto* levels = series.find(key);
            if (levels == nullptr) {
                throw DataError(fmt::format("no {} values for scenario '{}' under the {} adversary",
                                            to_string(metric), key.scenario, to_string(key.model)));
            }
            const auto want = layout.ladder_sizes.find(key.model);
            if (want != layout.ladder_sizes.end() && levels->size() != want->second) {
                throw DataError(fmt::format(
                    "scenario '{}' under the {} adversary has {} of {} strength levels for {}",
                    key.scenario, to_string(key.model), levels->size(), want->second,
                    to_string(metric)));
            }
            for (std::size_t k = 0; k < levels->size(); ++k) {
                if ((*levels)[k].size() < 2) {
                    throw DataError(fmt::format(
                        "scenario '{}' under the {} adversary, level {}: fewer than two {} values",
                        key.scenario, to_string(key.model), k, to_string(metric)));
                }
            }
            out.push_back({r, c, run_pair_tests(*levels)});
        }
    }
    return out;
}

StrengthHeatMap assemble(MetricId metric, const HeatMapLayout& layout,
                         const std::vector<CellTests>& tests, const StrengthConfig& config) {
    StrengthHeatMap map;
    map.metric = metric;
    map.scenarios = layout.scenarios;
    map.models = layout.models;
    const Direction dir = metric_info(metric).direction;
    for (const auto& t : tests) {
        StrengthCell cell = score_pairs(t.tests, dir, config);
        cell.scenario = layout.scenarios[t.row];
        cell.model = layout.models[t.column];
        map.cells.push_back(std::move(cell));
    }
    map.overall_pct = overall_strength(map.cells);
    return map;
}

nlohmann::json finite_or_null(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return nullptr;
    return v > 0 ? "inf" : "-inf";
}

}  // namespace

void StrengthConfig::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw UsageError(fmt::format("significance level {} not in (0, 1)", alpha));
    for (double v : {points_right, points_wrong, points_insignificant, points_peak}) {
        if (!std::isfinite(v)) throw UsageError("point values must be finite");
    }
}

std::string_view to_string(PairTest t) noexcept { return t == PairTest::kWelch ? "welch" : "rank_sum"; }

PairTests run_pair_tests(std::span<const std::vector<double>> series) {
    if (series.size() < 2) throw UsageError("monotonicity needs at least two strength levels");
    PairTests out;
    for (std::size_t i = 0; i + 1 < series.size(); ++i) {
        out.welch.push_back(welch_t_test(series[i], series[i + 1]));
        out.rank_sum.push_back(rank_sum_test(series[i], series[i + 1]));
    }
    return out;
}

StrengthCell score_pairs(const PairTests& tests, Direction direction, const StrengthConfig& config) {
    if (tests.welch.empty()) throw UsageError("monotonicity needs at least two strength levels");
    const int expected = direction == Direction::kHigherIsPrivate ? 1 : -1;
    StrengthCell cell;
    score_one_test(tests.welch, PairTest::kWelch, expected, config, cell);
    score_one_test(tests.rank_sum, PairTest::kRankSum, expected, config, cell);
    const double max_score = 2.0 * static_cast<double>(tests.levels() - 1);
    cell.m_normalized = std::clamp(cell.m_raw / max_score, -1.0, 1.0);
    return cell;
}

StrengthCell monotonicity_score(std::span<const std::vector<double>> series, Direction direction,
                                const StrengthConfig& config) {
    config.validate();
    return score_pairs(run_pair_tests(series), direction, config);
}

// ---------------------------------------------------------------------------

void MetricSeries::add(const SeriesKey& key, std::size_t level, double value) {
    auto& levels = data_[key];
    if (levels.size() <= level) levels.resize(level + 1);
    levels[level].push_back(value);
}

void MetricSeries::set_level(const SeriesKey& key, std::size_t level, std::vector<double> values) {
    auto& levels = data_[key];
    if (levels.size() <= level) levels.resize(level + 1);
    levels[level] = std::move(values);
}

const std::vector<std::vector<double>>* MetricSeries::find(const SeriesKey& key) const {
    const auto it = data_.find(key);
    return it == data_.end() ? nullptr : &it->second;
}

std::map<AdversaryModel, std::size_t> HeatMapLayout::default_ladder_sizes() {
    std::map<AdversaryModel, std::size_t> sizes;
    for (auto m : kAllModels) sizes[m] = default_ladder(m).size();
    return sizes;
}

double overall_strength(std::span<const StrengthCell> cells) {
    if (cells.empty()) throw DataError("a heat map needs at least one cell");
    double sum = 0.0;
    for (const auto& c : cells) sum += (c.m_normalized + 1.0) / 2.0 * 100.0;
    return sum / static_cast<double>(cells.size());
}

StrengthHeatMap evaluate_strength(const MetricSeries& series, MetricId metric,
                                  const StrengthConfig& config, const HeatMapLayout& layout) {
    config.validate();
    return assemble(metric, layout, collect_cell_tests(series, metric, layout), config);
}

std::vector<StrengthHeatMap> evaluate_all_strength(const MetricSeries& series,
                                                   const StrengthConfig& config,
                                                   const HeatMapLayout& layout, std::size_t threads) {
    config.validate();
    const auto metrics = evaluated_metrics();
    std::vector<StrengthHeatMap> maps(metrics.size());
    parallel_for(metrics.size(), threads, [&](std::size_t i) {
        maps[i] = evaluate_strength(series, metrics[i], config, layout);
    });
    return maps;
}

std::string heatmap_json(std::span<const StrengthHeatMap> maps) {
    nlohmann::ordered_json doc = nlohmann::ordered_json::array();
    for (const auto& map : maps) {
        nlohmann::ordered_json m;
        m["metric"] = to_string(map.metric);
        m["direction"] = std::string(1, direction_code(metric_info(map.metric).direction));
        m["overall_pct"] = map.overall_pct;
        m["scenarios"] = map.scenarios;
        nlohmann::ordered_json models = nlohmann::ordered_json::array();
        for (auto model : map.models) models.push_back(to_string(model));
        m["models"] = models;
        nlohmann::ordered_json cells = nlohmann::ordered_json::array();
        for (const auto& cell : map.cells) {
            nlohmann::ordered_json c;
            c["scenario"] = cell.scenario;
            c["model"] = to_string(cell.model);
            c["m"] = cell.m_normalized;
            c["m_raw"] = cell.m_raw;
            nlohmann::ordered_json pairs = nlohmann::ordered_json::array();
            for (const auto& p : cell.pairs) {
                pairs.push_back({{"test", to_string(p.test)},
                                 {"pair", p.pair},
                                 {"statistic", finite_or_null(p.statistic)},
                                 {"sign", p.sign},
                                 {"p_value", p.p_value},
                                 {"points", p.points},
                                 {"sign_change", p.sign_change}});
            }
            c["pairs"] = pairs;
            cells.push_back(c);
        }
        m["cells"] = cells;
        doc.push_back(m);
    }
    return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------------------

SweepReport sensitivity_sweep(const MetricSeries& series, const SweepGrid& grid,
                              const StrengthConfig& base, const HeatMapLayout& layout,
                              std::size_t threads) {
    base.validate();
    SweepReport report;
    report.metrics = evaluated_metrics();
    const std::size_t nm = report.metrics.size();

    std::vector<std::vector<CellTests>> tests(nm);
    parallel_for(nm, threads, [&](std::size_t i) {
        tests[i] = collect_cell_tests(series, report.metrics[i], layout);
    });

    std::vector<double> defaults(nm);
    for (std::size_t i = 0; i < nm; ++i) {
        defaults[i] = assemble(report.metrics[i], layout, tests[i], base).overall_pct;
    }

    for (double right : grid.right) {
        for (double wrong : grid.wrong) {
            for (double insignificant : grid.insignificant) {
                for (double peak : grid.peak) {
                    SweepRow row;
                    row.config = base;
                    row.config.points_right = right;
                    row.config.points_wrong = wrong;
                    row.config.points_insignificant = insignificant;
                    row.config.points_peak = peak;
                    row.config.validate();
                    for (std::size_t i = 0; i < nm; ++i) {
                        row.overall_pct.push_back(
                            assemble(report.metrics[i], layout, tests[i], row.config).overall_pct);
                    }
                    report.rows.push_back(std::move(row));
                }
            }
        }
    }

    for (std::size_t i = 0; i < nm; ++i) {
        SweepSummary s{report.metrics[i], defaults[i], 0.0, 0.0, 0.0};
        std::size_t within = 0;
        for (const auto& row : report.rows) {
            const double v = row.overall_pct[i];
            s.mean_pct += v;
            s.max_abs_deviation = std::max(s.max_abs_deviation, std::abs(v - defaults[i]));
            if (std::abs(v - defaults[i]) <= report.tolerance) ++within;
        }
        if (!report.rows.empty()) {
            s.mean_pct /= static_cast<double>(report.rows.size());
            s.fraction_within = static_cast<double>(within) / static_cast<double>(report.rows.size());
        }
        report.summary.push_back(s);
    }
    return report;
}

std::string sweep_csv(const SweepReport& report) {
    std::string out = "points_right,points_wrong,points_insignificant,points_peak";
    for (auto m : report.metrics) out += fmt::format(",{}", to_string(m));
    out += '\n';
    for (const auto& row : report.rows) {
        out += fmt::format("{},{},{},{}", detail::format_real(row.config.points_right),
                           detail::format_real(row.config.points_wrong),
                           detail::format_real(row.config.points_insignificant),
                           detail::format_real(row.config.points_peak));
        for (double v : row.overall_pct) out += ',' + detail::format_real(v);
        out += '\n';
    }
    return out;
}

std::string sweep_summary_csv(const SweepReport& report) {
    std::string out = "metric,default_pct,mean_pct,max_abs_deviation,fraction_within_6\n";
    for (const auto& s : report.summary) {
        out += fmt::format("{},{},{},{},{}\n", to_string(s.metric), detail::format_real(s.default_pct),
                           detail::format_real(s.mean_pct), detail::format_real(s.max_abs_deviation),
                           detail::format_real(s.fraction_within));
    }
    return out;
}

}  // namespace privmeter
