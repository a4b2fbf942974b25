#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "privmeter/adversary.hpp"
#include "privmeter/metrics.hpp"
#include "privmeter/strength.hpp"

namespace privmeter {

struct LadderOptions {
    std::size_t replications = 15;
    std::uint64_t seed = 0;
    std::size_t threads = 0;
    MetricParams params;
};

/// Per-individual metrics for every (level, replication, individual) of one
/// adversary ladder on one scenario.
struct LadderResult {
    std::string scenario;
    AdversaryModel model = AdversaryModel::kNormal;
    std::vector<AdversaryLevel> levels;
    std::size_t replications = 0;
    std::vector<std::string> individuals;
    std::vector<IndividualMetrics> cells;

    [[nodiscard]] const IndividualMetrics& at(std::size_t level, std::size_t replication,
                                              std::size_t individual) const {
        return cells.at((level * replications + replication) * individuals.size() + individual);
    }
    /// All individuals and replications of one level, replication-major.
    [[nodiscard]] std::vector<double> pooled(std::size_t level, MetricId metric) const;
    /// Mean over individuals, one value per replication.
    [[nodiscard]] std::vector<double> replication_means(std::size_t level, MetricId metric) const;
};

/// Generates estimates and evaluates metrics without materializing the
/// estimates. Output is independent of the thread count.
LadderResult evaluate_ladder(const ScenarioDataset& data, std::span<const AdversaryLevel> ladder,
                             const LadderOptions& options);

void add_to_series(MetricSeries& series, const LadderResult& result);

struct PrecisionRow {
    std::size_t level = 0;
    MetricId metric = MetricId::kEntropy;
    ConfidenceInterval ci;
    bool exceeds = false;
};

/// CI of the replication means for every level and metric; `exceeds` marks a
/// relative error at or above `limit`.
std::vector<PrecisionRow> precision_report(const LadderResult& result, double limit = 0.05);
void write_precision_csv(std::ostream& out, const LadderResult& result,
                         std::span<const PrecisionRow> rows);

/// Long format `scenario,adversary_model,strength_index,replication,individual,metric,value`,
/// the 24 metrics followed by the auxiliary columns.
void write_metrics_csv(std::ostream& out, const LadderResult& result);

/// Long format with an `rsid` column, for the per-SNP metrics. Regenerates the
/// estimates; intended for small scenarios.
void write_per_snp_csv(std::ostream& out, const ScenarioDataset& data,
                       std::span<const AdversaryLevel> ladder, const LadderOptions& options);

struct MetricRow {
    std::string scenario;
    AdversaryModel model = AdversaryModel::kNormal;
    std::size_t level = 0;
    std::size_t replication = 0;
    std::string individual;
    std::string metric;
    double value = 0.0;
};

std::vector<MetricRow> read_metrics_csv(std::istream& in);

/// Adds the rows of evaluated metrics; auxiliary and excluded columns are skipped.
void add_to_series(MetricSeries& series, std::span<const MetricRow> rows);

/// FNV-1a digest of a file's bytes as 16 hex digits.
std::string file_digest(const std::filesystem::path& path);

std::string tool_version();

}  // namespace privmeter
