#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "privmeter/adversary.hpp"
#include "privmeter/genome_data.hpp"

namespace privmeter {

enum class MetricId {
    kAdversarysSuccessRate,
    kAmountOfInformationLeaked,
    kAsymmetricEntropy,
    kAsymmetricEntropyPerSnp,
    kCoefficientOfDetermination,
    kConditionalEntropy,
    kConditionalPrivacyLoss,
    kCumulativeEntropy,
    kEntropy,
    kExpectedEstimationError,
    kHealthPrivacy,
    kInformationSurprisal,
    kInherentPrivacy,
    kMaxEntropy,
    kMeanError,
    kMeanSquaredError,
    kMinEntropy,
    kMutualInformation,
    kNormalizedEntropy,
    kNormalizedMutualInformation,
    kPercentageIncorrectlyClassified,
    kRelativeEntropy,
    kUserSpecifiedInnocence,
    kVariationOfInformation,
};

inline constexpr std::size_t kMetricCount = 24;

enum class Direction { kHigherIsPrivate, kLowerIsPrivate };
enum class Granularity { kPerSnp, kPerIndividual };

struct MetricInfo {
    MetricId id;
    std::string_view name;
    Direction direction;
    Granularity granularity;
    bool evaluated;  // false only for max_entropy
};

const std::array<MetricInfo, kMetricCount>& metric_catalogue() noexcept;
const MetricInfo& metric_info(MetricId id) noexcept;
std::string_view to_string(MetricId id) noexcept;
/// Throws UsageError listing the valid names.
MetricId parse_metric(std::string_view name);
std::vector<MetricId> evaluated_metrics();

inline char direction_code(Direction d) noexcept { return d == Direction::kHigherIsPrivate ? 'H' : 'L'; }
inline std::size_t index_of(MetricId id) noexcept { return static_cast<std::size_t>(id); }

/// Per-SNP metrics that may serve as the base of health privacy.
inline constexpr std::array<MetricId, 7> kHealthBases = {
    MetricId::kExpectedEstimationError, MetricId::kNormalizedEntropy,
    MetricId::kNormalizedMutualInformation, MetricId::kRelativeEntropy,
    MetricId::kConditionalEntropy, MetricId::kInformationSurprisal, MetricId::kMinEntropy};

bool is_health_base(MetricId id) noexcept;

enum class Aggregation { kArithmeticMean, kMafWeightedMean };

std::string_view to_string(Aggregation a) noexcept;
Aggregation parse_aggregation(std::string_view text);

struct MetricParams {
    double ali_threshold = 0.7;
    double usi_threshold = 0.3;
    std::map<std::string, double, std::less<>> health_weights;  // empty = default panel
    MetricId health_base = MetricId::kExpectedEstimationError;
    Aggregation aggregation = Aggregation::kArithmeticMean;

    /// Throws UsageError.
    void validate() const;
};

/// Size of the default health panel: the first this-many scenario SNPs, equal weights.
inline constexpr std::size_t kDefaultHealthPanel = 1000;

// ---------------------------------------------------------------------------
// Per-SNP

double entropy(const Probabilities& p) noexcept;
inline double entropy(const EstimateDistribution& est) noexcept { return entropy(est.probabilities()); }

struct EntropyVariants {
    double normalized_entropy;
    double min_entropy;
    double max_entropy;
    double inherent_privacy;
};
EntropyVariants entropy_variants(const Probabilities& p) noexcept;

struct PriorInformation {
    double mutual_information;
    double conditional_entropy;
    double conditional_privacy;
    double conditional_privacy_loss;
    double normalized_mutual_information;
    double variation_of_information;
};
PriorInformation prior_information_family(const Probabilities& est, const Probabilities& prior) noexcept;

double relative_entropy(GenotypeValue truth, const Probabilities& est) noexcept;
double information_surprisal(const Probabilities& est, GenotypeValue truth) noexcept;
double expected_estimation_error(const Probabilities& est, GenotypeValue truth) noexcept;
double asymmetric_entropy_term(const Probabilities& est, double maf, GenotypeValue truth) noexcept;
double point_estimate(const Probabilities& est) noexcept;
/// Index of the largest entry, ties to the smallest genotype value.
std::size_t most_likely(const Probabilities& est) noexcept;

/// Value of a per-SNP metric (entropy family, prior family, RE, IS, EEE, or the
/// asymmetric term). Throws UsageError for per-individual metrics.
double per_snp_metric(MetricId id, const Probabilities& est, GenotypeValue truth, double maf);

// ---------------------------------------------------------------------------
// Per-individual

struct SnpObservation {
    Probabilities estimate{};
    GenotypeValue truth = GenotypeValue::hom_major();
    double maf = 0.0;
    std::string_view rsid;
};

double cumulative_entropy(std::span<const SnpObservation> set);
double asymmetric_entropy(std::span<const SnpObservation> set);

struct ErrorFamily {
    double mean_error;
    double mean_squared_error;
    double percentage_incorrectly_classified;
};
ErrorFamily error_family(std::span<const SnpObservation> set);

double adversarys_success_rate(std::span<const SnpObservation> set);

struct LeakCounts {
    std::size_t amount_leaked;
    std::size_t user_specified_innocence;
};
LeakCounts leak_counts(std::span<const SnpObservation> set, double ali_threshold,
                       double usi_threshold);

double coefficient_of_determination(std::span<const SnpObservation> set);

/// (Σ c·G) / Σ c over the weighted rsids; a weighted rsid missing from the set
/// is a DataError.
double health_privacy(std::span<const SnpObservation> set,
                      const std::map<std::string, double, std::less<>>& weights, MetricId base);

double aggregate_per_individual(std::span<const double> values, Aggregation mode,
                                std::span<const double> mafs = {});

// ---------------------------------------------------------------------------
// Whole-individual evaluation

/// Health weights resolved against a scenario's SNP list.
struct HealthPlan {
    std::vector<std::size_t> snps;  // ascending scenario SNP indices
    std::vector<double> weights;
    std::vector<std::string> rsids;
    /// Explicit weights demand every weighted call; the default panel skips missing ones.
    bool strict = false;
};

HealthPlan resolve_health_plan(const ScenarioDataset& data, const MetricParams& params);

struct IndividualMetrics {
    std::array<double, kMetricCount> values{};
    double conditional_privacy = 0.0;
    double success_probability_mean = 0.0;
    std::array<double, kHealthBases.size()> health_by_base{};
    std::size_t snps = 0;

    [[nodiscard]] double operator[](MetricId id) const { return values[index_of(id)]; }
};

/// `set` holds one individual's present calls and `snp_index` their scenario
/// SNP indices, both ascending.
IndividualMetrics evaluate_individual(std::span<const SnpObservation> set,
                                      std::span<const std::size_t> snp_index,
                                      const MetricParams& params, const HealthPlan& plan);

/// Names of the auxiliary columns written after the 24 metrics.
std::vector<std::string> auxiliary_columns();
std::vector<double> auxiliary_values(const IndividualMetrics& m);

}  // namespace privmeter
