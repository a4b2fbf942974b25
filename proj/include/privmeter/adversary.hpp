#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "privmeter/genome_data.hpp"
#include "privmeter/rng.hpp"

namespace privmeter {

/// Probability floor applied to every adversary estimate before any logarithm.
inline constexpr double kProbabilityFloor = 1e-9;

/// Raw probability triple over genotype values {0, 1, 2}.
using Probabilities = std::array<double, 3>;

/// An adversary's belief about one SNP. Always on the simplex with every entry
/// at least kProbabilityFloor.
class EstimateDistribution {
public:
    EstimateDistribution() : p_{1.0 / 3, 1.0 / 3, 1.0 / 3} {}

    /// Lifts entries below the floor to the floor, takes the added mass from the
    /// largest entry and renormalizes. Throws DataError for negative,
    /// non-finite or all-zero input.
    static EstimateDistribution from_raw(const Probabilities& raw);

    [[nodiscard]] double operator[](std::size_t k) const { return p_[k]; }
    [[nodiscard]] double of(GenotypeValue v) const { return p_[static_cast<std::size_t>(v.count())]; }
    [[nodiscard]] const Probabilities& probabilities() const noexcept { return p_; }

    friend bool operator==(const EstimateDistribution&, const EstimateDistribution&) = default;

private:
    explicit EstimateDistribution(const Probabilities& p) : p_(p) {}
    Probabilities p_;
};

enum class AdversaryModel { kUniform, kNormal, kReference };

inline constexpr std::array<AdversaryModel, 3> kAllModels = {
    AdversaryModel::kUniform, AdversaryModel::kNormal, AdversaryModel::kReference};

std::string_view to_string(AdversaryModel model) noexcept;
AdversaryModel parse_adversary_model(std::string_view text);

/// One strength level of an adversary family. Only the parameter relevant to
/// the family is stored; the other is fixed by the family.
class AdversaryLevel {
public:
    static constexpr double kNormalSigma = 0.1;
    static constexpr double kUniformMu = 0.99;

    static AdversaryLevel normal(double mu);
    static AdversaryLevel uniform(double sigma);
    static AdversaryLevel reference(double portion);

    [[nodiscard]] AdversaryModel model() const noexcept { return model_; }
    [[nodiscard]] double parameter() const noexcept { return parameter_; }
    /// Mean of the probability assigned to the truth (normal and uniform families).
    [[nodiscard]] double mu() const noexcept;
    /// Spread of that probability (normal and uniform families).
    [[nodiscard]] double sigma() const noexcept;
    /// Signed portion of certain (+) or uncertain (-) SNPs (reference family).
    [[nodiscard]] double portion() const noexcept;

    friend bool operator==(const AdversaryLevel&, const AdversaryLevel&) = default;

private:
    AdversaryLevel(AdversaryModel m, double p) : model_(m), parameter_(p) {}
    AdversaryModel model_;
    double parameter_;
};

/// Strength ladder of a family, ordered weakest to strongest.
std::vector<AdversaryLevel> default_ladder(AdversaryModel model);

/// Hardy–Weinberg genotype probabilities ((1-q)^2, 2q(1-q), q^2), floored.
EstimateDistribution reference_estimate(double maf);
inline EstimateDistribution reference_estimate(const AlleleFrequencyRecord& freq) {
    return reference_estimate(freq.maf);
}

/// Normal(mu, sigma) conditioned on [0, 1], drawn by inverse CDF with a single
/// uniform variate.
double sample_truncated_normal(double mu, double sigma, RngStream& rng);

/// Precomputed truncation bounds for repeated draws with the same (mu, sigma).
class TruncatedNormal {
public:
    TruncatedNormal(double mu, double sigma);
    double operator()(RngStream& rng) const;

private:
    double mu_;
    double sigma_;
    double cdf_low_;
    double cdf_high_;
    bool reflected_;
};

/// Puts `p_truth` on the true value and splits the rest between the two wrong
/// values as (u, 1-u), wrong values in increasing genotype order.
EstimateDistribution split_residual(GenotypeValue truth, double p_truth, double u);

EstimateDistribution normal_estimate(GenotypeValue truth, double mu, RngStream& rng);
EstimateDistribution uniform_estimate(GenotypeValue truth, double sigma, RngStream& rng);

/// Reference belief, except for member SNPs: certain of the truth when the
/// portion is positive, certain it is wrong when negative (the remaining mass
/// follows the Hardy–Weinberg weights of the two wrong values).
EstimateDistribution reference_perturbed(GenotypeValue truth, const AlleleFrequencyRecord& freq,
                                         double portion, bool member);

/// Marks ceil(|portion| * n) of n positions, sampled without replacement.
std::vector<bool> draw_membership(std::size_t n, double portion, RngStream& rng);

/// Estimates for the present calls of one individual in one replication,
/// in SNP order. Streams are keyed by (master seed, level, individual id,
/// rsid, replication), so the result does not depend on scheduling.
struct IndividualEstimates {
    std::vector<std::size_t> snp_index;
    std::vector<EstimateDistribution> estimates;
};

IndividualEstimates estimate_individual(const ScenarioDataset& data, const AdversaryLevel& level,
                                        std::size_t individual, std::size_t replication,
                                        std::uint64_t master_seed);

/// Materialized estimates for every present (individual, rsid) cell and every
/// replication.
class EstimateSet {
public:
    EstimateSet(const ScenarioDataset& data, AdversaryLevel level, std::size_t replications);

    [[nodiscard]] const AdversaryLevel& level() const noexcept { return level_; }
    [[nodiscard]] std::size_t replications() const noexcept { return replications_; }
    [[nodiscard]] std::size_t individuals() const noexcept { return individuals_; }
    [[nodiscard]] std::size_t snps() const noexcept { return snps_; }
    /// Number of stored distributions (present cells × replications).
    [[nodiscard]] std::size_t size() const;

    /// nullptr for a missing call.
    [[nodiscard]] const EstimateDistribution* find(std::size_t individual, std::size_t snp,
                                                   std::size_t replication) const;
    void set(std::size_t individual, std::size_t snp, std::size_t replication,
             const EstimateDistribution& est);

private:
    [[nodiscard]] std::size_t offset(std::size_t individual, std::size_t snp,
                                     std::size_t replication) const;

    AdversaryLevel level_;
    std::size_t replications_;
    std::size_t individuals_;
    std::size_t snps_;
    std::vector<EstimateDistribution> cells_;
    std::vector<bool> present_;
};

/// Throws UsageError for zero replications and DataError if a SNP lacks a
/// usable frequency record.
EstimateSet build_estimate_set(const ScenarioDataset& data, const AdversaryLevel& level,
                               std::size_t replications, std::uint64_t master_seed,
                               std::size_t threads = 0);

/// CSV `individual,rsid,replication,p0,p1,p2`, 12 significant digits.
void write_estimates_csv(std::ostream& out, const ScenarioDataset& data, const EstimateSet& set,
                         std::span<const std::size_t> replications = {});

struct EstimateRow {
    std::string individual;
    std::string rsid;
    std::size_t replication = 0;
    EstimateDistribution estimate;
};
std::vector<EstimateRow> read_estimates_csv(std::istream& in);

}  // namespace privmeter
