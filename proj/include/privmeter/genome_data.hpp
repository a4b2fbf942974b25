#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "privmeter/errors.hpp"

namespace privmeter {

/// Number of minor alleles carried at a SNP: 0 = AA, 1 = Aa, 2 = aa.
class GenotypeValue {
public:
    /// Throws DataError for anything outside {0, 1, 2}.
    static GenotypeValue from_count(int minor_alleles);

    static constexpr GenotypeValue hom_major() noexcept { return GenotypeValue(0); }
    static constexpr GenotypeValue het() noexcept { return GenotypeValue(1); }
    static constexpr GenotypeValue hom_minor() noexcept { return GenotypeValue(2); }

    [[nodiscard]] constexpr int count() const noexcept { return value_; }

    friend constexpr bool operator==(GenotypeValue, GenotypeValue) noexcept = default;

private:
    constexpr explicit GenotypeValue(std::uint8_t v) noexcept : value_(v) {}
    std::uint8_t value_;
};

/// One line of a raw consumer-genotyping export.
struct SnpRecord {
    std::string rsid;
    std::string chromosome;
    std::uint64_t position = 0;
    /// Two letters from {A,C,G,T}; empty when the call is missing ("--").
    std::optional<std::array<char, 2>> genotype;

    [[nodiscard]] bool missing() const noexcept { return !genotype.has_value(); }
};

struct AlleleFrequencyRecord {
    std::string rsid;
    char major = 'A';
    char minor = 'G';
    double maf = 0.0;  // in [0, 0.5]
};

using FrequencyTable = std::map<std::string, AlleleFrequencyRecord, std::less<>>;

struct GenotypeCall {
    std::string rsid;
    GenotypeValue value = GenotypeValue::hom_major();
};

/// An individual's encoded genotypes, kept sorted by rsid. Missing calls are
/// simply absent.
class Genome {
public:
    Genome() = default;
    /// Sorts the calls; throws DataError on a duplicate rsid.
    Genome(std::string individual_id, std::vector<GenotypeCall> calls);

    [[nodiscard]] const std::string& individual_id() const noexcept { return id_; }
    [[nodiscard]] const std::vector<GenotypeCall>& calls() const noexcept { return calls_; }
    [[nodiscard]] std::size_t size() const noexcept { return calls_.size(); }
    [[nodiscard]] std::optional<GenotypeValue> find(std::string_view rsid) const;
    [[nodiscard]] bool contains(std::string_view rsid) const { return find(rsid).has_value(); }

private:
    std::string id_;
    std::vector<GenotypeCall> calls_;
};

enum class Provenance { kParsed, kSynthetic, kPedigree };

std::string_view to_string(Provenance p) noexcept;
Provenance parse_provenance(std::string_view text);

struct Relationship {
    std::string parent;
    std::string child;
};

struct Cohort {
    std::vector<Genome> genomes;
    FrequencyTable frequency_table;
    Provenance provenance = Provenance::kParsed;
    std::vector<Relationship> relationships;

    /// Checks unique individual ids and that every referenced rsid has a
    /// frequency record. Throws DataError.
    void validate() const;
    [[nodiscard]] const Genome* find(std::string_view individual_id) const;
};

// ---------------------------------------------------------------------------
// Parsing and encoding

/// Tab-separated `rsid chromosome position genotype`, `#` comments. Lines with
/// fewer than four columns or unreadable fields are skipped and reported.
/// Throws DataError if the stream is not valid UTF-8.
ParseResult<std::vector<SnpRecord>> parse_raw_genotypes(std::istream& in);

/// Counts the letters equal to freq.minor. Missing calls encode to nullopt.
std::optional<GenotypeValue> encode_genotype(const SnpRecord& record,
                                             const AlleleFrequencyRecord& freq);

/// CSV with header `rsid,major,minor,maf`. Rows violating the record
/// invariants are rejected with a diagnostic; duplicates keep the last row.
ParseResult<FrequencyTable> load_frequency_table(std::istream& in);

void write_frequency_table(std::ostream& out, const FrequencyTable& table);

// ---------------------------------------------------------------------------
// Synthesis

struct CohortSynthesisOptions {
    std::size_t individuals = 100;
    std::size_t snps = 10000;
    double maf_low = 0.05;
    double maf_high = 0.5;
    std::uint64_t seed = 0;
    /// SNPs with prescribed identity and frequency (maf may be 0 here), added
    /// after the `snps` generated ones.
    std::vector<AlleleFrequencyRecord> fixed_snps;
    /// Probability that any single call is dropped as missing.
    double missing_rate = 0.0;
    /// Number of parent/child pairs appended to the unrelated individuals.
    std::size_t related_pairs = 0;
};

/// Hardy–Weinberg cohort. Deterministic in the options.
Cohort synthesize_cohort(const CohortSynthesisOptions& options);

struct PedigreeSynthesisOptions {
    std::size_t founder_pairs = 3;
    std::size_t generations = 3;
    std::size_t snps = 10000;
    std::size_t children_per_couple = 2;
    double maf_low = 0.05;
    double maf_high = 0.5;
    std::uint64_t seed = 0;
};

/// Multi-generation family. Founders follow Hardy–Weinberg; every child takes
/// one allele uniformly at random from each parent. Within each generation the
/// children are paired across families to form the next generation's couples.
Cohort synthesize_pedigree(const PedigreeSynthesisOptions& options);

/// Draws the minor-allele count of a child given both parents' genotypes.
template <typename Rng>
GenotypeValue mendelian_child(GenotypeValue mother, GenotypeValue father, Rng& rng) {
    auto transmit = [&rng](GenotypeValue parent) {
        // A heterozygous parent passes the minor allele with probability 1/2.
        if (parent.count() == 1) return static_cast<int>(rng() >> 63);
        return parent.count() / 2;
    };
    return GenotypeValue::from_count(transmit(mother) + transmit(father));
}

// ---------------------------------------------------------------------------
// Relatedness

/// Fraction of shared rsids with equal genotype. Throws DataError when the
/// genomes share no rsid.
double pairwise_concordance(const Genome& a, const Genome& b);

struct KinPair {
    std::string first;   // lexicographically smaller id
    std::string second;
    double concordance = 0.0;
};

/// All unordered pairs with concordance above the threshold (identical pairs
/// are reported at threshold 1.0). Sorted lexicographically.
std::vector<KinPair> detect_kin(const Cohort& cohort, double threshold = 0.8);

// ---------------------------------------------------------------------------
// Scenarios

enum class ScenarioName { kComparison, kKin, kUtah, kAlzheimer, kCustom };

std::string_view to_string(ScenarioName name) noexcept;
ScenarioName parse_scenario_name(std::string_view text);

inline constexpr std::array<std::string_view, 3> kAlzheimerRsids = {"rs7412", "rs429358",
                                                                   "rs75932628"};

struct AllSnps {};
struct SnpCount {
    std::size_t count = 0;
};
struct AllIndividuals {};
struct IndividualPairs {
    std::vector<std::pair<std::string, std::string>> pairs;
};
struct PedigreeMembers {};

struct ScenarioSpec {
    ScenarioName name = ScenarioName::kCustom;
    std::variant<AllSnps, std::vector<std::string>, SnpCount> snp_selection;
    std::variant<AllIndividuals, IndividualPairs, PedigreeMembers> individual_selection;
    /// Keep only individuals carrying every selected SNP.
    bool require_complete = false;

    static ScenarioSpec comparison(std::size_t snp_count = 10000);
    static ScenarioSpec kin(std::vector<std::pair<std::string, std::string>> pairs);
    static ScenarioSpec utah();
    static ScenarioSpec alzheimer();
};

/// Individuals × SNPs grid of true genotypes. Row-major, -1 marks a missing call.
struct ScenarioDataset {
    std::string name;
    std::vector<std::string> individuals;
    std::vector<std::string> rsids;
    std::vector<AlleleFrequencyRecord> frequencies;  // aligned with rsids
    std::vector<std::int8_t> truth;

    [[nodiscard]] std::size_t individual_count() const noexcept { return individuals.size(); }
    [[nodiscard]] std::size_t snp_count() const noexcept { return rsids.size(); }
    [[nodiscard]] std::optional<GenotypeValue> truth_at(std::size_t individual,
                                                        std::size_t snp) const;
    [[nodiscard]] std::size_t present_calls() const;
};

/// Deterministic given (cohort, spec, seed). Throws DataError when requested
/// rsids, individuals or counts are not available.
ScenarioDataset select_scenario(const Cohort& cohort, const ScenarioSpec& spec,
                                std::uint64_t seed);

// ---------------------------------------------------------------------------
// Cohort directory: genomes.csv, frequencies.csv, optional relationships.csv
// and provenance.txt.

void write_cohort(const std::filesystem::path& directory, const Cohort& cohort);
Cohort read_cohort(const std::filesystem::path& directory);

}  // namespace privmeter
