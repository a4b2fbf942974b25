#include "privmeter/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

namespace privmeter {

namespace {

constexpr double kLog2Of3 = 1.5849625007211562;

using enum MetricId;
constexpr auto H = Direction::kHigherIsPrivate;
constexpr auto L = Direction::kLowerIsPrivate;
constexpr auto SNP = Granularity::kPerSnp;
constexpr auto IND = Granularity::kPerIndividual;

constexpr std::array<MetricInfo, kMetricCount> kCatalogue = {{
    {kAdversarysSuccessRate, "adversarys_success_rate", L, IND, true},
    {kAmountOfInformationLeaked, "amount_of_information_leaked", L, IND, true},
    {kAsymmetricEntropy, "asymmetric_entropy", H, IND, true},
    {kAsymmetricEntropyPerSnp, "asymmetric_entropy_per_snp", H, SNP, true},
    {kCoefficientOfDetermination, "coefficient_of_determination", L, IND, true},
    {kConditionalEntropy, "conditional_entropy", H, SNP, true},
    {kConditionalPrivacyLoss, "conditional_privacy_loss", L, SNP, true},
    {kCumulativeEntropy, "cumulative_entropy", H, IND, true},
    {kEntropy, "entropy", H, SNP, true},
    {kExpectedEstimationError, "expected_estimation_error", H, SNP, true},
    {kHealthPrivacy, "health_privacy", H, IND, true},
    {kInformationSurprisal, "information_surprisal", H, SNP, true},
    {kInherentPrivacy, "inherent_privacy", H, SNP, true},
    {kMaxEntropy, "max_entropy", H, IND, false},
    {kMeanError, "mean_error", H, IND, true},
    {kMeanSquaredError, "mean_squared_error", H, IND, true},
    {kMinEntropy, "min_entropy", H, SNP, true},
    {kMutualInformation, "mutual_information", L, SNP, true},
    {kNormalizedEntropy, "normalized_entropy", H, SNP, true},
    {kNormalizedMutualInformation, "normalized_mutual_information", H, SNP, true},
    {kPercentageIncorrectlyClassified, "percentage_incorrectly_classified", H, IND, true},
    {kRelativeEntropy, "relative_entropy", H, SNP, true},
    {kUserSpecifiedInnocence, "user_specified_innocence", H, IND, true},
    {kVariationOfInformation, "variation_of_information", L, SNP, true},
}};

static_assert([] {
    for (std::size_t i = 0; i < kCatalogue.size(); ++i) {
        if (static_cast<std::size_t>(kCatalogue[i].id) != i) return false;
    }
    return true;
}());

double plogp(double p) noexcept { return p > 0.0 ? p * std::log2(p) : 0.0; }

Probabilities hw_weights(double maf) noexcept {
    return {(1 - maf) * (1 - maf), 2 * maf * (1 - maf), maf * maf};
}

void require_nonempty(std::span<const SnpObservation> set, std::string_view what) {
    if (set.empty()) throw DataError(fmt::format("{} needs at least one SNP", what));
}

std::size_t health_slot(MetricId base) {
    for (std::size_t k = 0; k < kHealthBases.size(); ++k) {
        if (kHealthBases[k] == base) return k;
    }
    throw UsageError(fmt::format("'{}' cannot serve as a health privacy base", to_string(base)));
}

}  // namespace

const std::array<MetricInfo, kMetricCount>& metric_catalogue() noexcept { return kCatalogue; }

const MetricInfo& metric_info(MetricId id) noexcept { return kCatalogue[index_of(id)]; }

std::string_view to_string(MetricId id) noexcept { return metric_info(id).name; }

MetricId parse_metric(std::string_view name) {
    for (const auto& m : kCatalogue) {
        if (m.name == name) return m.id;
    }
    std::string valid;
    for (const auto& m : kCatalogue) {
        if (!valid.empty()) valid += ", ";
        valid += m.name;
    }
    throw UsageError(fmt::format("unknown metric '{}'; valid metrics: {}", name, valid));
}

std::vector<MetricId> evaluated_metrics() {
    std::vector<MetricId> out;
    for (const auto& m : kCatalogue) {
        if (m.evaluated) out.push_back(m.id);
    }
    return out;
}

bool is_health_base(MetricId id) noexcept {
    return std::find(kHealthBases.begin(), kHealthBases.end(), id) != kHealthBases.end();
}

std::string_view to_string(Aggregation a) noexcept {
    return a == Aggregation::kArithmeticMean ? "arithmetic" : "maf_weighted";
}

Aggregation parse_aggregation(std::string_view text) {
    if (text == "arithmetic" || text == "arithmetic_mean") return Aggregation::kArithmeticMean;
    if (text == "maf_weighted" || text == "maf_weighted_mean") return Aggregation::kMafWeightedMean;
    throw UsageError(fmt::format("unknown aggregation '{}' (expected arithmetic or maf_weighted)", text));
}

void MetricParams::validate() const {
    if (!(ali_threshold > 0.0 && ali_threshold <= 1.0)) {
        throw UsageError(fmt::format("ALI threshold {} not in (0, 1]", ali_threshold));
    }
    if (!(usi_threshold >= 0.0 && usi_threshold < 1.0)) {
        throw UsageError(fmt::format("USI threshold {} not in [0, 1)", usi_threshold));
    }
    if (!is_health_base(health_base)) health_slot(health_base);
    bool positive = health_weights.empty();
    for (const auto& [rsid, c] : health_weights) {
        if (!(c >= 0.0) || !std::isfinite(c)) {
            throw UsageError(fmt::format("health weight for {} must be non-negative", rsid));
        }
        positive = positive || c > 0.0;
    }
    if (!positive) throw UsageError("health weights need at least one positive entry");
}

// ---------------------------------------------------------------------------

double entropy(const Probabilities& p) noexcept { return -(plogp(p[0]) + plogp(p[1]) + plogp(p[2])); }

EntropyVariants entropy_variants(const Probabilities& p) noexcept {
    const double h = entropy(p);
    const double top = std::max({p[0], p[1], p[2]});
    return {h / kLog2Of3, -std::log2(top), kLog2Of3, std::exp2(h)};
}

PriorInformation prior_information_family(const Probabilities& est, const Probabilities& prior) noexcept {
    const double h_est = entropy(est);
    const double h_prior = entropy(prior);
    const double info = h_prior - h_est;
    // Written as H(prior) - I so the identity with the mutual information is exact.
    const double coe = h_prior - info;
    return {info,
            coe,
            std::exp2(coe),
            1.0 - std::exp2(-info),
            1.0 - info / kLog2Of3,
            h_prior + coe - 2.0 * info};
}

double relative_entropy(GenotypeValue truth, const Probabilities& est) noexcept {
    // Only the true value carries mass in the one-hot distribution.
    const double q = est[static_cast<std::size_t>(truth.count())];
    return -std::log2(q);
}

double information_surprisal(const Probabilities& est, GenotypeValue truth) noexcept {
    return -std::log2(est[static_cast<std::size_t>(truth.count())]);
}

double expected_estimation_error(const Probabilities& est, GenotypeValue truth) noexcept {
    double e = 0.0;
    for (int k = 0; k < 3; ++k) e += est[static_cast<std::size_t>(k)] * std::abs(k - truth.count());
    return e;
}

double asymmetric_entropy_term(const Probabilities& est, double maf, GenotypeValue truth) noexcept {
    const auto t = static_cast<std::size_t>(truth.count());
    const double p = est[t];
    const double w = hw_weights(maf)[t];
    double denom = (1.0 - 2.0 * w) * p + w * w;
    if (std::abs(denom) < 1e-12) denom = std::signbit(denom) ? -1e-12 : 1e-12;
    return p * (1.0 - p) / denom;
}

double point_estimate(const Probabilities& est) noexcept { return est[1] + 2.0 * est[2]; }

std::size_t most_likely(const Probabilities& est) noexcept {
    std::size_t best = 0;
    if (est[1] > est[best]) best = 1;
    if (est[2] > est[best]) best = 2;
    return best;
}

double per_snp_metric(MetricId id, const Probabilities& est, GenotypeValue truth, double maf) {
    switch (id) {
        case kEntropy: return entropy(est);
        case kNormalizedEntropy: return entropy_variants(est).normalized_entropy;
        case kMinEntropy: return entropy_variants(est).min_entropy;
        case kInherentPrivacy: return entropy_variants(est).inherent_privacy;
        case kMutualInformation:
        case kConditionalEntropy:
        case kConditionalPrivacyLoss:
        case kNormalizedMutualInformation:
        case kVariationOfInformation: {
            const auto f = prior_information_family(est, reference_estimate(maf).probabilities());
            if (id == kMutualInformation) return f.mutual_information;
            if (id == kConditionalEntropy) return f.conditional_entropy;
            if (id == kConditionalPrivacyLoss) return f.conditional_privacy_loss;
            if (id == kNormalizedMutualInformation) return f.normalized_mutual_information;
            return f.variation_of_information;
        }
        case kRelativeEntropy: return relative_entropy(truth, est);
        case kInformationSurprisal: return information_surprisal(est, truth);
        case kExpectedEstimationError: return expected_estimation_error(est, truth);
        case kAsymmetricEntropyPerSnp: return asymmetric_entropy_term(est, maf, truth);
        default:
            throw UsageError(fmt::format("'{}' is not a per-SNP metric", to_string(id)));
    }
}

// ---------------------------------------------------------------------------

double cumulative_entropy(std::span<const SnpObservation> set) {
    require_nonempty(set, "cumulative entropy");
    double sum = 0.0;
    for (const auto& o : set) sum += entropy(o.estimate);
    return sum;
}

double asymmetric_entropy(std::span<const SnpObservation> set) {
    require_nonempty(set, "asymmetric entropy");
    double sum = 0.0;
    for (const auto& o : set) sum += asymmetric_entropy_term(o.estimate, o.maf, o.truth);
    return sum;
}

ErrorFamily error_family(std::span<const SnpObservation> set) {
    require_nonempty(set, "error metrics");
    double abs_sum = 0.0;
    double sq_sum = 0.0;
    std::size_t wrong = 0;
    for (const auto& o : set) {
        const double d = point_estimate(o.estimate) - o.truth.count();
        abs_sum += std::abs(d);
        sq_sum += d * d;
        if (most_likely(o.estimate) != static_cast<std::size_t>(o.truth.count())) ++wrong;
    }
    const auto n = static_cast<double>(set.size());
    return {abs_sum / n, sq_sum / n, static_cast<double>(wrong) / n};
}

double adversarys_success_rate(std::span<const SnpObservation> set) {
    // Derived from the misclassification fraction so that ASR + PIC is exactly 1.
    return 1.0 - error_family(set).percentage_incorrectly_classified;
}

LeakCounts leak_counts(std::span<const SnpObservation> set, double ali_threshold,
                       double usi_threshold) {
    if (!(ali_threshold > 0.0 && ali_threshold <= 1.0)) {
        throw UsageError(fmt::format("ALI threshold {} not in (0, 1]", ali_threshold));
    }
    if (!(usi_threshold >= 0.0 && usi_threshold < 1.0)) {
        throw UsageError(fmt::format("USI threshold {} not in [0, 1)", usi_threshold));
    }
    LeakCounts c{0, 0};
    for (const auto& o : set) {
        const double p = o.estimate[static_cast<std::size_t>(o.truth.count())];
        if (p > ali_threshold) ++c.amount_leaked;
        if (p <= usi_threshold) ++c.user_specified_innocence;
    }
    return c;
}

double coefficient_of_determination(std::span<const SnpObservation> set) {
    if (set.size() < 2) throw DataError("coefficient of determination needs at least two SNPs");
    double mean_truth = 0.0;
    for (const auto& o : set) mean_truth += o.truth.count();
    mean_truth /= static_cast<double>(set.size());
    double sse = 0.0;
    double ssr = 0.0;
    for (const auto& o : set) {
        const double x = point_estimate(o.estimate);
        sse += (o.truth.count() - x) * (o.truth.count() - x);
        ssr += (x - mean_truth) * (x - mean_truth);
    }
    if (ssr + sse < 1e-12) return 1.0;
    return 1.0 - sse / (ssr + sse);
}

double health_privacy(std::span<const SnpObservation> set,
                      const std::map<std::string, double, std::less<>>& weights, MetricId base) {
    health_slot(base);
    double num = 0.0;
    double den = 0.0;
    for (const auto& [rsid, c] : weights) {
        const auto it = std::find_if(set.begin(), set.end(),
                                     [&](const SnpObservation& o) { return o.rsid == rsid; });
        if (it == set.end()) {
            throw DataError(fmt::format("health weight refers to {}, which has no call", rsid));
        }
        num += c * per_snp_metric(base, it->estimate, it->truth, it->maf);
        den += c;
    }
    if (!(den > 0.0)) throw UsageError("health weights need at least one positive entry");
    return num / den;
}

double aggregate_per_individual(std::span<const double> values, Aggregation mode,
                                std::span<const double> mafs) {
    if (values.empty()) throw DataError("cannot aggregate an empty set of SNP values");
    if (mode == Aggregation::kArithmeticMean) {
        double sum = 0.0;
        for (double v : values) sum += v;
        return sum / static_cast<double>(values.size());
    }
    if (mafs.size() != values.size()) {
        throw DataError("maf-weighted aggregation needs one frequency per value");
    }
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        num += mafs[i] * values[i];
        den += mafs[i];
    }
    if (!(den > 0.0)) throw DataError("maf-weighted aggregation with all-zero frequencies");
    return num / den;
}

// ---------------------------------------------------------------------------

HealthPlan resolve_health_plan(const ScenarioDataset& data, const MetricParams& params) {
    HealthPlan plan;
    if (params.health_weights.empty()) {
        const std::size_t n = std::min(kDefaultHealthPanel, data.snp_count());
        for (std::size_t j = 0; j < n; ++j) {
            plan.snps.push_back(j);
            plan.weights.push_back(1.0);
            plan.rsids.push_back(data.rsids[j]);
        }
        return plan;
    }
    plan.strict = true;
    std::vector<std::pair<std::size_t, double>> picked;
    for (const auto& [rsid, c] : params.health_weights) {
        const auto it = std::find(data.rsids.begin(), data.rsids.end(), rsid);
        if (it == data.rsids.end()) {
            throw DataError(fmt::format("health weight refers to {}, which is not in scenario '{}'",
                                        rsid, data.name));
        }
        picked.emplace_back(static_cast<std::size_t>(it - data.rsids.begin()), c);
    }
    std::sort(picked.begin(), picked.end());
    for (const auto& [j, c] : picked) {
        plan.snps.push_back(j);
        plan.weights.push_back(c);
        plan.rsids.push_back(data.rsids[j]);
    }
    return plan;
}

IndividualMetrics evaluate_individual(std::span<const SnpObservation> set,
                                      std::span<const std::size_t> snp_index,
                                      const MetricParams& params, const HealthPlan& plan) {
    if (set.size() != snp_index.size()) throw UsageError("observation and index lists differ in length");
    if (set.size() < 2) throw DataError("an individual needs at least two called SNPs");

    // Per-SNP metrics that are reported as an aggregate over the individual's SNPs.
    constexpr std::array<MetricId, 13> kAveraged = {
        kEntropy,           kNormalizedEntropy,      kMinEntropy,
        kInherentPrivacy,   kMutualInformation,      kConditionalEntropy,
        kConditionalPrivacyLoss, kNormalizedMutualInformation, kVariationOfInformation,
        kRelativeEntropy,   kInformationSurprisal,   kExpectedEstimationError,
        kAsymmetricEntropyPerSnp};

    IndividualMetrics out;
    out.snps = set.size();
    const bool weighted = params.aggregation == Aggregation::kMafWeightedMean;

    std::array<double, kAveraged.size()> sums{};
    double cp_sum = 0.0;
    double weight_sum = 0.0;
    double entropy_sum = 0.0;
    double asym_sum = 0.0;
    double p_truth_sum = 0.0;

    std::array<double, kHealthBases.size()> hp_num{};
    double hp_den = 0.0;
    std::size_t next_health = 0;

    for (std::size_t i = 0; i < set.size(); ++i) {
        const auto& o = set[i];
        const auto t = static_cast<std::size_t>(o.truth.count());
        const auto& p = o.estimate;

        const double h = entropy(p);
        const double top = std::max({p[0], p[1], p[2]});
        const Probabilities prior = reference_estimate(o.maf).probabilities();
        const double h_prior = entropy(prior);
        const double info = h_prior - h;
        const double coe = h_prior - info;
        const double surprisal = -std::log2(p[t]);
        const double eee = expected_estimation_error(p, o.truth);
        const double asym = asymmetric_entropy_term(p, o.maf, o.truth);

        const std::array<double, kAveraged.size()> v = {
            h,        h / kLog2Of3, -std::log2(top), std::exp2(h), info,
            coe,      1.0 - std::exp2(-info), 1.0 - info / kLog2Of3, h_prior + coe - 2.0 * info,
            surprisal, surprisal, eee, asym};

        const double w = weighted ? o.maf : 1.0;
        for (std::size_t k = 0; k < v.size(); ++k) sums[k] += w * v[k];
        cp_sum += w * std::exp2(coe);
        weight_sum += w;

        entropy_sum += h;
        asym_sum += asym;
        p_truth_sum += p[t];

        while (next_health < plan.snps.size() && plan.snps[next_health] < snp_index[i]) {
            if (plan.strict) {
                throw DataError(fmt::format("health weight refers to {}, which has no call",
                                            plan.rsids[next_health]));
            }
            ++next_health;
        }
        if (next_health < plan.snps.size() && plan.snps[next_health] == snp_index[i]) {
            const double c = plan.weights[next_health];
            // Same order as kHealthBases.
            const std::array<double, kHealthBases.size()> g = {eee,       v[1],      v[7], surprisal,
                                                              coe,       surprisal, v[2]};
            for (std::size_t k = 0; k < g.size(); ++k) hp_num[k] += c * g[k];
            hp_den += c;
            ++next_health;
        }
    }
    if (plan.strict && next_health < plan.snps.size()) {
        throw DataError(fmt::format("health weight refers to {}, which has no call",
                                    plan.rsids[next_health]));
    }
    if (!(weight_sum > 0.0)) throw DataError("maf-weighted aggregation with all-zero frequencies");
    if (!(hp_den > 0.0)) throw DataError("no called SNP carries a positive health weight");

    for (std::size_t k = 0; k < kAveraged.size(); ++k) {
        out.values[index_of(kAveraged[k])] = sums[k] / weight_sum;
    }
    out.conditional_privacy = cp_sum / weight_sum;
    out.values[index_of(kMaxEntropy)] = kLog2Of3;
    out.values[index_of(kCumulativeEntropy)] = entropy_sum;
    out.values[index_of(kAsymmetricEntropy)] = asym_sum;

    const auto errors = error_family(set);
    out.values[index_of(kMeanError)] = errors.mean_error;
    out.values[index_of(kMeanSquaredError)] = errors.mean_squared_error;
    out.values[index_of(kPercentageIncorrectlyClassified)] = errors.percentage_incorrectly_classified;
    out.values[index_of(kAdversarysSuccessRate)] = 1.0 - errors.percentage_incorrectly_classified;

    const auto leaks = leak_counts(set, params.ali_threshold, params.usi_threshold);
    out.values[index_of(kAmountOfInformationLeaked)] = static_cast<double>(leaks.amount_leaked);
    out.values[index_of(kUserSpecifiedInnocence)] =
        static_cast<double>(leaks.user_specified_innocence);

    out.values[index_of(kCoefficientOfDetermination)] = coefficient_of_determination(set);
    out.success_probability_mean = p_truth_sum / static_cast<double>(set.size());

    for (std::size_t k = 0; k < hp_num.size(); ++k) out.health_by_base[k] = hp_num[k] / hp_den;
    out.values[index_of(kHealthPrivacy)] = out.health_by_base[health_slot(params.health_base)];
    return out;
}

std::vector<std::string> auxiliary_columns() {
    std::vector<std::string> cols = {"conditional_privacy", "success_probability_mean"};
    for (MetricId base : kHealthBases) cols.push_back(fmt::format("health_privacy[{}]", to_string(base)));
    return cols;
}

std::vector<double> auxiliary_values(const IndividualMetrics& m) {
    std::vector<double> v = {m.conditional_privacy, m.success_probability_mean};
    v.insert(v.end(), m.health_by_base.begin(), m.health_by_base.end());
    return v;
}

}  // namespace privmeter
