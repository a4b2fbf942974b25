#include "privmeter/adversary.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <iterator>
#include <numeric>
#include <ostream>

#include <boost/math/distributions/normal.hpp>
#include <fmt/format.h>

#include "privmeter/parallel.hpp"
#include "text_util.hpp"

namespace privmeter {

namespace {

double standard_normal_cdf_impl(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double standard_normal_quantile(double p) {
    static const boost::math::normal_distribution<double> unit;
    return boost::math::quantile(unit, p);
}

std::array<std::size_t, 2> wrong_values(GenotypeValue truth) {
    switch (truth.count()) {
        case 0: return {1, 2};
        case 1: return {0, 2};
        default: return {0, 1};
    }
}

Probabilities hardy_weinberg(double q) { return {(1 - q) * (1 - q), 2 * q * (1 - q), q * q}; }

std::uint64_t level_seed(std::uint64_t master_seed, const AdversaryLevel& level) {
    return derive_seed(master_seed, {static_cast<std::uint64_t>(level.model()) + 1,
                                     std::bit_cast<std::uint64_t>(level.parameter())});
}

}  // namespace

EstimateDistribution EstimateDistribution::from_raw(const Probabilities& raw) {
    double sum = 0.0;
    for (double v : raw) {
        if (!std::isfinite(v) || v < 0.0) {
            throw DataError(fmt::format("invalid probability {} in estimate", v));
        }
        sum += v;
    }
    if (!(sum > 0.0)) throw DataError("estimate has no probability mass");

    Probabilities p{raw[0] / sum, raw[1] / sum, raw[2] / sum};
    std::size_t mode = 0;
    for (std::size_t k = 1; k < 3; ++k) {
        if (p[k] > p[mode]) mode = k;
    }
    double others = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
        if (k == mode) continue;
        p[k] = std::max(p[k], kProbabilityFloor);
        others += p[k];
    }
    // The mode is at least 1/3, so it absorbs the lifted mass and stays above the floor.
    p[mode] = 1.0 - others;
    return EstimateDistribution(p);
}

std::string_view to_string(AdversaryModel model) noexcept {
    switch (model) {
        case AdversaryModel::kUniform: return "uniform";
        case AdversaryModel::kNormal: return "normal";
        case AdversaryModel::kReference: return "reference";
    }
    return "normal";
}

AdversaryModel parse_adversary_model(std::string_view text) {
    for (auto m : kAllModels) {
        if (to_string(m) == text) return m;
    }
    throw UsageError(
        fmt::format("unknown adversary model '{}' (expected uniform, normal or reference)", text));
}

AdversaryLevel AdversaryLevel::normal(double mu) {
    if (!(mu > 0.0 && mu < 1.0)) throw UsageError(fmt::format("normal adversary mean {} not in (0, 1)", mu));
    return {AdversaryModel::kNormal, mu};
}

AdversaryLevel AdversaryLevel::uniform(double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw UsageError(fmt::format("uniform adversary spread {} must be positive", sigma));
    }
    return {AdversaryModel::kUniform, sigma};
}

AdversaryLevel AdversaryLevel::reference(double portion) {
    if (!(portion >= -1.0 && portion <= 1.0)) {
        throw UsageError(fmt::format("reference adversary portion {} not in [-1, 1]", portion));
    }
    return {AdversaryModel::kReference, portion};
}

double AdversaryLevel::mu() const noexcept {
    return model_ == AdversaryModel::kNormal ? parameter_ : kUniformMu;
}

double AdversaryLevel::sigma() const noexcept {
    return model_ == AdversaryModel::kUniform ? parameter_ : kNormalSigma;
}

double AdversaryLevel::portion() const noexcept {
    return model_ == AdversaryModel::kReference ? parameter_ : 0.0;
}

std::vector<AdversaryLevel> default_ladder(AdversaryModel model) {
    std::vector<AdversaryLevel> ladder;
    switch (model) {
        case AdversaryModel::kNormal:
            for (double mu : {0.1, 0.25, 0.4, 0.6, 0.75, 0.9}) ladder.push_back(AdversaryLevel::normal(mu));
            break;
        case AdversaryModel::kUniform:
            for (double s : {7.0, 2.0, 1.0, 0.5, 0.25, 0.1, 0.05}) ladder.push_back(AdversaryLevel::uniform(s));
            break;
        case AdversaryModel::kReference:
            for (double p : {-0.10, -0.05, -0.01, 0.0, 0.01, 0.05, 0.10, 0.50, 1.00}) {
                ladder.push_back(AdversaryLevel::reference(p));
            }
            break;
    }
    return ladder;
}

EstimateDistribution reference_estimate(double maf) {
    if (!(maf >= 0.0 && maf <= 0.5)) {
        throw DataError(fmt::format("minor allele frequency {} outside [0, 0.5]", maf));
    }
    return EstimateDistribution::from_raw(hardy_weinberg(maf));
}

TruncatedNormal::TruncatedNormal(double mu, double sigma) : mu_(mu), sigma_(sigma) {
    if (!(sigma > 0.0)) throw UsageError("truncated normal needs a positive sigma");
    double low = (0.0 - mu) / sigma;
    double high = (1.0 - mu) / sigma;
    // Keep the bulk of the interval in the lower tail, where the CDF is accurate.
    reflected_ = low > 0.0;
    if (reflected_) {
        std::tie(low, high) = std::pair(-high, -low);
    }
    cdf_low_ = standard_normal_cdf_impl(low);
    cdf_high_ = standard_normal_cdf_impl(high);
}

double TruncatedNormal::operator()(RngStream& rng) const {
    const double u = rng.uniform_open();
    double p = cdf_low_ + u * (cdf_high_ - cdf_low_);
    p = std::clamp(p, std::nextafter(0.0, 1.0), std::nextafter(1.0, 0.0));
    double z = standard_normal_quantile(p);
    if (reflected_) z = -z;
    return std::clamp(mu_ + sigma_ * z, 0.0, 1.0);
}

double sample_truncated_normal(double mu, double sigma, RngStream& rng) {
    return TruncatedNormal(mu, sigma)(rng);
}

EstimateDistribution split_residual(GenotypeValue truth, double p_truth, double u) {
    Probabilities p{};
    const auto wrong = wrong_values(truth);
    p[static_cast<std::size_t>(truth.count())] = p_truth;
    p[wrong[0]] = u * (1.0 - p_truth);
    p[wrong[1]] = (1.0 - u) * (1.0 - p_truth);
    return EstimateDistribution::from_raw(p);
}

EstimateDistribution normal_estimate(GenotypeValue truth, double mu, RngStream& rng) {
    const double t = sample_truncated_normal(mu, AdversaryLevel::kNormalSigma, rng);
    return split_residual(truth, t, rng.uniform());
}

EstimateDistribution uniform_estimate(GenotypeValue truth, double sigma, RngStream& rng) {
    const double t = sample_truncated_normal(AdversaryLevel::kUniformMu, sigma, rng);
    return split_residual(truth, t, rng.uniform());
}

EstimateDistribution reference_perturbed(GenotypeValue truth, const AlleleFrequencyRecord& freq,
                                         double portion, bool member) {
    const EstimateDistribution prior = reference_estimate(freq);
    if (!member || portion == 0.0) return prior;

    const auto t = static_cast<std::size_t>(truth.count());
    Probabilities p{};
    if (portion > 0.0) {
        p[t] = 1.0;
        return EstimateDistribution::from_raw(p);
    }
    const auto wrong = wrong_values(truth);
    const double wa = prior[wrong[0]];
    const double wb = prior[wrong[1]];
    if (wa <= kProbabilityFloor && wb <= kProbabilityFloor) {
        p[wrong[0]] = 0.5;
        p[wrong[1]] = 0.5;
    } else {
        p[wrong[0]] = wa / (wa + wb);
        p[wrong[1]] = wb / (wa + wb);
    }
    return EstimateDistribution::from_raw(p);
}

std::vector<bool> draw_membership(std::size_t n, double portion, RngStream& rng) {
    std::vector<bool> member(n, false);
    const double raw = std::abs(portion) * static_cast<double>(n);
    // Guard against 0.01 * 10000 evaluating to 100.00000000000001.
    const auto k = std::min<std::size_t>(
        n, static_cast<std::size_t>(std::max(0.0, std::ceil(raw - 1e-9))));
    if (k == 0) return member;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t pick = i + rng.below(n - i);
        std::swap(order[i], order[pick]);
        member[order[i]] = true;
    }
    return member;
}

IndividualEstimates estimate_individual(const ScenarioDataset& data, const AdversaryLevel& level,
                                        std::size_t individual, std::size_t replication,
                                        std::uint64_t master_seed) {
    const std::size_t snps = data.snp_count();
    const std::uint64_t base = level_seed(master_seed, level);
    const std::uint64_t person = hash_string(data.individuals.at(individual));

    IndividualEstimates out;
    for (std::size_t j = 0; j < snps; ++j) {
        if (data.truth[individual * snps + j] >= 0) out.snp_index.push_back(j);
    }
    out.estimates.reserve(out.snp_index.size());

    if (level.model() == AdversaryModel::kReference) {
        if (data.frequencies.size() != snps) {
            throw DataError("reference adversary needs a frequency record for every SNP");
        }
        std::vector<bool> member;
        if (level.portion() != 0.0) {
            RngStream rng(derive_seed(base, {person, replication, hash_string("membership")}));
            member = draw_membership(out.snp_index.size(), level.portion(), rng);
        }
        for (std::size_t k = 0; k < out.snp_index.size(); ++k) {
            const std::size_t j = out.snp_index[k];
            const auto truth = GenotypeValue::from_count(data.truth[individual * snps + j]);
            out.estimates.push_back(reference_perturbed(truth, data.frequencies[j], level.portion(),
                                                        !member.empty() && member[k]));
        }
        return out;
    }

    const TruncatedNormal draw(level.mu(), level.sigma());
    for (std::size_t j : out.snp_index) {
        RngStream rng(derive_seed(base, {person, hash_string(data.rsids[j]), replication}));
        const auto truth = GenotypeValue::from_count(data.truth[individual * snps + j]);
        const double t = draw(rng);
        out.estimates.push_back(split_residual(truth, t, rng.uniform()));
    }
    return out;
}

// ---------------------------------------------------------------------------

EstimateSet::EstimateSet(const ScenarioDataset& data, AdversaryLevel level,
                         std::size_t replications)
    : level_(level),
      replications_(replications),
      individuals_(data.individual_count()),
      snps_(data.snp_count()),
      cells_(replications * data.individual_count() * data.snp_count()),
      present_(data.truth.size()) {
    for (std::size_t i = 0; i < data.truth.size(); ++i) present_[i] = data.truth[i] >= 0;
}

std::size_t EstimateSet::size() const {
    return replications_ *
           static_cast<std::size_t>(std::count(present_.begin(), present_.end(), true));
}

std::size_t EstimateSet::offset(std::size_t individual, std::size_t snp,
                                std::size_t replication) const {
    if (individual >= individuals_ || snp >= snps_ || replication >= replications_) {
        throw UsageError("estimate index out of range");
    }
    return (replication * individuals_ + individual) * snps_ + snp;
}

const EstimateDistribution* EstimateSet::find(std::size_t individual, std::size_t snp,
                                              std::size_t replication) const {
    const std::size_t at = offset(individual, snp, replication);
    if (!present_[individual * snps_ + snp]) return nullptr;
    return &cells_[at];
}

void EstimateSet::set(std::size_t individual, std::size_t snp, std::size_t replication,
                      const EstimateDistribution& est) {
    cells_[offset(individual, snp, replication)] = est;
}

EstimateSet build_estimate_set(const ScenarioDataset& data, const AdversaryLevel& level,
                               std::size_t replications, std::uint64_t master_seed,
                               std::size_t threads) {
    if (replications == 0) throw UsageError("at least one replication is required");
    EstimateSet set(data, level, replications);
    const std::size_t people = data.individual_count();
    parallel_for(people * replications, threads, [&](std::size_t unit) {
        const std::size_t rep = unit / people;
        const std::size_t ind = unit % people;
        const auto est = estimate_individual(data, level, ind, rep, master_seed);
        for (std::size_t k = 0; k < est.snp_index.size(); ++k) {
            set.set(ind, est.snp_index[k], rep, est.estimates[k]);
        }
    });
    return set;
}

void write_estimates_csv(std::ostream& out, const ScenarioDataset& data, const EstimateSet& set,
                         std::span<const std::size_t> replications) {
    std::vector<std::size_t> reps(replications.begin(), replications.end());
    if (reps.empty()) {
        reps.resize(set.replications());
        std::iota(reps.begin(), reps.end(), std::size_t{0});
    }
    out << "individual,rsid,replication,p0,p1,p2\n";
    for (std::size_t r : reps) {
        for (std::size_t i = 0; i < set.individuals(); ++i) {
            for (std::size_t j = 0; j < set.snps(); ++j) {
                const auto* est = set.find(i, j, r);
                if (est == nullptr) continue;
                out << data.individuals[i] << ',' << data.rsids[j] << ',' << r << ','
                    << detail::format_real((*est)[0]) << ',' << detail::format_real((*est)[1])
                    << ',' << detail::format_real((*est)[2]) << '\n';
            }
        }
    }
}

std::vector<EstimateRow> read_estimates_csv(std::istream& in) {
    const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    std::vector<EstimateRow> rows;
    std::size_t line_no = 0;
    std::size_t start = 0;
    bool header = false;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string::npos) end = text.size();
        const std::string_view line = detail::trim(std::string_view(text).substr(start, end - start));
        start = end + 1;
        ++line_no;
        if (line.empty()) continue;
        const auto cols = detail::split(line, ',');
        if (!header) {
            if (cols.size() != 6 || cols[0] != "individual" || cols[3] != "p0") {
                throw DataError("estimate file lacks the header individual,rsid,replication,p0,p1,p2");
            }
            header = true;
            continue;
        }
        if (cols.size() != 6) throw DataError(fmt::format("estimate file line {}: malformed row", line_no));
        const auto rep = detail::parse_uint(cols[2]);
        const auto p0 = detail::parse_double(cols[3]);
        const auto p1 = detail::parse_double(cols[4]);
        const auto p2 = detail::parse_double(cols[5]);
        if (!rep || !p0 || !p1 || !p2) {
            throw DataError(fmt::format("estimate file line {}: malformed number", line_no));
        }
        rows.push_back({std::string(cols[0]), std::string(cols[1]), *rep,
                        EstimateDistribution::from_raw({*p0, *p1, *p2})});
    }
    if (!header) throw DataError("estimate file is empty");
    return rows;
}

}  // namespace privmeter
