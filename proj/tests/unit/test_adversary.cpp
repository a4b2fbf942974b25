#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "privmeter/adversary.hpp"
#include "privmeter/metrics.hpp"
#include "privmeter/parallel.hpp"
#include "privmeter/rng.hpp"

using namespace privmeter;

namespace {

// Closed-form truncated-normal quantities, kept independent of the library.
double phi(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2 * std::numbers::pi); }
double Phi(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double trunc_mean(double mu, double sigma) {
    const double a = (0 - mu) / sigma;
    const double b = (1 - mu) / sigma;
    return mu + sigma * (phi(a) - phi(b)) / (Phi(b) - Phi(a));
}

double trunc_cdf(double x, double mu, double sigma) {
    const double a = Phi((0 - mu) / sigma);
    const double b = Phi((1 - mu) / sigma);
    return (Phi((x - mu) / sigma) - a) / (b - a);
}

void check_simplex(const EstimateDistribution& e) {
    const double sum = e[0] + e[1] + e[2];
    CHECK(std::abs(sum - 1.0) <= 1e-12);
    for (std::size_t k = 0; k < 3; ++k) CHECK(e[k] >= kProbabilityFloor);
}

ScenarioDataset small_scenario(std::size_t people, std::size_t snps) {
    ScenarioDataset d;
    d.name = "test";
    RngStream rng(77);
    for (std::size_t j = 0; j < snps; ++j) {
        const std::string rsid = "rs" + std::to_string(1000 + j);
        d.rsids.push_back(rsid);
        d.frequencies.push_back({rsid, 'A', 'G', 0.05 + 0.45 * rng.uniform()});
    }
    for (std::size_t i = 0; i < people; ++i) {
        d.individuals.push_back("p" + std::to_string(i));
        for (std::size_t j = 0; j < snps; ++j) d.truth.push_back(static_cast<std::int8_t>(rng.below(3)));
    }
    return d;
}

}  // namespace

TEST_CASE("estimate distribution flooring") {
    const auto e = EstimateDistribution::from_raw({1.0, 0.0, 0.0});
    check_simplex(e);
    CHECK(e[0] == doctest::Approx(1.0 - 2e-9));
    CHECK(e[1] == kProbabilityFloor);
    CHECK_THROWS_AS(EstimateDistribution::from_raw({0.0, 0.0, 0.0}), DataError);
    CHECK_THROWS_AS(EstimateDistribution::from_raw({-0.1, 0.5, 0.6}), DataError);
    CHECK_THROWS_AS(EstimateDistribution::from_raw({NAN, 0.5, 0.5}), DataError);
    const auto scaled = EstimateDistribution::from_raw({2.0, 1.0, 1.0});
    CHECK(scaled[0] == doctest::Approx(0.5));
}

TEST_CASE("reference estimate follows Hardy-Weinberg") {
    const auto half = reference_estimate(0.5);
    CHECK(half[0] == doctest::Approx(0.25));
    CHECK(half[1] == doctest::Approx(0.5));
    CHECK(half[2] == doctest::Approx(0.25));
    const auto zero = reference_estimate(0.0);
    check_simplex(zero);
    CHECK(zero[0] == doctest::Approx(1.0));
    const auto q2 = reference_estimate(0.2);
    CHECK(q2[0] == doctest::Approx(0.64));
    CHECK(q2[1] == doctest::Approx(0.32));
    CHECK(q2[2] == doctest::Approx(0.04));
    CHECK_THROWS_AS(reference_estimate(0.6), DataError);
}

TEST_CASE("truncated normal sampling") {
    const int n = 100000;
    SUBCASE("symmetric truncation keeps the mean") {
        RngStream rng(1);
        double sum = 0;
        for (int i = 0; i < n; ++i) {
            const double x = sample_truncated_normal(0.5, 0.1, rng);
            REQUIRE(x >= 0.0);
            REQUIRE(x <= 1.0);
            sum += x;
        }
        CHECK(std::abs(sum / n - 0.5) < 0.01);
    }
    SUBCASE("wide spread is close to uniform") {
        RngStream rng(2);
        std::vector<double> xs(n);
        for (auto& x : xs) x = sample_truncated_normal(0.99, 7.0, rng);
        std::sort(xs.begin(), xs.end());
        double ks = 0;
        for (int i = 0; i < n; ++i) {
            ks = std::max({ks, std::abs(xs[i] - static_cast<double>(i) / n),
                           std::abs(xs[i] - static_cast<double>(i + 1) / n)});
        }
        CHECK(ks < 0.02);
    }
    SUBCASE("narrow spread near one matches the CDF oracle") {
        RngStream rng(3);
        int above = 0;
        for (int i = 0; i < n; ++i) above += sample_truncated_normal(0.99, 0.05, rng) > 0.9;
        const double expected = 1.0 - trunc_cdf(0.9, 0.99, 0.05);
        CHECK(expected == doctest::Approx(0.938).epsilon(0.001));
        CHECK(std::abs(static_cast<double>(above) / n - expected) < 0.005);
    }
    SUBCASE("mean matches the closed form along both ladders") {
        for (const auto& level : default_ladder(AdversaryModel::kNormal)) {
            TruncatedNormal dist(level.mu(), level.sigma());
            RngStream rng(derive_seed(4, {static_cast<std::uint64_t>(level.mu() * 100)}));
            double sum = 0;
            for (int i = 0; i < 20000; ++i) sum += dist(rng);
            CHECK(std::abs(sum / 20000 - trunc_mean(level.mu(), level.sigma())) < 0.003);
        }
        for (const auto& level : default_ladder(AdversaryModel::kUniform)) {
            TruncatedNormal dist(level.mu(), level.sigma());
            RngStream rng(derive_seed(5, {static_cast<std::uint64_t>(level.sigma() * 100)}));
            double sum = 0;
            for (int i = 0; i < 20000; ++i) sum += dist(rng);
            CHECK(std::abs(sum / 20000 - trunc_mean(level.mu(), level.sigma())) < 0.005);
        }
    }
}

TEST_CASE("normal and uniform estimates") {
    const int n = 10000;
    auto mean_truth = [&](auto make, GenotypeValue truth, std::uint64_t seed) {
        RngStream rng(seed);
        double sum = 0;
        for (int i = 0; i < n; ++i) {
            const auto e = make(truth, rng);
            check_simplex(e);
            sum += e.of(truth);
        }
        return sum / n;
    };
    SUBCASE("normal adversary at mu = 0.9 and 0.1") {
        const double strong = mean_truth(
            [](GenotypeValue t, RngStream& r) { return normal_estimate(t, 0.9, r); }, GenotypeValue::het(), 10);
        // Truncation at 1 pulls the mean below mu; the oracle gives 0.8712.
        CHECK(std::abs(strong - trunc_mean(0.9, 0.1)) < 0.005);
        CHECK(std::abs(strong - 0.9) < 0.035);
        const double weak = mean_truth(
            [](GenotypeValue t, RngStream& r) { return normal_estimate(t, 0.1, r); }, GenotypeValue::hom_major(),
            11);
        CHECK(std::abs(weak - trunc_mean(0.1, 0.1)) < 0.005);
        CHECK(std::abs(weak - 0.1) < 0.035);
    }
    SUBCASE("uniform adversary extremes") {
        const double narrow = mean_truth(
            [](GenotypeValue t, RngStream& r) { return uniform_estimate(t, 0.05, r); }, GenotypeValue::hom_minor(),
            12);
        CHECK(narrow > 0.95);
        const double wide = mean_truth(
            [](GenotypeValue t, RngStream& r) { return uniform_estimate(t, 7.0, r); }, GenotypeValue::het(), 13);
        CHECK(std::abs(wide - 0.5) < 0.02);
    }
    SUBCASE("residual split order") {
        const auto e = split_residual(GenotypeValue::het(), 0.6, 0.25);
        CHECK(e[1] == doctest::Approx(0.6));
        CHECK(e[0] == doctest::Approx(0.1));
        CHECK(e[2] == doctest::Approx(0.3));
        const auto f = split_residual(GenotypeValue::hom_major(), 0.5, 1.0);
        CHECK(f[1] == doctest::Approx(0.5));
        check_simplex(f);
    }
}

TEST_CASE("perturbed reference adversary") {
    const AlleleFrequencyRecord f{"rs1", 'A', 'G', 0.3};
    for (int k = 0; k <= 2; ++k) {
        const auto truth = GenotypeValue::from_count(k);
        CHECK(reference_perturbed(truth, f, 0.0, true) == reference_estimate(f));
        CHECK(reference_perturbed(truth, f, 0.5, false) == reference_estimate(f));
        const auto certain = reference_perturbed(truth, f, 1.0, true);
        check_simplex(certain);
        CHECK(certain.of(truth) == doctest::Approx(1.0));
        const auto wrong = reference_perturbed(truth, f, -1.0, true);
        check_simplex(wrong);
        CHECK(wrong.of(truth) == kProbabilityFloor);
        CHECK(information_surprisal(wrong.probabilities(), truth) == doctest::Approx(-std::log2(1e-9)));
    }
    // Remaining mass follows the Hardy-Weinberg weights of the wrong values.
    const auto w = reference_perturbed(GenotypeValue::hom_major(), f, -0.1, true);
    const auto hw = reference_estimate(f);
    CHECK(w[1] / w[2] == doctest::Approx(hw[1] / hw[2]));
}

TEST_CASE("membership sampling") {
    RngStream rng(9);
    for (double portion : {0.0, 0.01, -0.05, 0.5, 1.0, -1.0}) {
        const auto m = draw_membership(200, portion, rng);
        REQUIRE(m.size() == 200);
        const auto marked = static_cast<std::size_t>(std::count(m.begin(), m.end(), true));
        CHECK(marked == static_cast<std::size_t>(std::ceil(std::abs(portion) * 200 - 1e-9)));
    }
    const auto few = draw_membership(3, 0.5, rng);
    CHECK(std::count(few.begin(), few.end(), true) == 2);
}

TEST_CASE("ladders") {
    CHECK(default_ladder(AdversaryModel::kNormal).size() == 6);
    CHECK(default_ladder(AdversaryModel::kUniform).size() == 7);
    CHECK(default_ladder(AdversaryModel::kReference).size() == 9);
    CHECK(default_ladder(AdversaryModel::kUniform).front().sigma() == 7.0);
    CHECK(default_ladder(AdversaryModel::kReference)[3].portion() == 0.0);
    CHECK_THROWS_AS(AdversaryLevel::normal(0.0), UsageError);
    CHECK_THROWS_AS(AdversaryLevel::uniform(-1.0), UsageError);
    CHECK_THROWS_AS(AdversaryLevel::reference(1.5), UsageError);
    CHECK_THROWS_AS(parse_adversary_model("oracle"), UsageError);
    CHECK(parse_adversary_model("reference") == AdversaryModel::kReference);
}

TEST_CASE("mean probability on the truth rises along every ladder") {
    const auto data = small_scenario(20, 500);
    for (AdversaryModel model : kAllModels) {
        double prev = -1.0;
        for (const auto& level : default_ladder(model)) {
            double sum = 0;
            std::size_t count = 0;
            for (std::size_t i = 0; i < data.individual_count(); ++i) {
                const auto est = estimate_individual(data, level, i, 0, 31);
                for (std::size_t k = 0; k < est.snp_index.size(); ++k) {
                    sum += est.estimates[k].of(*data.truth_at(i, est.snp_index[k]));
                    ++count;
                }
            }
            const double m = sum / static_cast<double>(count);
            CHECK_MESSAGE(m > prev, to_string(model), " level ", level.parameter());
            prev = m;
        }
    }
}

TEST_CASE("estimate sets") {
    auto data = small_scenario(2, 3);
    SUBCASE("counting") {
        const auto set = build_estimate_set(data, AdversaryLevel::normal(0.4), 15, 1);
        CHECK(set.size() == 90);
    }
    SUBCASE("missing calls are skipped") {
        data.truth[1] = -1;
        const auto set = build_estimate_set(data, AdversaryLevel::normal(0.4), 2, 1);
        CHECK(set.size() == 10);
        CHECK(set.find(0, 1, 0) == nullptr);
        CHECK(set.find(0, 0, 0) != nullptr);
    }
    SUBCASE("determinism and thread independence") {
        const auto big = small_scenario(12, 40);
        for (AdversaryModel model : kAllModels) {
            const auto level = default_ladder(model)[2];
            const auto a = build_estimate_set(big, level, 3, 99, 1);
            const auto b = build_estimate_set(big, level, 3, 99, 4);
            for (std::size_t i = 0; i < 12; ++i) {
                for (std::size_t j = 0; j < 40; ++j) {
                    for (std::size_t r = 0; r < 3; ++r) CHECK(*a.find(i, j, r) == *b.find(i, j, r));
                }
            }
        }
    }
    SUBCASE("reference replications differ only in membership") {
        const auto big = small_scenario(3, 200);
        const auto set = build_estimate_set(big, AdversaryLevel::reference(0.05), 15, 5);
        for (std::size_t i = 0; i < 3; ++i) {
            std::size_t differing = 0;
            for (std::size_t j = 0; j < 200; ++j) {
                const auto hw = reference_estimate(big.frequencies[j]);
                for (std::size_t r = 0; r < 15; ++r) {
                    const auto& e = *set.find(i, j, r);
                    if (!(e == hw)) {
                        ++differing;
                        CHECK(e.of(*big.truth_at(i, j)) == doctest::Approx(1.0));
                    }
                }
            }
            CHECK(differing == 15 * 10);
        }
        const auto zero = build_estimate_set(big, AdversaryLevel::reference(0.0), 4, 5);
        for (std::size_t r = 1; r < 4; ++r) CHECK(*zero.find(1, 7, r) == *zero.find(1, 7, 0));
    }
    SUBCASE("zero replications") {
        CHECK_THROWS_AS(build_estimate_set(data, AdversaryLevel::normal(0.4), 0, 1), UsageError);
    }
    SUBCASE("CSV round-trip") {
        const auto set = build_estimate_set(data, AdversaryLevel::uniform(0.5), 2, 3);
        std::stringstream buf;
        write_estimates_csv(buf, data, set);
        const std::string text = buf.str();
        CHECK(text.rfind("individual,rsid,replication,p0,p1,p2\n", 0) == 0);
        const auto rows = read_estimates_csv(buf);
        REQUIRE(rows.size() == 12);
        for (const auto& row : rows) {
            const auto i = static_cast<std::size_t>(row.individual[1] - '0');
            const auto j = static_cast<std::size_t>(std::find(data.rsids.begin(), data.rsids.end(), row.rsid) -
                                                    data.rsids.begin());
            const auto& orig = *set.find(i, j, row.replication);
            for (std::size_t k = 0; k < 3; ++k) CHECK(row.estimate[k] == doctest::Approx(orig[k]).epsilon(1e-11));
        }
    }
}
