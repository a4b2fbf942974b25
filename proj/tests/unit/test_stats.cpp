#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "oracles.hpp"
#include "privmeter/errors.hpp"
#include "privmeter/rng.hpp"
#include "privmeter/stats.hpp"

using namespace privmeter;

TEST_CASE("Welch t-test worked example") {
    const std::vector<double> a{1, 2, 3, 4, 5};
    const std::vector<double> b{2, 3, 4, 5, 6};
    const auto r = welch_t_test(a, b);
    CHECK(r.statistic == doctest::Approx(-1.0));
    CHECK(r.degrees_of_freedom == doctest::Approx(8.0));
    CHECK(r.p_value == doctest::Approx(0.3466).epsilon(1e-3));
}

TEST_CASE("Welch t-test conventions") {
    const std::vector<double> a{1, 4, 2, 8};
    const auto same = welch_t_test(a, a);
    CHECK(same.statistic == 0.0);
    CHECK(same.p_value == doctest::Approx(1.0));
    const std::vector<double> zeros{0, 0, 0};
    const std::vector<double> ones{1, 1, 1};
    const auto split = welch_t_test(zeros, ones);
    CHECK(split.p_value == 0.0);
    CHECK(std::isinf(split.statistic));
    CHECK(split.statistic < 0);
    const auto equal = welch_t_test(ones, ones);
    CHECK(equal.statistic == 0.0);
    CHECK(equal.p_value == 1.0);
    CHECK_THROWS_AS(welch_t_test(std::vector<double>{1}, ones), UsageError);
}

TEST_CASE("Welch t-test against the checked-in reference fixture") {
    std::ifstream in(std::string(PRIVMETER_FIXTURE_DIR) + "/welch_reference.csv");
    REQUIRE(in.good());
    std::string line;
    std::getline(in, line);
    int rows = 0;
    while (std::getline(in, line)) {
        const auto row = oracle::parse_welch_row(line);
        const auto r = welch_t_test(row.a, row.b);
        CHECK(std::abs(r.p_value - row.p_value) <= 1e-6);
        CHECK(r.statistic == doctest::Approx(row.statistic).epsilon(1e-9));
        ++rows;
    }
    CHECK(rows == 100);
}

TEST_CASE("rank-sum test") {
    SUBCASE("fully separated tiny samples agree with exact enumeration") {
        const std::vector<double> a{1, 2, 3};
        const std::vector<double> b{4, 5, 6};
        const auto r = rank_sum_test(a, b);
        CHECK(r.statistic < 0);
        const double exact = oracle::exact_rank_sum_p(a, b);
        CHECK(exact == doctest::Approx(0.1));
        CHECK((r.p_value < 0.05) == (exact < 0.05));
    }
    SUBCASE("identical multisets") {
        const std::vector<double> a{3, 1, 2, 2};
        const std::vector<double> b{2, 2, 1, 3};
        const auto r = rank_sum_test(a, b);
        CHECK(r.statistic == 0.0);
        CHECK(r.p_value == 1.0);
        const std::vector<double> c{5, 5, 5};
        CHECK(rank_sum_test(c, c).p_value == 1.0);
    }
    SUBCASE("large shift") {
        RngStream rng(5);
        std::vector<double> a(50), b(50);
        for (auto& x : a) x = oracle::normal_draw(rng) + 10;
        for (auto& x : b) x = oracle::normal_draw(rng);
        const auto r = rank_sum_test(a, b);
        CHECK(r.statistic > 0);
        CHECK(r.p_value < 1e-6);
    }
    SUBCASE("tie correction shrinks the variance") {
        const std::vector<double> a{1, 1, 1, 2, 2, 3, 3, 3};
        const std::vector<double> b{2, 2, 3, 4, 4, 4, 5, 5};
        const auto r = rank_sum_test(a, b);
        CHECK(r.statistic == doctest::Approx(oracle::rank_sum_z(a, b)));
    }
}

TEST_CASE("test symmetry and invariances") {
    RngStream rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> a(12), b(15);
        for (auto& x : a) x = oracle::normal_draw(rng);
        for (auto& x : b) x = oracle::normal_draw(rng) + 0.3;
        const auto w = welch_t_test(a, b);
        const auto w_swapped = welch_t_test(b, a);
        CHECK(w_swapped.statistic == doctest::Approx(-w.statistic));
        CHECK(w_swapped.p_value == doctest::Approx(w.p_value));
        const auto r = rank_sum_test(a, b);
        const auto r_swapped = rank_sum_test(b, a);
        CHECK(r_swapped.statistic == doctest::Approx(-r.statistic));
        CHECK(r_swapped.p_value == doctest::Approx(r.p_value));

        auto shifted_a = a;
        auto shifted_b = b;
        for (auto& x : shifted_a) x += 1000.0;
        for (auto& x : shifted_b) x += 1000.0;
        CHECK(welch_t_test(shifted_a, shifted_b).p_value == doctest::Approx(w.p_value).epsilon(1e-6));
        CHECK(rank_sum_test(shifted_a, shifted_b).p_value == r.p_value);

        auto exp_a = a;
        auto exp_b = b;
        for (auto& x : exp_a) x = std::exp(x);
        for (auto& x : exp_b) x = std::exp(x);
        CHECK(rank_sum_test(exp_a, exp_b).p_value == r.p_value);
    }
}

TEST_CASE("null rejection rates") {
    RngStream rng(2718);
    int welch = 0;
    int ranks = 0;
    const int trials = 1000;
    for (int t = 0; t < trials; ++t) {
        std::vector<double> a(50), b(50);
        for (auto& x : a) x = oracle::normal_draw(rng);
        for (auto& x : b) x = oracle::normal_draw(rng);
        welch += welch_t_test(a, b).p_value < 0.05;
        ranks += rank_sum_test(a, b).p_value < 0.05;
    }
    CHECK(std::abs(welch / double(trials) - 0.05) <= 0.02);
    CHECK(std::abs(ranks / double(trials) - 0.05) <= 0.02);
}

TEST_CASE("distribution functions") {
    CHECK(standard_normal_cdf(0.0) == 0.5);
    CHECK(std::abs(standard_normal_cdf(1.959964) - 0.975) < 1e-6);
    CHECK(student_t_cdf(0.0, 3.0) == doctest::Approx(0.5));
    // Closed forms: df = 1 is Cauchy, df = 2 has an algebraic CDF.
    for (double x : {-5.0, -1.3, -0.2, 0.7, 2.4, 9.0}) {
        CHECK(std::abs(student_t_cdf(x, 1.0) - (0.5 + std::atan(x) / std::numbers::pi)) <= 1e-8);
        CHECK(std::abs(student_t_cdf(x, 2.0) - (0.5 + x / (2 * std::sqrt(2 + x * x)))) <= 1e-8);
        CHECK(std::abs(standard_normal_cdf(x) - 0.5 * std::erfc(-x / std::numbers::sqrt2)) <= 1e-8);
    }
}

TEST_CASE("mean confidence interval") {
    const std::vector<double> constant{4, 4, 4};
    const auto c = mean_ci(constant);
    CHECK(c.half_width == 0.0);
    CHECK(c.relative_error == 0.0);
    const std::vector<double> s{9, 10, 11};
    const auto ci = mean_ci(s);
    CHECK(ci.mean == doctest::Approx(10.0));
    CHECK(ci.half_width == doctest::Approx(4.3027 / std::sqrt(3.0)).epsilon(1e-4));
    CHECK(ci.half_width == doctest::Approx(2.484).epsilon(1e-3));
    CHECK(ci.relative_error == doctest::Approx(0.2484).epsilon(1e-3));
    const std::vector<double> centred{-1, 0, 1};
    CHECK(std::isinf(mean_ci(centred).relative_error));
    CHECK_THROWS_AS(mean_ci(std::vector<double>{1}), DataError);
}

TEST_CASE("percentiles") {
    std::vector<double> v(10);
    for (int i = 0; i < 10; ++i) v[static_cast<std::size_t>(i)] = 10 - i;
    CHECK(percentile(v, 10) == doctest::Approx(1.9));
    CHECK(percentile(v, 0) == 1);
    CHECK(percentile(v, 100) == 10);
    const std::vector<double> q{1, 2, 3, 4};
    CHECK(percentile(q, 50) == 2.5);
    CHECK(percentile(q, 25) == 1.75);
    CHECK(percentile(q, 75) == 3.25);
    CHECK_THROWS_AS(percentile(std::vector<double>{}, 50), DataError);
    CHECK_THROWS_AS(percentile(q, 101), UsageError);
}

TEST_CASE("kernel density estimate") {
    SUBCASE("standard normal peaks near zero") {
        RngStream rng(31);
        std::vector<double> s(10000);
        for (auto& x : s) x = oracle::normal_draw(rng);
        const auto kde = gaussian_kde(s);
        REQUIRE(kde.x.size() == 256);
        const auto peak = std::max_element(kde.density.begin(), kde.density.end()) - kde.density.begin();
        CHECK(std::abs(kde.x[static_cast<std::size_t>(peak)]) < 0.1);
        CHECK(kde.bandwidth == doctest::Approx(1.06 * std::sqrt(sample_variance(s)) * std::pow(10000.0, -0.2)));
        for (double d : kde.density) CHECK(d >= 0);
    }
    SUBCASE("two points give a symmetric curve") {
        const std::vector<double> s{0, 1};
        const auto kde = gaussian_kde(s, 101);
        REQUIRE(kde.density.size() == 101);
        for (std::size_t i = 0; i < 101; ++i) CHECK(kde.density[i] == doctest::Approx(kde.density[100 - i]));
        CHECK(kde.x.front() == 0.0);
        CHECK(kde.x.back() == 1.0);
    }
    SUBCASE("constant sample gives a spike") {
        const std::vector<double> s{5, 5, 5, 5};
        const auto kde = gaussian_kde(s);
        REQUIRE(kde.spike.has_value());
        CHECK(*kde.spike == 5.0);
        CHECK(kde.x.empty());
    }
}
