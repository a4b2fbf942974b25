#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include <fmt/format.h>

#include "privmeter/genome_data.hpp"
#include "privmeter/rng.hpp"

using namespace privmeter;

namespace {

AlleleFrequencyRecord freq(const std::string& rsid, char major, char minor, double maf) {
    return {rsid, major, minor, maf};
}

SnpRecord call(const std::string& rsid, char a, char b) {
    SnpRecord r;
    r.rsid = rsid;
    r.chromosome = "1";
    r.genotype = std::array<char, 2>{a, b};
    return r;
}

Genome genome_of(const std::string& id, const std::vector<int>& values) {
    std::vector<GenotypeCall> calls;
    for (std::size_t j = 0; j < values.size(); ++j) {
        calls.push_back({"rs" + std::to_string(j), GenotypeValue::from_count(values[j])});
    }
    return Genome(id, calls);
}

}  // namespace

TEST_CASE("genotype values outside 0..2 are rejected") {
    CHECK(GenotypeValue::from_count(2).count() == 2);
    CHECK_THROWS_AS(GenotypeValue::from_count(3), DataError);
    CHECK_THROWS_AS(GenotypeValue::from_count(-1), DataError);
}

TEST_CASE("raw genotype parsing") {
    SUBCASE("header comment and one record") {
        std::istringstream in("# header\nrs7412\t19\t44908822\tCC");
        const auto r = parse_raw_genotypes(in);
        REQUIRE(r.value.size() == 1);
        CHECK(r.value[0].rsid == "rs7412");
        CHECK(r.value[0].chromosome == "19");
        CHECK(r.value[0].position == 44908822);
        CHECK(*r.value[0].genotype == std::array<char, 2>{'C', 'C'});
        CHECK(r.diagnostics.empty());
    }
    SUBCASE("missing marker") {
        std::istringstream in("rs1\t1\t100\t--");
        const auto r = parse_raw_genotypes(in);
        REQUIRE(r.value.size() == 1);
        CHECK(r.value[0].missing());
    }
    SUBCASE("malformed line is skipped and reported") {
        std::istringstream in("rs1\t1\t100\tAG\nrs2\t1\nrs3\t2\t5\tTT\n");
        const auto r = parse_raw_genotypes(in);
        CHECK(r.value.size() == 2);
        REQUIRE(r.diagnostics.size() == 1);
        CHECK(r.diagnostics[0].line == 2);
    }
    SUBCASE("invalid UTF-8 is a data error") {
        std::istringstream in(std::string("rs1\t1\t100\tA\xff\n"));
        CHECK_THROWS_AS(parse_raw_genotypes(in), DataError);
    }
}

TEST_CASE("genotype encoding counts minor letters") {
    const auto f = freq("rs1", 'T', 'C', 0.2);
    CHECK(encode_genotype(call("rs1", 'C', 'C'), f)->count() == 2);
    CHECK(encode_genotype(call("rs1", 'T', 'C'), f)->count() == 1);
    CHECK(encode_genotype(call("rs1", 'T', 'T'), f)->count() == 0);
    CHECK_THROWS_AS(encode_genotype(call("rs1", 'A', 'G'), f), EncodingError);
    try {
        (void)encode_genotype(call("rs1", 'A', 'G'), f);
    } catch (const EncodingError& e) {
        CHECK(e.rsid() == "rs1");
    }
    SnpRecord missing;
    missing.rsid = "rs1";
    CHECK_FALSE(encode_genotype(missing, f).has_value());
}

TEST_CASE("encoding round-trip over all letter pairs") {
    const char letters[] = {'A', 'C', 'G', 'T'};
    for (char major : letters) {
        for (char minor : letters) {
            if (major == minor) continue;
            const auto f = freq("rsx", major, minor, 0.3);
            for (int k = 0; k <= 2; ++k) {
                const char a = k >= 1 ? minor : major;
                const char b = k >= 2 ? minor : major;
                CHECK(encode_genotype(call("rsx", a, b), f)->count() == k);
            }
        }
    }
}

TEST_CASE("frequency table loading") {
    SUBCASE("one record") {
        std::istringstream in("rsid,major,minor,maf\nrs1,T,C,0.2");
        const auto t = load_frequency_table(in);
        REQUIRE(t.value.size() == 1);
        CHECK(t.value.at("rs1").maf == doctest::Approx(0.2));
        CHECK(t.value.at("rs1").minor == 'C');
    }
    SUBCASE("maf above one half is rejected") {
        std::istringstream in("rsid,major,minor,maf\nrs1,T,C,0.7\nrs2,A,G,0.1\n");
        const auto t = load_frequency_table(in);
        CHECK(t.value.size() == 1);
        CHECK(t.value.contains("rs2"));
        CHECK(t.diagnostics.size() == 1);
    }
    SUBCASE("empty body") {
        std::istringstream in("rsid,major,minor,maf\n");
        const auto t = load_frequency_table(in);
        CHECK(t.value.empty());
    }
    SUBCASE("duplicate keeps the last row with a warning") {
        std::istringstream in("rsid,major,minor,maf\nrs1,T,C,0.2\nrs1,T,C,0.3\n");
        const auto t = load_frequency_table(in);
        CHECK(t.value.at("rs1").maf == doctest::Approx(0.3));
        CHECK(t.diagnostics.size() == 1);
    }
    SUBCASE("missing header") {
        std::istringstream in("rs1,T,C,0.2\n");
        CHECK_THROWS_AS(load_frequency_table(in), DataError);
    }
    SUBCASE("write and reload") {
        FrequencyTable table{{"rs9", freq("rs9", 'G', 'A', 0.125)}};
        std::stringstream buf;
        write_frequency_table(buf, table);
        const auto t = load_frequency_table(buf);
        CHECK(t.value.at("rs9").maf == 0.125);
        CHECK(t.value.at("rs9").major == 'G');
    }
}

TEST_CASE("cohort synthesis") {
    SUBCASE("zero frequency gives genotype 0") {
        CohortSynthesisOptions o;
        o.individuals = 1;
        o.snps = 0;
        o.fixed_snps = {freq("rs0", 'A', 'G', 0.0)};
        const auto c = synthesize_cohort(o);
        REQUIRE(c.genomes.size() == 1);
        CHECK(c.genomes[0].find("rs0")->count() == 0);
    }
    SUBCASE("Hardy-Weinberg frequencies at q = 0.2") {
        CohortSynthesisOptions o;
        o.individuals = 10000;
        o.snps = 0;
        o.seed = 11;
        o.fixed_snps = {freq("rsq", 'A', 'G', 0.2)};
        const auto c = synthesize_cohort(o);
        std::array<double, 3> counts{};
        for (const auto& g : c.genomes) counts[static_cast<std::size_t>(g.find("rsq")->count())] += 1;
        const std::array<double, 3> expected = {0.64, 0.32, 0.04};
        double chi2 = 0.0;
        for (std::size_t k = 0; k < 3; ++k) {
            CHECK(std::abs(counts[k] / 10000.0 - expected[k]) < 0.02);
            const double e = expected[k] * 10000.0;
            chi2 += (counts[k] - e) * (counts[k] - e) / e;
        }
        // Chi-square with 2 degrees of freedom at significance 0.01.
        CHECK(chi2 < 9.2103);
    }
    SUBCASE("same seed is bit-identical") {
        CohortSynthesisOptions o;
        o.individuals = 20;
        o.snps = 50;
        o.seed = 4;
        o.related_pairs = 2;
        o.missing_rate = 0.1;
        const auto a = synthesize_cohort(o);
        const auto b = synthesize_cohort(o);
        REQUIRE(a.genomes.size() == b.genomes.size());
        for (std::size_t i = 0; i < a.genomes.size(); ++i) {
            CHECK(a.genomes[i].individual_id() == b.genomes[i].individual_id());
            REQUIRE(a.genomes[i].size() == b.genomes[i].size());
            for (std::size_t j = 0; j < a.genomes[i].size(); ++j) {
                CHECK(a.genomes[i].calls()[j].rsid == b.genomes[i].calls()[j].rsid);
                CHECK(a.genomes[i].calls()[j].value == b.genomes[i].calls()[j].value);
            }
        }
        CHECK(a.relationships.size() == 2);
    }
    SUBCASE("invalid ranges") {
        CohortSynthesisOptions o;
        o.maf_low = 0.3;
        o.maf_high = 0.2;
        CHECK_THROWS_AS(synthesize_cohort(o), UsageError);
        o.maf_low = 0.0;
        o.maf_high = 0.2;
        CHECK_THROWS_AS(synthesize_cohort(o), UsageError);
        o.maf_low = 0.1;
        o.maf_high = 0.6;
        CHECK_THROWS_AS(synthesize_cohort(o), UsageError);
        o = {};
        o.individuals = 0;
        CHECK_THROWS_AS(synthesize_cohort(o), UsageError);
    }
    SUBCASE("mafs lie in the requested range") {
        CohortSynthesisOptions o;
        o.individuals = 2;
        o.snps = 500;
        o.maf_low = 0.1;
        o.maf_high = 0.2;
        for (const auto& [rsid, rec] : synthesize_cohort(o).frequency_table) {
            CHECK(rec.maf >= 0.1);
            CHECK(rec.maf <= 0.2);
        }
    }
}

TEST_CASE("Mendelian transmission") {
    RngStream rng(5);
    for (int k = 0; k < 100; ++k) {
        CHECK(mendelian_child(GenotypeValue::hom_major(), GenotypeValue::hom_major(), rng).count() == 0);
        CHECK(mendelian_child(GenotypeValue::hom_minor(), GenotypeValue::hom_minor(), rng).count() == 2);
        CHECK(mendelian_child(GenotypeValue::hom_major(), GenotypeValue::hom_minor(), rng).count() == 1);
    }
    std::array<double, 3> counts{};
    const int n = 40000;
    for (int k = 0; k < n; ++k) {
        counts[static_cast<std::size_t>(mendelian_child(GenotypeValue::het(), GenotypeValue::het(), rng).count())] += 1;
    }
    // The four allele pairs are equally likely: (1/4, 1/2, 1/4).
    CHECK(std::abs(counts[0] / n - 0.25) < 0.02);
    CHECK(std::abs(counts[1] / n - 0.5) < 0.02);
    CHECK(std::abs(counts[2] / n - 0.25) < 0.02);
}

TEST_CASE("pedigree synthesis") {
    PedigreeSynthesisOptions o;
    o.founder_pairs = 2;
    o.generations = 3;
    o.children_per_couple = 2;
    o.snps = 1000;
    o.seed = 8;
    const auto c = synthesize_pedigree(o);
    CHECK(c.genomes.size() == 12);
    CHECK(c.provenance == Provenance::kPedigree);
    CHECK(c.relationships.size() == 16);
    c.validate();

    double related = 0.0;
    for (const auto& r : c.relationships) related += pairwise_concordance(*c.find(r.parent), *c.find(r.child));
    related /= static_cast<double>(c.relationships.size());
    // The two founder couples are unrelated to each other.
    const double unrelated = (pairwise_concordance(*c.find("g1_01"), *c.find("g1_03")) +
                              pairwise_concordance(*c.find("g1_02"), *c.find("g1_04"))) /
                             2.0;
    CHECK(related > unrelated);

    o.generations = 1;
    CHECK_THROWS_AS(synthesize_pedigree(o), UsageError);
}

TEST_CASE("pairwise concordance") {
    const auto a = genome_of("a", {0, 1, 2, 0, 1, 2, 0, 1, 2, 0});
    const auto b = genome_of("b", {0, 1, 2, 0, 1, 2, 0, 1, 0, 1});
    CHECK(pairwise_concordance(a, a) == 1.0);
    CHECK(pairwise_concordance(a, b) == doctest::Approx(0.8));
    CHECK(pairwise_concordance(a, b) == pairwise_concordance(b, a));
    const Genome c("c", {{"other", GenotypeValue::het()}});
    CHECK_THROWS_AS(pairwise_concordance(a, c), DataError);
}

TEST_CASE("kin detection") {
    CohortSynthesisOptions o;
    o.individuals = 12;
    o.snps = 0;
    o.seed = 21;
    for (int j = 0; j < 1000; ++j) o.fixed_snps.push_back(freq(fmt::format("rs{:04}", j), 'A', 'G', 0.3));
    auto c = synthesize_cohort(o);
    CHECK(detect_kin(c, 0.8).empty());

    c.genomes.emplace_back("zz_copy", c.genomes[3].calls());
    const auto pairs = detect_kin(c, 0.8);
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].first == c.genomes[3].individual_id());
    CHECK(pairs[0].second == "zz_copy");

    const auto exact = detect_kin(c, 1.0);
    REQUIRE(exact.size() == 1);
    CHECK(exact[0].concordance == 1.0);
}

TEST_CASE("scenario selection") {
    SUBCASE("alzheimer keeps only complete carriers") {
        CohortSynthesisOptions o;
        o.individuals = 8;
        o.snps = 5;
        o.fixed_snps = {freq("rs7412", 'C', 'T', 0.08), freq("rs429358", 'T', 'C', 0.15),
                        freq("rs75932628", 'C', 'T', 0.01)};
        auto c = synthesize_cohort(o);
        // Drop one Alzheimer SNP from three individuals.
        for (std::size_t i : {0u, 2u, 5u}) {
            std::vector<GenotypeCall> calls;
            for (const auto& x : c.genomes[i].calls()) {
                if (x.rsid != "rs429358") calls.push_back(x);
            }
            c.genomes[i] = Genome(c.genomes[i].individual_id(), calls);
        }
        const auto d = select_scenario(c, ScenarioSpec::alzheimer(), 1);
        CHECK(d.individual_count() == 5);
        CHECK(d.snp_count() == 3);
        CHECK(d.present_calls() == 15);
    }
    SUBCASE("count selection") {
        CohortSynthesisOptions o;
        o.individuals = 3;
        o.snps = 10;
        const auto c = synthesize_cohort(o);
        CHECK(select_scenario(c, ScenarioSpec::comparison(10), 0).snp_count() == 10);
        CHECK_THROWS_AS(select_scenario(c, ScenarioSpec::comparison(10000), 0), DataError);
        const auto a = select_scenario(c, ScenarioSpec::comparison(4), 9);
        const auto b = select_scenario(c, ScenarioSpec::comparison(4), 9);
        CHECK(a.rsids == b.rsids);
        CHECK(a.truth == b.truth);
    }
    SUBCASE("explicit rsid must exist") {
        CohortSynthesisOptions o;
        o.individuals = 3;
        o.snps = 10;
        const auto c = synthesize_cohort(o);
        ScenarioSpec spec;
        spec.snp_selection = std::vector<std::string>{"rs_nope"};
        try {
            (void)select_scenario(c, spec, 0);
            FAIL("expected a data error");
        } catch (const DataError& e) {
            CHECK(std::string(e.what()).find("rs_nope") != std::string::npos);
        }
    }
    SUBCASE("kin pairs and pedigree members") {
        CohortSynthesisOptions o;
        o.individuals = 5;
        o.snps = 20;
        o.related_pairs = 2;
        const auto c = synthesize_cohort(o);
        std::vector<std::pair<std::string, std::string>> pairs;
        for (const auto& r : c.relationships) pairs.emplace_back(r.parent, r.child);
        CHECK(select_scenario(c, ScenarioSpec::kin(pairs), 0).individual_count() == 4);
        CHECK(select_scenario(c, ScenarioSpec::utah(), 0).individual_count() == 4);
    }
}

TEST_CASE("cohort directory round-trip") {
    CohortSynthesisOptions o;
    o.individuals = 4;
    o.snps = 30;
    o.related_pairs = 1;
    o.missing_rate = 0.2;
    o.seed = 3;
    const auto c = synthesize_cohort(o);
    const auto dir = std::filesystem::temp_directory_path() / "privmeter_unit_cohort";
    std::filesystem::remove_all(dir);
    write_cohort(dir, c);
    const auto back = read_cohort(dir);
    CHECK(back.provenance == Provenance::kSynthetic);
    REQUIRE(back.genomes.size() == c.genomes.size());
    for (std::size_t i = 0; i < c.genomes.size(); ++i) {
        CHECK(back.genomes[i].individual_id() == c.genomes[i].individual_id());
        CHECK(back.genomes[i].size() == c.genomes[i].size());
    }
    CHECK(back.relationships.size() == 1);
    CHECK(back.frequency_table.size() == c.frequency_table.size());
    std::filesystem::remove_all(dir);
    CHECK_THROWS_AS(read_cohort(dir), DataError);
}
