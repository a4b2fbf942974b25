#include "privmeter/genome_data.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <iterator>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>

#include "privmeter/rng.hpp"
#include "text_util.hpp"

namespace privmeter {

namespace {

bool is_base(char c) noexcept { return c == 'A' || c == 'C' || c == 'G' || c == 'T'; }

constexpr std::array<char, 4> kBases = {'A', 'C', 'G', 'T'};

std::string read_all(std::istream& in) {
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Calls a function for each line with its 1-based number; strips a trailing '\r'.
template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        fn(++line_no, line);
        start = end + 1;
    }
}

void check_maf_range(double low, double high) {
    if (!(low > 0.0) || !(low <= high) || !(high <= 0.5)) {
        throw UsageError(fmt::format(
            "minor allele frequency range must satisfy 0 < low <= high <= 0.5, got [{}, {}]", low,
            high));
    }
}

// Random distinct major/minor letters and a maf drawn from [low, high].
AlleleFrequencyRecord random_frequency_record(std::string rsid, double low, double high,
                                              RngStream& rng) {
    AlleleFrequencyRecord rec;
    rec.rsid = std::move(rsid);
    const auto major = rng.below(4);
    auto minor = rng.below(3);
    if (minor >= major) ++minor;
    rec.major = kBases[major];
    rec.minor = kBases[minor];
    rec.maf = low + (high - low) * rng.uniform();
    return rec;
}

GenotypeValue hardy_weinberg_draw(double maf, RngStream& rng) {
    const int a = rng.uniform() < maf ? 1 : 0;
    const int b = rng.uniform() < maf ? 1 : 0;
    return GenotypeValue::from_count(a + b);
}

std::string synthetic_rsid(std::size_t index) { return fmt::format("rs{}", 900000001 + index); }

std::vector<AlleleFrequencyRecord> synthetic_panel(std::size_t count, double low, double high,
                                                   std::uint64_t seed) {
    RngStream rng(derive_seed(seed, {hash_string("panel")}));
    std::vector<AlleleFrequencyRecord> panel;
    panel.reserve(count);
    for (std::size_t j = 0; j < count; ++j) {
        panel.push_back(random_frequency_record(synthetic_rsid(j), low, high, rng));
    }
    return panel;
}

}  // namespace

// ---------------------------------------------------------------------------

GenotypeValue GenotypeValue::from_count(int minor_alleles) {
    if (minor_alleles < 0 || minor_alleles > 2) {
        throw DataError(fmt::format("genotype value {} is not in {{0, 1, 2}}", minor_alleles));
    }
    return GenotypeValue(static_cast<std::uint8_t>(minor_alleles));
}

Genome::Genome(std::string individual_id, std::vector<GenotypeCall> calls)
    : id_(std::move(individual_id)), calls_(std::move(calls)) {
    std::sort(calls_.begin(), calls_.end(),
              [](const GenotypeCall& a, const GenotypeCall& b) { return a.rsid < b.rsid; });
    const auto dup = std::adjacent_find(
        calls_.begin(), calls_.end(),
        [](const GenotypeCall& a, const GenotypeCall& b) { return a.rsid == b.rsid; });
    if (dup != calls_.end()) {
        throw DataError(fmt::format("duplicate rsid {} in genome {}", dup->rsid, id_));
    }
}

std::optional<GenotypeValue> Genome::find(std::string_view rsid) const {
    const auto it = std::lower_bound(
        calls_.begin(), calls_.end(), rsid,
        [](const GenotypeCall& call, std::string_view key) { return call.rsid < key; });
    if (it == calls_.end() || it->rsid != rsid) return std::nullopt;
    return it->value;
}

std::string_view to_string(Provenance p) noexcept {
    switch (p) {
        case Provenance::kParsed: return "parsed";
        case Provenance::kSynthetic: return "synthetic";
        case Provenance::kPedigree: return "pedigree";
    }
    return "parsed";
}

Provenance parse_provenance(std::string_view text) {
    text = detail::trim(text);
    if (text == "parsed") return Provenance::kParsed;
    if (text == "synthetic") return Provenance::kSynthetic;
    if (text == "pedigree") return Provenance::kPedigree;
    throw DataError(fmt::format("unknown cohort provenance '{}'", text));
}

void Cohort::validate() const {
    std::unordered_set<std::string_view> ids;
    for (const auto& g : genomes) {
        if (!ids.insert(g.individual_id()).second) {
            throw DataError(fmt::format("duplicate individual id {}", g.individual_id()));
        }
        for (const auto& call : g.calls()) {
            if (!frequency_table.contains(call.rsid)) {
                throw DataError(fmt::format("rsid {} of individual {} has no frequency record",
                                            call.rsid, g.individual_id()));
            }
        }
    }
}

const Genome* Cohort::find(std::string_view individual_id) const {
    for (const auto& g : genomes) {
        if (g.individual_id() == individual_id) return &g;
    }
    return nullptr;
}

// ---------------------------------------------------------------------------

ParseResult<std::vector<SnpRecord>> parse_raw_genotypes(std::istream& in) {
    const std::string text = read_all(in);
    if (!detail::valid_utf8(text)) {
        throw DataError("raw genotype input is not valid UTF-8");
    }

    ParseResult<std::vector<SnpRecord>> result;
    for_each_line(text, [&](std::size_t line_no, std::string_view line) {
        if (detail::trim(line).empty() || line.front() == '#') return;
        const auto cols = detail::split(line, '\t');
        if (cols.size() < 4) {
            result.diagnostics.push_back(
                {line_no, fmt::format("expected 4 tab-separated columns, found {}", cols.size())});
            return;
        }
        SnpRecord rec;
        rec.rsid = std::string(detail::trim(cols[0]));
        rec.chromosome = std::string(detail::trim(cols[1]));
        if (rec.rsid.empty()) {
            result.diagnostics.push_back({line_no, "empty rsid"});
            return;
        }
        const auto pos = detail::parse_uint(cols[2]);
        if (!pos) {
            result.diagnostics.push_back(
                {line_no, fmt::format("invalid position '{}'", detail::trim(cols[2]))});
            return;
        }
        rec.position = *pos;
        const std::string_view gt = detail::trim(cols[3]);
        if (gt == "--") {
            rec.genotype.reset();
        } else if (gt.size() == 2 && is_base(gt[0]) && is_base(gt[1])) {
            rec.genotype = std::array<char, 2>{gt[0], gt[1]};
        } else {
            result.diagnostics.push_back({line_no, fmt::format("invalid genotype '{}'", gt)});
            return;
        }
        result.value.push_back(std::move(rec));
    });
    return result;
}

std::optional<GenotypeValue> encode_genotype(const SnpRecord& record,
                                             const AlleleFrequencyRecord& freq) {
    if (record.rsid != freq.rsid) {
        throw UsageError(fmt::format("cannot encode {} with the frequency record of {}",
                                     record.rsid, freq.rsid));
    }
    if (record.missing()) return std::nullopt;
    int minor = 0;
    for (char letter : *record.genotype) {
        if (letter == freq.minor) {
            ++minor;
        } else if (letter != freq.major) {
            throw EncodingError(
                record.rsid,
                fmt::format("genotype {}{} of {} matches neither major {} nor minor {}",
                            (*record.genotype)[0], (*record.genotype)[1], record.rsid, freq.major,
                            freq.minor));
        }
    }
    return GenotypeValue::from_count(minor);
}

ParseResult<FrequencyTable> load_frequency_table(std::istream& in) {
    const std::string text = read_all(in);
    if (!detail::valid_utf8(text)) throw DataError("frequency table is not valid UTF-8");

    ParseResult<FrequencyTable> result;
    bool header_seen = false;
    for_each_line(text, [&](std::size_t line_no, std::string_view line) {
        if (detail::trim(line).empty()) return;
        if (!header_seen) {
            const auto cols = detail::split(line, ',');
            if (cols.size() != 4 || detail::trim(cols[0]) != "rsid" ||
                detail::trim(cols[1]) != "major" || detail::trim(cols[2]) != "minor" ||
                detail::trim(cols[3]) != "maf") {
                throw DataError(fmt::format(
                    "frequency table line {}: expected header 'rsid,major,minor,maf'", line_no));
            }
            header_seen = true;
            return;
        }
        const auto cols = detail::split(line, ',');
        if (cols.size() != 4) {
            result.diagnostics.push_back(
                {line_no, fmt::format("expected 4 columns, found {}", cols.size())});
            return;
        }
        AlleleFrequencyRecord rec;
        rec.rsid = std::string(detail::trim(cols[0]));
        const auto major = detail::trim(cols[1]);
        const auto minor = detail::trim(cols[2]);
        const auto maf = detail::parse_double(cols[3]);
        if (rec.rsid.empty()) {
            result.diagnostics.push_back({line_no, "empty rsid"});
            return;
        }
        if (major.size() != 1 || minor.size() != 1 || !is_base(major[0]) || !is_base(minor[0]) ||
            major[0] == minor[0]) {
            result.diagnostics.push_back(
                {line_no, fmt::format("{}: alleles must be two distinct letters from ACGT",
                                      rec.rsid)});
            return;
        }
        if (!maf || !(*maf >= 0.0 && *maf <= 0.5)) {
            result.diagnostics.push_back(
                {line_no, fmt::format("{}: maf '{}' outside [0, 0.5], row rejected", rec.rsid,
                                      detail::trim(cols[3]))});
            return;
        }
        rec.major = major[0];
        rec.minor = minor[0];
        rec.maf = *maf;
        auto [it, inserted] = result.value.insert_or_assign(rec.rsid, rec);
        if (!inserted) {
            result.diagnostics.push_back(
                {line_no, fmt::format("duplicate rsid {}, keeping the last record", rec.rsid)});
        }
    });
    if (!header_seen) throw DataError("frequency table is missing its header row");
    return result;
}

void write_frequency_table(std::ostream& out, const FrequencyTable& table) {
    out << "rsid,major,minor,maf\n";
    for (const auto& [rsid, rec] : table) {
        out << rsid << ',' << rec.major << ',' << rec.minor << ',' << detail::format_real(rec.maf)
            << '\n';
    }
}

// ---------------------------------------------------------------------------

Cohort synthesize_cohort(const CohortSynthesisOptions& options) {
    if (options.individuals == 0) throw UsageError("cohort synthesis needs at least one individual");
    if (options.snps + options.fixed_snps.size() == 0) {
        throw UsageError("cohort synthesis needs at least one SNP");
    }
    if (options.snps > 0) check_maf_range(options.maf_low, options.maf_high);
    if (!(options.missing_rate >= 0.0 && options.missing_rate < 1.0)) {
        throw UsageError("missing rate must be in [0, 1)");
    }

    std::vector<AlleleFrequencyRecord> panel =
        options.snps > 0 ? synthetic_panel(options.snps, options.maf_low, options.maf_high,
                                           options.seed)
                         : std::vector<AlleleFrequencyRecord>{};
    for (const auto& fixed : options.fixed_snps) {
        if (!(fixed.maf >= 0.0 && fixed.maf <= 0.5) || fixed.major == fixed.minor) {
            throw UsageError(fmt::format("invalid fixed SNP record {}", fixed.rsid));
        }
        panel.push_back(fixed);
    }

    Cohort cohort;
    cohort.provenance = Provenance::kSynthetic;
    for (const auto& rec : panel) {
        if (!cohort.frequency_table.emplace(rec.rsid, rec).second) {
            throw UsageError(fmt::format("rsid {} defined twice", rec.rsid));
        }
    }

    RngStream rng(derive_seed(options.seed, {hash_string("genotypes")}));
    RngStream missing_rng(derive_seed(options.seed, {hash_string("missing")}));

    auto make_genome = [&](std::string id, const std::vector<GenotypeValue>& values) {
        std::vector<GenotypeCall> calls;
        calls.reserve(values.size());
        for (std::size_t j = 0; j < values.size(); ++j) {
            if (options.missing_rate > 0.0 && missing_rng.uniform() < options.missing_rate) {
                continue;
            }
            calls.push_back({panel[j].rsid, values[j]});
        }
        return Genome(std::move(id), std::move(calls));
    };
    auto draw_founder = [&]() {
        std::vector<GenotypeValue> values;
        values.reserve(panel.size());
        for (const auto& rec : panel) values.push_back(hardy_weinberg_draw(rec.maf, rng));
        return values;
    };

    const int width = std::max(4, static_cast<int>(std::to_string(options.individuals).size()));
    for (std::size_t i = 0; i < options.individuals; ++i) {
        cohort.genomes.push_back(make_genome(fmt::format("ind{:0{}}", i + 1, width), draw_founder()));
    }
    for (std::size_t k = 0; k < options.related_pairs; ++k) {
        const auto parent = draw_founder();
        const auto mate = draw_founder();
        std::vector<GenotypeValue> child;
        child.reserve(panel.size());
        for (std::size_t j = 0; j < panel.size(); ++j) {
            child.push_back(mendelian_child(parent[j], mate[j], rng));
        }
        const std::string parent_id = fmt::format("rel{:02}_parent", k + 1);
        const std::string child_id = fmt::format("rel{:02}_child", k + 1);
        cohort.genomes.push_back(make_genome(parent_id, parent));
        cohort.genomes.push_back(make_genome(child_id, child));
        cohort.relationships.push_back({parent_id, child_id});
    }
    return cohort;
}

Cohort synthesize_pedigree(const PedigreeSynthesisOptions& options) {
    if (options.founder_pairs < 1) throw UsageError("pedigree needs at least one founder pair");
    if (options.generations < 2) throw UsageError("pedigree needs at least two generations");
    if (options.snps < 1) throw UsageError("pedigree needs at least one SNP");
    if (options.children_per_couple < 1) throw UsageError("couples need at least one child");
    check_maf_range(options.maf_low, options.maf_high);

    const auto panel = synthetic_panel(options.snps, options.maf_low, options.maf_high, options.seed);
    Cohort cohort;
    cohort.provenance = Provenance::kPedigree;
    for (const auto& rec : panel) cohort.frequency_table.emplace(rec.rsid, rec);

    RngStream rng(derive_seed(options.seed, {hash_string("pedigree")}));

    struct Member {
        std::string id;
        std::vector<GenotypeValue> values;
    };
    auto to_genome = [&](const Member& m) {
        std::vector<GenotypeCall> calls;
        calls.reserve(panel.size());
        for (std::size_t j = 0; j < panel.size(); ++j) calls.push_back({panel[j].rsid, m.values[j]});
        return Genome(m.id, std::move(calls));
    };

    std::vector<Member> generation;
    for (std::size_t k = 0; k < 2 * options.founder_pairs; ++k) {
        Member m{fmt::format("g1_{:02}", k + 1), {}};
        m.values.reserve(panel.size());
        for (const auto& rec : panel) m.values.push_back(hardy_weinberg_draw(rec.maf, rng));
        generation.push_back(std::move(m));
    }
    // Founders form couples (0,1), (2,3), ...
    std::vector<std::pair<std::size_t, std::size_t>> couples;
    for (std::size_t k = 0; k + 1 < generation.size(); k += 2) couples.emplace_back(k, k + 1);

    for (std::size_t gen = 2; gen <= options.generations; ++gen) {
        std::vector<Member> children;
        for (const auto& [a, b] : couples) {
            for (std::size_t c = 0; c < options.children_per_couple; ++c) {
                Member child{fmt::format("g{}_{:02}", gen, children.size() + 1), {}};
                child.values.reserve(panel.size());
                for (std::size_t j = 0; j < panel.size(); ++j) {
                    child.values.push_back(
                        mendelian_child(generation[a].values[j], generation[b].values[j], rng));
                }
                cohort.relationships.push_back({generation[a].id, child.id});
                cohort.relationships.push_back({generation[b].id, child.id});
                children.push_back(std::move(child));
            }
        }
        for (const auto& m : generation) cohort.genomes.push_back(to_genome(m));
        // Pair child i with child i + n/2, which belong to different families
        // whenever there is more than one couple.
        couples.clear();
        const std::size_t half = children.size() / 2;
        for (std::size_t k = 0; k < half; ++k) couples.emplace_back(k, k + half);
        generation = std::move(children);
    }
    for (const auto& m : generation) cohort.genomes.push_back(to_genome(m));
    return cohort;
}

// ---------------------------------------------------------------------------

double pairwise_concordance(const Genome& a, const Genome& b) {
    std::size_t shared = 0;
    std::size_t equal = 0;
    auto ia = a.calls().begin();
    auto ib = b.calls().begin();
    while (ia != a.calls().end() && ib != b.calls().end()) {
        if (ia->rsid < ib->rsid) {
            ++ia;
        } else if (ib->rsid < ia->rsid) {
            ++ib;
        } else {
            ++shared;
            if (ia->value == ib->value) ++equal;
            ++ia;
            ++ib;
        }
    }
    if (shared == 0) {
        throw DataError(fmt::format("genomes {} and {} share no SNPs", a.individual_id(),
                                    b.individual_id()));
    }
    return static_cast<double>(equal) / static_cast<double>(shared);
}

std::vector<KinPair> detect_kin(const Cohort& cohort, double threshold) {
    std::vector<KinPair> pairs;
    const auto& genomes = cohort.genomes;
    if (genomes.size() < 2) return pairs;

    // Dense panel so that every pair costs one linear scan.
    std::unordered_map<std::string_view, std::size_t> index;
    for (const auto& g : genomes) {
        for (const auto& call : g.calls()) index.emplace(call.rsid, index.size());
    }
    std::vector<std::vector<std::int8_t>> dense(genomes.size(),
                                                std::vector<std::int8_t>(index.size(), -1));
    for (std::size_t i = 0; i < genomes.size(); ++i) {
        for (const auto& call : genomes[i].calls()) {
            dense[i][index.at(call.rsid)] = static_cast<std::int8_t>(call.value.count());
        }
    }

    for (std::size_t i = 0; i < genomes.size(); ++i) {
        for (std::size_t k = i + 1; k < genomes.size(); ++k) {
            std::size_t shared = 0;
            std::size_t equal = 0;
            for (std::size_t j = 0; j < index.size(); ++j) {
                const auto x = dense[i][j];
                const auto y = dense[k][j];
                if (x < 0 || y < 0) continue;
                ++shared;
                if (x == y) ++equal;
            }
            if (shared == 0) continue;
            const double c = static_cast<double>(equal) / static_cast<double>(shared);
            if (c > threshold || c == 1.0) {
                const auto& a = genomes[i].individual_id();
                const auto& b = genomes[k].individual_id();
                pairs.push_back(a < b ? KinPair{a, b, c} : KinPair{b, a, c});
            }
        }
    }
    std::sort(pairs.begin(), pairs.end(), [](const KinPair& x, const KinPair& y) {
        return std::tie(x.first, x.second) < std::tie(y.first, y.second);
    });
    return pairs;
}

// ---------------------------------------------------------------------------

std::string_view to_string(ScenarioName name) noexcept {
    switch (name) {
        case ScenarioName::kComparison: return "comparison";
        case ScenarioName::kKin: return "kin";
        case ScenarioName::kUtah: return "utah";
        case ScenarioName::kAlzheimer: return "alzheimer";
        case ScenarioName::kCustom: return "custom";
    }
    return "custom";
}

ScenarioName parse_scenario_name(std::string_view text) {
    for (auto n : {ScenarioName::kComparison, ScenarioName::kKin, ScenarioName::kUtah,
                   ScenarioName::kAlzheimer, ScenarioName::kCustom}) {
        if (to_string(n) == text) return n;
    }
    throw UsageError(fmt::format(
        "unknown scenario '{}' (expected comparison, kin, utah, alzheimer or custom)", text));
}

ScenarioSpec ScenarioSpec::comparison(std::size_t snp_count) {
    ScenarioSpec spec;
    spec.name = ScenarioName::kComparison;
    spec.snp_selection = SnpCount{snp_count};
    spec.individual_selection = AllIndividuals{};
    return spec;
}

ScenarioSpec ScenarioSpec::kin(std::vector<std::pair<std::string, std::string>> pairs) {
    ScenarioSpec spec;
    spec.name = ScenarioName::kKin;
    spec.snp_selection = AllSnps{};
    spec.individual_selection = IndividualPairs{std::move(pairs)};
    return spec;
}

ScenarioSpec ScenarioSpec::utah() {
    ScenarioSpec spec;
    spec.name = ScenarioName::kUtah;
    spec.snp_selection = AllSnps{};
    spec.individual_selection = PedigreeMembers{};
    return spec;
}

ScenarioSpec ScenarioSpec::alzheimer() {
    ScenarioSpec spec;
    spec.name = ScenarioName::kAlzheimer;
    spec.snp_selection = std::vector<std::string>(kAlzheimerRsids.begin(), kAlzheimerRsids.end());
    spec.individual_selection = AllIndividuals{};
    spec.require_complete = true;
    return spec;
}

std::optional<GenotypeValue> ScenarioDataset::truth_at(std::size_t individual,
                                                       std::size_t snp) const {
    const auto v = truth.at(individual * rsids.size() + snp);
    if (v < 0) return std::nullopt;
    return GenotypeValue::from_count(v);
}

std::size_t ScenarioDataset::present_calls() const {
    return static_cast<std::size_t>(
        std::count_if(truth.begin(), truth.end(), [](std::int8_t v) { return v >= 0; }));
}

ScenarioDataset select_scenario(const Cohort& cohort, const ScenarioSpec& spec,
                                std::uint64_t seed) {
    // Individuals
    std::vector<const Genome*> people;
    if (std::holds_alternative<AllIndividuals>(spec.individual_selection)) {
        for (const auto& g : cohort.genomes) people.push_back(&g);
    } else if (const auto* sel = std::get_if<IndividualPairs>(&spec.individual_selection)) {
        std::unordered_set<std::string_view> seen;
        auto add = [&](const std::string& id) {
            const Genome* g = cohort.find(id);
            if (g == nullptr) throw DataError(fmt::format("individual {} is not in the cohort", id));
            if (seen.insert(g->individual_id()).second) people.push_back(g);
        };
        for (const auto& [a, b] : sel->pairs) {
            add(a);
            add(b);
        }
    } else {
        std::unordered_set<std::string_view> members;
        for (const auto& rel : cohort.relationships) {
            members.insert(rel.parent);
            members.insert(rel.child);
        }
        for (const auto& g : cohort.genomes) {
            if (members.contains(g.individual_id())) people.push_back(&g);
        }
    }
    if (people.empty()) {
        throw DataError(fmt::format("scenario {} selects no individuals", to_string(spec.name)));
    }

    // SNPs
    std::vector<std::string> rsids;
    if (const auto* explicit_list = std::get_if<std::vector<std::string>>(&spec.snp_selection)) {
        for (const auto& rsid : *explicit_list) {
            const bool carried = std::any_of(people.begin(), people.end(),
                                             [&](const Genome* g) { return g->contains(rsid); });
            if (!cohort.frequency_table.contains(rsid) || !carried) {
                throw DataError(fmt::format("rsid {} is not present in the cohort", rsid));
            }
            rsids.push_back(rsid);
        }
    } else {
        std::set<std::string_view> available;
        for (const Genome* g : people) {
            for (const auto& call : g->calls()) {
                if (cohort.frequency_table.contains(call.rsid)) available.insert(call.rsid);
            }
        }
        std::vector<std::string> candidates(available.begin(), available.end());
        if (const auto* count = std::get_if<SnpCount>(&spec.snp_selection)) {
            if (count->count == 0) throw UsageError("SNP count selection must be positive");
            if (count->count > candidates.size()) {
                throw DataError(fmt::format("scenario {} requests {} SNPs but only {} are available",
                                            to_string(spec.name), count->count,
                                            candidates.size()));
            }
            // Partial Fisher–Yates, then restore panel order.
            RngStream rng(derive_seed(seed, {hash_string("snp-selection")}));
            std::vector<std::size_t> order(candidates.size());
            std::iota(order.begin(), order.end(), std::size_t{0});
            for (std::size_t k = 0; k < count->count; ++k) {
                const std::size_t pick = k + rng.below(order.size() - k);
                std::swap(order[k], order[pick]);
            }
            order.resize(count->count);
            std::sort(order.begin(), order.end());
            for (std::size_t idx : order) rsids.push_back(candidates[idx]);
        } else {
            rsids = std::move(candidates);
        }
    }
    if (rsids.empty()) {
        throw DataError(fmt::format("scenario {} selects no SNPs", to_string(spec.name)));
    }

    if (spec.require_complete) {
        std::erase_if(people, [&](const Genome* g) {
            return !std::all_of(rsids.begin(), rsids.end(),
                                [&](const std::string& r) { return g->contains(r); });
        });
        if (people.empty()) {
            throw DataError(fmt::format("no individual carries all SNPs of scenario {}",
                                        to_string(spec.name)));
        }
    }

    ScenarioDataset data;
    data.name = std::string(to_string(spec.name));
    data.rsids = rsids;
    for (const auto& r : rsids) data.frequencies.push_back(cohort.frequency_table.find(r)->second);
    data.truth.assign(people.size() * rsids.size(), -1);
    for (std::size_t i = 0; i < people.size(); ++i) {
        data.individuals.push_back(people[i]->individual_id());
        for (std::size_t j = 0; j < rsids.size(); ++j) {
            if (const auto v = people[i]->find(rsids[j])) {
                data.truth[i * rsids.size() + j] = static_cast<std::int8_t>(v->count());
            }
        }
    }
    return data;
}

// ---------------------------------------------------------------------------

void write_cohort(const std::filesystem::path& directory, const Cohort& cohort) {
    std::filesystem::create_directories(directory);
    {
        std::ofstream out(directory / "genomes.csv", std::ios::binary);
        if (!out) throw DataError(fmt::format("cannot write {}", (directory / "genomes.csv").string()));
        out << "individual,rsid,genotype_value\n";
        for (const auto& g : cohort.genomes) {
            for (const auto& call : g.calls()) {
                out << g.individual_id() << ',' << call.rsid << ',' << call.value.count() << '\n';
            }
        }
    }
    {
        std::ofstream out(directory / "frequencies.csv", std::ios::binary);
        write_frequency_table(out, cohort.frequency_table);
    }
    {
        std::ofstream out(directory / "provenance.txt", std::ios::binary);
        out << to_string(cohort.provenance) << '\n';
    }
    const auto rel_path = directory / "relationships.csv";
    if (!cohort.relationships.empty()) {
        std::ofstream out(rel_path, std::ios::binary);
        out << "parent,child\n";
        for (const auto& r : cohort.relationships) out << r.parent << ',' << r.child << '\n';
    } else {
        std::filesystem::remove(rel_path);
    }
}

Cohort read_cohort(const std::filesystem::path& directory) {
    const auto genomes_path = directory / "genomes.csv";
    const auto freq_path = directory / "frequencies.csv";
    std::ifstream genomes_in(genomes_path, std::ios::binary);
    if (!genomes_in) throw DataError(fmt::format("cannot open {}", genomes_path.string()));
    std::ifstream freq_in(freq_path, std::ios::binary);
    if (!freq_in) throw DataError(fmt::format("cannot open {}", freq_path.string()));

    Cohort cohort;
    auto table = load_frequency_table(freq_in);
    if (!table.diagnostics.empty()) {
        const auto& d = table.diagnostics.front();
        throw DataError(fmt::format("{} line {}: {}", freq_path.string(), d.line, d.message));
    }
    cohort.frequency_table = std::move(table.value);

    const std::string text = read_all(genomes_in);
    std::vector<std::string> order;
    std::unordered_map<std::string, std::vector<GenotypeCall>> calls;
    bool header = false;
    for_each_line(text, [&](std::size_t line_no, std::string_view line) {
        if (detail::trim(line).empty()) return;
        const auto cols = detail::split(line, ',');
        if (!header) {
            if (cols.size() != 3 || detail::trim(cols[0]) != "individual") {
                throw DataError(fmt::format("{}: expected header 'individual,rsid,genotype_value'",
                                            genomes_path.string()));
            }
            header = true;
            return;
        }
        const auto value = detail::parse_uint(cols.size() == 3 ? cols[2] : std::string_view{});
        if (cols.size() != 3 || !value || *value > 2) {
            throw DataError(fmt::format("{} line {}: malformed row", genomes_path.string(), line_no));
        }
        std::string id(detail::trim(cols[0]));
        auto [it, inserted] = calls.try_emplace(id);
        if (inserted) order.push_back(id);
        it->second.push_back(
            {std::string(detail::trim(cols[1])), GenotypeValue::from_count(static_cast<int>(*value))});
    });
    for (const auto& id : order) cohort.genomes.emplace_back(id, std::move(calls[id]));

    if (std::ifstream prov(directory / "provenance.txt"); prov) {
        std::string word;
        prov >> word;
        cohort.provenance = parse_provenance(word);
    }
    if (std::ifstream rel(directory / "relationships.csv", std::ios::binary); rel) {
        const std::string rel_text = read_all(rel);
        bool rel_header = false;
        for_each_line(rel_text, [&](std::size_t line_no, std::string_view line) {
            if (detail::trim(line).empty()) return;
            if (!rel_header) {
                rel_header = true;
                return;
            }
            const auto cols = detail::split(line, ',');
            if (cols.size() != 2) {
                throw DataError(fmt::format("relationships.csv line {}: malformed row", line_no));
            }
            cohort.relationships.push_back(
                {std::string(detail::trim(cols[0])), std::string(detail::trim(cols[1]))});
        });
    }
    cohort.validate();
    return cohort;
}

}  // namespace privmeter
