// privmeter command-line tool.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <nlohmann/json.hpp>

#include "privmeter/adversary.hpp"
#include "privmeter/genome_data.hpp"
#include "privmeter/metrics.hpp"
#include "privmeter/parallel.hpp"
#include "privmeter/pipeline.hpp"
#include "privmeter/report.hpp"
#include "privmeter/strength.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace privmeter;

namespace {

struct Globals {
    std::uint64_t seed = 0;
    std::string out = ".";
    std::string config;
};

// ---------------------------------------------------------------------------
// small file helpers

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError(fmt::format("cannot write {}", path.string()));
    out << text;
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(fmt::format("cannot read {}", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json read_json(const fs::path& path) {
    try {
        return json::parse(read_text(path));
    } catch (const json::exception& e) {
        throw DataError(fmt::format("{}: {}", path.string(), e.what()));
    }
}

/// Path as recorded in manifests: relative to the output root when inside it.
std::string display_path(const fs::path& p, const fs::path& root) {
    const auto rel = fs::weakly_canonical(p).lexically_relative(fs::weakly_canonical(root));
    if (!rel.empty() && *rel.begin() != "..") return rel.generic_string();
    return p.generic_string();
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

json cohort_digests(const fs::path& cohort_dir) {
    json d = json::object();
    for (const char* name : {"genomes.csv", "frequencies.csv", "provenance.txt", "relationships.csv"}) {
        if (fs::exists(cohort_dir / name)) d[name] = file_digest(cohort_dir / name);
    }
    return d;
}

void write_manifest(const Globals& g, const std::string& name, json body) {
    json m;
    m["tool"] = "privmeter";
    m["version"] = tool_version();
    m["command"] = name;
    m["seed"] = g.seed;
    for (auto& [k, v] : body.items()) m[k] = v;
    write_text(fs::path(g.out) / "manifests" / (name + ".json"), m.dump(2) + "\n");
}

std::vector<AdversaryModel> parse_models(const std::string& text) {
    if (text == "all") return {kAllModels.begin(), kAllModels.end()};
    std::vector<AdversaryModel> out;
    for (const auto& m : split_list(text)) out.push_back(parse_adversary_model(m));
    if (out.empty()) throw UsageError("no adversary model given");
    return out;
}

// ---------------------------------------------------------------------------
// cohort commands

struct SynthArgs {
    std::size_t individuals = 100;
    std::size_t snps = 10000;
    double maf_low = 0.05;
    double maf_high = 0.5;
    std::size_t related_pairs = 0;
    double missing_rate = 0.0;
    bool no_alzheimer = false;
    std::string cohort;
};

// Population frequencies of the three Alzheimer's risk SNPs used by the preset.
const std::vector<AlleleFrequencyRecord> kAlzheimerPanel = {
    {"rs429358", 'T', 'C', 0.15}, {"rs7412", 'C', 'T', 0.08}, {"rs75932628", 'C', 'T', 0.002}};

int cmd_synth(const Globals& g, const SynthArgs& a) {
    CohortSynthesisOptions o;
    o.individuals = a.individuals;
    o.snps = a.snps;
    o.maf_low = a.maf_low;
    o.maf_high = a.maf_high;
    o.seed = g.seed;
    o.related_pairs = a.related_pairs;
    o.missing_rate = a.missing_rate;
    if (!a.no_alzheimer) o.fixed_snps = kAlzheimerPanel;
    const Cohort cohort = synthesize_cohort(o);
    const fs::path dir = a.cohort.empty() ? fs::path(g.out) / "cohort" : fs::path(a.cohort);
    write_cohort(dir, cohort);
    write_manifest(g, "synth",
                   {{"cohort", display_path(dir, g.out)},
                    {"individuals", a.individuals},
                    {"snps", a.snps},
                    {"maf_range", {a.maf_low, a.maf_high}},
                    {"related_pairs", a.related_pairs},
                    {"missing_rate", a.missing_rate},
                    {"alzheimer_snps", !a.no_alzheimer},
                    {"outputs", cohort_digests(dir)}});
    fmt::print("wrote cohort of {} genomes to {}\n", cohort.genomes.size(), dir.string());
    return 0;
}

struct PedigreeArgs {
    std::size_t founder_pairs = 3;
    std::size_t generations = 3;
    std::size_t snps = 10000;
    std::size_t children = 2;
    double maf_low = 0.05;
    double maf_high = 0.5;
    std::string cohort;
};

int cmd_pedigree(const Globals& g, const PedigreeArgs& a) {
    PedigreeSynthesisOptions o;
    o.founder_pairs = a.founder_pairs;
    o.generations = a.generations;
    o.snps = a.snps;
    o.children_per_couple = a.children;
    o.maf_low = a.maf_low;
    o.maf_high = a.maf_high;
    o.seed = g.seed;
    const Cohort cohort = synthesize_pedigree(o);
    const fs::path dir = a.cohort.empty() ? fs::path(g.out) / "pedigree" : fs::path(a.cohort);
    write_cohort(dir, cohort);
    write_manifest(g, "pedigree",
                   {{"cohort", display_path(dir, g.out)},
                    {"founder_pairs", a.founder_pairs},
                    {"generations", a.generations},
                    {"snps", a.snps},
                    {"children_per_couple", a.children},
                    {"outputs", cohort_digests(dir)}});
    fmt::print("wrote pedigree of {} genomes to {}\n", cohort.genomes.size(), dir.string());
    return 0;
}

struct IngestArgs {
    std::vector<std::string> genotypes;
    std::string freq;
    std::string cohort;
};

int cmd_ingest(const Globals& g, const IngestArgs& a) {
    std::ifstream freq_in(a.freq, std::ios::binary);
    if (!freq_in) throw DataError(fmt::format("cannot open frequency table {}", a.freq));
    auto table = load_frequency_table(freq_in);
    for (const auto& d : table.diagnostics) fmt::print(stderr, "warning: {} line {}: {}\n", a.freq, d.line, d.message);

    Cohort cohort;
    cohort.provenance = Provenance::kParsed;
    cohort.frequency_table = table.value;
    json inputs = json::object();
    inputs[fs::path(a.freq).filename().string()] = file_digest(a.freq);
    for (const auto& path : a.genotypes) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw DataError(fmt::format("cannot open genotype file {}", path));
        const auto parsed = parse_raw_genotypes(in);
        for (const auto& d : parsed.diagnostics) {
            fmt::print(stderr, "warning: {} line {}: {}\n", path, d.line, d.message);
        }
        std::vector<GenotypeCall> calls;
        std::size_t unknown = 0;
        std::size_t mismatched = 0;
        for (const auto& rec : parsed.value) {
            const auto it = cohort.frequency_table.find(rec.rsid);
            if (it == cohort.frequency_table.end()) {
                ++unknown;
                continue;
            }
            try {
                if (const auto v = encode_genotype(rec, it->second)) calls.push_back({rec.rsid, *v});
            } catch (const EncodingError& e) {
                ++mismatched;
                fmt::print(stderr, "warning: {}: {}\n", path, e.what());
            }
        }
        if (unknown > 0) fmt::print(stderr, "warning: {}: {} calls without a frequency record skipped\n", path, unknown);
        if (mismatched > 0) fmt::print(stderr, "warning: {}: {} calls with foreign alleles skipped\n", path, mismatched);
        cohort.genomes.emplace_back(fs::path(path).stem().string(), std::move(calls));
        inputs[fs::path(path).filename().string()] = file_digest(path);
    }
    cohort.validate();
    const fs::path dir = a.cohort.empty() ? fs::path(g.out) / "cohort" : fs::path(a.cohort);
    write_cohort(dir, cohort);
    write_manifest(g, "ingest", {{"cohort", display_path(dir, g.out)}, {"inputs", inputs}, {"outputs", cohort_digests(dir)}});
    fmt::print("ingested {} genomes into {}\n", cohort.genomes.size(), dir.string());
    return 0;
}

struct KinArgs {
    std::string cohort;
    double threshold = 0.8;
};

int cmd_kin(const Globals& g, const KinArgs& a) {
    const fs::path dir = a.cohort.empty() ? fs::path(g.out) / "cohort" : fs::path(a.cohort);
    const Cohort cohort = read_cohort(dir);
    const auto pairs = detect_kin(cohort, a.threshold);
    std::string csv = "first,second,concordance\n";
    for (const auto& p : pairs) csv += fmt::format("{},{},{:.12g}\n", p.first, p.second, p.concordance);
    write_text(fs::path(g.out) / "kin.csv", csv);
    write_manifest(g, "kin", {{"cohort", display_path(dir, g.out)},
                              {"threshold", a.threshold},
                              {"outputs", {{"kin.csv", file_digest(fs::path(g.out) / "kin.csv")}}}});
    fmt::print("{} related pairs at concordance threshold {}\n", pairs.size(), a.threshold);
    return 0;
}

// ---------------------------------------------------------------------------
// scenario plans

struct ScenarioArgs {
    std::string cohort;
    std::string scenario = "comparison";
    std::size_t snps = 10000;
    double kin_threshold = 0.8;
};

fs::path cohort_dir(const Globals& g, const ScenarioArgs& s) {
    if (!s.cohort.empty()) return s.cohort;
    if (s.scenario == "utah") return fs::path(g.out) / "pedigree";
    return fs::path(g.out) / "cohort";
}

ScenarioDataset load_scenario(const Globals& g, const ScenarioArgs& s) {
    const Cohort cohort = read_cohort(cohort_dir(g, s));
    ScenarioSpec spec;
    switch (parse_scenario_name(s.scenario)) {
        case ScenarioName::kComparison: spec = ScenarioSpec::comparison(s.snps); break;
        case ScenarioName::kUtah: spec = ScenarioSpec::utah(); break;
        case ScenarioName::kAlzheimer: spec = ScenarioSpec::alzheimer(); break;
        case ScenarioName::kKin: {
            std::vector<std::pair<std::string, std::string>> pairs;
            for (const auto& r : cohort.relationships) pairs.emplace_back(r.parent, r.child);
            if (pairs.empty()) {
                for (const auto& k : detect_kin(cohort, s.kin_threshold)) pairs.emplace_back(k.first, k.second);
            }
            if (pairs.empty()) throw DataError("the cohort contains no related individuals for the kin scenario");
            spec = ScenarioSpec::kin(std::move(pairs));
            break;
        }
        case ScenarioName::kCustom:
            throw UsageError("the custom scenario is available through the library only");
    }
    return select_scenario(cohort, spec, g.seed);
}

fs::path plan_dir(const Globals& g, const std::string& scenario, AdversaryModel model) {
    return fs::path(g.out) / "estimates" / scenario / std::string(to_string(model));
}

struct EstimateArgs {
    ScenarioArgs scenario;
    std::string models = "normal";
    std::size_t replications = 15;
    std::string csv = "first";
};

int cmd_estimate(const Globals& g, const EstimateArgs& a) {
    if (a.csv != "first" && a.csv != "all" && a.csv != "none") {
        throw UsageError(fmt::format("--csv must be first, all or none, not '{}'", a.csv));
    }
    if (a.replications == 0) throw UsageError("at least one replication is required");
    const auto models = parse_models(a.models);
    const ScenarioDataset data = load_scenario(g, a.scenario);
    const fs::path cdir = cohort_dir(g, a.scenario);
    const std::size_t threads = default_thread_count();
    std::size_t warnings = 0;

    for (AdversaryModel model : models) {
        const auto ladder = default_ladder(model);
        const fs::path dir = plan_dir(g, data.name, model);
        fs::create_directories(dir);
        std::string precision = "scenario,adversary_model,strength_index,level_parameter,mean_p_truth,ci_half_width,relative_error,exceeds_limit\n";
        json levels = json::array();
        for (std::size_t l = 0; l < ladder.size(); ++l) {
            levels.push_back(ladder[l].parameter());
            std::vector<double> rep_means(a.replications);
            for (std::size_t r = 0; r < a.replications; ++r) {
                std::vector<IndividualEstimates> per_person(data.individual_count());
                parallel_for(per_person.size(), threads, [&](std::size_t i) {
                    per_person[i] = estimate_individual(data, ladder[l], i, r, g.seed);
                });
                double sum = 0.0;
                std::size_t count = 0;
                for (std::size_t i = 0; i < per_person.size(); ++i) {
                    for (std::size_t k = 0; k < per_person[i].snp_index.size(); ++k) {
                        const auto truth = data.truth_at(i, per_person[i].snp_index[k]);
                        sum += per_person[i].estimates[k].of(*truth);
                        ++count;
                    }
                }
                rep_means[r] = count ? sum / static_cast<double>(count) : 0.0;
                if (a.csv == "all" || (a.csv == "first" && r == 0)) {
                    const fs::path file = dir / fmt::format("level_{}", l) / fmt::format("rep_{}.csv", r);
                    fs::create_directories(file.parent_path());
                    std::ofstream out(file, std::ios::binary);
                    out << "individual,rsid,replication,p0,p1,p2\n";
                    for (std::size_t i = 0; i < per_person.size(); ++i) {
                        for (std::size_t k = 0; k < per_person[i].snp_index.size(); ++k) {
                            const auto& e = per_person[i].estimates[k];
                            out << data.individuals[i] << ',' << data.rsids[per_person[i].snp_index[k]] << ',' << r
                                << ',' << fmt::format("{:.12g},{:.12g},{:.12g}", e[0], e[1], e[2]) << '\n';
                        }
                    }
                }
            }
            if (a.replications >= 2) {
                const auto ci = mean_ci(rep_means);
                const bool exceeds = !(ci.relative_error < 0.05);
                warnings += exceeds;
                precision += fmt::format("{},{},{},{:.12g},{:.12g},{:.12g},{:.12g},{}\n", data.name, to_string(model), l,
                                         ladder[l].parameter(), ci.mean, ci.half_width, ci.relative_error,
                                         exceeds ? "yes" : "no");
            }
        }
        write_text(dir / "precision.csv", precision);
        json plan;
        plan["scenario"] = data.name;
        plan["model"] = to_string(model);
        plan["levels"] = levels;
        plan["replications"] = a.replications;
        plan["seed"] = g.seed;
        plan["cohort"] = display_path(cdir, g.out);
        plan["snps"] = a.scenario.snps;
        plan["kin_threshold"] = a.scenario.kin_threshold;
        plan["cohort_digests"] = cohort_digests(cdir);
        plan["individuals"] = data.individual_count();
        plan["scenario_snps"] = data.snp_count();
        write_text(dir / "plan.json", plan.dump(2) + "\n");
        write_manifest(g, fmt::format("estimate_{}_{}", data.name, to_string(model)),
                       {{"plan", display_path(dir / "plan.json", g.out)},
                        {"csv", a.csv},
                        {"outputs", {{"plan.json", file_digest(dir / "plan.json")},
                                     {"precision.csv", file_digest(dir / "precision.csv")}}}});
        fmt::print("{} / {}: {} levels x {} replications\n", data.name, to_string(model), ladder.size(), a.replications);
    }
    if (warnings > 0) {
        fmt::print(stderr, "warning: {} level(s) with a CI relative error of 5% or more; see precision.csv\n", warnings);
    }
    return 0;
}

// ---------------------------------------------------------------------------
// metrics

struct MetricsArgs {
    std::string scenario = "comparison";
    std::string models = "all";
    std::string metrics = "all";
    double ali = 0.7;
    double usi = 0.3;
    std::string health_weights;
    std::string health_base = "expected_estimation_error";
    std::string aggregation = "arithmetic";
    bool per_snp = false;
};

std::map<std::string, double, std::less<>> load_health_weights(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(fmt::format("cannot open health weights {}", path));
    std::map<std::string, double, std::less<>> weights;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw DataError(fmt::format("{} line {}: expected rsid,weight", path, line_no));
        const std::string rsid = line.substr(0, comma);
        if (line_no == 1 && rsid == "rsid") continue;
        char* end = nullptr;
        const std::string num = line.substr(comma + 1);
        const double w = std::strtod(num.c_str(), &end);
        if (end == num.c_str() || !(w >= 0.0)) throw DataError(fmt::format("{} line {}: bad weight", path, line_no));
        weights[rsid] = w;
    }
    if (weights.empty()) throw DataError(fmt::format("{} lists no weights", path));
    return weights;
}

int cmd_metrics(const Globals& g, const MetricsArgs& a) {
    MetricParams params;
    params.ali_threshold = a.ali;
    params.usi_threshold = a.usi;
    params.health_base = parse_metric(a.health_base);
    params.aggregation = parse_aggregation(a.aggregation);
    if (!a.health_weights.empty()) params.health_weights = load_health_weights(a.health_weights);
    params.validate();

    std::optional<std::set<std::string>> keep;
    if (a.metrics != "all") {
        keep.emplace();
        for (const auto& name : split_list(a.metrics)) keep->insert(std::string(to_string(parse_metric(name))));
    }

    const auto models = parse_models(a.models);
    std::size_t done = 0;
    std::size_t flagged = 0;
    for (AdversaryModel model : models) {
        const fs::path pdir = plan_dir(g, a.scenario, model);
        if (!fs::exists(pdir / "plan.json")) {
            if (a.models == "all") continue;
            throw DataError(fmt::format("no estimates for scenario '{}' under the {} adversary (run estimate first)",
                                        a.scenario, to_string(model)));
        }
        const json plan = read_json(pdir / "plan.json");
        ScenarioArgs s;
        s.scenario = plan.at("scenario").get<std::string>();
        s.snps = plan.at("snps").get<std::size_t>();
        s.kin_threshold = plan.at("kin_threshold").get<double>();
        s.cohort = (fs::path(g.out) / plan.at("cohort").get<std::string>()).string();
        if (fs::path(plan.at("cohort").get<std::string>()).is_absolute()) s.cohort = plan.at("cohort").get<std::string>();
        if (cohort_digests(s.cohort) != plan.at("cohort_digests")) {
            throw DataError(fmt::format("cohort {} changed since the estimates were planned", s.cohort));
        }
        Globals pg = g;
        pg.seed = plan.at("seed").get<std::uint64_t>();
        const ScenarioDataset data = load_scenario(pg, s);

        std::vector<AdversaryLevel> ladder;
        for (double p : plan.at("levels")) {
            switch (model) {
                case AdversaryModel::kNormal: ladder.push_back(AdversaryLevel::normal(p)); break;
                case AdversaryModel::kUniform: ladder.push_back(AdversaryLevel::uniform(p)); break;
                case AdversaryModel::kReference: ladder.push_back(AdversaryLevel::reference(p)); break;
            }
        }
        LadderOptions opts;
        opts.replications = plan.at("replications").get<std::size_t>();
        opts.seed = pg.seed;
        opts.threads = default_thread_count();
        opts.params = params;
        const LadderResult result = evaluate_ladder(data, ladder, opts);

        const fs::path mdir = fs::path(g.out) / "metrics" / data.name / std::string(to_string(model));
        fs::create_directories(mdir);
        {
            std::ostringstream csv;
            write_metrics_csv(csv, result);
            std::string text = csv.str();
            if (keep) {
                std::istringstream lines(text);
                std::string line;
                std::string filtered;
                std::getline(lines, line);
                filtered = line + "\n";
                while (std::getline(lines, line)) {
                    const auto last = line.rfind(',');
                    const auto prev = line.rfind(',', last - 1);
                    if (keep->contains(line.substr(prev + 1, last - prev - 1))) filtered += line + "\n";
                }
                text = std::move(filtered);
            }
            write_text(mdir / "metrics.csv", text);
        }
        const auto rows = precision_report(result);
        {
            std::ostringstream csv;
            write_precision_csv(csv, result, rows);
            write_text(mdir / "precision.csv", csv.str());
        }
        for (const auto& r : rows) {
            if (r.exceeds && metric_info(r.metric).evaluated) ++flagged;
        }
        if (a.per_snp) {
            std::ofstream out(mdir / "per_snp.csv", std::ios::binary);
            write_per_snp_csv(out, data, ladder, opts);
        }
        json params_json = {{"ali_threshold", params.ali_threshold},
                            {"usi_threshold", params.usi_threshold},
                            {"health_base", to_string(params.health_base)},
                            {"aggregation", to_string(params.aggregation)},
                            {"health_weights", a.health_weights.empty() ? json("default")
                                                                         : json(file_digest(a.health_weights))}};
        write_text(mdir / "params.json", params_json.dump(2) + "\n");
        write_manifest(g, fmt::format("metrics_{}_{}", data.name, to_string(model)),
                       {{"plan", display_path(pdir / "plan.json", g.out)},
                        {"params", params_json},
                        {"metrics", a.metrics},
                        {"outputs", {{"metrics.csv", file_digest(mdir / "metrics.csv")},
                                     {"precision.csv", file_digest(mdir / "precision.csv")}}}});
        ++done;
        fmt::print("{} / {}: metrics for {} individuals\n", data.name, to_string(model), data.individual_count());
    }
    if (done == 0) throw DataError(fmt::format("no estimates found for scenario '{}'", a.scenario));
    if (flagged > 0) {
        fmt::print(stderr, "warning: {} (level, metric) means with a CI relative error of 5% or more; see precision.csv\n",
                   flagged);
    }
    return 0;
}

// ---------------------------------------------------------------------------
// strength / report / sweep

struct LayoutArgs {
    std::string scenarios = "utah,kin,comparison,alzheimer";
    std::string models = "uniform,normal,reference";
};

HeatMapLayout make_layout(const LayoutArgs& a) {
    HeatMapLayout layout;
    layout.scenarios = split_list(a.scenarios);
    layout.models = parse_models(a.models);
    if (layout.scenarios.empty()) throw UsageError("no scenario given");
    return layout;
}

MetricSeries load_series(const Globals& g, const HeatMapLayout& layout) {
    MetricSeries series;
    for (const auto& scenario : layout.scenarios) {
        for (AdversaryModel model : layout.models) {
            const fs::path file = fs::path(g.out) / "metrics" / scenario / std::string(to_string(model)) / "metrics.csv";
            if (!fs::exists(file)) {
                throw DataError(fmt::format("missing metrics for scenario '{}' under the {} adversary ({})", scenario,
                                            to_string(model), file.string()));
            }
            std::ifstream in(file, std::ios::binary);
            const auto rows = read_metrics_csv(in);
            add_to_series(series, rows);
        }
    }
    return series;
}

struct PointArgs {
    double right = 1.0;
    double wrong = -1.0;
    double insignificant = -0.2;
    double peak = -2.0;
    double alpha = 0.05;

    StrengthConfig config() const {
        StrengthConfig c{right, wrong, insignificant, peak, alpha};
        c.validate();
        return c;
    }
};

int cmd_strength(const Globals& g, const LayoutArgs& l, const PointArgs& p) {
    const auto layout = make_layout(l);
    const auto config = p.config();
    const auto series = load_series(g, layout);
    const auto maps = evaluate_all_strength(series, config, layout, default_thread_count());
    const fs::path dir = fs::path(g.out) / "strength";
    write_text(dir / "heatmaps.json", heatmap_json(maps));
    std::string summary = "metric,direction,overall_pct\n";
    for (const auto& m : maps) {
        write_text(dir / (std::string(to_string(m.metric)) + ".svg"), heatmap_svg(m));
        summary += fmt::format("{},{},{:.12g}\n", to_string(m.metric), direction_code(metric_info(m.metric).direction),
                               m.overall_pct);
    }
    summary += fmt::format("{},{},excluded\n", to_string(MetricId::kMaxEntropy), 'H');
    write_text(dir / "overall.csv", summary);
    write_manifest(g, "strength",
                   {{"scenarios", layout.scenarios},
                    {"models", split_list(l.models)},
                    {"points", {config.points_right, config.points_wrong, config.points_insignificant, config.points_peak}},
                    {"alpha", config.alpha}});
    fmt::print("wrote {} heat maps to {}\n", maps.size(), dir.string());
    return 0;
}

struct ReportArgs {
    std::string scenario = "alzheimer";
    std::string models = "all";
    std::string radar_metrics =
        "adversarys_success_rate,amount_of_information_leaked,health_privacy,information_surprisal,"
        "percentage_incorrectly_classified,relative_entropy,user_specified_innocence";
};

int cmd_report(const Globals& g, const ReportArgs& a) {
    std::vector<MetricId> axes;
    for (const auto& name : split_list(a.radar_metrics)) axes.push_back(parse_metric(name));
    if (axes.size() < 3) throw UsageError("a radar plot needs at least three metric axes");
    const fs::path dir = fs::path(g.out) / "report";
    std::size_t written = 0;
    for (AdversaryModel model : parse_models(a.models)) {
        const fs::path file = fs::path(g.out) / "metrics" / a.scenario / std::string(to_string(model)) / "metrics.csv";
        if (!fs::exists(file)) {
            if (a.models == "all") continue;
            throw DataError(fmt::format("missing metrics for scenario '{}' under the {} adversary", a.scenario,
                                        to_string(model)));
        }
        std::ifstream in(file, std::ios::binary);
        const auto rows = read_metrics_csv(in);
        MetricSeries series;
        add_to_series(series, rows);

        const auto* first = series.find({a.scenario, model, axes.front()});
        if (first == nullptr) throw DataError(fmt::format("{} holds no {} values", file.string(), to_string(axes.front())));
        const std::size_t levels = first->size();
        std::vector<std::size_t> shown = {0, levels / 2, levels - 1};
        shown.erase(std::unique(shown.begin(), shown.end()), shown.end());

        std::vector<std::vector<double>> bounds(axes.size());
        std::vector<std::vector<double>> values(shown.size(), std::vector<double>(axes.size()));
        for (std::size_t k = 0; k < axes.size(); ++k) {
            const auto* s = series.find({a.scenario, model, axes[k]});
            if (s == nullptr || s->size() != levels) {
                throw DataError(fmt::format("{} holds no complete {} ladder", file.string(), to_string(axes[k])));
            }
            for (const auto& level : *s) bounds[k].insert(bounds[k].end(), level.begin(), level.end());
            for (std::size_t j = 0; j < shown.size(); ++j) values[j][k] = mean((*s)[shown[j]]);
        }
        std::vector<std::string> labels;
        for (std::size_t j : shown) labels.push_back(fmt::format("level {}", j));
        const auto plot = build_radar(fmt::format("{} / {}", a.scenario, to_string(model)), axes, labels, values, bounds);
        write_text(dir / fmt::format("{}_{}_radar.svg", a.scenario, to_string(model)), radar_svg(plot));

        std::vector<ViolinBundle> bundles;
        for (MetricId m : evaluated_metrics()) {
            const auto* s = series.find({a.scenario, model, m});
            if (s == nullptr) continue;
            std::vector<std::pair<std::string, std::vector<double>>> lv;
            for (std::size_t j = 0; j < s->size(); ++j) lv.emplace_back(fmt::format("level {}", j), (*s)[j]);
            bundles.push_back(violin_export(m, lv));
        }
        write_text(dir / fmt::format("{}_{}_violin.json", a.scenario, to_string(model)), violin_json(bundles));
        ++written;
    }
    if (written == 0) throw DataError(fmt::format("no metrics found for scenario '{}'", a.scenario));
    write_manifest(g, fmt::format("report_{}", a.scenario),
                   {{"radar_metrics", split_list(a.radar_metrics)}, {"models", a.models}});
    fmt::print("wrote {} radar plot(s) and violin bundle(s) to {}\n", written, dir.string());
    return 0;
}

int cmd_sweep(const Globals& g, const LayoutArgs& l, double alpha) {
    const auto layout = make_layout(l);
    StrengthConfig base;
    base.alpha = alpha;
    const auto series = load_series(g, layout);
    const auto report = sensitivity_sweep(series, SweepGrid{}, base, layout, default_thread_count());
    const fs::path dir = fs::path(g.out) / "sweep";
    write_text(dir / "sweep.csv", sweep_csv(report));
    write_text(dir / "summary.csv", sweep_summary_csv(report));
    write_manifest(g, "sweep", {{"scenarios", layout.scenarios},
                                {"models", split_list(l.models)},
                                {"alpha", alpha},
                                {"rows", report.rows.size()},
                                {"outputs", {{"sweep.csv", file_digest(dir / "sweep.csv")},
                                             {"summary.csv", file_digest(dir / "summary.csv")}}}});
    fmt::print("wrote {} sweep rows to {}\n", report.rows.size(), dir.string());
    return 0;
}

// ---------------------------------------------------------------------------
// --config: key=value lines become command-line options unless given explicitly

std::vector<std::string> apply_config(CLI::App& app, std::vector<std::string> args) {
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
        if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
    }
    if (path.empty()) return args;

    CLI::App* sub = nullptr;
    std::size_t sub_pos = args.size();
    for (std::size_t i = 0; i < args.size(); ++i) {
        for (CLI::App* s : app.get_subcommands([](CLI::App*) { return true; })) {
            if (s->get_name() == args[i]) {
                sub = s;
                sub_pos = i;
                break;
            }
        }
        if (sub != nullptr) break;
    }

    std::ifstream in(path);
    if (!in) throw DataError(fmt::format("cannot open config file {}", path));
    auto given = [&](const std::string& flag) {
        return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
            return a == flag || a.rfind(flag + "=", 0) == 0;
        });
    };
    std::vector<std::string> extra_global;
    std::vector<std::string> extra_sub;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto trimmed_end = line.find_last_not_of(" \t\r");
        line = trimmed_end == std::string::npos ? "" : line.substr(0, trimmed_end + 1);
        const auto start = line.find_first_not_of(" \t");
        if (start == std::string::npos || line[start] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw UsageError(fmt::format("{} line {}: expected key=value", path, line_no));
        std::string key = line.substr(start, eq - start);
        key.erase(key.find_last_not_of(" \t") + 1);
        std::string value = line.substr(eq + 1);
        value.erase(0, value.find_first_not_of(" \t"));
        const std::string flag = "--" + key;
        if (given(flag) || key == "config") continue;
        CLI::Option* opt = app.get_option_no_throw(flag);
        bool global = opt != nullptr;
        if (!global && sub != nullptr) opt = sub->get_option_no_throw(flag);
        if (opt == nullptr) {
            bool known = false;
            for (CLI::App* s : app.get_subcommands([](CLI::App*) { return true; })) {
                known = known || s->get_option_no_throw(flag) != nullptr;
            }
            if (!known) throw UsageError(fmt::format("{} line {}: unknown setting '{}'", path, line_no, key));
            continue;
        }
        auto& target = global ? extra_global : extra_sub;
        if (opt->get_type_size() == 0) {
            if (value == "true" || value == "1" || value == "yes") target.push_back(flag);
        } else {
            target.push_back(flag);
            target.push_back(value);
        }
    }
    args.insert(args.begin() + static_cast<std::ptrdiff_t>(std::min(sub_pos, args.size())), extra_global.begin(),
                extra_global.end());
    args.insert(args.end(), extra_sub.begin(), extra_sub.end());
    return args;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"privmeter: genomic privacy metrics under graded adversaries", "privmeter"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--seed", g.seed, "Master random seed")->capture_default_str();
    app.add_option("--out", g.out, "Output root directory")->capture_default_str();
    app.add_option("--config", g.config, "Plain-text key=value file with default option values");

    SynthArgs synth;
    auto* s_synth = app.add_subcommand("synth", "Synthesize a Hardy-Weinberg cohort");
    s_synth->add_option("--individuals", synth.individuals)->capture_default_str();
    s_synth->add_option("--snps", synth.snps)->capture_default_str();
    s_synth->add_option("--maf-low", synth.maf_low)->capture_default_str();
    s_synth->add_option("--maf-high", synth.maf_high)->capture_default_str();
    s_synth->add_option("--related-pairs", synth.related_pairs)->capture_default_str();
    s_synth->add_option("--missing-rate", synth.missing_rate)->capture_default_str();
    s_synth->add_flag("--no-alzheimer-snps", synth.no_alzheimer, "Do not add the three Alzheimer's risk SNPs");
    s_synth->add_option("--cohort", synth.cohort, "Cohort directory (default <out>/cohort)");

    PedigreeArgs ped;
    auto* s_ped = app.add_subcommand("pedigree", "Synthesize a multi-generation family");
    s_ped->add_option("--founder-pairs", ped.founder_pairs)->capture_default_str();
    s_ped->add_option("--generations", ped.generations)->capture_default_str();
    s_ped->add_option("--snps", ped.snps)->capture_default_str();
    s_ped->add_option("--children", ped.children)->capture_default_str();
    s_ped->add_option("--maf-low", ped.maf_low)->capture_default_str();
    s_ped->add_option("--maf-high", ped.maf_high)->capture_default_str();
    s_ped->add_option("--cohort", ped.cohort, "Cohort directory (default <out>/pedigree)");

    IngestArgs ingest;
    auto* s_ingest = app.add_subcommand("ingest", "Encode raw genotype files against a frequency table");
    s_ingest->add_option("--genotypes", ingest.genotypes, "Raw genotype files")->required();
    s_ingest->add_option("--freq", ingest.freq, "Frequency table CSV")->required();
    s_ingest->add_option("--cohort", ingest.cohort, "Cohort directory (default <out>/cohort)");

    KinArgs kin;
    auto* s_kin = app.add_subcommand("kin", "Report related pairs by genotype concordance");
    s_kin->add_option("--cohort", kin.cohort);
    s_kin->add_option("--threshold", kin.threshold)->capture_default_str();

    EstimateArgs est;
    auto* s_est = app.add_subcommand("estimate", "Simulate adversary estimates for a scenario");
    s_est->add_option("--cohort", est.scenario.cohort);
    s_est->add_option("--scenario", est.scenario.scenario)->capture_default_str();
    s_est->add_option("--snps", est.scenario.snps, "SNP count of the comparison scenario")->capture_default_str();
    s_est->add_option("--kin-threshold", est.scenario.kin_threshold)->capture_default_str();
    s_est->add_option("--model", est.models, "uniform, normal, reference, a comma list or all")->capture_default_str();
    s_est->add_option("--replications", est.replications)->capture_default_str();
    s_est->add_option("--csv", est.csv, "Estimate CSVs to write: first, all or none")->capture_default_str();

    MetricsArgs met;
    auto* s_met = app.add_subcommand("metrics", "Evaluate privacy metrics on simulated estimates");
    s_met->add_option("--scenario", met.scenario)->capture_default_str();
    s_met->add_option("--model", met.models)->capture_default_str();
    s_met->add_option("--metrics", met.metrics, "all or a comma list")->capture_default_str();
    s_met->add_option("--ali-threshold", met.ali)->capture_default_str();
    s_met->add_option("--usi-threshold", met.usi)->capture_default_str();
    s_met->add_option("--health-weights", met.health_weights, "CSV rsid,weight");
    s_met->add_option("--health-base", met.health_base)->capture_default_str();
    s_met->add_option("--aggregation", met.aggregation, "arithmetic or maf_weighted")->capture_default_str();
    s_met->add_flag("--per-snp", met.per_snp, "Also write per-SNP metric values");

    LayoutArgs layout;
    PointArgs points;
    auto* s_str = app.add_subcommand("strength", "Score metric monotonicity and draw heat maps");
    s_str->add_option("--scenarios", layout.scenarios)->capture_default_str();
    s_str->add_option("--models", layout.models)->capture_default_str();
    s_str->add_option("--points-right", points.right)->capture_default_str();
    s_str->add_option("--points-wrong", points.wrong)->capture_default_str();
    s_str->add_option("--points-insignificant", points.insignificant)->capture_default_str();
    s_str->add_option("--points-peak", points.peak)->capture_default_str();
    s_str->add_option("--alpha", points.alpha)->capture_default_str();

    ReportArgs rep;
    auto* s_rep = app.add_subcommand("report", "Radar plots and violin data for one scenario");
    s_rep->add_option("--scenario", rep.scenario)->capture_default_str();
    s_rep->add_option("--model", rep.models)->capture_default_str();
    s_rep->add_option("--radar-metrics", rep.radar_metrics)->capture_default_str();

    LayoutArgs sweep_layout;
    double sweep_alpha = 0.05;
    auto* s_sweep = app.add_subcommand("sweep", "Point-value sensitivity of the strength scores");
    s_sweep->add_option("--scenarios", sweep_layout.scenarios)->capture_default_str();
    s_sweep->add_option("--models", sweep_layout.models)->capture_default_str();
    s_sweep->add_option("--alpha", sweep_alpha)->capture_default_str();

    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        args = apply_config(app, std::move(args));
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(ExitCode::kUsage);
    } catch (const Error& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return static_cast<int>(e.exit_code());
    }

    try {
        if (s_synth->parsed()) return cmd_synth(g, synth);
        if (s_ped->parsed()) return cmd_pedigree(g, ped);
        if (s_ingest->parsed()) return cmd_ingest(g, ingest);
        if (s_kin->parsed()) return cmd_kin(g, kin);
        if (s_est->parsed()) return cmd_estimate(g, est);
        if (s_met->parsed()) return cmd_metrics(g, met);
        if (s_str->parsed()) return cmd_strength(g, layout, points);
        if (s_rep->parsed()) return cmd_report(g, rep);
        if (s_sweep->parsed()) return cmd_sweep(g, sweep_layout, sweep_alpha);
    } catch (const Error& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return static_cast<int>(e.exit_code());
    } catch (const fs::filesystem_error& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return static_cast<int>(ExitCode::kData);
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return static_cast<int>(ExitCode::kNumeric);
    }
    return static_cast<int>(ExitCode::kUsage);
}
