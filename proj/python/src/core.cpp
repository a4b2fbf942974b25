#include <pybind11/pybind11.h>
#include <pybind11/numpy.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "privmeter/adversary.hpp"
#include "privmeter/genome_data.hpp"
#include "privmeter/metrics.hpp"
#include "privmeter/pipeline.hpp"
#include "privmeter/report.hpp"
#include "privmeter/stats.hpp"
#include "privmeter/strength.hpp"

namespace py = pybind11;
using namespace privmeter;

namespace {

Direction parse_direction(const std::string& code) {
    if (code == "H") return Direction::kHigherIsPrivate;
    if (code == "L") return Direction::kLowerIsPrivate;
    throw UsageError("direction must be 'H' or 'L'");
}

ScenarioDataset make_scenario(const Cohort& cohort, const std::string& name, std::size_t snps,
                              std::uint64_t seed, double kin_threshold) {
    ScenarioSpec spec;
    switch (parse_scenario_name(name)) {
        case ScenarioName::kComparison: spec = ScenarioSpec::comparison(snps); break;
        case ScenarioName::kUtah: spec = ScenarioSpec::utah(); break;
        case ScenarioName::kAlzheimer: spec = ScenarioSpec::alzheimer(); break;
        case ScenarioName::kKin: {
            std::vector<std::pair<std::string, std::string>> pairs;
            for (const auto& r : cohort.relationships) pairs.emplace_back(r.parent, r.child);
            if (pairs.empty()) {
                for (const auto& k : detect_kin(cohort, kin_threshold)) pairs.emplace_back(k.first, k.second);
            }
            spec = ScenarioSpec::kin(std::move(pairs));
            break;
        }
        case ScenarioName::kCustom: throw UsageError("custom scenarios need an explicit selection");
    }
    return select_scenario(cohort, spec, seed);
}

py::array_t<double> to_array(const std::vector<EstimateDistribution>& est) {
    py::array_t<double> out({static_cast<py::ssize_t>(est.size()), py::ssize_t{3}});
    auto view = out.mutable_unchecked<2>();
    for (std::size_t i = 0; i < est.size(); ++i) {
        for (std::size_t k = 0; k < 3; ++k) view(i, k) = est[i][k];
    }
    return out;
}

py::dict evaluate(const ScenarioDataset& data, const std::vector<AdversaryLevel>& ladder, std::size_t replications,
                  std::uint64_t seed, std::size_t threads, double ali, double usi, const std::string& aggregation) {
    LadderOptions options;
    options.replications = replications;
    options.seed = seed;
    options.threads = threads;
    options.params.ali_threshold = ali;
    options.params.usi_threshold = usi;
    options.params.aggregation = parse_aggregation(aggregation);
    LadderResult result;
    {
        py::gil_scoped_release release;
        result = evaluate_ladder(data, ladder, options);
    }
    const auto levels = static_cast<py::ssize_t>(ladder.size());
    const auto reps = static_cast<py::ssize_t>(replications);
    const auto people = static_cast<py::ssize_t>(data.individual_count());
    py::dict out;
    for (const auto& info : metric_catalogue()) {
        py::array_t<double> values({levels, reps, people});
        auto view = values.mutable_unchecked<3>();
        for (py::ssize_t l = 0; l < levels; ++l) {
            for (py::ssize_t r = 0; r < reps; ++r) {
                for (py::ssize_t i = 0; i < people; ++i) view(l, r, i) = result.at(l, r, i)[info.id];
            }
        }
        out[py::str(std::string(info.name))] = values;
    }
    return out;
}

py::dict cell_to_dict(const StrengthCell& cell) {
    py::list pairs;
    for (const auto& p : cell.pairs) {
        py::dict d;
        d["test"] = std::string(to_string(p.test));
        d["pair"] = p.pair;
        d["statistic"] = p.statistic;
        d["sign"] = p.sign;
        d["p_value"] = p.p_value;
        d["points"] = p.points;
        d["sign_change"] = p.sign_change;
        pairs.append(d);
    }
    py::dict out;
    out["m_raw"] = cell.m_raw;
    out["m_normalized"] = cell.m_normalized;
    out["pairs"] = pairs;
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Genomic privacy metrics under graded adversaries";
    m.attr("__version__") = tool_version();

    auto base = py::register_exception<Error>(m, "PrivmeterError", PyExc_RuntimeError);
    py::register_exception<UsageError>(m, "UsageError", base.ptr());
    py::register_exception<DataError>(m, "DataError", base.ptr());
    py::register_exception<NumericError>(m, "NumericError", base.ptr());

    py::class_<Cohort>(m, "Cohort")
        .def_property_readonly("individuals",
                               [](const Cohort& c) {
                                   std::vector<std::string> ids;
                                   for (const auto& g : c.genomes) ids.push_back(g.individual_id());
                                   return ids;
                               })
        .def_property_readonly("rsids",
                               [](const Cohort& c) {
                                   std::vector<std::string> ids;
                                   for (const auto& [rsid, rec] : c.frequency_table) ids.push_back(rsid);
                                   return ids;
                               })
        .def_property_readonly("provenance", [](const Cohort& c) { return std::string(to_string(c.provenance)); })
        .def("__len__", [](const Cohort& c) { return c.genomes.size(); });

    m.def(
        "synthesize_cohort",
        [](std::size_t individuals, std::size_t snps, std::uint64_t seed, double maf_low, double maf_high,
           std::size_t related_pairs, double missing_rate) {
            CohortSynthesisOptions o;
            o.individuals = individuals;
            o.snps = snps;
            o.seed = seed;
            o.maf_low = maf_low;
            o.maf_high = maf_high;
            o.related_pairs = related_pairs;
            o.missing_rate = missing_rate;
            return synthesize_cohort(o);
        },
        py::arg("individuals") = 100, py::arg("snps") = 10000, py::arg("seed") = 0, py::arg("maf_low") = 0.05,
        py::arg("maf_high") = 0.5, py::arg("related_pairs") = 0, py::arg("missing_rate") = 0.0);
    m.def(
        "synthesize_pedigree",
        [](std::size_t founder_pairs, std::size_t generations, std::size_t snps, std::uint64_t seed) {
            PedigreeSynthesisOptions o;
            o.founder_pairs = founder_pairs;
            o.generations = generations;
            o.snps = snps;
            o.seed = seed;
            return synthesize_pedigree(o);
        },
        py::arg("founder_pairs") = 3, py::arg("generations") = 3, py::arg("snps") = 10000, py::arg("seed") = 0);
    m.def("read_cohort", &read_cohort, py::arg("directory"));
    m.def("write_cohort", &write_cohort, py::arg("directory"), py::arg("cohort"));

    py::class_<ScenarioDataset>(m, "Scenario")
        .def_readonly("name", &ScenarioDataset::name)
        .def_readonly("individuals", &ScenarioDataset::individuals)
        .def_readonly("rsids", &ScenarioDataset::rsids)
        .def_property_readonly("mafs",
                               [](const ScenarioDataset& d) {
                                   std::vector<double> out;
                                   for (const auto& f : d.frequencies) out.push_back(f.maf);
                                   return out;
                               })
        .def_property_readonly("truth", [](const ScenarioDataset& d) {
            py::array_t<std::int8_t> out(
                {static_cast<py::ssize_t>(d.individual_count()), static_cast<py::ssize_t>(d.snp_count())});
            std::copy(d.truth.begin(), d.truth.end(), out.mutable_data());
            return out;
        });
    m.def("select_scenario", &make_scenario, py::arg("cohort"), py::arg("name"), py::arg("snps") = 10000,
          py::arg("seed") = 0, py::arg("kin_threshold") = 0.8);

    py::class_<AdversaryLevel>(m, "AdversaryLevel")
        .def_static("normal", &AdversaryLevel::normal, py::arg("mu"))
        .def_static("uniform", &AdversaryLevel::uniform, py::arg("sigma"))
        .def_static("reference", &AdversaryLevel::reference, py::arg("portion"))
        .def_property_readonly("model", [](const AdversaryLevel& l) { return std::string(to_string(l.model())); })
        .def_property_readonly("parameter", &AdversaryLevel::parameter)
        .def("__eq__", [](const AdversaryLevel& a, const AdversaryLevel& b) { return a == b; })
        .def("__repr__", [](const AdversaryLevel& l) {
            return "AdversaryLevel." + std::string(to_string(l.model())) + "(" + std::to_string(l.parameter()) + ")";
        });
    m.def(
        "default_ladder", [](const std::string& model) { return default_ladder(parse_adversary_model(model)); },
        py::arg("model"));
    m.def(
        "reference_estimate", [](double maf) { return reference_estimate(maf).probabilities(); }, py::arg("maf"));
    m.def(
        "estimate_individual",
        [](const ScenarioDataset& data, const AdversaryLevel& level, std::size_t individual, std::size_t replication,
           std::uint64_t seed) {
            const auto est = estimate_individual(data, level, individual, replication, seed);
            return py::make_tuple(est.snp_index, to_array(est.estimates));
        },
        py::arg("scenario"), py::arg("level"), py::arg("individual"), py::arg("replication") = 0,
        py::arg("seed") = 0);

    m.def("metric_names", [] {
        std::vector<std::string> names;
        for (const auto& info : metric_catalogue()) names.emplace_back(info.name);
        return names;
    });
    m.def(
        "metric_direction",
        [](const std::string& name) { return std::string(1, direction_code(metric_info(parse_metric(name)).direction)); },
        py::arg("name"));
    m.def(
        "per_snp_metric",
        [](const std::string& name, const Probabilities& est, int truth, double maf) {
            return per_snp_metric(parse_metric(name), EstimateDistribution::from_raw(est).probabilities(),
                                  GenotypeValue::from_count(truth), maf);
        },
        py::arg("name"), py::arg("estimate"), py::arg("truth"), py::arg("maf"));
    m.def("evaluate_ladder", &evaluate, py::arg("scenario"), py::arg("ladder"), py::arg("replications") = 15,
          py::arg("seed") = 0, py::arg("threads") = 0, py::arg("ali_threshold") = 0.7,
          py::arg("usi_threshold") = 0.3, py::arg("aggregation") = "arithmetic");

    m.def(
        "welch_t_test",
        [](const std::vector<double>& a, const std::vector<double>& b) {
            const auto r = welch_t_test(a, b);
            return py::make_tuple(r.statistic, r.p_value);
        },
        py::arg("a"), py::arg("b"));
    m.def(
        "rank_sum_test",
        [](const std::vector<double>& a, const std::vector<double>& b) {
            const auto r = rank_sum_test(a, b);
            return py::make_tuple(r.statistic, r.p_value);
        },
        py::arg("a"), py::arg("b"));
    m.def(
        "mean_ci",
        [](const std::vector<double>& sample, double confidence) {
            const auto ci = mean_ci(sample, confidence);
            return py::make_tuple(ci.mean, ci.half_width, ci.relative_error);
        },
        py::arg("sample"), py::arg("confidence") = 0.95);
    m.def(
        "monotonicity_score",
        [](const std::vector<std::vector<double>>& series, const std::string& direction, double right, double wrong,
           double insignificant, double peak, double alpha) {
            StrengthConfig config{right, wrong, insignificant, peak, alpha};
            config.validate();
            return cell_to_dict(monotonicity_score(series, parse_direction(direction), config));
        },
        py::arg("series"), py::arg("direction"), py::arg("points_right") = 1.0, py::arg("points_wrong") = -1.0,
        py::arg("points_insignificant") = -0.2, py::arg("points_peak") = -2.0, py::arg("alpha") = 0.05);
    m.def(
        "strength_color", [](double v) { return strength_color(v).hex(); }, py::arg("m"));
}
