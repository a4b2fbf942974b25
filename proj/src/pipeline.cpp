#include "privmeter/pipeline.hpp"

#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>

#include <fmt/format.h>

#include "privmeter/parallel.hpp"
#include "text_util.hpp"

namespace privmeter {

namespace {

std::vector<SnpObservation> observations(const ScenarioDataset& data, std::size_t individual,
                                         const IndividualEstimates& est) {
    std::vector<SnpObservation> obs;
    obs.reserve(est.snp_index.size());
    const std::size_t snps = data.snp_count();
    for (std::size_t k = 0; k < est.snp_index.size(); ++k) {
        const std::size_t j = est.snp_index[k];
        SnpObservation o;
        o.estimate = est.estimates[k].probabilities();
        o.truth = GenotypeValue::from_count(data.truth[individual * snps + j]);
        o.maf = data.frequencies.at(j).maf;
        o.rsid = data.rsids[j];
        obs.push_back(o);
    }
    return obs;
}

void check_ladder(const ScenarioDataset& data, std::span<const AdversaryLevel> ladder,
                  const LadderOptions& options) {
    if (ladder.empty()) throw UsageError("an adversary ladder needs at least one level");
    for (const auto& level : ladder) {
        if (level.model() != ladder.front().model()) {
            throw UsageError("all levels of a ladder must belong to one adversary model");
        }
    }
    if (options.replications == 0) throw UsageError("at least one replication is required");
    if (data.frequencies.size() != data.snp_count()) {
        throw DataError(fmt::format("scenario '{}' lacks frequency records", data.name));
    }
    options.params.validate();
}

}  // namespace

std::vector<double> LadderResult::pooled(std::size_t level, MetricId metric) const {
    std::vector<double> out;
    out.reserve(replications * individuals.size());
    for (std::size_t r = 0; r < replications; ++r) {
        for (std::size_t i = 0; i < individuals.size(); ++i) out.push_back(at(level, r, i)[metric]);
    }
    return out;
}

std::vector<double> LadderResult::replication_means(std::size_t level, MetricId metric) const {
    std::vector<double> out;
    for (std::size_t r = 0; r < replications; ++r) {
        double sum = 0.0;
        for (std::size_t i = 0; i < individuals.size(); ++i) sum += at(level, r, i)[metric];
        out.push_back(sum / static_cast<double>(individuals.size()));
    }
    return out;
}

LadderResult evaluate_ladder(const ScenarioDataset& data, std::span<const AdversaryLevel> ladder,
                             const LadderOptions& options) {
    check_ladder(data, ladder, options);
    LadderResult result;
    result.scenario = data.name;
    result.model = ladder.front().model();
    result.levels.assign(ladder.begin(), ladder.end());
    result.replications = options.replications;
    result.individuals = data.individuals;
    const std::size_t people = data.individual_count();
    result.cells.resize(ladder.size() * options.replications * people);

    const HealthPlan plan = resolve_health_plan(data, options.params);
    parallel_for(result.cells.size(), options.threads, [&](std::size_t unit) {
        const std::size_t individual = unit % people;
        const std::size_t replication = (unit / people) % options.replications;
        const std::size_t level = unit / (people * options.replications);
        const auto est = estimate_individual(data, ladder[level], individual, replication, options.seed);
        const auto obs = observations(data, individual, est);
        try {
            result.cells[unit] = evaluate_individual(obs, est.snp_index, options.params, plan);
        } catch (const DataError& e) {
            throw DataError(fmt::format("individual {}: {}", data.individuals[individual], e.what()));
        }
    });
    return result;
}

void add_to_series(MetricSeries& series, const LadderResult& result) {
    for (MetricId m : evaluated_metrics()) {
        const SeriesKey key{result.scenario, result.model, m};
        for (std::size_t l = 0; l < result.levels.size(); ++l) series.set_level(key, l, result.pooled(l, m));
    }
}

std::vector<PrecisionRow> precision_report(const LadderResult& result, double limit) {
    std::vector<PrecisionRow> rows;
    if (result.replications < 2) return rows;
    for (std::size_t l = 0; l < result.levels.size(); ++l) {
        for (const auto& info : metric_catalogue()) {
            PrecisionRow row;
            row.level = l;
            row.metric = info.id;
            row.ci = mean_ci(result.replication_means(l, info.id));
            row.exceeds = !(row.ci.relative_error < limit);
            rows.push_back(row);
        }
    }
    return rows;
}

void write_precision_csv(std::ostream& out, const LadderResult& result,
                         std::span<const PrecisionRow> rows) {
    out << "scenario,adversary_model,strength_index,level_parameter,metric,mean,ci_half_width,"
           "relative_error,exceeds_limit\n";
    for (const auto& r : rows) {
        out << result.scenario << ',' << to_string(result.model) << ',' << r.level << ','
            << detail::format_real(result.levels[r.level].parameter()) << ',' << to_string(r.metric) << ','
            << detail::format_real(r.ci.mean) << ',' << detail::format_real(r.ci.half_width) << ','
            << detail::format_real(r.ci.relative_error) << ',' << (r.exceeds ? "yes" : "no") << '\n';
    }
}

void write_metrics_csv(std::ostream& out, const LadderResult& result) {
    const auto aux = auxiliary_columns();
    out << "scenario,adversary_model,strength_index,replication,individual,metric,value\n";
    const std::string prefix_model(to_string(result.model));
    std::string buffer;
    for (std::size_t l = 0; l < result.levels.size(); ++l) {
        for (std::size_t r = 0; r < result.replications; ++r) {
            for (std::size_t i = 0; i < result.individuals.size(); ++i) {
                const auto& m = result.at(l, r, i);
                const std::string prefix = fmt::format("{},{},{},{},{},", result.scenario, prefix_model, l, r,
                                                       result.individuals[i]);
                buffer.clear();
                for (const auto& info : metric_catalogue()) {
                    buffer += prefix;
                    buffer += info.name;
                    buffer += ',';
                    buffer += detail::format_real(m[info.id]);
                    buffer += '\n';
                }
                const auto values = auxiliary_values(m);
                for (std::size_t k = 0; k < aux.size(); ++k) {
                    buffer += prefix + aux[k] + ',' + detail::format_real(values[k]) + '\n';
                }
                out << buffer;
            }
        }
    }
}

void write_per_snp_csv(std::ostream& out, const ScenarioDataset& data,
                       std::span<const AdversaryLevel> ladder, const LadderOptions& options) {
    check_ladder(data, ladder, options);
    std::vector<MetricId> per_snp;
    for (const auto& info : metric_catalogue()) {
        if (info.granularity == Granularity::kPerSnp) per_snp.push_back(info.id);
    }
    out << "scenario,adversary_model,strength_index,replication,individual,rsid,metric,value\n";
    const std::string model(to_string(ladder.front().model()));
    for (std::size_t l = 0; l < ladder.size(); ++l) {
        for (std::size_t r = 0; r < options.replications; ++r) {
            for (std::size_t i = 0; i < data.individual_count(); ++i) {
                const auto est = estimate_individual(data, ladder[l], i, r, options.seed);
                for (const auto& o : observations(data, i, est)) {
                    for (MetricId id : per_snp) {
                        out << data.name << ',' << model << ',' << l << ',' << r << ',' << data.individuals[i]
                            << ',' << o.rsid << ',' << to_string(id) << ','
                            << detail::format_real(per_snp_metric(id, o.estimate, o.truth, o.maf)) << '\n';
                    }
                }
            }
        }
    }
}

std::vector<MetricRow> read_metrics_csv(std::istream& in) {
    const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    std::vector<MetricRow> rows;
    std::size_t start = 0;
    std::size_t line_no = 0;
    bool header = false;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string::npos) end = text.size();
        const auto line = detail::trim(std::string_view(text).substr(start, end - start));
        start = end + 1;
        ++line_no;
        if (line.empty()) continue;
        const auto cols = detail::split(line, ',');
        if (!header) {
            if (cols.size() != 7 || cols[0] != "scenario" || cols[5] != "metric") {
                throw DataError("metric file lacks the header "
                                "scenario,adversary_model,strength_index,replication,individual,metric,value");
            }
            header = true;
            continue;
        }
        if (cols.size() != 7) throw DataError(fmt::format("metric file line {}: malformed row", line_no));
        const auto level = detail::parse_uint(cols[2]);
        const auto rep = detail::parse_uint(cols[3]);
        const auto value = detail::parse_double(cols[6]);
        if (!level || !rep || !value) throw DataError(fmt::format("metric file line {}: malformed number", line_no));
        MetricRow row;
        row.scenario = std::string(cols[0]);
        try {
            row.model = parse_adversary_model(cols[1]);
        } catch (const UsageError& e) {
            throw DataError(fmt::format("metric file line {}: {}", line_no, e.what()));
        }
        row.level = *level;
        row.replication = *rep;
        row.individual = std::string(cols[4]);
        row.metric = std::string(cols[5]);
        row.value = *value;
        rows.push_back(std::move(row));
    }
    if (!header) throw DataError("metric file is empty");
    return rows;
}

void add_to_series(MetricSeries& series, std::span<const MetricRow> rows) {
    for (const auto& row : rows) {
        MetricId id{};
        bool known = false;
        for (const auto& info : metric_catalogue()) {
            if (info.name == row.metric) {
                id = info.id;
                known = info.evaluated;
                break;
            }
        }
        if (!known) continue;
        series.add({row.scenario, row.model, id}, row.level, row.value);
    }
}

std::string file_digest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(fmt::format("cannot read {}", path.string()));
    const std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    return fmt::format("{:016x}", hash_string(bytes));
}

std::string tool_version() { return "0.1.0"; }

}  // namespace privmeter
