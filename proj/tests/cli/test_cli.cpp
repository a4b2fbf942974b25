#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <nlohmann/json.hpp>
#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string output;
};

class Workspace {
public:
    explicit Workspace(const std::string& name)
        : root_(fs::temp_directory_path() / ("privmeter_cli_" + name)) {
        fs::remove_all(root_);
        fs::create_directories(root_);
    }
    ~Workspace() { fs::remove_all(root_); }

    [[nodiscard]] const fs::path& root() const { return root_; }

    Run run(const std::string& args, const std::string& env = "") const {
        const auto log = root_ / "last.log";
        const std::string cmd = env + (env.empty() ? "" : " ") + "\"" + PRIVMETER_CLI + "\" --out \"" +
                                root_.string() + "\" " + args + " > \"" + log.string() + "\" 2>&1";
        const int status = std::system(cmd.c_str());
        Run r;
        r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        std::ifstream in(log);
        std::stringstream ss;
        ss << in.rdbuf();
        r.output = ss.str();
        return r;
    }

    void write(const std::string& name, const std::string& text) const { std::ofstream(root_ / name) << text; }

private:
    fs::path root_;
};

std::size_t count_dirs(const fs::path& dir, const std::string& prefix) {
    std::size_t n = 0;
    for (const auto& e : fs::directory_iterator(dir)) {
        n += e.is_directory() && e.path().filename().string().rfind(prefix, 0) == 0;
    }
    return n;
}

std::size_t count_lines(const fs::path& file) {
    std::ifstream in(file);
    return static_cast<std::size_t>(std::count(std::istreambuf_iterator<char>(in), {}, '\n'));
}

std::string slurp(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("usage errors exit with 1") {
    Workspace w("usage");
    CHECK(w.run("estimate --model quantum").code == 1);
    CHECK(w.run("frobnicate").code == 1);
    CHECK(w.run("synth --individuals many").code == 1);
    CHECK(w.run("--help").code == 0);
    REQUIRE(w.run("synth --individuals 10 --snps 50").code == 0);
    REQUIRE(w.run("estimate --snps 50 --replications 2").code == 0);
    const auto bad_metric = w.run("metrics --metrics entropy,happiness");
    CHECK(bad_metric.code == 1);
    CHECK(bad_metric.output.find("relative_entropy") != std::string::npos);
}

TEST_CASE("ingest") {
    Workspace w("ingest");
    w.write("freq.csv", "rsid,major,minor,maf\nrs1,A,G,0.2\nrs2,C,T,0.4\n");
    w.write("alice.txt", "# rsid\tchromosome\tposition\tgenotype\nrs1\t1\t100\tAG\nrs2\t1\t200\tTT\n");
    w.write("bob.txt", "# rsid\tchromosome\tposition\tgenotype\nrs1\t1\t100\tAA\nrs2\t1\t200\t--\n");
    const auto a = (w.root() / "alice.txt").string();
    const auto b = (w.root() / "bob.txt").string();
    SUBCASE("missing frequency file exits with 2") {
        CHECK(w.run("ingest --genotypes \"" + a + "\" --freq \"" + (w.root() / "nope.csv").string() + "\"").code == 2);
    }
    SUBCASE("encoded cohort") {
        const auto r = w.run("ingest --genotypes \"" + a + "\" \"" + b + "\" --freq \"" +
                             (w.root() / "freq.csv").string() + "\"");
        REQUIRE(r.code == 0);
        const auto genomes = slurp(w.root() / "cohort" / "genomes.csv");
        CHECK(genomes.find("alice") != std::string::npos);
        CHECK(genomes.find("bob") != std::string::npos);
        CHECK(fs::exists(w.root() / "cohort" / "frequencies.csv"));
    }
}

TEST_CASE("estimate ladders") {
    Workspace w("estimate");
    REQUIRE(w.run("--seed 3 synth --individuals 8 --snps 40").code == 0);
    REQUIRE(w.run("--seed 3 estimate --snps 40 --model all --replications 2").code == 0);
    const auto base = w.root() / "estimates" / "comparison";
    CHECK(count_dirs(base / "normal", "level_") == 6);
    CHECK(count_dirs(base / "uniform", "level_") == 7);
    CHECK(count_dirs(base / "reference", "level_") == 9);
    CHECK(fs::exists(base / "normal" / "plan.json"));
    CHECK(fs::exists(base / "normal" / "precision.csv"));
}

TEST_CASE("metrics options") {
    Workspace w("metrics");
    REQUIRE(w.run("synth --individuals 10 --snps 60").code == 0);
    REQUIRE(w.run("estimate --snps 60 --replications 2").code == 0);

    SUBCASE("all metrics, ALI threshold at one") {
        REQUIRE(w.run("metrics --ali-threshold 1.0").code == 0);
        std::ifstream in(w.root() / "metrics" / "comparison" / "normal" / "metrics.csv");
        std::string line;
        std::getline(in, line);
        std::size_t ali_rows = 0;
        std::set<std::string> names;
        while (std::getline(in, line)) {
            const auto value_pos = line.rfind(',');
            const auto name_pos = line.rfind(',', value_pos - 1);
            const auto name = line.substr(name_pos + 1, value_pos - name_pos - 1);
            names.insert(name);
            if (name == "amount_of_information_leaked") {
                ++ali_rows;
                CHECK(std::stod(line.substr(value_pos + 1)) == 0.0);
            }
        }
        CHECK(ali_rows == 6 * 2 * 10);
        CHECK(names.count("max_entropy") == 1);
        CHECK(names.size() >= 24);
    }
    SUBCASE("ALI threshold outside its range") {
        CHECK(w.run("metrics --ali-threshold 0").code == 1);
        CHECK(w.run("metrics --usi-threshold 1.0").code == 1);
    }
    SUBCASE("health weights naming an absent rsid") {
        w.write("weights.csv", "rsid,weight\nrs_not_here,1\n");
        const auto r = w.run("metrics --health-weights \"" + (w.root() / "weights.csv").string() + "\"");
        CHECK(r.code == 2);
        CHECK(r.output.find("rs_not_here") != std::string::npos);
    }
    SUBCASE("per-SNP output") {
        REQUIRE(w.run("metrics --per-snp").code == 0);
        CHECK(fs::exists(w.root() / "metrics" / "comparison" / "normal" / "per_snp.csv"));
    }
    SUBCASE("cohort change is detected") {
        REQUIRE(w.run("--seed 9 synth --individuals 10 --snps 60").code == 0);
        CHECK(w.run("metrics").code == 2);
    }
}

TEST_CASE("strength with an incomplete ladder exits with 2") {
    Workspace w("incomplete");
    REQUIRE(w.run("synth --individuals 10 --snps 40").code == 0);
    REQUIRE(w.run("estimate --snps 40 --replications 2").code == 0);
    REQUIRE(w.run("metrics").code == 0);
    const auto r = w.run("strength");
    CHECK(r.code == 2);
    CHECK(r.output.find("utah") != std::string::npos);
}

TEST_CASE("config file") {
    Workspace w("config");
    w.write("run.cfg", "# desk defaults\nindividuals = 6\nsnps=30\nreplications=2\n");
    const auto cfg = (w.root() / "run.cfg").string();
    REQUIRE(w.run("--config \"" + cfg + "\" synth").code == 0);
    REQUIRE(w.run("--config \"" + cfg + "\" estimate").code == 0);
    const auto plan = nlohmann::json::parse(slurp(w.root() / "estimates" / "comparison" / "normal" / "plan.json"));
    CHECK(plan.dump().find("\"replications\":2") != std::string::npos);
    // An explicit flag wins over the file.
    REQUIRE(w.run("--config \"" + cfg + "\" estimate --replications 3").code == 0);
    const auto plan3 = nlohmann::json::parse(slurp(w.root() / "estimates" / "comparison" / "normal" / "plan.json"));
    CHECK(plan3.dump().find("\"replications\":3") != std::string::npos);
    w.write("bad.cfg", "colour=blue\n");
    CHECK(w.run("--config \"" + (w.root() / "bad.cfg").string() + "\" synth").code == 1);
}

TEST_CASE("full pipeline") {
    Workspace w("pipeline");
    REQUIRE(w.run("--seed 21 synth --individuals 50 --snps 300 --related-pairs 6").code == 0);
    REQUIRE(w.run("--seed 21 pedigree --snps 300").code == 0);
    for (const std::string sc : {"utah", "kin", "comparison", "alzheimer"}) {
        REQUIRE(w.run("--seed 21 estimate --snps 300 --scenario " + sc + " --model all --replications 3 --csv none")
                    .code == 0);
        REQUIRE(w.run("--seed 21 metrics --scenario " + sc).code == 0);
    }
    REQUIRE(w.run("strength").code == 0);
    const auto maps = nlohmann::json::parse(slurp(w.root() / "strength" / "heatmaps.json"));
    CHECK(maps.size() == 23);
    std::size_t svgs = 0;
    for (const auto& e : fs::directory_iterator(w.root() / "strength")) svgs += e.path().extension() == ".svg";
    CHECK(svgs == 23);
    const auto overall = slurp(w.root() / "strength" / "overall.csv");
    CHECK(overall.find("max_entropy") != std::string::npos);
    CHECK(count_lines(w.root() / "strength" / "overall.csv") == 25);

    REQUIRE(w.run("report --scenario comparison --model normal --radar-metrics "
                  "entropy,relative_entropy,mean_error,adversarys_success_rate,min_entropy,"
                  "information_surprisal")
                .code == 0);
    std::size_t polygons = 0;
    for (const auto& e : fs::recursive_directory_iterator(w.root() / "report")) {
        if (e.path().extension() != ".svg") continue;
        const auto svg = slurp(e.path());
        for (auto pos = svg.find("class=\"level\""); pos != std::string::npos;
             pos = svg.find("class=\"level\"", pos + 1)) {
            ++polygons;
        }
    }
    CHECK(polygons == 3);

    REQUIRE(w.run("sweep").code == 0);
    CHECK(count_lines(w.root() / "sweep" / "sweep.csv") == 626);
    CHECK(fs::exists(w.root() / "manifests" / "sweep.json"));
}
