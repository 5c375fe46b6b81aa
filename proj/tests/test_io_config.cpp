#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

#include "plab/config.hpp"
#include "plab/runner.hpp"

using namespace plab;
using Catch::Approx;
namespace fs = std::filesystem;

namespace {

json base_config() {
    return json{
        {"pipeline", "solve"},
        {"domain",
         {{"shape", "rectangle"}, {"lo", {-1.0, -1.0}}, {"hi", {1.0, 1.0}}, {"h", 0.25}}},
        {"exponents", {{"p", 2.0}, {"r", 3.0}, {"eps", 0.25}}},
        {"f", {{"type", "gaussian-bump"}, {"amplitude", 1.0}, {"width", 0.4}}},
        {"g", {{"type", "constant"}, {"value", 0.2}}},
        {"k_schedule", {1.0, 2.0, 4.0}},
        {"delta", 1.0},
        {"R", 0.45},
        {"tol", 1e-7},
        {"rng_seed", 7},
    };
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& stem) {
        path = fs::temp_directory_path() / ("plab_test_" + stem);
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

} // namespace

TEST_CASE("config round-trips through serialization") {
    const ExperimentConfig c = config_from_json(base_config());
    const ExperimentConfig c2 = config_from_json(c.to_json());
    CHECK(c.canonical_string() == c2.canonical_string());
    CHECK(c.hash() == c2.hash());
}

TEST_CASE("invalid configs report every violation machine-readably") {
    json bad = base_config();
    bad["exponents"]["eps"] = 0.9;   // above p/r
    bad["delta"] = 1.7;              // outside (0,1]
    bad["k_schedule"] = {4.0, 2.0};  // not increasing
    bad["domain"]["h"] = 0.3;        // not a divisor of the extent
    try {
        config_from_json(bad);
        FAIL("expected rejection");
    } catch (const std::invalid_argument& e) {
        const json err = json::parse(e.what());
        CHECK(err["error"] == "invalid config");
        CHECK(err["violations"].size() >= 4);
    }
}

TEST_CASE("field csv round-trips through the file-loaded forcing path") {
    const auto dom = build_domain(DomainSpec::rectangle(-1, 1, -1, 1, 0.25));
    Rng rng(3);
    Field f = Field::gradient_rank(dom);
    for (auto& v : f.data()) v = rng.symmetric(2.0);
    const std::string csv = field_to_csv(f);
    Field g = Field::gradient_rank(dom);
    field_from_csv(csv, g);
    for (std::size_t i = 0; i < f.data().size(); ++i) CHECK(g.data()[i] == f.data()[i]);
}

TEST_CASE("ksweep csv uses the frozen column order") {
    CHECK(std::string(ksweep_csv_header) ==
          "k,E_p_unweighted,E_p_weighted,E_r_unweighted,E_r_weighted,xpr_distance,iterations,"
          "residual");
}

TEST_CASE("solve pipeline emits solution, manifest covers the output directory") {
    TempDir tmp("solve");
    ExperimentConfig cfg = config_from_json(base_config());
    const auto manifest = run_experiment(cfg, tmp.path);
    CHECK(manifest.completed);
    CHECK(manifest.invariants_passed);

    // every file in the directory is listed with a matching checksum
    // (manifest.json itself is written last and not self-referential)
    std::set<std::string> listed;
    for (const auto& [name, sum] : manifest.files) {
        listed.insert(name);
        const std::string body = read_file(tmp.path / name);
        CHECK(checksum_hex(body) == sum);
    }
    for (const auto& entry : fs::directory_iterator(tmp.path)) {
        const std::string name = entry.path().filename().string();
        if (name == "manifest.json") continue;
        CHECK(listed.count(name) == 1);
    }
}

TEST_CASE("zero forcing solve: trivial solution file") {
    TempDir tmp("zero");
    json j = base_config();
    j["f"] = {{"type", "constant"}, {"value", 0.0}};
    j["g"] = {{"type", "constant"}, {"value", 0.0}};
    ExperimentConfig cfg = config_from_json(j);
    const auto manifest = run_experiment(cfg, tmp.path);
    CHECK(manifest.completed);
    const json sol = json::parse(read_file(tmp.path / "solution.json"));
    CHECK(sol["solve"]["iterations"] == 0);
    CHECK(sol["solve"]["residual_norm"] == 0.0);
    for (const auto& v : sol["values"]) CHECK(v.get<double>() == 0.0);
}

TEST_CASE("reruns are byte-identical on csv bodies") {
    TempDir a("rerun_a"), b("rerun_b");
    json j = base_config();
    j["pipeline"] = "ksweep";
    ExperimentConfig cfg = config_from_json(j);
    run_experiment(cfg, a.path);
    run_experiment(cfg, b.path);
    for (const char* name : {"ksweep.csv", "config.json"}) {
        CHECK(read_file(a.path / name) == read_file(b.path / name));
    }
}

TEST_CASE("ksweep emits one csv row per schedule entry and a two-series svg") {
    TempDir tmp("ksweep");
    json j = base_config();
    j["pipeline"] = "ksweep";
    ExperimentConfig cfg = config_from_json(j);
    run_experiment(cfg, tmp.path);
    const std::string csv = read_file(tmp.path / "ksweep.csv");
    const auto rows = std::count(csv.begin(), csv.end(), '\n');
    CHECK(rows == 1 + 3); // header + one row per k
    const std::string svg = read_file(tmp.path / "ksweep.svg");
    CHECK(svg.find("unweighted grad p-energy") != std::string::npos);
    CHECK(svg.find("weighted grad p-energy") != std::string::npos);
    CHECK(svg.find("<svg") == 0);
}

TEST_CASE("whitney and weights pipelines run their invariant suites") {
    TempDir tw("whitney"), ts("weights");
    json j = base_config();
    j["pipeline"] = "whitney";
    j["f"] = {{"type", "radial-singularity"}, {"alpha", 1.05}};
    ExperimentConfig cfg = config_from_json(j);
    auto mw = run_experiment(cfg, tw.path);
    CHECK(mw.completed);
    CHECK(mw.invariants_passed);
    const json wj = json::parse(read_file(tw.path / "whitney.json"));
    CHECK(wj["cube_count"].get<int>() > 0);

    j["pipeline"] = "weights";
    ExperimentConfig cfg2 = config_from_json(j);
    auto ms = run_experiment(cfg2, ts.path, OutputFormats{}, 2);
    CHECK(ms.completed);
    CHECK(ms.invariants_passed);
    const json sj = json::parse(read_file(ts.path / "weight.json"));
    CHECK(sj["muckenhoupt"]["ap_constant"].get<double>() >= 1.0 - 1e-12);
}

TEST_CASE("report pipeline emits theorem, corollary and embedding results") {
    TempDir tmp("report");
    json j = base_config();
    j["pipeline"] = "report";
    ExperimentConfig cfg = config_from_json(j);
    auto m = run_experiment(cfg, tmp.path);
    CHECK(m.completed);
    CHECK(m.invariants_passed);
    const json rj = json::parse(read_file(tmp.path / "report.json"));
    CHECK(rj["weighted_estimate"]["empirical_constant"].get<double>() >= 0.0);
    CHECK(rj["unweighted_estimate"]["weighted"] == false);
    const std::string csv = read_file(tmp.path / "estimate.csv");
    CHECK(csv.rfind("case,p,r,q,s,eps", 0) == 0);
}

TEST_CASE("empty report list yields an empty inventory") {
    const std::string csv = estimate_rows_to_csv({});
    CHECK(csv == std::string(estimate_csv_header) + "\n"); // header only, no rows
    const std::string svg = loglog_svg("empty", "x", "y", {});
    CHECK(svg.find("<svg") == 0);
    CHECK(svg.find("polyline") == std::string::npos);
}

TEST_CASE("format lists are validated") {
    CHECK_THROWS_AS(OutputFormats::parse("csv,bogus"), std::invalid_argument);
    CHECK_THROWS_AS(OutputFormats::parse(""), std::invalid_argument);
    const auto f = OutputFormats::parse("csv,svg");
    CHECK(f.csv);
    CHECK(f.svg);
    CHECK_FALSE(f.json_out);
}
