#pragma once

#include <array>
#include <atomic>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <string>
#include <thread>
#include <vector>

#include "plab/config.hpp"
#include "plab/estimates.hpp"
#include "plab/io.hpp"
#include "plab/whitney.hpp"

namespace plab {

inline constexpr const char* artifact_version = "0.1.0";

struct RunManifest {
    std::string config_hash;
    std::string version = artifact_version;
    std::string pipeline;
    std::vector<std::pair<std::string, double>> timings;
    std::vector<std::pair<std::string, std::string>> files; // path -> checksum
    bool invariants_passed = true;
    bool completed = false;
    std::string timestamp;

    json to_json() const {
        json t = json::array();
        for (const auto& [stage, sec] : timings) t.push_back({{"stage", stage}, {"seconds", sec}});
        json fs = json::array();
        for (const auto& [path, sum] : files) fs.push_back({{"path", path}, {"checksum", sum}});
        return json{{"schema", "plab.manifest.v1"}, {"config_hash", config_hash},
                    {"version", version},           {"pipeline", pipeline},
                    {"timings", t},                 {"files", fs},
                    {"invariants_passed", invariants_passed},
                    {"completed", completed},       {"timestamp", timestamp}};
    }
};

struct OutputFormats {
    bool csv = true;
    bool json_out = true;
    bool svg = true;

    static OutputFormats parse(const std::string& spec) {
        OutputFormats f{false, false, false};
        std::string tok;
        std::istringstream in(spec);
        while (std::getline(in, tok, ',')) {
            if (tok == "csv") f.csv = true;
            else if (tok == "json") f.json_out = true;
            else if (tok == "svg") f.svg = true;
            else require(false, "unknown output format '" + tok + "'");
        }
        require(f.csv || f.json_out || f.svg, "no output format selected");
        return f;
    }
};

namespace detail {

class StageClock {
public:
    explicit StageClock(RunManifest& m) : manifest_(m) {}
    template <class Fn>
    void run(const std::string& name, Fn&& fn) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        const double sec =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        manifest_.timings.emplace_back(name, sec);
    }

private:
    RunManifest& manifest_;
};

// fixed-slot parallel map over independent cases; deterministic because each
// slot is written exactly once and serialization happens after the barrier
template <class Fn>
void parallel_cases(int n, int threads, Fn&& fn) {
    threads = std::max(1, std::min(threads, n));
    if (threads == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&]() {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
        });
    for (auto& th : pool) th.join();
}

} // namespace detail

// Configuration-driven experiment runner: materializes the domain and data,
// executes the requested pipeline, writes every report through the frozen
// schemas and returns a manifest with per-file checksums.
class ExperimentRunner {
public:
    ExperimentRunner(const ExperimentConfig& config, std::filesystem::path out_dir,
                     OutputFormats formats, int threads = 1)
        : cfg_(config), out_(std::move(out_dir)), formats_(formats), threads_(threads) {}

    RunManifest run() {
        manifest_ = RunManifest{};
        manifest_.config_hash = cfg_.hash();
        manifest_.pipeline = cfg_.pipeline;
        {
            char buf[32];
            const std::time_t now = std::time(nullptr);
            std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
            manifest_.timestamp = buf;
        }
        std::filesystem::create_directories(out_);
        emit("config.json", cfg_.canonical_string() + "\n");

        detail::StageClock clock(manifest_);
        const DiscreteDomain dom(domain_spec_of(cfg_));
        const ExponentSet exps = derive_exponents(cfg_.p, cfg_.r, cfg_.eps);
        const Field f = build_forcing(cfg_.f, dom, true);
        const Field g = build_forcing(cfg_.g, dom, false);

        if (cfg_.pipeline == "solve")
            clock.run("solve", [&] { pipeline_solve(dom, exps, f, g); });
        else if (cfg_.pipeline == "ksweep")
            clock.run("ksweep", [&] { pipeline_ksweep(dom, exps, f, g); });
        else if (cfg_.pipeline == "blowup")
            clock.run("blowup", [&] { pipeline_blowup(dom, exps); });
        else if (cfg_.pipeline == "whitney")
            clock.run("whitney", [&] { pipeline_whitney(dom, exps, f, g); });
        else if (cfg_.pipeline == "weights")
            clock.run("weights", [&] { pipeline_weights(dom, exps, f, g); });
        else if (cfg_.pipeline == "report")
            clock.run("report", [&] { pipeline_report(dom, exps, f, g); });
        else
            require(false, "unknown pipeline " + cfg_.pipeline);

        manifest_.completed = true;
        write_file(out_ / "manifest.json", manifest_.to_json().dump(2) + "\n");
        return manifest_;
    }

private:
    void emit(const std::string& name, const std::string& content) {
        write_file(out_ / name, content);
        manifest_.files.emplace_back(name, checksum_hex(content));
    }

    void check_operator(const DiscreteDomain& dom) {
        // named operators are validated on every run; only reported here
        const OperatorSpec op = cfg_.operator_name == "p-laplace"
                                    ? canonical_p_laplace(cfg_.p)
                                    : perturbed_p_laplace(cfg_.p, dom, 0.5);
        const auto sr = check_structure(op, cfg_.p, dom, 512, cfg_.rng_seed);
        json j{{"schema", "plab.structure.v1"},
               {"operator", op.name},
               {"pass", sr.pass},
               {"coercivity_margin", sr.coercivity_margin},
               {"growth_margin", sr.growth_margin},
               {"monotonicity_margin", sr.monotonicity_margin},
               {"samples", sr.samples}};
        if (formats_.json_out) emit("structure.json", j.dump(2) + "\n");
        if (!sr.pass) manifest_.invariants_passed = false;
    }

    void pipeline_solve(const DiscreteDomain& dom, const ExponentSet& exps, const Field& f,
                        const Field& g) {
        check_operator(dom);
        // only the canonical operator has an energy form; a perturbed
        // operator config is rejected here with the solver's message
        const OperatorSpec op = cfg_.operator_name == "p-laplace"
                                    ? canonical_p_laplace(cfg_.p)
                                    : perturbed_p_laplace(cfg_.p, dom, 0.5);
        auto [u, rep] = solve_weak(f, g, exps, dom, cfg_.tol, cfg_.max_iters, nullptr, &op);
        if (formats_.csv) emit("solution.csv", field_to_csv(u));
        if (formats_.json_out) {
            json j = field_to_json(u);
            j["solve"] = {{"iterations", rep.iterations},
                          {"final_energy", rep.final_energy},
                          {"residual_norm", rep.residual_norm},
                          {"line_search_failures", rep.line_search_failures},
                          {"converged", rep.converged},
                          {"mu", rep.mu},
                          {"wall_time", rep.wall_time}};
            emit("solution.json", j.dump(2) + "\n");
        }
        if (!rep.converged) manifest_.invariants_passed = false;
    }

    void pipeline_ksweep(const DiscreteDomain& dom, const ExponentSet& exps, const Field& f,
                         const Field& g) {
        const ApproxReport rep = approximation_study(f, g, exps, dom, cfg_.k_schedule, cfg_.delta,
                                                     cfg_.R, cfg_.tol, cfg_.max_iters);
        emit_sweep("ksweep", rep);
        for (const auto& r : rep.records)
            if (!r.converged) manifest_.invariants_passed = false;
    }

    void pipeline_blowup(const DiscreteDomain& dom, const ExponentSet& exps) {
        require(cfg_.f.type == "radial-singularity",
                "blowup pipeline expects f.type = radial-singularity");
        const BlowupReport rep =
            blowup_study(cfg_.f.alpha, exps, dom, cfg_.k_schedule, cfg_.delta, cfg_.R, cfg_.tol,
                         cfg_.T1, cfg_.T2, cfg_.max_iters);
        if (formats_.json_out) emit("blowup.json", blowup_to_json(rep).dump(2) + "\n");
        emit_sweep("blowup_ksweep", rep.sweep);
    }

    void pipeline_whitney(const DiscreteDomain& dom, const ExponentSet& exps, const Field& f,
                          const Field& g) {
        // open set O_lambda = [M h_delta > lambda] from the configured data
        Field hfield = Field::box_scalar(dom);
        const double sq = exps.s / exps.q;
        for (int i = 0; i < dom.cell_count(); ++i)
            if (dom.dist_to_origin(i) < 2.0 * cfg_.R)
                hfield.at(dom.lattice_id(i)) = f.norm_at(i) + std::pow(g.norm_at(i), sq);
        Field mh = maximal_function(hfield);
        for (auto& v : mh.data()) v += cfg_.delta;

        double lambda;
        if (cfg_.lambda) {
            lambda = *cfg_.lambda;
        } else {
            std::vector<double> vals = mh.data();
            std::sort(vals.begin(), vals.end());
            lambda = vals[vals.size() / 2];
        }
        const CellMask mask = level_set(mh, lambda);
        require(mask.count() > 0, "whitney pipeline: level set is empty, lower lambda");

        WhitneyDecomposition w = whitney_decompose(mask);
        partition_of_unity(w);
        std::string why;
        if (!whitney_invariants_ok(w, &why)) {
            manifest_.invariants_passed = false;
            emit("whitney_violation.txt", why + "\n");
        }
        if (formats_.json_out) {
            json j = whitney_to_json(w);
            j["lambda"] = lambda;
            j["measured_diam_grad_psi"] = partition_gradient_bound(w);
            emit("whitney.json", j.dump(2) + "\n");
        }
        if (formats_.svg) emit("whitney.svg", whitney_svg(w));
    }

    void pipeline_weights(const DiscreteDomain& dom, const ExponentSet& exps, const Field& f,
                          const Field& g) {
        const Weight w = build_weight(f, g, exps, cfg_.delta, cfg_.R, dom);
        bool cap_ok = true;
        const double cap = std::pow(cfg_.delta, -exps.eps);
        for (double v : w.field.data())
            if (!(v > 0.0 && v <= cap * (1.0 + 1e-12))) cap_ok = false;
        if (!cap_ok) manifest_.invariants_passed = false;

        // A_p at p and the A_1 ratio, plus the quadruple-sample stability run
        std::array<double, 3> ap{0, 0, 0};
        detail::parallel_cases(3, threads_, [&](int i) {
            if (i == 0) ap[0] = ap_constant(w, cfg_.p, cfg_.ball_samples, cfg_.rng_seed);
            if (i == 1) ap[1] = ap_constant(w, cfg_.p, 4 * cfg_.ball_samples, cfg_.rng_seed);
            if (i == 2) ap[2] = ap_constant(w, 1.0, 1, cfg_.rng_seed);
        });
        const double drift = (ap[1] - ap[0]) / std::max(ap[0], 1e-300);
        if (formats_.csv) emit("weight.csv", field_to_csv(w.field));
        if (formats_.json_out) {
            json j = weight_to_json(w);
            j["muckenhoupt"] = {{"p", cfg_.p},
                                {"ball_samples", cfg_.ball_samples},
                                {"ap_constant", ap[0]},
                                {"ap_constant_4x", ap[1]},
                                {"sample_drift", drift},
                                {"a1_ratio", ap[2]}};
            emit("weight.json", j.dump(2) + "\n");
        }
        if (!(drift >= 0.0 && drift <= 0.10)) manifest_.invariants_passed = false;
    }

    void pipeline_report(const DiscreteDomain& dom, const ExponentSet& exps, const Field& f,
                         const Field& g) {
        check_operator(dom);
        const OperatorSpec op = cfg_.operator_name == "p-laplace"
                                    ? canonical_p_laplace(cfg_.p)
                                    : perturbed_p_laplace(cfg_.p, dom, 0.5);
        auto [u, rep] = solve_weak(f, g, exps, dom, cfg_.tol, cfg_.max_iters, nullptr, &op);
        if (!rep.converged) manifest_.invariants_passed = false;
        const Weight w = build_weight(f, g, exps, cfg_.delta, cfg_.R, dom);
        const auto est = verify_local_estimate(u, f, g, nullptr, nullptr, w, exps, cfg_.R, dom);
        const auto cor = corollary_check(u, f, g, exps, cfg_.R, dom);
        const double margin = verify_embedding(u, w, exps.p, exps.q, Region::ball(dom, cfg_.R));

        if (formats_.csv) {
            emit("estimate.csv", estimate_rows_to_csv({{"weighted", est}, {"unweighted", cor}}));
        }
        if (formats_.json_out) {
            json j{{"schema", "plab.report.v1"},
                   {"weighted_estimate", estimate_to_json(est)},
                   {"unweighted_estimate", estimate_to_json(cor)},
                   {"embedding_margin", margin},
                   {"solve",
                    {{"iterations", rep.iterations},
                     {"residual_norm", rep.residual_norm},
                     {"converged", rep.converged}}}};
            emit("report.json", j.dump(2) + "\n");
        }
        if (margin < -1e-12 * std::abs(margin + 1.0)) manifest_.invariants_passed = false;
    }

    void emit_sweep(const std::string& stem, const ApproxReport& rep) {
        if (formats_.csv) emit(stem + ".csv", ksweep_to_csv(rep));
        if (formats_.json_out) emit(stem + ".json", ksweep_to_json(rep).dump(2) + "\n");
        if (formats_.svg) {
            PlotSeries unweighted{"unweighted grad p-energy", {}, {}};
            PlotSeries weighted{"weighted grad p-energy", {}, {}};
            for (const auto& r : rep.records) {
                unweighted.x.push_back(r.k);
                unweighted.y.push_back(r.grad_p_unweighted);
                weighted.x.push_back(r.k);
                weighted.y.push_back(r.grad_p_weighted);
            }
            emit(stem + ".svg", loglog_svg("gradient energy along the truncation schedule", "k",
                                           "energy", {unweighted, weighted}));
        }
    }

    ExperimentConfig cfg_;
    std::filesystem::path out_;
    OutputFormats formats_;
    int threads_ = 1;
    RunManifest manifest_;
};

inline RunManifest run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out,
                                  OutputFormats formats = {}, int threads = 1) {
    ExperimentRunner runner(cfg, out, formats, threads);
    return runner.run();
}

} // namespace plab
