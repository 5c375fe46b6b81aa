#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "plab/common.hpp"
#include "plab/estimates.hpp"
#include "plab/grid.hpp"
#include "plab/io.hpp"
#include "plab/operators.hpp"

namespace plab {

struct ForcingSpec {
    std::string type = "constant"; // constant | gaussian-bump | radial-singularity | file
    double value = 0.0;            // constant magnitude along E1
    double amplitude = 1.0;        // gaussian peak
    double width = 0.25;           // gaussian width
    double alpha = 1.05;           // singularity exponent
    std::string path;              // CSV field file
};

struct ExperimentConfig {
    std::string pipeline = "solve"; // solve | ksweep | blowup | whitney | weights | report
    // domain
    std::string shape = "rectangle";
    std::array<double, 2> lo{-1.0, -1.0};
    std::array<double, 2> hi{1.0, 1.0};
    double h = 0.125;
    int codim = 1;
    // exponents
    double p = 2.0, r = 3.0, eps = 0.25;
    // data
    ForcingSpec f, g;
    std::string operator_name = "p-laplace"; // or perturbed-p-laplace
    // study parameters
    std::vector<double> k_schedule{2.0, 8.0, 32.0, 128.0};
    double delta = 1.0;
    double R = 0.45;
    double tol = 1e-7;
    int max_iters = 50000;
    std::uint64_t rng_seed = 1;
    std::string out_dir = "out";
    // dichotomy thresholds, calibrated on the 64^2 headline run
    // (alpha = 1.05, k = {2,8,32,128}): unweighted total growth measured
    // ~163 vs ~0 for bounded data; weighted last-two change measured ~0.49
    // vs ~0.59 for the unweighted series
    double T1 = 10.0;
    double T2 = 0.55;
    int ball_samples = 400;
    std::optional<double> lambda; // level-set threshold for the whitney pipeline

    json to_json() const {
        json j;
        j["pipeline"] = pipeline;
        j["domain"] = {{"shape", shape}, {"lo", lo}, {"hi", hi}, {"h", h}, {"codim", codim}};
        j["exponents"] = {{"p", p}, {"r", r}, {"eps", eps}};
        auto forcing = [](const ForcingSpec& s) {
            json f{{"type", s.type}};
            if (s.type == "constant") f["value"] = s.value;
            if (s.type == "gaussian-bump") {
                f["amplitude"] = s.amplitude;
                f["width"] = s.width;
            }
            if (s.type == "radial-singularity") f["alpha"] = s.alpha;
            if (s.type == "file") f["path"] = s.path;
            return f;
        };
        j["f"] = forcing(f);
        j["g"] = forcing(g);
        j["operator"] = operator_name;
        j["k_schedule"] = k_schedule;
        j["delta"] = delta;
        j["R"] = R;
        j["tol"] = tol;
        j["max_iters"] = max_iters;
        j["rng_seed"] = rng_seed;
        j["out_dir"] = out_dir;
        j["thresholds"] = {{"T1", T1}, {"T2", T2}};
        j["ball_samples"] = ball_samples;
        if (lambda) j["lambda"] = *lambda;
        return j;
    }

    std::string canonical_string() const { return to_json().dump(2); }
    std::string hash() const { return checksum_hex(canonical_string()); }
};

inline ForcingSpec forcing_from_json(const json& j, std::vector<std::string>& errors,
                                     const std::string& which) {
    ForcingSpec s;
    if (!j.is_object()) {
        errors.push_back(which + ": forcing spec must be an object");
        return s;
    }
    s.type = j.value("type", "constant");
    if (s.type != "constant" && s.type != "gaussian-bump" && s.type != "radial-singularity" &&
        s.type != "file")
        errors.push_back(which + ".type: unknown profile '" + s.type + "'");
    s.value = j.value("value", 0.0);
    s.amplitude = j.value("amplitude", 1.0);
    s.width = j.value("width", 0.25);
    s.alpha = j.value("alpha", 1.05);
    s.path = j.value("path", "");
    if (s.type == "gaussian-bump" && s.width <= 0)
        errors.push_back(which + ".width: must be positive");
    if (s.type == "file" && s.path.empty()) errors.push_back(which + ".path: required");
    return s;
}

// Parse and validate; every violated constraint is collected and reported in
// one machine-readable error payload.
inline ExperimentConfig config_from_json(const json& j) {
    std::vector<std::string> errors;
    ExperimentConfig c;
    c.pipeline = j.value("pipeline", "solve");
    if (c.pipeline != "solve" && c.pipeline != "ksweep" && c.pipeline != "blowup" &&
        c.pipeline != "whitney" && c.pipeline != "weights" && c.pipeline != "report")
        errors.push_back("pipeline: unknown pipeline '" + c.pipeline + "'");

    if (j.contains("domain")) {
        const auto& d = j["domain"];
        c.shape = d.value("shape", "rectangle");
        if (c.shape != "rectangle" && c.shape != "l-shape" && c.shape != "interval")
            errors.push_back("domain.shape: unknown shape '" + c.shape + "'");
        if (d.contains("lo")) c.lo = {d["lo"][0].get<double>(),
                                      d["lo"].size() > 1 ? d["lo"][1].get<double>() : 0.0};
        if (d.contains("hi")) c.hi = {d["hi"][0].get<double>(),
                                      d["hi"].size() > 1 ? d["hi"][1].get<double>() : 0.0};
        c.h = d.value("h", c.h);
        c.codim = d.value("codim", 1);
        if (c.h <= 0) errors.push_back("domain.h: must be positive");
        if (c.codim != 1 && c.codim != 2) errors.push_back("domain.codim: must be 1 or 2");
        for (int a = 0; a < (c.shape == "interval" ? 1 : 2); ++a) {
            if (c.hi[a] <= c.lo[a]) {
                errors.push_back("domain: hi must exceed lo on every axis");
                break;
            }
            if (c.h > 0) {
                const double cells = (c.hi[a] - c.lo[a]) / c.h;
                if (std::abs(cells - std::lround(cells)) > 1e-9 * std::max(1.0, cells))
                    errors.push_back("domain: extent on axis " + std::to_string(a) +
                                     " is not an integer multiple of h");
            }
        }
    }

    if (j.contains("exponents")) {
        const auto& e = j["exponents"];
        c.p = e.value("p", c.p);
        c.r = e.value("r", c.r);
        c.eps = e.value("eps", c.eps);
    }
    if (!(c.p > 1.0)) errors.push_back("exponents.p: must exceed 1");
    if (!(c.r > c.p)) errors.push_back("exponents.r: must exceed p");
    if (c.p > 1.0 && c.r > c.p) {
        const double cap = std::min(1.0, c.p / c.r);
        if (!(c.eps > 0.0 && c.eps < cap))
            errors.push_back("exponents.eps: must lie in (0, min(1, p/r)) = (0, " +
                             std::to_string(cap) + ")");
    }

    if (j.contains("f")) c.f = forcing_from_json(j["f"], errors, "f");
    if (j.contains("g")) c.g = forcing_from_json(j["g"], errors, "g");
    c.operator_name = j.value("operator", c.operator_name);
    if (c.operator_name != "p-laplace" && c.operator_name != "perturbed-p-laplace")
        errors.push_back("operator: unknown operator '" + c.operator_name + "'");

    if (j.contains("k_schedule")) {
        c.k_schedule = j["k_schedule"].get<std::vector<double>>();
        if (c.k_schedule.empty()) errors.push_back("k_schedule: must be nonempty");
        for (std::size_t i = 0; i + 1 < c.k_schedule.size(); ++i)
            if (c.k_schedule[i + 1] <= c.k_schedule[i]) {
                errors.push_back("k_schedule: must be strictly increasing");
                break;
            }
        for (double k : c.k_schedule)
            if (k <= 0) {
                errors.push_back("k_schedule: levels must be positive");
                break;
            }
    }
    c.delta = j.value("delta", c.delta);
    if (!(c.delta > 0.0 && c.delta <= 1.0)) errors.push_back("delta: must lie in (0, 1]");
    c.R = j.value("R", c.R);
    if (!(c.R > 0.0)) errors.push_back("R: must be positive");
    c.tol = j.value("tol", c.tol);
    if (!(c.tol > 0.0)) errors.push_back("tol: must be positive");
    c.max_iters = j.value("max_iters", c.max_iters);
    if (c.max_iters < 1) errors.push_back("max_iters: must be >= 1");
    c.rng_seed = j.value("rng_seed", c.rng_seed);
    c.out_dir = j.value("out_dir", c.out_dir);
    if (j.contains("thresholds")) {
        c.T1 = j["thresholds"].value("T1", c.T1);
        c.T2 = j["thresholds"].value("T2", c.T2);
    }
    if (!(c.T1 > 0.0)) errors.push_back("thresholds.T1: must be positive");
    if (!(c.T2 > 0.0)) errors.push_back("thresholds.T2: must be positive");
    c.ball_samples = j.value("ball_samples", c.ball_samples);
    if (c.ball_samples < 1) errors.push_back("ball_samples: must be >= 1");
    if (j.contains("lambda")) c.lambda = j["lambda"].get<double>();

    if (!errors.empty()) {
        json err{{"error", "invalid config"}, {"violations", errors}};
        throw std::invalid_argument(err.dump());
    }
    return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        json err{{"error", "config parse failure"}, {"violations", {e.what()}}};
        throw std::invalid_argument(err.dump());
    }
    return config_from_json(j);
}

inline DomainSpec domain_spec_of(const ExperimentConfig& c) {
    DomainSpec s;
    s.shape = c.shape == "rectangle" ? Shape::Rectangle
              : c.shape == "l-shape" ? Shape::LShape
                                     : Shape::Interval;
    s.lo = c.lo;
    s.hi = c.hi;
    s.h = c.h;
    s.codim = c.codim;
    return s;
}

// Materialize a forcing profile on the domain; rank picks the E1 direction
// in R^{d x N} (for f) or R^N (for g).
inline Field build_forcing(const ForcingSpec& s, const DiscreteDomain& dom, bool gradient_rank) {
    Field out = gradient_rank ? Field::gradient_rank(dom) : Field::scalar(dom);
    if (s.type == "file") {
        field_from_csv(read_file(s.path), out);
        return out;
    }
    for (int i = 0; i < dom.cell_count(); ++i) {
        const auto ctr = dom.center(i);
        double v = 0.0;
        if (s.type == "constant") {
            v = s.value;
        } else if (s.type == "gaussian-bump") {
            const double dx = ctr[0] - dom.origin()[0];
            const double dy = dom.dim() == 2 ? ctr[1] - dom.origin()[1] : 0.0;
            v = s.amplitude * std::exp(-(dx * dx + dy * dy) / (s.width * s.width));
        } else if (s.type == "radial-singularity") {
            const double rr = dom.dist_to_origin(i);
            require(rr > 0, "build_forcing: cell center on the singularity");
            v = std::pow(rr, -s.alpha);
        }
        out.at(i, 0) = v;
    }
    return out;
}

} // namespace plab
