#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "plab/common.hpp"
#include "plab/estimates.hpp"
#include "plab/grid.hpp"
#include "plab/maximal.hpp"
#include "plab/solver.hpp"
#include "plab/whitney.hpp"

namespace plab {

using nlohmann::json;

// shortest round-trip decimal for doubles, locale-free
inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string checksum_hex(const std::string& data) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", (unsigned long long)fnv1a64(data));
    return buf;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    require(bool(out), "write_file: cannot open " + path.string());
    out << content;
    require(bool(out), "write_file: write failed for " + path.string());
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    require(bool(in), "read_file: cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---- fields ---------------------------------------------------------------

inline std::string field_to_csv(const Field& field) {
    const DiscreteDomain& dom = field.domain();
    std::ostringstream out;
    out << "cell,x,y";
    for (int c = 0; c < field.comps(); ++c) out << ",c" << c;
    out << "\n";
    const bool on_box = field.carrier() == Carrier::Box;
    const int n = field.count();
    for (int i = 0; i < n; ++i) {
        const int lattice = on_box ? i : dom.lattice_id(i);
        const auto ctr = dom.center_of_lattice(lattice);
        out << i << ',' << fmt(ctr[0]) << ',' << fmt(ctr[1]);
        for (int c = 0; c < field.comps(); ++c) out << ',' << fmt(field.at(i, c));
        out << "\n";
    }
    return out.str();
}

inline json domain_to_json(const DiscreteDomain& dom) {
    const char* shape = dom.spec().shape == Shape::Rectangle  ? "rectangle"
                        : dom.spec().shape == Shape::LShape ? "l-shape"
                                                            : "interval";
    return json{{"shape", shape},
                {"lo", {dom.box_lo()[0], dom.box_lo()[1]}},
                {"hi", {dom.box_hi()[0], dom.box_hi()[1]}},
                {"h", dom.spacing()},
                {"dim", dom.dim()},
                {"codim", dom.codim()},
                {"origin", {dom.origin()[0], dom.origin()[1]}},
                {"cells", dom.cell_count()}};
}

inline json field_to_json(const Field& field) {
    json j;
    j["schema"] = "plab.field.v1";
    j["metadata"] = {{"carrier", field.carrier() == Carrier::Box ? "box" : "domain"},
                     {"components", field.comps()},
                     {"count", field.count()},
                     {"domain", domain_to_json(field.domain())}};
    j["values"] = field.data(); // row-major: cell-major, component-minor
    return j;
}

inline json weight_to_json(const Weight& w) {
    json j = field_to_json(w.field);
    j["schema"] = "plab.weight.v1";
    j["weight"] = {{"eps", w.eps}, {"delta", w.delta}, {"R", w.R}, {"provenance", w.provenance}};
    return j;
}

// file-loaded forcing: the flat CSV written by field_to_csv
inline void field_from_csv(const std::string& csv, Field& field) {
    std::istringstream in(csv);
    std::string line;
    require(bool(std::getline(in, line)), "field_from_csv: empty file");
    int rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string tok;
        std::getline(ls, tok, ',');
        const int cell = std::stoi(tok);
        require(cell >= 0 && cell < field.count(), "field_from_csv: cell index out of range");
        std::getline(ls, tok, ','); // x
        std::getline(ls, tok, ','); // y
        for (int c = 0; c < field.comps(); ++c) {
            require(bool(std::getline(ls, tok, ',')), "field_from_csv: missing component");
            field.at(cell, c) = std::stod(tok);
        }
        ++rows;
    }
    require(rows == field.count(), "field_from_csv: row count does not match the domain");
    field.check_finite("field_from_csv");
}

// ---- reports --------------------------------------------------------------

inline constexpr const char* ksweep_csv_header =
    "k,E_p_unweighted,E_p_weighted,E_r_unweighted,E_r_weighted,xpr_distance,iterations,residual";

inline std::string ksweep_to_csv(const ApproxReport& rep) {
    std::ostringstream out;
    out << ksweep_csv_header << "\n";
    for (const auto& r : rep.records) {
        out << fmt(r.k) << ',' << fmt(r.grad_p_unweighted) << ',' << fmt(r.grad_p_weighted) << ','
            << fmt(r.u_r_unweighted) << ',' << fmt(r.u_r_weighted) << ',' << fmt(r.xpr_dist)
            << ',' << r.iterations << ',' << fmt(r.residual) << "\n";
    }
    return out.str();
}

inline json ksweep_to_json(const ApproxReport& rep) {
    json rows = json::array();
    for (const auto& r : rep.records)
        rows.push_back({{"k", r.k},
                        {"E_p_unweighted", r.grad_p_unweighted},
                        {"E_p_weighted", r.grad_p_weighted},
                        {"E_r_unweighted", r.u_r_unweighted},
                        {"E_r_weighted", r.u_r_weighted},
                        {"xpr_distance", r.xpr_dist},
                        {"iterations", r.iterations},
                        {"residual", r.residual},
                        {"converged", r.converged}});
    return json{{"schema", "plab.ksweep.v1"},
                {"delta", rep.delta},
                {"R", rep.R},
                {"mu", rep.mu},
                {"records", rows}};
}

inline constexpr const char* estimate_csv_header =
    "case,p,r,q,s,eps,delta,R,h,k,lhs_grad,lhs_absorb,rhs_f,rhs_g,rhs_beta1,rhs_beta2,"
    "rhs_geometric,empirical_constant";

inline std::string estimate_rows_to_csv(const std::vector<std::pair<std::string, EstimateReport>>& rows) {
    std::ostringstream out;
    out << estimate_csv_header << "\n";
    for (const auto& [name, e] : rows) {
        out << name << ',' << fmt(e.p) << ',' << fmt(e.r) << ',' << fmt(e.q) << ',' << fmt(e.s)
            << ',' << fmt(e.eps) << ',' << fmt(e.delta) << ',' << fmt(e.R) << ',' << fmt(e.h)
            << ',' << fmt(e.k) << ',' << fmt(e.lhs_grad) << ',' << fmt(e.lhs_absorb) << ','
            << fmt(e.rhs_f) << ',' << fmt(e.rhs_g) << ',' << fmt(e.rhs_beta1) << ','
            << fmt(e.rhs_beta2) << ',' << fmt(e.rhs_geometric) << ','
            << fmt(e.empirical_constant) << "\n";
    }
    return out.str();
}

inline json estimate_to_json(const EstimateReport& e) {
    return json{{"schema", "plab.estimate.v1"},
                {"weighted", e.weighted},
                {"lhs", {{"grad", e.lhs_grad}, {"absorb", e.lhs_absorb}}},
                {"rhs",
                 {{"f", e.rhs_f},
                  {"g", e.rhs_g},
                  {"beta1", e.rhs_beta1},
                  {"beta2", e.rhs_beta2},
                  {"geometric", e.rhs_geometric}}},
                {"empirical_constant", e.empirical_constant},
                {"exponents", {{"p", e.p}, {"r", e.r}, {"q", e.q}, {"s", e.s}, {"eps", e.eps}}},
                {"delta", e.delta},
                {"R", e.R},
                {"h", e.h},
                {"k", e.k}};
}

inline json blowup_to_json(const BlowupReport& b) {
    return json{{"schema", "plab.blowup.v1"},
                {"alpha", b.alpha},
                {"admissible_window", {b.admissible_lo, b.admissible_hi}},
                {"fq_growth", b.fq_growth},
                {"fp_growth", b.fp_growth},
                {"f_in_Lq", b.f_in_Lq},
                {"f_in_Lp", b.f_in_Lp},
                {"unweighted_total_growth", b.unweighted_total_growth},
                {"unweighted_strictly_increasing", b.unweighted_strictly_increasing},
                {"weighted_last_change", b.weighted_last_change},
                {"verdicts",
                 {{"unweighted_divergent", b.unweighted_divergent},
                  {"weighted_bounded", b.weighted_bounded}}},
                {"thresholds", {{"T1", b.threshold_T1}, {"T2", b.threshold_T2}}},
                {"sweep", ksweep_to_json(b.sweep)}};
}

inline json whitney_to_json(const WhitneyDecomposition& w) {
    json cubes = json::array();
    for (std::size_t i = 0; i < w.cubes.size(); ++i) {
        const auto& q = w.cubes[i];
        json neigh = json::array();
        for (int j : w.neighbors[i]) neigh.push_back(j);
        cubes.push_back({{"level", q.level},
                         {"index", {q.lo[0], q.lo[1]}},
                         {"side_cells", q.side},
                         {"floor_clipped", q.floor_clipped},
                         {"dist2_cells", q.dist2},
                         {"neighbors", neigh}});
    }
    return json{{"schema", "plab.whitney.v1"},
                {"root_side_cells", w.root_side},
                {"resolution_floor", w.resolution_floor},
                {"open_cells", w.open_set.count()},
                {"cube_count", w.cubes.size()},
                {"cubes", cubes}};
}

// ---- SVG ------------------------------------------------------------------

struct PlotSeries {
    std::string name;
    std::vector<double> x, y;
};

// Self-contained log-log line plot; axes annotated with decade ticks.
inline std::string loglog_svg(const std::string& title, const std::string& xlabel,
                              const std::string& ylabel, const std::vector<PlotSeries>& series) {
    const int W = 640, H = 480, ML = 70, MR = 20, MT = 40, MB = 50;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (s.x[i] <= 0 || s.y[i] <= 0) continue;
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, s.y[i]);
            ymax = std::max(ymax, s.y[i]);
        }
    if (xmin > xmax) {
        xmin = 0.1;
        xmax = 10;
        ymin = 0.1;
        ymax = 10;
    }
    if (xmin == xmax) xmax = 2 * xmin;
    if (ymin == ymax) ymax = 2 * ymin;
    const double lx0 = std::log10(xmin), lx1 = std::log10(xmax);
    const double ly0 = std::log10(ymin), ly1 = std::log10(ymax);
    auto X = [&](double v) { return ML + (std::log10(v) - lx0) / (lx1 - lx0) * (W - ML - MR); };
    auto Y = [&](double v) { return H - MB - (std::log10(v) - ly0) / (ly1 - ly0) * (H - MT - MB); };

    const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
        << title << "</text>\n";
    out << "<rect x=\"" << ML << "\" y=\"" << MT << "\" width=\"" << W - ML - MR << "\" height=\""
        << H - MT - MB << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int e = int(std::ceil(lx0)); e <= int(std::floor(lx1)); ++e) {
        const double v = std::pow(10.0, e);
        out << "<line x1=\"" << X(v) << "\" y1=\"" << MT << "\" x2=\"" << X(v) << "\" y2=\""
            << H - MB << "\" stroke=\"#dddddd\"/>\n";
        out << "<text x=\"" << X(v) << "\" y=\"" << H - MB + 16
            << "\" text-anchor=\"middle\" font-size=\"11\">1e" << e << "</text>\n";
    }
    for (int e = int(std::ceil(ly0)); e <= int(std::floor(ly1)); ++e) {
        const double v = std::pow(10.0, e);
        out << "<line x1=\"" << ML << "\" y1=\"" << Y(v) << "\" x2=\"" << W - MR << "\" y2=\""
            << Y(v) << "\" stroke=\"#dddddd\"/>\n";
        out << "<text x=\"" << ML - 6 << "\" y=\"" << Y(v) + 4
            << "\" text-anchor=\"end\" font-size=\"11\">1e" << e << "</text>\n";
    }
    out << "<text x=\"" << W / 2 << "\" y=\"" << H - 12
        << "\" text-anchor=\"middle\" font-size=\"13\">" << xlabel << "</text>\n";
    out << "<text x=\"16\" y=\"" << H / 2 << "\" text-anchor=\"middle\" font-size=\"13\" "
        << "transform=\"rotate(-90 16 " << H / 2 << ")\">" << ylabel << "</text>\n";
    int ci = 0;
    for (const auto& s : series) {
        out << "<polyline fill=\"none\" stroke=\"" << colors[ci % 6] << "\" stroke-width=\"1.6\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (s.x[i] <= 0 || s.y[i] <= 0) continue;
            out << X(s.x[i]) << ',' << Y(s.y[i]) << ' ';
        }
        out << "\"/>\n";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (s.x[i] <= 0 || s.y[i] <= 0) continue;
            out << "<circle cx=\"" << X(s.x[i]) << "\" cy=\"" << Y(s.y[i])
                << "\" r=\"3\" fill=\"" << colors[ci % 6] << "\"/>\n";
        }
        out << "<text x=\"" << W - MR - 8 << "\" y=\"" << MT + 18 + 16 * ci
            << "\" text-anchor=\"end\" font-size=\"12\" fill=\"" << colors[ci % 6] << "\">"
            << s.name << "</text>\n";
        ++ci;
    }
    out << "</svg>\n";
    return out.str();
}

// outlines of the Whitney cubes, clipped cells hatched red
inline std::string whitney_svg(const WhitneyDecomposition& w) {
    const int W = 640;
    const double scale = double(W) / double(w.root_side);
    const int H = w.dom->dim() == 2 ? W : 80;
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (const auto& q : w.cubes) {
        const double x = q.lo[0] * scale;
        const double y = w.dom->dim() == 2 ? q.lo[1] * scale : 10.0;
        const double side = q.side * scale;
        const double hgt = w.dom->dim() == 2 ? side : 60.0;
        out << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << side << "\" height=\""
            << hgt << "\" fill=\"" << (q.floor_clipped ? "#f4cccc" : "#e8f0fe")
            << "\" stroke=\"#333333\" stroke-width=\"0.6\"/>\n";
    }
    out << "</svg>\n";
    return out.str();
}

} // namespace plab
