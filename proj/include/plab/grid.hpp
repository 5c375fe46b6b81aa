#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "plab/common.hpp"

namespace plab {

enum class Shape { Rectangle, LShape, Interval };

// Geometric description of a bounded polygonal domain on a uniform grid.
// The L-shape is the rectangle minus its upper-right quadrant.
struct DomainSpec {
    Shape shape = Shape::Rectangle;
    std::array<double, 2> lo{0.0, 0.0};
    std::array<double, 2> hi{1.0, 1.0};
    double h = 0.125;
    int codim = 1; // N
    bool has_origin = false;
    std::array<double, 2> origin{0.0, 0.0}; // defaults to box midpoint

    static DomainSpec rectangle(double x0, double x1, double y0, double y1, double h, int N = 1) {
        DomainSpec s;
        s.shape = Shape::Rectangle;
        s.lo = {x0, y0};
        s.hi = {x1, y1};
        s.h = h;
        s.codim = N;
        return s;
    }
    static DomainSpec lshape(double x0, double x1, double y0, double y1, double h, int N = 1) {
        DomainSpec s = rectangle(x0, x1, y0, y1, h, N);
        s.shape = Shape::LShape;
        return s;
    }
    static DomainSpec interval(double x0, double x1, double h, int N = 1) {
        DomainSpec s;
        s.shape = Shape::Interval;
        s.lo = {x0, 0.0};
        s.hi = {x1, 0.0};
        s.h = h;
        s.codim = N;
        return s;
    }
};

// Forward-difference site: one cell of the zero-extended lattice together
// with the dense indices of the cell itself and its +axis neighbours
// (-1 where the neighbour is exterior, i.e. a homogeneous Dirichlet ghost).
struct GradientSite {
    int self = -1;
    std::array<int, 2> up{-1, -1};
};

// Bounded polygonal domain as an interior-cell mask on a uniform lattice.
// Cells are closed squares of side h; values attach to cell centers.
class DiscreteDomain {
public:
    DiscreteDomain(const DomainSpec& spec) : spec_(spec) {
        require(spec.h > 0, "build_domain: spacing h must be positive");
        require(spec.codim == 1 || spec.codim == 2, "build_domain: codomain dimension must be 1 or 2");
        dim_ = (spec.shape == Shape::Interval) ? 1 : 2;
        codim_ = spec.codim;
        h_ = spec.h;
        for (int a = 0; a < dim_; ++a) {
            const double len = spec.hi[a] - spec.lo[a];
            require(len > 0, "build_domain: box must have positive extent");
            const double cells = len / h_;
            const long n = std::lround(cells);
            require(n >= 1 && std::abs(cells - double(n)) <= 1e-9 * std::max(1.0, cells),
                    "build_domain: extent along axis " + std::to_string(a) +
                        " is not an integer multiple of h");
            nx_[a] = int(n);
        }
        if (dim_ == 1) nx_[1] = 1;
        if (spec.shape == Shape::LShape) {
            require(nx_[0] % 2 == 0 && nx_[1] % 2 == 0,
                    "build_domain: L-shape needs an even cell count per axis");
        }
        for (int a = 0; a < 2; ++a) {
            lo_[a] = spec.lo[a];
            hi_[a] = spec.hi[a];
            origin_[a] = spec.has_origin ? spec.origin[a] : 0.5 * (spec.lo[a] + spec.hi[a]);
        }
        if (dim_ == 1) {
            hi_[1] = lo_[1];
            origin_[1] = 0.0;
        }

        // interior mask
        interior_.assign(std::size_t(nx_[0]) * nx_[1], 0);
        dense_.assign(interior_.size(), -1);
        const double mx = 0.5 * (lo_[0] + hi_[0]);
        const double my = 0.5 * (lo_[1] + hi_[1]);
        for (int iy = 0; iy < nx_[1]; ++iy) {
            for (int ix = 0; ix < nx_[0]; ++ix) {
                bool in = true;
                if (spec.shape == Shape::LShape) {
                    const double cx = lo_[0] + (ix + 0.5) * h_;
                    const double cy = lo_[1] + (iy + 0.5) * h_;
                    if (cx > mx && cy > my) in = false;
                }
                if (in) {
                    const int lid = iy * nx_[0] + ix;
                    interior_[std::size_t(lid)] = 1;
                    dense_[std::size_t(lid)] = int(cells_.size());
                    cells_.push_back(lid);
                }
            }
        }
        require(!cells_.empty(), "build_domain: empty domain");
        require(connected(), "build_domain: interior cell set is not edge-connected");
        build_sites();
    }

    int dim() const { return dim_; }
    int codim() const { return codim_; }
    double spacing() const { return h_; }
    double cell_measure() const { return dim_ == 1 ? h_ : h_ * h_; }
    const std::array<double, 2>& box_lo() const { return lo_; }
    const std::array<double, 2>& box_hi() const { return hi_; }
    const std::array<double, 2>& origin() const { return origin_; }
    int box_n(int axis) const { return nx_[axis]; }
    int box_cell_count() const { return nx_[0] * nx_[1]; }
    int cell_count() const { return int(cells_.size()); }
    const std::vector<int>& cells() const { return cells_; }
    const std::vector<GradientSite>& gradient_sites() const { return sites_; }
    const DomainSpec& spec() const { return spec_; }

    bool is_interior_lattice(int ix, int iy) const {
        if (ix < 0 || iy < 0 || ix >= nx_[0] || iy >= nx_[1]) return false;
        return interior_[std::size_t(iy) * nx_[0] + ix] != 0;
    }
    // dense interior index of a lattice cell, -1 if exterior
    int dense_index(int ix, int iy) const {
        if (ix < 0 || iy < 0 || ix >= nx_[0] || iy >= nx_[1]) return -1;
        return dense_[std::size_t(iy) * nx_[0] + ix];
    }
    int lattice_id(int dense) const { return cells_[std::size_t(dense)]; }
    std::array<int, 2> lattice_coords(int lattice) const {
        return {lattice % nx_[0], lattice / nx_[0]};
    }
    std::array<double, 2> center_of_lattice(int lattice) const {
        const auto c = lattice_coords(lattice);
        return {lo_[0] + (c[0] + 0.5) * h_, dim_ == 2 ? lo_[1] + (c[1] + 0.5) * h_ : 0.0};
    }
    std::array<double, 2> center(int dense) const { return center_of_lattice(cells_[std::size_t(dense)]); }

    double dist_to_origin(int dense) const {
        const auto c = center(dense);
        const double dx = c[0] - origin_[0];
        const double dy = dim_ == 2 ? c[1] - origin_[1] : 0.0;
        return std::sqrt(dx * dx + dy * dy);
    }
    double box_diameter() const {
        const double ex = hi_[0] - lo_[0];
        const double ey = dim_ == 2 ? hi_[1] - lo_[1] : 0.0;
        return std::sqrt(ex * ex + ey * ey);
    }

private:
    bool connected() const {
        if (cells_.empty()) return false;
        std::vector<uint8_t> seen(cells_.size(), 0);
        std::vector<int> stack{0};
        seen[0] = 1;
        std::size_t visited = 1;
        while (!stack.empty()) {
            const int d = stack.back();
            stack.pop_back();
            const auto c = lattice_coords(cells_[std::size_t(d)]);
            const int dx[4] = {1, -1, 0, 0};
            const int dy[4] = {0, 0, 1, -1};
            for (int k = 0; k < (dim_ == 1 ? 2 : 4); ++k) {
                const int nb = dense_index(c[0] + dx[k], c[1] + dy[k]);
                if (nb >= 0 && !seen[std::size_t(nb)]) {
                    seen[std::size_t(nb)] = 1;
                    ++visited;
                    stack.push_back(nb);
                }
            }
        }
        return visited == cells_.size();
    }

    void build_sites() {
        const int y_begin = dim_ == 2 ? -1 : 0;
        const int y_end = dim_ == 2 ? nx_[1] : 1;
        for (int iy = y_begin; iy < y_end; ++iy) {
            for (int ix = -1; ix < nx_[0]; ++ix) {
                GradientSite s;
                s.self = dense_index(ix, iy);
                s.up[0] = dense_index(ix + 1, iy);
                if (dim_ == 2) s.up[1] = dense_index(ix, iy + 1);
                if (s.self >= 0 || s.up[0] >= 0 || s.up[1] >= 0) sites_.push_back(s);
            }
        }
    }

    DomainSpec spec_;
    int dim_ = 2;
    int codim_ = 1;
    double h_ = 0.0;
    std::array<double, 2> lo_{}, hi_{}, origin_{};
    std::array<int, 2> nx_{1, 1};
    std::vector<uint8_t> interior_;
    std::vector<int> dense_;
    std::vector<int> cells_;
    std::vector<GradientSite> sites_;
};

inline DiscreteDomain build_domain(const DomainSpec& spec) { return DiscreteDomain(spec); }

enum class Carrier { Domain, Box };
enum class Rank { Scalar, Gradient };

// Cell-centered sampled quantity. Scalar rank carries N components per cell,
// gradient rank d*N (axis-major: component (j,k) at j*N+k). Box-carried
// fields (weights, maximal functions, cutoffs) have one component on every
// lattice cell of the bounding box.
class Field {
public:
    Field() = default;

    static Field scalar(const DiscreteDomain& dom) {
        return Field(dom, Carrier::Domain, Rank::Scalar, dom.codim());
    }
    static Field gradient_rank(const DiscreteDomain& dom) {
        return Field(dom, Carrier::Domain, Rank::Gradient, dom.dim() * dom.codim());
    }
    static Field box_scalar(const DiscreteDomain& dom) {
        return Field(dom, Carrier::Box, Rank::Scalar, 1);
    }

    const DiscreteDomain& domain() const { return *dom_; }
    Carrier carrier() const { return carrier_; }
    Rank rank() const { return rank_; }
    int comps() const { return comps_; }
    int count() const { return int(values_.size()) / comps_; }
    std::vector<double>& data() { return values_; }
    const std::vector<double>& data() const { return values_; }

    double& at(int cell, int c = 0) { return values_[std::size_t(cell) * comps_ + c]; }
    double at(int cell, int c = 0) const { return values_[std::size_t(cell) * comps_ + c]; }

    double norm_at(int cell) const {
        double s = 0;
        for (int c = 0; c < comps_; ++c) {
            const double v = at(cell, c);
            s += v * v;
        }
        return std::sqrt(s);
    }

    // box-carried lookup by lattice id; domain-carried by dense id
    double value_on_lattice(int lattice, int c = 0) const {
        if (carrier_ == Carrier::Box) return at(lattice, c);
        const auto xy = dom_->lattice_coords(lattice);
        const int d = dom_->dense_index(xy[0], xy[1]);
        return d >= 0 ? at(d, c) : 0.0;
    }

    bool all_finite() const {
        for (double v : values_)
            if (!std::isfinite(v)) return false;
        return true;
    }
    void check_finite(const char* what) const {
        require(all_finite(), std::string(what) + ": non-finite field entry");
    }

    Field& fill(double v) {
        std::fill(values_.begin(), values_.end(), v);
        return *this;
    }

private:
    Field(const DiscreteDomain& dom, Carrier car, Rank r, int comps)
        : dom_(&dom), carrier_(car), rank_(r), comps_(comps) {
        const int n = car == Carrier::Domain ? dom.cell_count() : dom.box_cell_count();
        values_.assign(std::size_t(n) * comps_, 0.0);
    }

    const DiscreteDomain* dom_ = nullptr;
    Carrier carrier_ = Carrier::Domain;
    Rank rank_ = Rank::Scalar;
    int comps_ = 1;
    std::vector<double> values_;
};

// Cells of the parent domain whose centers lie in the open ball B_R(origin).
struct Region {
    const DiscreteDomain* dom = nullptr;
    double radius = 0.0;
    std::vector<int> cells; // dense indices, ascending

    static Region ball(const DiscreteDomain& dom, double R) {
        require(R > 0, "Region: radius must be positive");
        Region reg;
        reg.dom = &dom;
        reg.radius = R;
        for (int i = 0; i < dom.cell_count(); ++i)
            if (dom.dist_to_origin(i) < R) reg.cells.push_back(i);
        return reg;
    }
    static Region whole(const DiscreteDomain& dom) {
        Region reg;
        reg.dom = &dom;
        reg.radius = std::numeric_limits<double>::infinity();
        reg.cells.resize(std::size_t(dom.cell_count()));
        std::iota(reg.cells.begin(), reg.cells.end(), 0);
        return reg;
    }
};

// Per-cell forward differences with homogeneous Dirichlet ghosts across
// boundary faces. Exact for linear fields away from the boundary.
inline Field gradient(const Field& u, const DiscreteDomain& dom) {
    require(&u.domain() == &dom && u.carrier() == Carrier::Domain && u.rank() == Rank::Scalar,
            "gradient: expects a scalar-rank field on the domain");
    const int N = dom.codim();
    const double h = dom.spacing();
    Field g = Field::gradient_rank(dom);
    for (int i = 0; i < dom.cell_count(); ++i) {
        const auto c = dom.lattice_coords(dom.lattice_id(i));
        for (int a = 0; a < dom.dim(); ++a) {
            const int nb = dom.dense_index(c[0] + (a == 0 ? 1 : 0), c[1] + (a == 1 ? 1 : 0));
            for (int n = 0; n < N; ++n) {
                const double upval = nb >= 0 ? u.at(nb, n) : 0.0;
                g.at(i, a * N + n) = (upval - u.at(i, n)) / h;
            }
        }
    }
    g.check_finite("gradient");
    return g;
}

// Midpoint quadrature of |v|^t * omega over a region; deterministic
// ascending-cell summation. Pass omega = nullptr for the unit weight.
inline double weighted_pow_integral(const Field& v, const Field* omega, double t, const Region& reg) {
    require(t >= 1.0, "weighted_norm: exponent must be >= 1");
    const DiscreteDomain& dom = *reg.dom;
    const double hd = dom.cell_measure();
    double acc = 0.0;
    for (int i : reg.cells) {
        const double w = omega ? omega->value_on_lattice(dom.lattice_id(i)) : 1.0;
        acc += std::pow(v.norm_at(i), t) * w * hd;
    }
    return acc;
}

inline double weighted_norm(const Field& v, const Field* omega, double t, const Region& reg) {
    return std::pow(weighted_pow_integral(v, omega, t, reg), 1.0 / t);
}

// Reported Lipschitz constant of the radial cutoff ramp: the measured
// discrete gradient obeys |grad rho| <= cutoff_slope_constant / (R' - R).
inline constexpr double cutoff_slope_constant = 6.283185307179586; // 2*pi

// Radial smoothstep cutoff: 1 on B_R, 0 outside B_{R'}, C^1 ramp between.
inline Field cutoff_field(double R, double Rprime, const DiscreteDomain& dom) {
    require(R > 0 && R < Rprime, "cutoff_field: need 0 < R < R'");
    Field rho = Field::box_scalar(dom);
    for (int lid = 0; lid < dom.box_cell_count(); ++lid) {
        const auto c = dom.center_of_lattice(lid);
        const double dx = c[0] - dom.origin()[0];
        const double dy = dom.dim() == 2 ? c[1] - dom.origin()[1] : 0.0;
        const double r = std::sqrt(dx * dx + dy * dy);
        double val;
        if (r <= R)
            val = 1.0;
        else if (r >= Rprime)
            val = 0.0;
        else {
            const double s = (r - R) / (Rprime - R);
            val = 1.0 - s * s * (3.0 - 2.0 * s);
        }
        rho.at(lid) = val;
    }
    return rho;
}

} // namespace plab
