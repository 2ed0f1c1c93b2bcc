#pragma once

// Structured grids (polar disk, radial line, rectangle), scalar field
// sampling, ghost-cell Neumann fills, and midpoint quadrature.
//
// Sign convention used throughout: the boundary normal nu is the INNER
// normal.  On the unit disk nu = -d/dr at r = 1, so the Neumann condition
// u_nu = phi reads u_r = -phi there.

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "expr.hpp"

namespace khflow {

enum class DomainKind { Disk, Radial, Rect };

struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Cell-centered structured grid.  Disk: rings i = 0..Nr-1 at
// r_i = (i+1/2) dr, angles theta_j = j dtheta, unit radius; no node sits at
// the pole.  Rect: cells over [0,1]^2.  Radial: the 1D reduction of the disk.
struct Domain {
    DomainKind kind = DomainKind::Disk;
    int nr = 0, ntheta = 0;  // disk / radial
    int nx = 0, ny = 0;      // rect
    double dr = 0.0, dtheta = 0.0, dx = 0.0, dy = 0.0;

    static Domain disk(int nr, int ntheta) {
        if (nr < 2 || ntheta < 4) throw DomainError("disk: need Nr >= 2, Ntheta >= 4");
        if (ntheta % 2 != 0) throw DomainError("disk: Ntheta must be even (pole pairing)");
        Domain d;
        d.kind = DomainKind::Disk;
        d.nr = nr;
        d.ntheta = ntheta;
        d.dr = 1.0 / nr;
        d.dtheta = 2.0 * M_PI / ntheta;
        return d;
    }

    static Domain radial(int nr) {
        if (nr < 2) throw DomainError("radial: need Nr >= 2");
        Domain d;
        d.kind = DomainKind::Radial;
        d.nr = nr;
        d.dr = 1.0 / nr;
        return d;
    }

    static Domain rect(int nx, int ny) {
        if (nx < 2 || ny < 2) throw DomainError("rect: need Nx, Ny >= 2");
        Domain d;
        d.kind = DomainKind::Rect;
        d.nx = nx;
        d.ny = ny;
        d.dx = 1.0 / nx;
        d.dy = 1.0 / ny;
        return d;
    }

    bool operator==(const Domain& o) const {
        return kind == o.kind && nr == o.nr && ntheta == o.ntheta && nx == o.nx &&
               ny == o.ny;
    }

    int interior_count() const {
        switch (kind) {
            case DomainKind::Disk: return nr * ntheta;
            case DomainKind::Radial: return nr;
            case DomainKind::Rect: return nx * ny;
        }
        return 0;
    }

    double r_of(int i) const { return (i + 0.5) * dr; }          // ring index 0-based
    double theta_of(int j) const { return j * dtheta; }
    double x_of(int i) const { return (i + 0.5) * dx; }
    double y_of(int j) const { return (j + 0.5) * dy; }
};

// Scalar samples over interior nodes plus a one-cell ghost layer.
// Disk storage: (nr+2) x ntheta rows; row 0 is the pole ghost ring, rows
// 1..nr the interior, row nr+1 the outer ghost ring.  Rect storage:
// (nx+2) x (ny+2) with a ghost border.  Radial: nr+2 entries.
class GridFunction {
  public:
    GridFunction() = default;
    explicit GridFunction(const Domain& d) : dom_(d) {
        switch (d.kind) {
            case DomainKind::Disk:
                data_.assign(static_cast<std::size_t>(d.nr + 2) * d.ntheta, 0.0);
                break;
            case DomainKind::Radial:
                data_.assign(static_cast<std::size_t>(d.nr + 2), 0.0);
                break;
            case DomainKind::Rect:
                data_.assign(static_cast<std::size_t>(d.nx + 2) * (d.ny + 2), 0.0);
                break;
        }
    }

    const Domain& domain() const { return dom_; }
    std::vector<double>& raw() { return data_; }
    const std::vector<double>& raw() const { return data_; }

    // Disk / radial: ring index i in [-1, nr], -1 = pole ghost, nr = outer ghost.
    double& at(int i, int j) {
        return data_[static_cast<std::size_t>(i + 1) * dom_.ntheta + wrap(j)];
    }
    double at(int i, int j) const {
        return data_[static_cast<std::size_t>(i + 1) * dom_.ntheta + wrap(j)];
    }
    double& at(int i) { return data_[static_cast<std::size_t>(i + 1)]; }
    double at(int i) const { return data_[static_cast<std::size_t>(i + 1)]; }

    // Rect: cell indices in [-1, nx] x [-1, ny].
    double& rc(int i, int j) {
        return data_[static_cast<std::size_t>(i + 1) * (dom_.ny + 2) + (j + 1)];
    }
    double rc(int i, int j) const {
        return data_[static_cast<std::size_t>(i + 1) * (dom_.ny + 2) + (j + 1)];
    }

    double sup_interior() const {
        double m = -1e300;
        for_interior([&](double v) { m = std::max(m, v); });
        return m;
    }
    double inf_interior() const {
        double m = 1e300;
        for_interior([&](double v) { m = std::min(m, v); });
        return m;
    }

    template <class F>
    void for_interior(F&& f) const {
        switch (dom_.kind) {
            case DomainKind::Disk:
                for (int i = 0; i < dom_.nr; ++i)
                    for (int j = 0; j < dom_.ntheta; ++j) f(at(i, j));
                break;
            case DomainKind::Radial:
                for (int i = 0; i < dom_.nr; ++i) f(at(i));
                break;
            case DomainKind::Rect:
                for (int i = 0; i < dom_.nx; ++i)
                    for (int j = 0; j < dom_.ny; ++j) f(rc(i, j));
                break;
        }
    }

  private:
    Domain dom_;
    std::vector<double> data_;

    int wrap(int j) const {
        const int n = dom_.ntheta;
        j %= n;
        return j < 0 ? j + n : j;
    }
};

// Boundary data sampled at boundary-face midpoints.  Disk: ntheta values at
// (1, theta_j).  Rect: four sides, each nx or ny values; order is
// left (x=0), right (x=1), bottom (y=0), top (y=1).
struct BoundaryData {
    Domain dom;
    std::vector<double> disk;                    // size ntheta
    std::vector<double> left, right, bottom, top;  // rect sides
    double radial_outer = 0.0;                   // single value at r = 1
};

inline EvalContext polar_ctx(double r, double theta, double t = 0.0) {
    EvalContext c;
    c.r = r;
    c.theta = theta;
    c.x = r * std::cos(theta);
    c.y = r * std::sin(theta);
    c.t = t;
    return c;
}

inline EvalContext cart_ctx(double x, double y, double t = 0.0) {
    EvalContext c;
    c.x = x;
    c.y = y;
    c.r = std::hypot(x, y);
    c.theta = std::atan2(y, x);
    c.t = t;
    return c;
}

// Pointwise evaluation of an expression at interior node coordinates.
inline GridFunction sample_field(const Expression& expr, const Domain& d) {
    GridFunction g(d);
    switch (d.kind) {
        case DomainKind::Disk:
            for (int i = 0; i < d.nr; ++i)
                for (int j = 0; j < d.ntheta; ++j)
                    g.at(i, j) = expr.eval(polar_ctx(d.r_of(i), d.theta_of(j)));
            break;
        case DomainKind::Radial:
            for (int i = 0; i < d.nr; ++i)
                g.at(i) = expr.eval(polar_ctx(d.r_of(i), 0.0));
            break;
        case DomainKind::Rect:
            for (int i = 0; i < d.nx; ++i)
                for (int j = 0; j < d.ny; ++j)
                    g.rc(i, j) = expr.eval(cart_ctx(d.x_of(i), d.y_of(j)));
            break;
    }
    return g;
}

// Boundary data evaluated at boundary-face midpoints.
inline BoundaryData sample_boundary(const Expression& expr, const Domain& d) {
    BoundaryData b;
    b.dom = d;
    switch (d.kind) {
        case DomainKind::Disk:
            b.disk.resize(static_cast<std::size_t>(d.ntheta));
            for (int j = 0; j < d.ntheta; ++j)
                b.disk[static_cast<std::size_t>(j)] =
                    expr.eval(polar_ctx(1.0, d.theta_of(j)));
            break;
        case DomainKind::Radial:
            b.radial_outer = expr.eval(polar_ctx(1.0, 0.0));
            break;
        case DomainKind::Rect:
            b.left.resize(static_cast<std::size_t>(d.ny));
            b.right.resize(static_cast<std::size_t>(d.ny));
            b.bottom.resize(static_cast<std::size_t>(d.nx));
            b.top.resize(static_cast<std::size_t>(d.nx));
            for (int j = 0; j < d.ny; ++j) {
                b.left[static_cast<std::size_t>(j)] = expr.eval(cart_ctx(0.0, d.y_of(j)));
                b.right[static_cast<std::size_t>(j)] = expr.eval(cart_ctx(1.0, d.y_of(j)));
            }
            for (int i = 0; i < d.nx; ++i) {
                b.bottom[static_cast<std::size_t>(i)] = expr.eval(cart_ctx(d.x_of(i), 0.0));
                b.top[static_cast<std::size_t>(i)] = expr.eval(cart_ctx(d.x_of(i), 1.0));
            }
            break;
    }
    return b;
}

inline BoundaryData zero_boundary(const Domain& d) {
    BoundaryData b;
    b.dom = d;
    switch (d.kind) {
        case DomainKind::Disk:
            b.disk.assign(static_cast<std::size_t>(d.ntheta), 0.0);
            break;
        case DomainKind::Radial:
            b.radial_outer = 0.0;
            break;
        case DomainKind::Rect:
            b.left.assign(static_cast<std::size_t>(d.ny), 0.0);
            b.right.assign(static_cast<std::size_t>(d.ny), 0.0);
            b.bottom.assign(static_cast<std::size_t>(d.nx), 0.0);
            b.top.assign(static_cast<std::size_t>(d.nx), 0.0);
            break;
    }
    return b;
}

// Ghost fill enforcing u_nu = phi with inner normal nu.
//   disk outer ring:  (ghost - last)/dr = -phi(theta)
//   pole ring:        ghost(theta) = u(r_0, theta + pi)
//   rect sides:       outward derivative (ghost - adjacent)/h = -phi
// Corner ghosts on the rect are filled by double reflection; the five-point
// stencils never read them but the Harnack probe's cross term does.
inline void fill_neumann_ghosts(GridFunction& u, const BoundaryData& phi) {
    const Domain& d = u.domain();
    if (!(d == phi.dom)) throw DomainError("fill_neumann_ghosts: domain mismatch");
    switch (d.kind) {
        case DomainKind::Disk: {
            const int half = d.ntheta / 2;
            for (int j = 0; j < d.ntheta; ++j) {
                u.at(-1, j) = u.at(0, j + half);
                u.at(d.nr, j) = u.at(d.nr - 1, j) - d.dr * phi.disk[static_cast<std::size_t>(j)];
            }
            break;
        }
        case DomainKind::Radial:
            u.at(-1) = u.at(0);
            u.at(d.nr) = u.at(d.nr - 1) - d.dr * phi.radial_outer;
            break;
        case DomainKind::Rect: {
            for (int j = 0; j < d.ny; ++j) {
                u.rc(-1, j) = u.rc(0, j) - d.dx * phi.left[static_cast<std::size_t>(j)];
                u.rc(d.nx, j) = u.rc(d.nx - 1, j) - d.dx * phi.right[static_cast<std::size_t>(j)];
            }
            for (int i = 0; i < d.nx; ++i) {
                u.rc(i, -1) = u.rc(i, 0) - d.dy * phi.bottom[static_cast<std::size_t>(i)];
                u.rc(i, d.ny) = u.rc(i, d.ny - 1) - d.dy * phi.top[static_cast<std::size_t>(i)];
            }
            u.rc(-1, -1) = u.rc(0, 0);
            u.rc(-1, d.ny) = u.rc(0, d.ny - 1);
            u.rc(d.nx, -1) = u.rc(d.nx - 1, 0);
            u.rc(d.nx, d.ny) = u.rc(d.nx - 1, d.ny - 1);
            break;
        }
    }
}

inline double cell_measure(const Domain& d, int i) {
    switch (d.kind) {
        case DomainKind::Disk:
        case DomainKind::Radial:
            return d.r_of(i) * d.dr * (d.kind == DomainKind::Disk ? d.dtheta : 2.0 * M_PI);
        case DomainKind::Rect:
            return d.dx * d.dy;
    }
    return 0.0;
}

inline double domain_volume(const Domain& d) {
    switch (d.kind) {
        case DomainKind::Disk:
        case DomainKind::Radial:
            return M_PI;
        case DomainKind::Rect:
            return 1.0;
    }
    return 0.0;
}

// Midpoint quadrature over the interior.
inline double integrate_volume(const GridFunction& f) {
    const Domain& d = f.domain();
    double s = 0.0;
    switch (d.kind) {
        case DomainKind::Disk:
            for (int i = 0; i < d.nr; ++i) {
                double ring = 0.0;
                for (int j = 0; j < d.ntheta; ++j) ring += f.at(i, j);
                s += ring * d.r_of(i) * d.dr * d.dtheta;
            }
            break;
        case DomainKind::Radial:
            for (int i = 0; i < d.nr; ++i)
                s += f.at(i) * d.r_of(i) * d.dr * 2.0 * M_PI;
            break;
        case DomainKind::Rect:
            for (int i = 0; i < d.nx; ++i)
                for (int j = 0; j < d.ny; ++j) s += f.rc(i, j) * d.dx * d.dy;
            break;
    }
    return s;
}

inline double integrate_boundary(const BoundaryData& g) {
    const Domain& d = g.dom;
    double s = 0.0;
    switch (d.kind) {
        case DomainKind::Disk:
            for (double v : g.disk) s += v * d.dtheta;
            break;
        case DomainKind::Radial:
            s = g.radial_outer * 2.0 * M_PI;
            break;
        case DomainKind::Rect:
            for (double v : g.left) s += v * d.dy;
            for (double v : g.right) s += v * d.dy;
            for (double v : g.bottom) s += v * d.dx;
            for (double v : g.top) s += v * d.dx;
            break;
    }
    return s;
}

// Area-weighted mean over the interior.
inline double mean_value(const GridFunction& f) {
    return integrate_volume(f) / domain_volume(f.domain());
}

// Largest discrete residual of the Neumann condition at boundary faces,
// recomputed from the stored ghosts.
inline double neumann_residual(const GridFunction& u, const BoundaryData& phi) {
    const Domain& d = u.domain();
    double res = 0.0;
    switch (d.kind) {
        case DomainKind::Disk:
            for (int j = 0; j < d.ntheta; ++j)
                res = std::max(res, std::abs((u.at(d.nr, j) - u.at(d.nr - 1, j)) / d.dr +
                                             phi.disk[static_cast<std::size_t>(j)]));
            break;
        case DomainKind::Radial:
            res = std::abs((u.at(d.nr) - u.at(d.nr - 1)) / d.dr + phi.radial_outer);
            break;
        case DomainKind::Rect:
            for (int j = 0; j < d.ny; ++j) {
                res = std::max(res, std::abs((u.rc(-1, j) - u.rc(0, j)) / d.dx +
                                             phi.left[static_cast<std::size_t>(j)]));
                res = std::max(res, std::abs((u.rc(d.nx, j) - u.rc(d.nx - 1, j)) / d.dx +
                                             phi.right[static_cast<std::size_t>(j)]));
            }
            for (int i = 0; i < d.nx; ++i) {
                res = std::max(res, std::abs((u.rc(i, -1) - u.rc(i, 0)) / d.dy +
                                             phi.bottom[static_cast<std::size_t>(i)]));
                res = std::max(res, std::abs((u.rc(i, d.ny) - u.rc(i, d.ny - 1)) / d.dy +
                                             phi.top[static_cast<std::size_t>(i)]));
            }
            break;
    }
    return res;
}

// Distance to the boundary; exact on the disk (1 - r), min over sides on
// the rectangle.
inline GridFunction dist_to_boundary(const Domain& d) {
    GridFunction g(d);
    switch (d.kind) {
        case DomainKind::Disk:
            for (int i = 0; i < d.nr; ++i)
                for (int j = 0; j < d.ntheta; ++j) g.at(i, j) = 1.0 - d.r_of(i);
            break;
        case DomainKind::Radial:
            for (int i = 0; i < d.nr; ++i) g.at(i) = 1.0 - d.r_of(i);
            break;
        case DomainKind::Rect:
            for (int i = 0; i < d.nx; ++i)
                for (int j = 0; j < d.ny; ++j) {
                    const double x = d.x_of(i), y = d.y_of(j);
                    g.rc(i, j) = std::min(std::min(x, 1.0 - x), std::min(y, 1.0 - y));
                }
            break;
    }
    return g;
}

}  // namespace khflow
