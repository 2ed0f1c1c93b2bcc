#pragma once

// Discrete Hessian assembly in the local polar orthonormal frame, with the
// background tensor chi rotated per node.  All stencils are second-order
// central; ghosts must be filled before assembly.

#include <cmath>
#include <vector>

#include "grid.hpp"
#include "sym.hpp"

namespace khflow {

// Background (0,2)-tensor given by Cartesian component expressions.
struct ChiSpec {
    Expression xx, xy, yy;
    bool empty() const { return xx.empty() && xy.empty() && yy.empty(); }

    SymMatrix2 eval_cart(const EvalContext& c) const {
        SymMatrix2 m;
        if (!xx.empty()) m.a11 = xx.eval(c);
        if (!xy.empty()) m.a12 = xy.eval(c);
        if (!yy.empty()) m.a22 = yy.eval(c);
        return m;
    }

    // Components in the polar frame (e_r, e_theta) at angle theta:
    // rows/cols rotated by R = [[c,-s],[s,c]], chi_polar = R^T chi R.
    SymMatrix2 eval_polar(double r, double theta) const {
        const SymMatrix2 m = eval_cart(polar_ctx(r, theta));
        const double c = std::cos(theta), s = std::sin(theta);
        SymMatrix2 p;
        p.a11 = c * c * m.a11 + 2.0 * c * s * m.a12 + s * s * m.a22;
        p.a22 = s * s * m.a11 - 2.0 * c * s * m.a12 + c * c * m.a22;
        p.a12 = (c * c - s * s) * m.a12 + c * s * (m.a22 - m.a11);
        return p;
    }
};

// Per-node U = chi + Hessian(u) in the local orthonormal frame, with
// eigenvalues attached.
struct HessianFrameField {
    Domain dom;
    std::vector<SymMatrix2> u_frame;   // U at each interior node, row-major
    std::vector<EigenTuple> eigs;      // lambda(U), nonincreasing

    const SymMatrix2& at(int i, int j) const {
        return u_frame[static_cast<std::size_t>(i) * dom.ntheta + j];
    }
};

// Polar-frame Hessian components at an interior disk node:
//   H_rr = u_rr, H_tt = u_r/r + u_tt/r^2, H_rt = u_rt/r - u_t/r^2.
inline SymMatrix2 hessian_at(const GridFunction& u, int i, int j) {
    const Domain& d = u.domain();
    const double r = d.r_of(i);
    const double inv_dr = 1.0 / d.dr, inv_dt = 1.0 / d.dtheta;
    const double u_c = u.at(i, j);
    const double u_rp = u.at(i + 1, j), u_rm = u.at(i - 1, j);
    const double u_tp = u.at(i, j + 1), u_tm = u.at(i, j - 1);
    const double ur = 0.5 * (u_rp - u_rm) * inv_dr;
    const double ut = 0.5 * (u_tp - u_tm) * inv_dt;
    const double urr = (u_rp - 2.0 * u_c + u_rm) * inv_dr * inv_dr;
    const double utt = (u_tp - 2.0 * u_c + u_tm) * inv_dt * inv_dt;
    const double urt = 0.25 * (u.at(i + 1, j + 1) - u.at(i + 1, j - 1) -
                               u.at(i - 1, j + 1) + u.at(i - 1, j - 1)) *
                       inv_dr * inv_dt;
    SymMatrix2 h;
    h.a11 = urr;
    h.a22 = ur / r + utt / (r * r);
    h.a12 = urt / r - ut / (r * r);
    return h;
}

inline HessianFrameField assemble_hessian(const GridFunction& u, const ChiSpec& chi) {
    const Domain& d = u.domain();
    if (d.kind != DomainKind::Disk)
        throw DomainError("assemble_hessian: disk domain required");
    HessianFrameField f;
    f.dom = d;
    f.u_frame.resize(static_cast<std::size_t>(d.nr) * d.ntheta);
    f.eigs.resize(f.u_frame.size());
    for (int i = 0; i < d.nr; ++i)
        for (int j = 0; j < d.ntheta; ++j) {
            SymMatrix2 m = hessian_at(u, i, j);
            if (!chi.empty()) m = m + chi.eval_polar(d.r_of(i), d.theta_of(j));
            const std::size_t idx = static_cast<std::size_t>(i) * d.ntheta + j;
            f.u_frame[idx] = m;
            const Eigen2 e = eigen_sym2(m);
            f.eigs[idx] = {e.lam1, e.lam2};
        }
    return f;
}

// Radial reduction: lambda = (u'', u'/r).
inline SymMatrix2 radial_hessian_at(const GridFunction& u, int i) {
    const Domain& d = u.domain();
    const double inv_dr = 1.0 / d.dr;
    const double upp = (u.at(i + 1) - 2.0 * u.at(i) + u.at(i - 1)) * inv_dr * inv_dr;
    const double up = 0.5 * (u.at(i + 1) - u.at(i - 1)) * inv_dr;
    return {upp, 0.0, up / d.r_of(i)};
}

// Five-point Laplacian at a rect interior cell.
inline double rect_laplacian_at(const GridFunction& u, int i, int j) {
    const Domain& d = u.domain();
    return (u.rc(i + 1, j) - 2.0 * u.rc(i, j) + u.rc(i - 1, j)) / (d.dx * d.dx) +
           (u.rc(i, j + 1) - 2.0 * u.rc(i, j) + u.rc(i, j - 1)) / (d.dy * d.dy);
}

inline double rect_cross_at(const GridFunction& u, int i, int j) {
    const Domain& d = u.domain();
    return 0.25 *
           (u.rc(i + 1, j + 1) - u.rc(i + 1, j - 1) - u.rc(i - 1, j + 1) +
            u.rc(i - 1, j - 1)) /
           (d.dx * d.dy);
}

// Squared frame-gradient magnitude |grad u|^2 at a node.
inline double grad_sq_at(const GridFunction& u, int i, int j) {
    const Domain& d = u.domain();
    const double r = d.r_of(i);
    const double ur = 0.5 * (u.at(i + 1, j) - u.at(i - 1, j)) / d.dr;
    const double ut = 0.5 * (u.at(i, j + 1) - u.at(i, j - 1)) / d.dtheta;
    return ur * ur + (ut / r) * (ut / r);
}

inline double radial_grad_sq_at(const GridFunction& u, int i) {
    const Domain& d = u.domain();
    const double up = 0.5 * (u.at(i + 1) - u.at(i - 1)) / d.dr;
    return up * up;
}

inline double rect_grad_sq_at(const GridFunction& u, int i, int j) {
    const Domain& d = u.domain();
    const double ux = 0.5 * (u.rc(i + 1, j) - u.rc(i - 1, j)) / d.dx;
    const double uy = 0.5 * (u.rc(i, j + 1) - u.rc(i, j - 1)) / d.dy;
    return ux * ux + uy * uy;
}

}  // namespace khflow
