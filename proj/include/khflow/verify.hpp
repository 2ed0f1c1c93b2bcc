#pragma once

// Offline checkers: C-subsolution probing, compatibility integrals, and the
// empirical Harnack probe for linear parabolic equations with vanishing
// Neumann data.

#include <algorithm>
#include <cmath>
#include <vector>

#include "flow.hpp"
#include "grid.hpp"
#include "hessian.hpp"
#include "sym.hpp"

namespace khflow {

struct SubsolutionReport {
    bool verdict = false;
    double min_margin = 0.0;       // min Gamma_k margin over nodes
    int inadmissible_nodes = 0;
    int bounded_failures = 0;      // nodes where some coordinate ray stays below level
    double probe_horizon = 0.0;
};

// Definition-style check of a C-subsolution candidate ubar: (a) admissibility
// of lambda(chi + Hess ubar) at every node, and (b) along each coordinate ray
// A(t) = U + t e_i (x) e_i the operator value exceeds the target level within
// the probe horizon.  For F = log sigma_k, sigma_k is affine with positive
// slope along such rays inside Gamma_k, so ray escape certifies that the
// defining set is bounded.  This is a sufficient check, not an equivalence.
inline SubsolutionReport check_c_subsolution(const Expression& ubar,
                                             const Domain& dom, const ChiSpec& chi,
                                             const Expression& phi_expr, int k,
                                             double level,
                                             double probe_horizon = 1e3) {
    GridFunction u = sample_field(ubar, dom);
    BoundaryData phi = phi_expr.empty() ? zero_boundary(dom) : sample_boundary(phi_expr, dom);
    fill_neumann_ghosts(u, phi);
    HessianFrameField f = assemble_hessian(u, chi);

    SubsolutionReport rep;
    rep.probe_horizon = probe_horizon;
    rep.min_margin = 1e300;
    for (const auto& m : f.u_frame) {
        const Eigen2 e = eigen_sym2(m);
        const auto cone = sym::in_gamma_k({e.lam1, e.lam2}, k);
        rep.min_margin = std::min(rep.min_margin, cone.margin);
        if (!cone.inside) {
            ++rep.inadmissible_nodes;
            continue;
        }
        // Coordinate rays in the frame: U + t E11 and U + t E22.
        for (int dir = 0; dir < 2; ++dir) {
            SymMatrix2 probed = m;
            (dir == 0 ? probed.a11 : probed.a22) += probe_horizon;
            const Eigen2 pe = eigen_sym2(probed);
            const double sk = (k == 1) ? (pe.lam1 + pe.lam2) : (pe.lam1 * pe.lam2);
            if (!(sk > 0.0) || std::log(sk) <= level) {
                ++rep.bounded_failures;
                break;
            }
        }
    }
    rep.verdict = rep.inadmissible_nodes == 0 && rep.bounded_failures == 0;
    return rep;
}

struct CompatReport {
    // boundary-trace inequality: boundary integral of phi against the trace of the background.
    double phi_integral = 0.0;
    double trchi_integral = 0.0;          // chi alone
    double trchi_plus_hess_integral = 0.0;  // chi plus a reference Hessian, when given
    bool ineq_boundary_lt_trace = false;
    bool ineq_boundary_lt_trace_ref = false;
    bool has_reference = false;
    // normalized-mean inequality: int h dV <= c(n,k) (int tr chi dV - int phi dS)
    double h_integral = 0.0;
    double cnk = 0.0;
    double mean_rhs = 0.0;
    double mean_margin = 0.0;
    bool ineq_mean_bound = false;
};

// Compatibility integrals forced by Maclaurin's inequality and Stokes'
// theorem.  h is the sigma_k^{1/k}-normalized right-hand side.  The
// boundary-trace inequality inequality is reported in two variants: against chi alone, and
// against chi plus the Hessian trace of a reference function (the solved u
// or a subsolution), since with chi = 0 the bare variant degenerates.
inline CompatReport check_compatibility(const GridFunction& h, const ChiSpec& chi,
                                        const BoundaryData& phi, int k, int n = 2,
                                        const GridFunction* reference_u = nullptr) {
    const Domain& dom = h.domain();
    CompatReport rep;
    rep.phi_integral = integrate_boundary(phi);

    GridFunction trchi(dom);
    if (!chi.empty() && dom.kind == DomainKind::Disk) {
        for (int i = 0; i < dom.nr; ++i)
            for (int j = 0; j < dom.ntheta; ++j) {
                const SymMatrix2 m = chi.eval_polar(dom.r_of(i), dom.theta_of(j));
                trchi.at(i, j) = m.trace();
            }
    }
    rep.trchi_integral = integrate_volume(trchi);
    rep.ineq_boundary_lt_trace = rep.phi_integral < rep.trchi_integral;

    if (reference_u && dom.kind == DomainKind::Disk) {
        rep.has_reference = true;
        GridFunction tr_total = trchi;
        for (int i = 0; i < dom.nr; ++i)
            for (int j = 0; j < dom.ntheta; ++j)
                tr_total.at(i, j) += hessian_at(*reference_u, i, j).trace();
        rep.trchi_plus_hess_integral = integrate_volume(tr_total);
        rep.ineq_boundary_lt_trace_ref = rep.phi_integral < rep.trchi_plus_hess_integral;
    }

    rep.h_integral = integrate_volume(h);
    rep.cnk = std::pow(sym::binom(n, k), 1.0 / k) / n;
    rep.mean_rhs = rep.cnk * (rep.trchi_integral - rep.phi_integral);
    rep.mean_margin = rep.mean_rhs - rep.h_integral;
    rep.ineq_mean_bound = rep.mean_margin >= 0.0;
    return rep;
}

struct HarnackReport {
    std::vector<double> times;
    std::vector<double> sup, inf;
    // gamma(t1, t2) = sup u(., t1) / inf u(., t2) for consecutive requested pairs
    std::vector<double> gamma;   // gamma[i] = sup(times[2i]) / inf(times[2i+1])
    double theta = 1.0;          // uniform ellipticity constant of the coefficients
    double mean_drift = 0.0;     // |mean(t) - mean(0)|, isotropic case only
    bool isotropic = false;
    bool nonnegative = true;     // u >= 0 at every recorded step
};

// Evolves u_t = a^{ij} u_ij with zero Neumann data and measures sup/inf at
// the requested times.  The Harnack constant gamma is measured, never
// asserted against a formula.  Time pairs are consumed as (t1, t2), (t3, t4), ...
inline HarnackReport harnack_probe(const ChiSpec& a_coeffs, const Expression& u0,
                                   const Domain& dom, const std::vector<double>& times) {
    if (dom.kind != DomainKind::Rect)
        throw DomainError("harnack_probe: rect domain required");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1]) || !(times[i - 1] >= 0.0))
            throw ContractViolation("harnack_probe: times must be positive increasing");

    HarnackReport rep;
    // Ellipticity: eigenvalue range of the coefficient field over the nodes.
    double lam_min = 1e300, lam_max = -1e300;
    rep.isotropic = a_coeffs.empty();
    for (int i = 0; i < dom.nx; ++i)
        for (int j = 0; j < dom.ny; ++j) {
            SymMatrix2 m{1.0, 0.0, 1.0};
            if (!a_coeffs.empty()) {
                const SymMatrix2 s = a_coeffs.eval_cart(cart_ctx(dom.x_of(i), dom.y_of(j)));
                m.a11 = a_coeffs.xx.empty() ? 1.0 : s.a11;
                m.a12 = s.a12;
                m.a22 = a_coeffs.yy.empty() ? 1.0 : s.a22;
            }
            const Eigen2 e = eigen_sym2(m);
            lam_min = std::min(lam_min, e.lam2);
            lam_max = std::max(lam_max, e.lam1);
        }
    if (!(lam_min > 0.0))
        throw ContractViolation("harnack_probe: coefficients not uniformly elliptic");
    rep.theta = std::min(lam_min, 1.0 / lam_max);

    ProblemSpec spec;
    spec.domain = dom;
    spec.mode = FlowMode::Linear;
    spec.lin_coeffs = a_coeffs;
    spec.u0 = u0;
    spec.tol.max_steps = 100'000'000;

    Flow flow(spec);
    if (flow.u().inf_interior() < 0.0)
        throw ContractViolation("harnack_probe: u0 must be nonnegative");
    const double mean0 = mean_value(flow.u());

    for (double tq : times) {
        flow.run_until(tq);
        rep.times.push_back(flow.time());
        rep.sup.push_back(flow.u().sup_interior());
        rep.inf.push_back(flow.u().inf_interior());
        if (flow.u().inf_interior() < 0.0) rep.nonnegative = false;
    }
    for (std::size_t i = 0; i + 1 < rep.times.size(); i += 2)
        rep.gamma.push_back(rep.sup[i] / rep.inf[i + 1]);
    if (rep.isotropic)
        rep.mean_drift = std::abs(mean_value(flow.u()) - mean0);
    return rep;
}

// Even extension of a rect field across the x = 0 face (zero-Neumann data
// required there): the doubled domain covers [-1, 1] x [0, 1] reindexed to
// 2*Nx cells.  Used as a symmetry utility by the Harnack tests.
inline GridFunction reflection_extend(const GridFunction& u, const BoundaryData& phi) {
    const Domain& d = u.domain();
    if (d.kind != DomainKind::Rect)
        throw DomainError("reflection_extend: rect domain required");
    for (double v : phi.left)
        if (v != 0.0)
            throw ContractViolation("reflection_extend: nonzero phi on the reflection face");
    Domain dd = Domain::rect(2 * d.nx, d.ny);
    GridFunction out(dd);
    for (int i = 0; i < d.nx; ++i)
        for (int j = 0; j < d.ny; ++j) {
            out.rc(d.nx + i, j) = u.rc(i, j);       // x in (0, 1)
            out.rc(d.nx - 1 - i, j) = u.rc(i, j);   // mirrored
        }
    return out;
}

}  // namespace khflow
