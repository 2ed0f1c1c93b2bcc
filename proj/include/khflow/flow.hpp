#pragma once

// Explicit time integration of u_t = log sigma_k(lambda(chi + Hess u)) - psi
// with Neumann data, admissibility guarding, convergence detection, and the
// linear-operator mode u_t = a^{ij} u_ij - psi.  Converged runs extract the
// constant c of the elliptic problem sigma_k = e^{psi + c} as the limit of
// mean(u_t).

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "grid.hpp"
#include "hessian.hpp"
#include "sym.hpp"

namespace khflow {

enum class FlowMode { Hessian, Linear };

struct Tolerances {
    double tol_c = 1e-6;
    double dt_safety = 0.4;
    double dt_min = 1e-12;
    std::int64_t max_steps = 10'000'000;
    // History is thinned (stride doubling) once it reaches this many samples.
    std::size_t monitor_cap = 1u << 18;
};

struct ProblemSpec {
    Domain domain;
    int k = 2;
    FlowMode mode = FlowMode::Hessian;
    ChiSpec chi;
    Expression psi_x;          // empty means psi = 0
    double psi_t_rate = 0.0;   // psi(x,t) = psi_x(x) + rate * t
    Expression phi;            // empty means phi = 0
    // Rect only: per-side overrides of phi (left, right, bottom, top).
    Expression phi_left, phi_right, phi_bottom, phi_top;
    Expression u0;             // empty means u0 = 0
    ChiSpec lin_coeffs;        // linear mode a^{ij}; empty means identity
    Tolerances tol;
    // When set, overrides the sampled u0 (continuation from another solve).
    std::optional<GridFunction> u0_samples;
};

struct MonitorSample {
    double t = 0.0;
    double sup_ut = 0.0, inf_ut = 0.0;
    double osc_u = 0.0;
    double sup_grad = 0.0;  // max |grad u|
    double margin = 0.0;    // min Gamma_k margin over nodes
    double sup_abs_u = 0.0;
};

struct AdmissibilityLost : std::runtime_error {
    std::int64_t step;
    int node;
    double margin;
    AdmissibilityLost(std::int64_t s, int nd, double m)
        : std::runtime_error("admissibility lost at step " + std::to_string(s) +
                             ", node " + std::to_string(nd) +
                             ", margin " + std::to_string(m)),
          step(s), node(nd), margin(m) {}
};

struct CflUnderflow : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NotConverged : std::runtime_error {
    std::int64_t steps;
    double residual;
    NotConverged(std::int64_t s, double r)
        : std::runtime_error("not converged after " + std::to_string(s) +
                             " steps, residual " + std::to_string(r)),
          steps(s), residual(r) {}
};

struct SolveReport {
    double c = 0.0;
    GridFunction u_final;
    GridFunction u_normalized;  // u - u(anchor)
    std::int64_t steps = 0;
    double residual = 0.0;
    double final_time = 0.0;
    double min_margin = 0.0;
    double aposteriori = 0.0;  // sup |log sigma_k - psi - c|
    std::vector<MonitorSample> history;
};

namespace detail {

struct RhsResult {
    double margin = 1e300;   // min over nodes of the Gamma_k margin
    int worst_node = -1;
    double max_trace = 0.0;  // max over nodes of sum_i F^{ii}
    double sup = -1e300, inf = 1e300;
    double sup_grad = 0.0;
};

}  // namespace detail

class Flow {
  public:
    explicit Flow(const ProblemSpec& spec) : spec_(spec), u_(spec.domain), ut_(spec.domain) {
        const Domain& d = spec_.domain;
        if (spec_.mode == FlowMode::Linear && d.kind != DomainKind::Rect)
            throw DomainError("linear mode requires a rect domain");
        if (spec_.mode == FlowMode::Hessian && d.kind == DomainKind::Rect)
            throw DomainError("hessian mode requires a disk or radial domain");

        psi_.assign(static_cast<std::size_t>(d.interior_count()), 0.0);
        if (!spec_.psi_x.empty()) {
            GridFunction p = sample_field(spec_.psi_x, d);
            std::size_t idx = 0;
            p.for_interior([&](double v) { psi_[idx++] = v; });
        }
        phi_ = spec_.phi.empty() ? zero_boundary(d) : sample_boundary(spec_.phi, d);
        if (d.kind == DomainKind::Rect) {
            auto fill_side = [](const Expression& e, std::vector<double>& side,
                                double fx, double fy, bool along_y) {
                if (e.empty()) return;
                for (std::size_t j = 0; j < side.size(); ++j) {
                    const double coord = (static_cast<double>(j) + 0.5) /
                                         static_cast<double>(side.size());
                    side[j] = along_y ? e.eval(cart_ctx(fx, coord))
                                      : e.eval(cart_ctx(coord, fy));
                }
            };
            fill_side(spec_.phi_left, phi_.left, 0.0, 0.0, true);
            fill_side(spec_.phi_right, phi_.right, 1.0, 0.0, true);
            fill_side(spec_.phi_bottom, phi_.bottom, 0.0, 0.0, false);
            fill_side(spec_.phi_top, phi_.top, 0.0, 1.0, false);
        }

        if (spec_.mode == FlowMode::Hessian && d.kind == DomainKind::Disk &&
            !spec_.chi.empty()) {
            chi_polar_.resize(static_cast<std::size_t>(d.nr) * d.ntheta);
            for (int i = 0; i < d.nr; ++i)
                for (int j = 0; j < d.ntheta; ++j)
                    chi_polar_[static_cast<std::size_t>(i) * d.ntheta + j] =
                        spec_.chi.eval_polar(d.r_of(i), d.theta_of(j));
        }
        if (spec_.mode == FlowMode::Hessian && d.kind == DomainKind::Radial &&
            !spec_.chi.empty())
            throw DomainError("radial mode supports chi = 0 only");

        if (spec_.mode == FlowMode::Linear) {
            const std::size_t n = static_cast<std::size_t>(d.interior_count());
            a11_.assign(n, 1.0);
            a12_.assign(n, 0.0);
            a22_.assign(n, 1.0);
            if (!spec_.lin_coeffs.empty()) {
                std::size_t idx = 0;
                for (int i = 0; i < d.nx; ++i)
                    for (int j = 0; j < d.ny; ++j) {
                        const SymMatrix2 m =
                            spec_.lin_coeffs.eval_cart(cart_ctx(d.x_of(i), d.y_of(j)));
                        a11_[idx] = spec_.lin_coeffs.xx.empty() ? 1.0 : m.a11;
                        a12_[idx] = m.a12;
                        a22_[idx] = spec_.lin_coeffs.yy.empty() ? 1.0 : m.a22;
                        ++idx;
                    }
            }
        }

        if (spec_.u0_samples) {
            if (!(spec_.u0_samples->domain() == d))
                throw DomainError("u0 override domain mismatch");
            u_ = *spec_.u0_samples;
        } else if (!spec_.u0.empty()) {
            u_ = sample_field(spec_.u0, d);
        }
        fill_neumann_ghosts(u_, phi_);

        cur_ = eval_rhs(u_, ut_, t_);
        if (spec_.mode == FlowMode::Hessian && cur_.margin <= 0.0)
            throw AdmissibilityError("initial data not admissible", cur_.margin);
        record_monitor();
    }

    const GridFunction& u() const { return u_; }
    const GridFunction& ut() const { return ut_; }
    double time() const { return t_; }
    std::int64_t steps() const { return step_; }
    double margin() const { return cur_.margin; }
    double min_margin() const { return min_margin_; }
    const std::vector<MonitorSample>& history() const { return history_; }
    const BoundaryData& phi() const { return phi_; }

    double mean_ut() const { return mean_value(ut_); }

    // sup_node |u_t - mean(u_t)|
    double residual() const {
        const double m = mean_ut();
        double r = 0.0;
        ut_.for_interior([&](double v) { r = std::max(r, std::abs(v - m)); });
        return r;
    }

    double stable_dt() const {
        const Domain& d = spec_.domain;
        double denom = 0.0;
        switch (d.kind) {
            case DomainKind::Disk: {
                const double rmin = d.r_of(0);
                denom = 1.0 / (d.dr * d.dr) + 1.0 / (rmin * d.dtheta * rmin * d.dtheta);
                break;
            }
            case DomainKind::Radial:
                denom = 1.0 / (d.dr * d.dr);
                break;
            case DomainKind::Rect:
                denom = 1.0 / (d.dx * d.dx) + 1.0 / (d.dy * d.dy);
                break;
        }
        const double dt = spec_.tol.dt_safety / (cur_.max_trace * denom);
        if (dt < spec_.tol.dt_min)
            throw CflUnderflow("stable_dt " + std::to_string(dt) + " below dt_min");
        return dt;
    }

    // One forward-Euler step.  On admissibility loss of the trial state the
    // step is retried with halved dt, up to 8 halvings.
    void advance() {
        double dt = stable_dt();
        for (int attempt = 0;; ++attempt) {
            trial_ = u_;
            apply_update(trial_, dt);
            fill_neumann_ghosts(trial_, phi_);
            detail::RhsResult next = eval_rhs(trial_, ut_trial_, t_ + dt);
            if (spec_.mode == FlowMode::Hessian && next.margin <= 0.0) {
                if (attempt >= 8)
                    throw AdmissibilityLost(step_, next.worst_node, next.margin);
                dt *= 0.5;
                if (dt < spec_.tol.dt_min)
                    throw CflUnderflow("dt underflow during admissibility retry");
                continue;
            }
            std::swap(u_, trial_);
            std::swap(ut_, ut_trial_);
            cur_ = next;
            t_ += dt;
            ++step_;
            min_margin_ = std::min(min_margin_, cur_.margin);
            record_monitor();
            return;
        }
    }

    SolveReport run_to_convergence() {
        if (spec_.psi_t_rate != 0.0)
            throw ContractViolation("run_to_convergence requires psi_t_rate = 0");
        double res = residual();
        while (res >= spec_.tol.tol_c) {
            if (step_ >= spec_.tol.max_steps) throw NotConverged(step_, res);
            advance();
            res = residual();
        }
        return make_report(res);
    }

    void run_until(double t_end) {
        while (t_ < t_end) {
            if (step_ >= spec_.tol.max_steps)
                throw NotConverged(step_, residual());
            advance();
        }
    }

    SolveReport make_report(double res) const {
        SolveReport rep;
        rep.c = mean_ut();
        rep.u_final = u_;
        rep.steps = step_;
        rep.residual = res;
        rep.final_time = t_;
        rep.min_margin = min_margin_;
        rep.history = history_;
        rep.u_normalized = normalized(anchor_node());
        // a posteriori: log sigma_k - psi - c = u_t - c pointwise
        double ap = 0.0;
        ut_.for_interior([&](double v) { ap = std::max(ap, std::abs(v - rep.c)); });
        rep.aposteriori = ap;
        return rep;
    }

    // Node nearest the domain centroid, lowest index on ties.
    int anchor_node() const {
        const Domain& d = spec_.domain;
        switch (d.kind) {
            case DomainKind::Disk:
            case DomainKind::Radial:
                return 0;  // innermost ring, theta = 0
            case DomainKind::Rect: {
                int best = 0;
                double best_d = 1e300;
                int idx = 0;
                for (int i = 0; i < d.nx; ++i)
                    for (int j = 0; j < d.ny; ++j, ++idx) {
                        const double ddx = d.x_of(i) - 0.5, ddy = d.y_of(j) - 0.5;
                        const double dist = ddx * ddx + ddy * ddy;
                        if (dist < best_d) {
                            best_d = dist;
                            best = idx;
                        }
                    }
                return best;
            }
        }
        return 0;
    }

    GridFunction normalized(int anchor) const {
        const Domain& d = spec_.domain;
        GridFunction out = u_;
        double ref = 0.0;
        switch (d.kind) {
            case DomainKind::Disk:
                ref = u_.at(anchor / d.ntheta, anchor % d.ntheta);
                for (int i = -1; i <= d.nr; ++i)
                    for (int j = 0; j < d.ntheta; ++j) out.at(i, j) -= ref;
                break;
            case DomainKind::Radial:
                ref = u_.at(anchor);
                for (int i = -1; i <= d.nr; ++i) out.at(i) -= ref;
                break;
            case DomainKind::Rect:
                ref = u_.rc(anchor / d.ny, anchor % d.ny);
                for (int i = -1; i <= d.nx; ++i)
                    for (int j = -1; j <= d.ny; ++j) out.rc(i, j) -= ref;
                break;
        }
        return out;
    }

  private:
    ProblemSpec spec_;
    GridFunction u_, ut_, trial_, ut_trial_;
    BoundaryData phi_;
    std::vector<double> psi_;
    std::vector<SymMatrix2> chi_polar_;
    std::vector<double> a11_, a12_, a22_;
    double t_ = 0.0;
    std::int64_t step_ = 0;
    detail::RhsResult cur_;
    double min_margin_ = 1e300;
    std::vector<MonitorSample> history_;
    std::size_t monitor_stride_ = 1;

    void apply_update(GridFunction& dst, double dt) {
        const Domain& d = spec_.domain;
        switch (d.kind) {
            case DomainKind::Disk:
                for (int i = 0; i < d.nr; ++i)
                    for (int j = 0; j < d.ntheta; ++j)
                        dst.at(i, j) = u_.at(i, j) + dt * ut_.at(i, j);
                break;
            case DomainKind::Radial:
                for (int i = 0; i < d.nr; ++i) dst.at(i) = u_.at(i) + dt * ut_.at(i);
                break;
            case DomainKind::Rect:
                for (int i = 0; i < d.nx; ++i)
                    for (int j = 0; j < d.ny; ++j)
                        dst.rc(i, j) = u_.rc(i, j) + dt * ut_.rc(i, j);
                break;
        }
    }

    detail::RhsResult eval_rhs(const GridFunction& v, GridFunction& out, double t) {
        if (out.domain().interior_count() == 0) out = GridFunction(spec_.domain);
        switch (spec_.domain.kind) {
            case DomainKind::Disk: return rhs_disk(v, out, t);
            case DomainKind::Radial: return rhs_radial(v, out, t);
            case DomainKind::Rect: return rhs_rect_linear(v, out, t);
        }
        throw std::logic_error("unreachable");
    }

    // margin of lambda(U) for Gamma_k from matrix invariants; k is 1 or 2.
    static double margin2(double tr, double det, int k) {
        return k == 1 ? tr : std::min(tr, det);
    }

    detail::RhsResult rhs_disk(const GridFunction& v, GridFunction& out, double t) {
        const Domain& d = spec_.domain;
        const int k = spec_.k;
        detail::RhsResult res;
        const double shift = spec_.psi_t_rate * t;
        std::size_t idx = 0;
        for (int i = 0; i < d.nr; ++i) {
            const double r = d.r_of(i);
            const double inv_r = 1.0 / r, inv_r2 = inv_r * inv_r;
            const double inv_dr = 1.0 / d.dr, inv_dt2 = 1.0 / (d.dtheta * d.dtheta);
            const double inv_dtheta = 1.0 / d.dtheta;
            for (int j = 0; j < d.ntheta; ++j, ++idx) {
                const int jp = (j + 1 == d.ntheta) ? 0 : j + 1;
                const int jm = (j == 0) ? d.ntheta - 1 : j - 1;
                const double u_c = v.at(i, j);
                const double u_rp = v.at(i + 1, j), u_rm = v.at(i - 1, j);
                const double u_tp = v.at(i, jp), u_tm = v.at(i, jm);
                const double ur = 0.5 * (u_rp - u_rm) * inv_dr;
                const double ut = 0.5 * (u_tp - u_tm) * inv_dtheta;
                const double urr = (u_rp - 2.0 * u_c + u_rm) * inv_dr * inv_dr;
                const double utt = (u_tp - 2.0 * u_c + u_tm) * inv_dt2;
                const double urt = 0.25 *
                                   (v.at(i + 1, jp) - v.at(i + 1, jm) - v.at(i - 1, jp) +
                                    v.at(i - 1, jm)) *
                                   inv_dr * inv_dtheta;
                double h11 = urr;
                double h22 = ur * inv_r + utt * inv_r2;
                double h12 = urt * inv_r - ut * inv_r2;
                if (!chi_polar_.empty()) {
                    const SymMatrix2& c = chi_polar_[idx];
                    h11 += c.a11;
                    h22 += c.a22;
                    h12 += c.a12;
                }
                const double tr = h11 + h22;
                const double det = h11 * h22 - h12 * h12;
                const double m = margin2(tr, det, k);
                if (m < res.margin) {
                    res.margin = m;
                    res.worst_node = static_cast<int>(idx);
                }
                const double sk = (k == 1) ? tr : det;
                double f;
                if (m > 0.0) {
                    f = std::log(sk) - psi_[idx] - shift;
                    const double trace_f = (k == 1) ? 2.0 / tr : tr / det;
                    res.max_trace = std::max(res.max_trace, trace_f);
                } else {
                    f = 0.0;  // node flagged inadmissible; caller rejects the state
                }
                out.at(i, j) = f;
                res.sup = std::max(res.sup, f);
                res.inf = std::min(res.inf, f);
                const double g2 = ur * ur + ut * inv_r * ut * inv_r;
                res.sup_grad = std::max(res.sup_grad, g2);
            }
        }
        res.sup_grad = std::sqrt(res.sup_grad);
        return res;
    }

    detail::RhsResult rhs_radial(const GridFunction& v, GridFunction& out, double t) {
        const Domain& d = spec_.domain;
        const int k = spec_.k;
        detail::RhsResult res;
        const double shift = spec_.psi_t_rate * t;
        const double inv_dr = 1.0 / d.dr;
        for (int i = 0; i < d.nr; ++i) {
            const double up = 0.5 * (v.at(i + 1) - v.at(i - 1)) * inv_dr;
            const double upp = (v.at(i + 1) - 2.0 * v.at(i) + v.at(i - 1)) * inv_dr * inv_dr;
            const double lam2 = up / d.r_of(i);
            const double tr = upp + lam2;
            const double det = upp * lam2;
            const double m = margin2(tr, det, k);
            if (m < res.margin) {
                res.margin = m;
                res.worst_node = i;
            }
            double f;
            if (m > 0.0) {
                const double sk = (k == 1) ? tr : det;
                f = std::log(sk) - psi_[static_cast<std::size_t>(i)] - shift;
                const double trace_f = (k == 1) ? 2.0 / tr : tr / det;
                res.max_trace = std::max(res.max_trace, trace_f);
            } else {
                f = 0.0;
            }
            out.at(i) = f;
            res.sup = std::max(res.sup, f);
            res.inf = std::min(res.inf, f);
            res.sup_grad = std::max(res.sup_grad, std::abs(up));
        }
        return res;
    }

    detail::RhsResult rhs_rect_linear(const GridFunction& v, GridFunction& out, double t) {
        const Domain& d = spec_.domain;
        detail::RhsResult res;
        res.margin = 1e300;
        const double shift = spec_.psi_t_rate * t;
        const double ix2 = 1.0 / (d.dx * d.dx), iy2 = 1.0 / (d.dy * d.dy);
        std::size_t idx = 0;
        for (int i = 0; i < d.nx; ++i)
            for (int j = 0; j < d.ny; ++j, ++idx) {
                const double uxx = (v.rc(i + 1, j) - 2.0 * v.rc(i, j) + v.rc(i - 1, j)) * ix2;
                const double uyy = (v.rc(i, j + 1) - 2.0 * v.rc(i, j) + v.rc(i, j - 1)) * iy2;
                double f = a11_[idx] * uxx + a22_[idx] * uyy;
                if (a12_[idx] != 0.0)
                    f += 2.0 * a12_[idx] * rect_cross_at(v, i, j);
                f -= psi_[idx] + shift;
                out.rc(i, j) = f;
                res.sup = std::max(res.sup, f);
                res.inf = std::min(res.inf, f);
                res.max_trace = std::max(res.max_trace, a11_[idx] + a22_[idx]);
                const double ux = 0.5 * (v.rc(i + 1, j) - v.rc(i - 1, j)) / d.dx;
                const double uy = 0.5 * (v.rc(i, j + 1) - v.rc(i, j - 1)) / d.dy;
                res.sup_grad = std::max(res.sup_grad, ux * ux + uy * uy);
            }
        res.sup_grad = std::sqrt(res.sup_grad);
        return res;
    }

    void record_monitor() {
        if (step_ % static_cast<std::int64_t>(monitor_stride_) != 0) return;
        MonitorSample s;
        s.t = t_;
        s.sup_ut = cur_.sup;
        s.inf_ut = cur_.inf;
        s.sup_grad = cur_.sup_grad;
        s.margin = (spec_.mode == FlowMode::Hessian) ? cur_.margin : 0.0;
        double umax = -1e300, umin = 1e300, uabs = 0.0;
        u_.for_interior([&](double v) {
            umax = std::max(umax, v);
            umin = std::min(umin, v);
            uabs = std::max(uabs, std::abs(v));
        });
        s.osc_u = umax - umin;
        s.sup_abs_u = uabs;
        history_.push_back(s);
        if (history_.size() >= spec_.tol.monitor_cap) {
            std::vector<MonitorSample> thinned;
            thinned.reserve(history_.size() / 2 + 1);
            for (std::size_t i = 0; i < history_.size(); i += 2)
                thinned.push_back(history_[i]);
            history_ = std::move(thinned);
            monitor_stride_ *= 2;
        }
    }
};

inline SolveReport run_to_convergence(const ProblemSpec& spec) {
    Flow f(spec);
    return f.run_to_convergence();
}

// One-dimensional reduction lambda = (u'', u'/r); serves as the
// cross-validation oracle for the 2D disk solver.
inline SolveReport radial_solve(const ProblemSpec& spec) {
    ProblemSpec s = spec;
    if (s.domain.kind == DomainKind::Disk) s.domain = Domain::radial(s.domain.nr);
    if (s.domain.kind != DomainKind::Radial)
        throw DomainError("radial_solve: radial (or disk) domain required");
    Flow f(s);
    return f.run_to_convergence();
}

struct MonitorReport {
    bool sup_ut_nonincreasing = true;
    bool inf_ut_nondecreasing = true;
    bool ut_growth_bounded = true;   // |u_t(t)| <= sup|u_t(0)| + |rate| t + slack
    bool c0_bounded = true;          // sup|u| <= sup|u0| + sup|u_t| t + slack
    double osc_excess = 0.0;         // max_t osc(t) - osc(0)
    double osc_tail_variation = 0.0; // osc variation over the last tenth
    bool pass(double osc_allowance = 0.1) const {
        return sup_ut_nonincreasing && inf_ut_nondecreasing && ut_growth_bounded &&
               c0_bounded && osc_excess <= osc_allowance;
    }
};

// Runtime monitors: extremum monotonicity of u_t (time-independent data),
// |u_t| growth at most linear in |psi_t|, oscillation boundedness, and the
// C0 growth bound.
inline MonitorReport monitor_checks(const std::vector<MonitorSample>& h, double rate,
                                    double slack = 1e-8) {
    MonitorReport rep;
    if (h.empty()) return rep;
    const double sup0 = h.front().sup_ut, inf0 = h.front().inf_ut;
    const double abs0 = std::max(std::abs(sup0), std::abs(inf0));
    const double osc0 = h.front().osc_u;
    const double supu0 = h.front().sup_abs_u;
    double max_abs_ut = 0.0;
    double prev_sup = sup0, prev_inf = inf0;
    for (const auto& s : h) {
        max_abs_ut = std::max(max_abs_ut, std::max(std::abs(s.sup_ut), std::abs(s.inf_ut)));
        if (rate == 0.0) {
            if (s.sup_ut > prev_sup + slack) rep.sup_ut_nonincreasing = false;
            if (s.inf_ut < prev_inf - slack) rep.inf_ut_nondecreasing = false;
            prev_sup = std::min(prev_sup, s.sup_ut);
            prev_inf = std::max(prev_inf, s.inf_ut);
        }
        const double bound = abs0 + std::abs(rate) * s.t + slack;
        if (std::max(std::abs(s.sup_ut), std::abs(s.inf_ut)) > bound)
            rep.ut_growth_bounded = false;
        rep.osc_excess = std::max(rep.osc_excess, s.osc_u - osc0);
    }
    for (const auto& s : h)
        if (s.sup_abs_u > supu0 + max_abs_ut * s.t + slack) rep.c0_bounded = false;
    const std::size_t tail = h.size() - h.size() / 10;
    double tmin = 1e300, tmax = -1e300;
    for (std::size_t i = (tail > 0 ? tail - 1 : 0); i < h.size(); ++i) {
        tmin = std::min(tmin, h[i].osc_u);
        tmax = std::max(tmax, h[i].osc_u);
    }
    rep.osc_tail_variation = (tmax >= tmin) ? tmax - tmin : 0.0;
    return rep;
}

}  // namespace khflow
