#pragma once

// Elementary symmetric polynomial calculus on eigenvalue tuples, the cones
// Gamma_k, and the operator F = log sigma_k on symmetric 2x2 matrices.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace khflow {

// Ordered real n-tuple of eigenvalues.
using EigenTuple = std::vector<double>;

struct ContractViolation : std::logic_error {
    using std::logic_error::logic_error;
};

struct AdmissibilityError : std::runtime_error {
    double margin;
    explicit AdmissibilityError(const std::string& what, double m)
        : std::runtime_error(what), margin(m) {}
};

namespace sym {

// sigma_j(lam) for all j = 0..n via the coefficient recurrence of
// prod_i (1 + lam_i t).  sigma_0 = 1; the empty tuple yields (1).
inline std::vector<double> sigma_all(const EigenTuple& lam) {
    std::vector<double> e(lam.size() + 1, 0.0);
    e[0] = 1.0;
    std::size_t m = 0;
    for (double x : lam) {
        ++m;
        for (std::size_t j = m; j >= 1; --j) e[j] += x * e[j - 1];
    }
    return e;
}

inline double sigma(int k, const EigenTuple& lam) {
    const int n = static_cast<int>(lam.size());
    if (k == 0) return 1.0;
    if (k < 0 || k > n)
        throw ContractViolation("sigma: order k=" + std::to_string(k) +
                                " out of range for n=" + std::to_string(n));
    return sigma_all(lam)[static_cast<std::size_t>(k)];
}

// lam with entry i removed (1-based index, matching lambda|i).
inline EigenTuple deleted(const EigenTuple& lam, int i) {
    const int n = static_cast<int>(lam.size());
    if (i < 1 || i > n)
        throw ContractViolation("deleted: index i=" + std::to_string(i) +
                                " out of range for n=" + std::to_string(n));
    EigenTuple out;
    out.reserve(lam.size() - 1);
    for (int j = 0; j < n; ++j)
        if (j != i - 1) out.push_back(lam[static_cast<std::size_t>(j)]);
    return out;
}

// sigma_k(lambda|i).  For k = n the deleted tuple has too few entries and
// the value is identically zero (the deletion identity still applies).
inline double sigma_deleted(int k, const EigenTuple& lam, int i) {
    const EigenTuple rest = deleted(lam, i);
    if (k > static_cast<int>(rest.size())) return 0.0;
    return sigma(k, rest);
}

// Component i of grad sigma_k: f_i = sigma_{k-1}(lambda|i).
inline std::vector<double> grad_sigma(int k, const EigenTuple& lam) {
    const int n = static_cast<int>(lam.size());
    if (k < 1 || k > n)
        throw ContractViolation("grad_sigma: order k out of range");
    std::vector<double> g(lam.size());
    for (int i = 1; i <= n; ++i)
        g[static_cast<std::size_t>(i - 1)] = sigma_deleted(k - 1, lam, i);
    return g;
}

struct ConeResult {
    bool inside = false;
    double margin = 0.0;  // min over 1 <= l <= k of sigma_l
};

// Gamma_k membership: sigma_l > 0 for every 1 <= l <= k (strict, no tolerance).
inline ConeResult in_gamma_k(const EigenTuple& lam, int k) {
    const int n = static_cast<int>(lam.size());
    if (k < 1 || k > n)
        throw ContractViolation("in_gamma_k: order k out of range");
    const auto e = sigma_all(lam);
    double margin = e[1];
    for (int l = 1; l <= k; ++l)
        margin = std::min(margin, e[static_cast<std::size_t>(l)]);
    return {margin > 0.0, margin};
}

inline double binom(int n, int k) {
    double v = 1.0;
    for (int j = 1; j <= k; ++j) v *= static_cast<double>(n - k + j) / j;
    return v;
}

struct IdentityReport {
    double res_deletion = 0.0;   // sigma_k = sigma_k(lam|i) + lam_i sigma_{k-1}(lam|i)
    double res_euler = 0.0;      // sum lam_i f_i = k sigma_k
    double res_gradsum = 0.0;    // sum f_i = (n-k+1) sigma_{k-1}
    bool cone_checked = false;   // inequality clauses evaluated
    bool deleted_positive = false;      // sigma_l(lam|i) > 0, l < k
    bool top_product_bound = false;     // lam_1 f_1 >= (k/n) sigma_k  (lam sorted)
    bool grad_ordering = false;         // f_i <= f_j whenever lam_i >= lam_j
    bool maclaurin = false;             // normalized power means nonincreasing
    bool pass(double tol = 1e-12) const {
        bool ids = res_deletion <= tol && res_euler <= tol && res_gradsum <= tol;
        if (!cone_checked) return ids;
        return ids && deleted_positive && top_product_bound && grad_ordering &&
               maclaurin;
    }
};

// Checks the sigma_k identities (unconditionally) and, when lam lies in
// Gamma_k, the inequality clauses as well.  Residuals are relative.
inline IdentityReport check_newton_maclaurin(const EigenTuple& lam, int k,
                                             bool require_cone = false) {
    const int n = static_cast<int>(lam.size());
    if (k < 1 || k > n)
        throw ContractViolation("check_newton_maclaurin: order k out of range");
    IdentityReport rep;
    const auto e = sigma_all(lam);
    const double sk = e[static_cast<std::size_t>(k)];
    const double skm1 = e[static_cast<std::size_t>(k - 1)];
    const auto f = grad_sigma(k, lam);

    auto rel = [](double a, double b) {
        double scale = std::max({std::abs(a), std::abs(b), 1.0});
        return std::abs(a - b) / scale;
    };

    for (int i = 1; i <= n; ++i) {
        const double lhs = sigma_deleted(k, lam, i) +
                           lam[static_cast<std::size_t>(i - 1)] *
                               sigma_deleted(k - 1, lam, i);
        rep.res_deletion = std::max(rep.res_deletion, rel(lhs, sk));
    }
    double dot = 0.0, fsum = 0.0;
    for (int i = 0; i < n; ++i) {
        dot += lam[static_cast<std::size_t>(i)] * f[static_cast<std::size_t>(i)];
        fsum += f[static_cast<std::size_t>(i)];
    }
    rep.res_euler = rel(dot, k * sk);
    rep.res_gradsum = rel(fsum, (n - k + 1) * skm1);

    const auto cone = in_gamma_k(lam, k);
    if (!cone.inside) {
        if (require_cone)
            throw AdmissibilityError("check_newton_maclaurin: tuple outside Gamma_k",
                                     cone.margin);
        return rep;
    }
    rep.cone_checked = true;

    rep.deleted_positive = true;
    for (int i = 1; i <= n; ++i)
        for (int l = 1; l < k; ++l)
            if (sigma_deleted(l, lam, i) <= 0.0) rep.deleted_positive = false;

    EigenTuple sorted = lam;
    std::sort(sorted.begin(), sorted.end(), std::greater<double>());
    rep.top_product_bound =
        sorted[0] * sigma_deleted(k - 1, sorted, 1) >=
        (static_cast<double>(k) / n) * sk - 1e-12 * std::abs(sk);

    rep.grad_ordering = true;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (lam[static_cast<std::size_t>(i)] >= lam[static_cast<std::size_t>(j)] &&
                f[static_cast<std::size_t>(i)] >
                    f[static_cast<std::size_t>(j)] + 1e-12 * std::abs(f[static_cast<std::size_t>(j)]))
                rep.grad_ordering = false;

    rep.maclaurin = true;
    double prev = std::pow(e[1] / binom(n, 1), 1.0);
    for (int l = 2; l <= k; ++l) {
        const double cur =
            std::pow(e[static_cast<std::size_t>(l)] / binom(n, l), 1.0 / l);
        if (cur > prev * (1.0 + 1e-12)) rep.maclaurin = false;
        prev = cur;
    }
    return rep;
}

struct PinchBoundReport {
    double lhs = 0.0;  // f_1
    double rhs = 0.0;  // coefficient * sum f_i
    bool pass = false;
};

struct HypothesisNotMet : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// f_1 >= (mu2/mu1)^2 (k-1)/((n-1)(n-2+k)(n-k+1)) sum_i f_i, under
// mu2 lam_max <= lam_1 <= -mu1 lam_min with lam in Gamma_k, n > k >= 2.
inline PinchBoundReport pinched_gradient_bound(const EigenTuple& lam, double mu1, double mu2,
                                   int k) {
    const int n = static_cast<int>(lam.size());
    if (!(n > k && k >= 2))
        throw ContractViolation("pinched_gradient_bound: requires n > k >= 2");
    if (!(mu1 > 0.0 && mu2 > 0.0 && mu2 <= 1.0))
        throw ContractViolation("pinched_gradient_bound: requires mu1 > 0, 0 < mu2 <= 1");
    if (!in_gamma_k(lam, k).inside)
        throw HypothesisNotMet("pinched_gradient_bound: tuple outside Gamma_k");
    const double lmin = *std::min_element(lam.begin(), lam.end());
    const double lmax = *std::max_element(lam.begin(), lam.end());
    const double l1 = lam[0];
    if (!(mu2 * lmax <= l1 && l1 <= -mu1 * lmin))
        throw HypothesisNotMet("pinched_gradient_bound: mu2*lmax <= lam1 <= -mu1*lmin fails");

    const auto f = grad_sigma(k, lam);
    double fsum = 0.0;
    for (double v : f) fsum += v;
    const double coeff = (mu2 / mu1) * (mu2 / mu1) * (k - 1.0) /
                         ((n - 1.0) * (n - 2.0 + k) * (n - k + 1.0));
    PinchBoundReport rep;
    rep.lhs = f[0];
    rep.rhs = coeff * fsum;
    rep.pass = rep.lhs >= rep.rhs - 1e-14 * std::abs(rep.rhs);
    return rep;
}

}  // namespace sym

// Symmetric 2x2 matrix in a local orthonormal frame.
struct SymMatrix2 {
    double a11 = 0.0, a12 = 0.0, a22 = 0.0;

    double trace() const { return a11 + a22; }
    double det() const { return a11 * a22 - a12 * a12; }

    SymMatrix2 operator+(const SymMatrix2& o) const {
        return {a11 + o.a11, a12 + o.a12, a22 + o.a22};
    }
    SymMatrix2 operator-(const SymMatrix2& o) const {
        return {a11 - o.a11, a12 - o.a12, a22 - o.a22};
    }
    SymMatrix2 operator*(double s) const { return {a11 * s, a12 * s, a22 * s}; }

    // Frobenius pairing; the off-diagonal is counted twice.
    double contract(const SymMatrix2& o) const {
        return a11 * o.a11 + 2.0 * a12 * o.a12 + a22 * o.a22;
    }
};

struct Eigen2 {
    double lam1 = 0.0, lam2 = 0.0;  // lam1 >= lam2
    double c = 1.0, s = 0.0;        // unit eigenvector (c, s) for lam1
};

// Closed-form eigendecomposition; eigenvalues in nonincreasing order.
// The eigenvector for lam2 is (-s, c).
inline Eigen2 eigen_sym2(const SymMatrix2& A) {
    Eigen2 e;
    const double mean = 0.5 * (A.a11 + A.a22);
    const double half_diff = 0.5 * (A.a11 - A.a22);
    const double disc = std::hypot(half_diff, A.a12);
    e.lam1 = mean + disc;
    e.lam2 = mean - disc;
    if (disc == 0.0) return e;  // isotropic, any frame works
    // Pick the better-conditioned eigenvector formula.
    double vx, vy;
    if (half_diff >= 0.0) {
        vx = half_diff + disc;
        vy = A.a12;
    } else {
        vx = A.a12;
        vy = disc - half_diff;
    }
    const double norm = std::hypot(vx, vy);
    if (norm == 0.0) return e;
    e.c = vx / norm;
    e.s = vy / norm;
    return e;
}

struct LogSigmaResult {
    double value = 0.0;   // log sigma_k(lambda(A))
    SymMatrix2 grad;      // F^{ij}, symmetric positive definite
    EigenTuple eigs;      // lambda(A), nonincreasing
};

// F(A) = log sigma_k(lambda(A)) for a 2x2 admissible matrix, with its
// matrix gradient sum_a (sigma_{k-1}(lam|a)/sigma_k) v_a (x) v_a.
inline LogSigmaResult f_log_sigma(const SymMatrix2& A, int k) {
    if (k < 1 || k > 2)
        throw ContractViolation("f_log_sigma: k must be 1 or 2 for 2x2 matrices");
    const Eigen2 e = eigen_sym2(A);
    const EigenTuple lam{e.lam1, e.lam2};
    const auto cone = sym::in_gamma_k(lam, k);
    if (!cone.inside)
        throw AdmissibilityError("f_log_sigma: matrix not admissible for Gamma_k",
                                 cone.margin);
    const double sk = (k == 1) ? (e.lam1 + e.lam2) : (e.lam1 * e.lam2);
    LogSigmaResult out;
    out.value = std::log(sk);
    out.eigs = lam;
    // f_a = sigma_{k-1}(lam | a)
    const double f1 = (k == 1) ? 1.0 : e.lam2;
    const double f2 = (k == 1) ? 1.0 : e.lam1;
    // Isotropic limit: grad = f'(lam) * identity.
    if (std::abs(A.a12) < 1e-14 && std::abs(A.a11 - A.a22) < 1e-14) {
        const double d = f1 / sk;
        out.grad = {d, 0.0, d};
        return out;
    }
    const double w1 = f1 / sk, w2 = f2 / sk;
    out.grad.a11 = w1 * e.c * e.c + w2 * e.s * e.s;
    out.grad.a22 = w1 * e.s * e.s + w2 * e.c * e.c;
    out.grad.a12 = (w1 - w2) * e.c * e.s;
    return out;
}

}  // namespace khflow
