// Command-line driver: solve, check-sub, check-compat, harnack, sigma,
// selftest.  Exit status 0 on success, 1 on contract/config errors, 2 on
// non-convergence.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "khflow/config.hpp"
#include "khflow/flow.hpp"
#include "khflow/io.hpp"
#include "khflow/sym.hpp"
#include "khflow/verify.hpp"

namespace fs = std::filesystem;
using namespace khflow;

namespace {

struct CommonOpts {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir = ".";
    unsigned seed = 42;
};

Config load_config(const CommonOpts& opts) {
    Config cfg;
    if (!opts.config_path.empty()) {
        std::ifstream in(opts.config_path);
        if (!in) throw ConfigError("cannot read config: " + opts.config_path);
        std::stringstream ss;
        ss << in.rdbuf();
        cfg = Config::parse(ss.str());
    }
    for (const auto& ov : opts.overrides) {
        const auto eq = ov.find('=');
        if (eq == std::string::npos)
            throw ConfigError("--set expects key=value, got: " + ov);
        cfg.set(ov.substr(0, eq), ov.substr(eq + 1));
    }
    return cfg;
}

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "config file (key = value lines)");
    cmd->add_option("--set", opts.overrides, "override, repeatable: key=value");
    cmd->add_option("--out", opts.out_dir, "output directory");
    cmd->add_option("--seed", opts.seed, "seed for randomized suites");
}

void emit_run_outputs(const SolveReport& rep, const Config& cfg, const std::string& dir) {
    fs::create_directories(dir);
    write_file(dir + "/monitor.csv", monitor_csv(rep.history));
    write_file(dir + "/grid.csv", grid_csv(rep.u_normalized));
    SummaryRecord s;
    s.add("c", rep.c);
    s.add("steps", rep.steps);
    s.add("residual", rep.residual);
    s.add("final_time", rep.final_time);
    s.add("min_margin", rep.min_margin);
    s.add("aposteriori_residual", rep.aposteriori);
    const MonitorReport mon =
        monitor_checks(rep.history, cfg.get_num("problem.psi_t_rate", 0.0), 1e-6);
    s.add("monitor_sup_ut_nonincreasing", mon.sup_ut_nonincreasing);
    s.add("monitor_inf_ut_nondecreasing", mon.inf_ut_nondecreasing);
    s.add("monitor_ut_growth_bounded", mon.ut_growth_bounded);
    s.add("monitor_c0_bounded", mon.c0_bounded);
    s.add("monitor_osc_excess", mon.osc_excess);
    write_file(dir + "/summary.txt", s.text());
    std::cout << s.text();
}

int cmd_solve(const CommonOpts& opts) {
    const Config cfg = load_config(opts);
    ProblemSpec spec = cfg.to_problem_spec();
    const auto t0 = std::chrono::steady_clock::now();
    SolveReport rep;
    if (spec.domain.kind == DomainKind::Radial)
        rep = radial_solve(spec);
    else
        rep = run_to_convergence(spec);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    emit_run_outputs(rep, cfg, opts.out_dir);
    std::cerr << "wall_time = " << wall << " s\n";
    return 0;
}

int cmd_check_sub(const CommonOpts& opts) {
    const Config cfg = load_config(opts);
    const ProblemSpec spec = cfg.to_problem_spec();
    if (!cfg.has("sub.ubar")) throw ConfigError("check-sub requires sub.ubar");
    const Expression ubar = Expression::parse(cfg.get_str("sub.ubar"));
    const double level = cfg.get_num("sub.level", 0.0);
    const SubsolutionReport rep =
        check_c_subsolution(ubar, spec.domain, spec.chi, spec.phi, spec.k, level);
    SummaryRecord s;
    s.add("verdict", rep.verdict);
    s.add("min_margin", rep.min_margin);
    s.add("inadmissible_nodes", static_cast<std::int64_t>(rep.inadmissible_nodes));
    s.add("bounded_failures", static_cast<std::int64_t>(rep.bounded_failures));
    s.add("probe_horizon", rep.probe_horizon);
    fs::create_directories(opts.out_dir);
    write_file(opts.out_dir + "/summary.txt", s.text());
    std::cout << s.text();
    return 0;
}

int cmd_check_compat(const CommonOpts& opts) {
    const Config cfg = load_config(opts);
    const ProblemSpec spec = cfg.to_problem_spec();
    // h = (e^{psi})^{1/k}; any candidate c shifts it by a constant factor.
    GridFunction h(spec.domain);
    if (!spec.psi_x.empty()) h = sample_field(spec.psi_x, spec.domain);
    GridFunction hh(spec.domain);
    {
        const auto& d = spec.domain;
        for (int i = 0; i < d.nr; ++i)
            for (int j = 0; j < d.ntheta; ++j)
                hh.at(i, j) = std::exp(h.at(i, j) / spec.k);
    }
    const BoundaryData phi = spec.phi.empty() ? zero_boundary(spec.domain)
                                              : sample_boundary(spec.phi, spec.domain);
    const CompatReport rep = check_compatibility(hh, spec.chi, phi, spec.k);
    SummaryRecord s;
    s.add("phi_integral", rep.phi_integral);
    s.add("trchi_integral", rep.trchi_integral);
    s.add("ineq_boundary_lt_trace", rep.ineq_boundary_lt_trace);
    s.add("h_integral", rep.h_integral);
    s.add("cnk", rep.cnk);
    s.add("mean_rhs", rep.mean_rhs);
    s.add("mean_margin", rep.mean_margin);
    s.add("ineq_mean_bound", rep.ineq_mean_bound);
    s.add("obstruction", !rep.ineq_mean_bound);
    fs::create_directories(opts.out_dir);
    write_file(opts.out_dir + "/summary.txt", s.text());
    std::cout << s.text();
    return 0;
}

int cmd_harnack(const CommonOpts& opts) {
    const Config cfg = load_config(opts);
    const ProblemSpec spec = cfg.to_problem_spec();
    std::vector<double> times = cfg.get_list("harnack.times");
    if (times.empty()) times = {0.1, 0.2, 0.5, 0.6};
    const HarnackReport rep =
        harnack_probe(spec.lin_coeffs, spec.u0, spec.domain, times);
    SummaryRecord s;
    s.add("theta", rep.theta);
    s.add("nonnegative", rep.nonnegative);
    s.add("isotropic", rep.isotropic);
    if (rep.isotropic) s.add("mean_drift", rep.mean_drift);
    for (std::size_t i = 0; i < rep.times.size(); ++i) {
        s.add("t" + std::to_string(i), rep.times[i]);
        s.add("sup" + std::to_string(i), rep.sup[i]);
        s.add("inf" + std::to_string(i), rep.inf[i]);
    }
    for (std::size_t i = 0; i < rep.gamma.size(); ++i)
        s.add("gamma" + std::to_string(i), rep.gamma[i]);
    fs::create_directories(opts.out_dir);
    write_file(opts.out_dir + "/summary.txt", s.text());
    std::cout << s.text();
    return 0;
}

int cmd_sigma(const std::string& lambda_csv, int k) {
    EigenTuple lam;
    std::istringstream in(lambda_csv);
    std::string tok;
    while (std::getline(in, tok, ',')) lam.push_back(std::stod(tok));
    if (lam.empty()) throw ContractViolation("sigma: empty tuple");
    std::cout << "sigma_" << k << " = " << fmt17(sym::sigma(k, lam)) << "\n";
    const auto g = sym::grad_sigma(k, lam);
    std::cout << "grad =";
    for (double v : g) std::cout << " " << fmt17(v);
    std::cout << "\n";
    const auto cone = sym::in_gamma_k(lam, k);
    std::cout << "in_gamma_" << k << " = " << (cone.inside ? "true" : "false")
              << " margin = " << fmt17(cone.margin) << "\n";
    return 0;
}

int cmd_selftest(const CommonOpts& opts) {
    std::mt19937 rng(opts.seed);
    std::uniform_real_distribution<double> unif(-3.0, 3.0);
    std::uniform_int_distribution<int> dim(2, 5);
    int failures = 0;

    // identity suite
    for (int trial = 0; trial < 10000; ++trial) {
        const int n = dim(rng);
        EigenTuple lam(static_cast<std::size_t>(n));
        for (auto& v : lam) v = unif(rng);
        std::uniform_int_distribution<int> kk(1, n);
        const auto rep = sym::check_newton_maclaurin(lam, kk(rng));
        if (!rep.pass(1e-12)) ++failures;
    }
    std::cout << "identity_suite " << (failures == 0 ? "pass" : "FAIL") << "\n";

    // gradient of f_log_sigma vs finite differences
    int grad_fail = 0;
    std::uniform_real_distribution<double> mat(-1.0, 2.0);
    for (int trial = 0; trial < 100; ++trial) {
        SymMatrix2 a{2.5 + mat(rng), 0.5 * mat(rng), 2.5 + mat(rng)};
        const int k = (trial % 2) + 1;
        LogSigmaResult res;
        try {
            res = f_log_sigma(a, k);
        } catch (const AdmissibilityError&) {
            --trial;
            continue;
        }
        const double h = 1e-6;
        auto fd = [&](double SymMatrix2::* comp, double scale) {
            SymMatrix2 p = a, m = a;
            p.*comp += h;
            m.*comp -= h;
            return (f_log_sigma(p, k).value - f_log_sigma(m, k).value) / (2.0 * h) / scale;
        };
        if (std::abs(fd(&SymMatrix2::a11, 1.0) - res.grad.a11) > 1e-6 * std::max(1.0, std::abs(res.grad.a11)) ||
            std::abs(fd(&SymMatrix2::a22, 1.0) - res.grad.a22) > 1e-6 * std::max(1.0, std::abs(res.grad.a22)) ||
            std::abs(fd(&SymMatrix2::a12, 2.0) - res.grad.a12) > 1e-6 * std::max(1.0, std::abs(res.grad.a12)))
            ++grad_fail;
    }
    std::cout << "gradient_suite " << (grad_fail == 0 ? "pass" : "FAIL") << "\n";
    failures += grad_fail;
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"k-Hessian Neumann flow laboratory"};
    app.require_subcommand(1);

    CommonOpts solve_opts, sub_opts, compat_opts, harnack_opts, selftest_opts;
    std::string lambda_csv;
    int sigma_k = 2;

    auto* solve = app.add_subcommand("solve", "run the parabolic flow to convergence");
    add_common(solve, solve_opts);
    auto* checksub = app.add_subcommand("check-sub", "probe a C-subsolution candidate");
    add_common(checksub, sub_opts);
    auto* checkcompat = app.add_subcommand("check-compat", "compatibility integrals");
    add_common(checkcompat, compat_opts);
    auto* harnack = app.add_subcommand("harnack", "empirical Harnack probe");
    add_common(harnack, harnack_opts);
    auto* sigma = app.add_subcommand("sigma", "evaluate sigma_k on a literal tuple");
    sigma->add_option("--lambda", lambda_csv, "comma-separated eigenvalues")->required();
    sigma->add_option("--k", sigma_k, "order k");
    auto* selftest = app.add_subcommand("selftest", "randomized invariant suites");
    add_common(selftest, selftest_opts);

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed()) return cmd_solve(solve_opts);
        if (checksub->parsed()) return cmd_check_sub(sub_opts);
        if (checkcompat->parsed()) return cmd_check_compat(compat_opts);
        if (harnack->parsed()) return cmd_harnack(harnack_opts);
        if (sigma->parsed()) return cmd_sigma(lambda_csv, sigma_k);
        if (selftest->parsed()) return cmd_selftest(selftest_opts);
    } catch (const NotConverged& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
