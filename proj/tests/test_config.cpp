#include <catch2/catch_amalgamated.hpp>

#include "khflow/config.hpp"
#include "khflow/io.hpp"

using namespace khflow;

TEST_CASE("parse and round trip") {
    const std::string text =
        "# model problem\n"
        "domain.kind = radial\n"
        "domain.nr = 128   # resolution\n"
        "problem.k = 2\n"
        "problem.phi = -1\n"
        "problem.u0 = 0.5*r^2\n"
        "tol.tol_c = 1e-8\n";
    Config cfg = Config::parse(text);
    CHECK(cfg.get_str("domain.kind") == "radial");
    CHECK(cfg.get_num("domain.nr", 0) == 128.0);
    CHECK(cfg.get_num("tol.tol_c", 0) == 1e-8);

    Config again = Config::parse(cfg.serialize());
    CHECK(again == cfg);
    CHECK(again.serialize() == cfg.serialize());
}

TEST_CASE("unknown keys and malformed lines are errors") {
    CHECK_THROWS_AS(Config::parse("domian.kind = disk\n"), ConfigError);
    CHECK_THROWS_AS(Config::parse("no equals sign here\n"), ConfigError);
    Config cfg;
    CHECK_THROWS_AS(cfg.set("problem.banana", "1"), ConfigError);
    cfg.set("domain.nr", "not_a_number");
    CHECK_THROWS_AS(cfg.get_num("domain.nr", 0), ConfigError);
}

TEST_CASE("list values") {
    Config cfg;
    cfg.set("harnack.times", "0.1, 0.2, 0.5,0.6");
    const std::vector<double> t = cfg.get_list("harnack.times");
    REQUIRE(t.size() == 4);
    CHECK(t[0] == 0.1);
    CHECK(t[3] == 0.6);
    CHECK(cfg.get_list("run.t_end").empty());
}

TEST_CASE("problem spec mapping") {
    Config cfg = Config::parse(
        "domain.kind = radial\n"
        "domain.nr = 32\n"
        "problem.k = 2\n"
        "problem.phi = -1\n"
        "problem.u0 = 0.5*r^2\n");
    ProblemSpec spec = cfg.to_problem_spec();
    CHECK(spec.domain.kind == DomainKind::Radial);
    CHECK(spec.domain.nr == 32);
    CHECK(spec.k == 2);
    CHECK(spec.tol.tol_c == 1e-8);  // radial default
    // the mapped spec actually runs
    SolveReport rep = run_to_convergence(spec);
    CHECK_THAT(rep.c, Catch::Matchers::WithinAbs(0.0, 1e-10));

    Config disk = Config::parse("domain.kind = disk\n");
    CHECK(disk.to_problem_spec().tol.tol_c == 1e-6);

    Config rect = Config::parse(
        "domain.kind = rect\n"
        "domain.nx = 8\n"
        "domain.ny = 8\n"
        "problem.mode = linear\n"
        "problem.psi = x\n");
    ProblemSpec rs = rect.to_problem_spec();
    CHECK(rs.mode == FlowMode::Linear);
    CHECK(rs.domain.kind == DomainKind::Rect);

    CHECK_THROWS_AS(Config::parse("domain.kind = torus\n").to_problem_spec(), ConfigError);
    CHECK_THROWS_AS(Config::parse("problem.mode = implicit\n").to_problem_spec(), ConfigError);
}

TEST_CASE("deterministic formatting") {
    CHECK(fmt17(0.1) == "0.10000000000000001");
    CHECK(fmt17(1.0) == "1");
    CHECK(fmt17(-2.5e-8) == "-2.4999999999999999e-08");

    std::vector<MonitorSample> h(1);
    h[0].t = 0.0;
    h[0].sup_ut = 1.0;
    h[0].inf_ut = -1.0;
    const std::string csv = monitor_csv(h);
    CHECK(csv.substr(0, csv.find('\n')) == "t,sup_ut,inf_ut,osc_u,sup_grad,margin");
    CHECK(csv == "t,sup_ut,inf_ut,osc_u,sup_grad,margin\n0,1,-1,0,0,0\n");

    const Domain d = Domain::radial(2);
    GridFunction g(d);
    g.at(0) = 0.5;
    g.at(1) = 1.5;
    CHECK(grid_csv(g) == "r,theta,value\n0.25,0,0.5\n0.75,0,1.5\n");

    SummaryRecord rec;
    rec.add("c", -0.5);
    rec.add("steps", std::int64_t{42});
    rec.add("converged", true);
    CHECK(rec.text() == "c = -0.5\nsteps = 42\nconverged = true\n");
}
