#pragma once

// Key-value configuration files and their mapping onto ProblemSpec.
// Format: one `key = value` per line, '#' starts a comment, keys are dotted.
// Unknown keys are errors.  serialize() emits keys sorted, so
// parse(serialize(cfg)) == cfg.

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "flow.hpp"

namespace khflow {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class Config {
  public:
    static const std::set<std::string>& known_keys() {
        static const std::set<std::string> keys = {
            "domain.kind", "domain.nr", "domain.ntheta", "domain.nx", "domain.ny",
            "problem.k", "problem.mode",
            "problem.psi", "problem.psi_t_rate", "problem.phi",
            "problem.phi_left", "problem.phi_right", "problem.phi_bottom",
            "problem.phi_top", "problem.u0",
            "problem.chi_xx", "problem.chi_xy", "problem.chi_yy",
            "problem.a11", "problem.a12", "problem.a22",
            "tol.tol_c", "tol.dt_safety", "tol.dt_min", "tol.max_steps",
            "run.seed", "run.t_end", "run.monitor_stride",
            "sub.ubar", "sub.level", "harnack.times",
        };
        return keys;
    }

    static Config parse(const std::string& text) {
        Config cfg;
        std::istringstream in(text);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const std::string trimmed = trim(line);
            if (trimmed.empty()) continue;
            const auto eq = trimmed.find('=');
            if (eq == std::string::npos)
                throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
            cfg.set(trim(trimmed.substr(0, eq)), trim(trimmed.substr(eq + 1)));
        }
        return cfg;
    }

    void set(const std::string& key, const std::string& value) {
        if (!known_keys().count(key)) throw ConfigError("unknown key '" + key + "'");
        values_[key] = value;
    }

    std::string serialize() const {
        std::string out;
        for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
        return out;
    }

    bool operator==(const Config& o) const { return values_ == o.values_; }

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    std::string get_str(const std::string& key, const std::string& dflt = "") const {
        auto it = values_.find(key);
        return it == values_.end() ? dflt : it->second;
    }

    double get_num(const std::string& key, double dflt) const {
        auto it = values_.find(key);
        if (it == values_.end()) return dflt;
        try {
            std::size_t used = 0;
            const double v = std::stod(it->second, &used);
            if (used != it->second.size()) throw std::invalid_argument("trailing");
            return v;
        } catch (const std::exception&) {
            throw ConfigError("key '" + key + "': not a number: " + it->second);
        }
    }

    std::vector<double> get_list(const std::string& key) const {
        std::vector<double> out;
        std::istringstream in(get_str(key));
        std::string tok;
        while (std::getline(in, tok, ',')) {
            tok = trim(tok);
            if (!tok.empty()) out.push_back(std::stod(tok));
        }
        return out;
    }

    ProblemSpec to_problem_spec() const {
        ProblemSpec spec;
        const std::string kind = get_str("domain.kind", "disk");
        if (kind == "disk")
            spec.domain = Domain::disk(static_cast<int>(get_num("domain.nr", 64)),
                                       static_cast<int>(get_num("domain.ntheta", 128)));
        else if (kind == "radial")
            spec.domain = Domain::radial(static_cast<int>(get_num("domain.nr", 256)));
        else if (kind == "rect")
            spec.domain = Domain::rect(static_cast<int>(get_num("domain.nx", 64)),
                                       static_cast<int>(get_num("domain.ny", 64)));
        else
            throw ConfigError("domain.kind must be disk, radial, or rect");

        spec.k = static_cast<int>(get_num("problem.k", 2));
        const std::string mode = get_str("problem.mode", "hessian");
        if (mode == "hessian")
            spec.mode = FlowMode::Hessian;
        else if (mode == "linear")
            spec.mode = FlowMode::Linear;
        else
            throw ConfigError("problem.mode must be hessian or linear");

        auto expr = [&](const std::string& key) {
            const std::string s = get_str(key);
            return s.empty() ? Expression() : Expression::parse(s);
        };
        spec.psi_x = expr("problem.psi");
        spec.psi_t_rate = get_num("problem.psi_t_rate", 0.0);
        spec.phi = expr("problem.phi");
        spec.phi_left = expr("problem.phi_left");
        spec.phi_right = expr("problem.phi_right");
        spec.phi_bottom = expr("problem.phi_bottom");
        spec.phi_top = expr("problem.phi_top");
        spec.u0 = expr("problem.u0");
        spec.chi.xx = expr("problem.chi_xx");
        spec.chi.xy = expr("problem.chi_xy");
        spec.chi.yy = expr("problem.chi_yy");
        spec.lin_coeffs.xx = expr("problem.a11");
        spec.lin_coeffs.xy = expr("problem.a12");
        spec.lin_coeffs.yy = expr("problem.a22");

        const double default_tol = (spec.domain.kind == DomainKind::Radial) ? 1e-8 : 1e-6;
        spec.tol.tol_c = get_num("tol.tol_c", default_tol);
        spec.tol.dt_safety = get_num("tol.dt_safety", 0.4);
        spec.tol.dt_min = get_num("tol.dt_min", 1e-12);
        spec.tol.max_steps = static_cast<std::int64_t>(get_num("tol.max_steps", 1e7));
        return spec;
    }

  private:
    std::map<std::string, std::string> values_;

    static std::string trim(const std::string& s) {
        const auto a = s.find_first_not_of(" \t\r");
        if (a == std::string::npos) return "";
        const auto b = s.find_last_not_of(" \t\r");
        return s.substr(a, b - a + 1);
    }
};

}  // namespace khflow
