#pragma once

// Deterministic CSV and summary-record emission.  All decimals use 17
// significant digits; row order is fixed, so identical runs produce
// byte-identical files.

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "flow.hpp"
#include "grid.hpp"

namespace khflow {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << content;
    if (!out) throw IoError("write failed: " + path);
}

// Monitor CSV: header `t,sup_ut,inf_ut,osc_u,sup_grad,margin`.
inline std::string monitor_csv(const std::vector<MonitorSample>& history) {
    std::string out = "t,sup_ut,inf_ut,osc_u,sup_grad,margin\n";
    for (const auto& s : history)
        out += fmt17(s.t) + "," + fmt17(s.sup_ut) + "," + fmt17(s.inf_ut) + "," +
               fmt17(s.osc_u) + "," + fmt17(s.sup_grad) + "," + fmt17(s.margin) + "\n";
    return out;
}

// Grid CSV: `r,theta,value` (disk/radial) or `x,y,value` (rect), row-major
// by ring then angle.
inline std::string grid_csv(const GridFunction& f) {
    const Domain& d = f.domain();
    std::string out;
    switch (d.kind) {
        case DomainKind::Disk:
            out = "r,theta,value\n";
            for (int i = 0; i < d.nr; ++i)
                for (int j = 0; j < d.ntheta; ++j)
                    out += fmt17(d.r_of(i)) + "," + fmt17(d.theta_of(j)) + "," +
                           fmt17(f.at(i, j)) + "\n";
            break;
        case DomainKind::Radial:
            out = "r,theta,value\n";
            for (int i = 0; i < d.nr; ++i)
                out += fmt17(d.r_of(i)) + ",0," + fmt17(f.at(i)) + "\n";
            break;
        case DomainKind::Rect:
            out = "x,y,value\n";
            for (int i = 0; i < d.nx; ++i)
                for (int j = 0; j < d.ny; ++j)
                    out += fmt17(d.x_of(i)) + "," + fmt17(d.y_of(j)) + "," +
                           fmt17(f.rc(i, j)) + "\n";
            break;
    }
    return out;
}

// Ordered key = value record.
class SummaryRecord {
  public:
    void add(const std::string& key, const std::string& value) {
        lines_.push_back(key + " = " + value);
    }
    void add(const std::string& key, double value) { add(key, fmt17(value)); }
    void add(const std::string& key, std::int64_t value) {
        add(key, std::to_string(value));
    }
    void add(const std::string& key, bool value) {
        add(key, std::string(value ? "true" : "false"));
    }
    std::string text() const {
        std::string out;
        for (const auto& l : lines_) out += l + "\n";
        return out;
    }

  private:
    std::vector<std::string> lines_;
};

}  // namespace khflow
