#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fouest/errors.hpp"
#include "fouest/types.hpp"

namespace fouest {

// Shared path file format: CSV with header `t,x`, one row per grid point,
// 17 significant digits so values round-trip to the exact binary doubles.

inline std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void write_path_csv(const SampledPath& path, const std::string& filename) {
    if (path.scaled())
        throw OverflowDetected("write_path_csv: scaled paths have no plain-double CSV form");
    std::ofstream out(filename);
    if (!out) throw InvalidParameter("write_path_csv: cannot open '" + filename + "'");
    out << "t,x\n";
    for (std::size_t i = 0; i < path.values.size(); ++i)
        out << format_g17(path.grid.time(static_cast<std::int64_t>(i))) << ','
            << format_g17(path.values[i]) << '\n';
    if (!out) throw InvalidParameter("write_path_csv: write failed for '" + filename + "'");
}

inline SampledPath read_path_csv(const std::string& filename) {
    std::ifstream in(filename);
    if (!in) throw InvalidParameter("read_path_csv: cannot open '" + filename + "'");
    std::string line;
    if (!std::getline(in, line) || (line != "t,x" && line != "t,x\r"))
        throw InvalidParameter("read_path_csv: missing 't,x' header in '" + filename + "'");
    std::vector<double> times, values;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const char* s = line.c_str();
        char* end = nullptr;
        const double t = std::strtod(s, &end);
        if (end == s || *end != ',')
            throw InvalidParameter("read_path_csv: malformed row '" + line + "'");
        const char* s2 = end + 1;
        const double x = std::strtod(s2, &end);
        if (end == s2) throw InvalidParameter("read_path_csv: malformed row '" + line + "'");
        times.push_back(t);
        values.push_back(x);
    }
    if (times.size() < 2)
        throw InvalidParameter("read_path_csv: need at least 2 rows in '" + filename + "'");
    const double dt = times[1] - times[0];
    if (!(dt > 0.0)) throw InvalidParameter("read_path_csv: non-increasing time column");
    for (std::size_t i = 0; i + 1 < times.size(); ++i) {
        const double step = times[i + 1] - times[i];
        if (std::fabs(step - dt) > 1e-9 * (1.0 + std::fabs(times[i + 1])))
            throw InvalidParameter("read_path_csv: time column is not uniform");
    }
    const std::int64_t count = static_cast<std::int64_t>(values.size()) - 1;
    return SampledPath(UniformGrid(dt, count), std::move(values));
}

}  // namespace fouest
