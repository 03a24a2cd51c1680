#include "coopstab/csv.hpp"

#include <cstdio>
#include <fstream>

namespace coopstab {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

std::ofstream open_or_throw(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    return out;
}

void write_rows(std::ofstream& out, const std::vector<double>& times,
                const std::vector<Vec>& states) {
    const int r = states.empty() ? 0 : static_cast<int>(states.front().size());
    out << "t";
    for (int d = 1; d <= r; ++d) out << ",x" << d;
    out << "\n";
    for (std::size_t i = 0; i < times.size(); ++i) {
        out << format_double(times[i]);
        for (int d = 0; d < r; ++d) out << "," << format_double(states[i][d]);
        out << "\n";
    }
}

}  // namespace

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
    auto out = open_or_throw(path);
    write_rows(out, traj.times, traj.states);
}

void write_path_csv(const std::string& path, const DiscretePath& dpath) {
    auto out = open_or_throw(path);
    write_rows(out, dpath.times, dpath.nodes);
}

void write_histogram_csv(const std::string& path, const StationaryEstimate& est) {
    auto out = open_or_throw(path);
    const int r = est.grid.dim();
    for (int d = 1; d <= r; ++d) out << "bin_center_" << d << ",";
    out << "weight\n";
    for (long i = 0; i < static_cast<long>(est.weights.size()); ++i) {
        if (est.weights[i] == 0.0) continue;
        const Vec c = est.grid.center(i);
        for (int d = 0; d < r; ++d) out << format_double(c[d]) << ",";
        out << format_double(est.weights[i]) << "\n";
    }
}

}  // namespace coopstab
