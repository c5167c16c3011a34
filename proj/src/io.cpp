#include "balsim/io.hpp"

#include <cctype>
#include <cstdio>
#include <ostream>

namespace balsim {

std::string format_double(double value) {
    char buffer[40];
    // %.17g round-trips; try shorter renderings first for readable files.
    for (int precision = 1; precision <= 17; ++precision) {
        std::snprintf(buffer, sizeof buffer, "%.*g", precision, value);
        double parsed = 0.0;
        std::sscanf(buffer, "%lf", &parsed);
        if (parsed == value) break;
    }
    return buffer;
}

std::string sanitize_name(const std::string& name) {
    std::string out;
    out.reserve(name.size());
    for (char c : name) {
        out.push_back(std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
    }
    return out;
}

void write_path_csv(std::ostream& out, const SystemPath& path) {
    std::size_t width = 0;
    for (const auto& pt : path.points) width = std::max(width, pt.q.size());
    out << "time";
    for (std::size_t i = 1; i <= width; ++i) out << ",Q" << i;
    out << ",L\n";
    for (const auto& pt : path.points) {
        out << format_double(pt.time);
        for (std::size_t i = 0; i < width; ++i) {
            out << ',' << (i < pt.q.size() ? pt.q[i] : 0);
        }
        out << ',' << pt.overflows << '\n';
    }
}

void write_scaled_csv(std::ostream& out, const ScaledPath& path) {
    std::size_t width = 0;
    for (const auto& row : path.x) width = std::max(width, row.size());
    out << "time";
    for (std::size_t i = 1; i <= width; ++i) out << ",X" << i;
    out << '\n';
    for (std::size_t j = 0; j < path.times.size(); ++j) {
        out << format_double(path.times[j]);
        for (std::size_t i = 0; i < width; ++i) {
            out << ',' << format_double(i < path.x[j].size() ? path.x[j][i] : 0.0);
        }
        out << '\n';
    }
}

void write_stationary_csv(std::ostream& out, const StateSpace& space,
                          std::span<const double> pi) {
    for (int i = 1; i <= space.cap(); ++i) out << 'Q' << i << ',';
    out << "probability\n";
    for (std::size_t s = 0; s < space.size(); ++s) {
        for (int c : space.state(s).counts()) out << c << ',';
        out << format_double(pi[s]) << '\n';
    }
}

void write_diffusion_csv(std::ostream& out, const DiffusionPath& path) {
    out << "t,x1,x2,u1\n";
    for (const auto& s : path.states) {
        out << format_double(s.t) << ',' << format_double(s.x1) << ',' << format_double(s.x2)
            << ',' << format_double(s.u1) << '\n';
    }
}

} // namespace balsim
