#include "tweeze/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "tweeze/errors.hpp"

namespace tweeze {

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

struct ViewMap {
    double min_x, min_y, scale;
    static constexpr double kSize = 600.0;
    static constexpr double kPad = 40.0;

    double x(double v) const { return kPad + (v - min_x) * scale; }
    // SVG y grows downward
    double y(double v) const { return kSize - kPad - (v - min_y) * scale; }
};

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("failed writing: " + path);
}

}  // namespace

std::string trajectory_svg(const Trajectory& traj) {
    if (traj.source.layout != Layout::vector || traj.source.dim() != 2)
        throw ConfigError("trajectory plots require 2D vector-layout latents");
    if (traj.steps.empty()) throw ConfigError("trajectory plot needs recorded steps");

    double lo_x = traj.source.values[0], hi_x = lo_x;
    double lo_y = traj.source.values[1], hi_y = lo_y;
    const auto grow = [&](const Eigen::VectorXd& p) {
        lo_x = std::min(lo_x, p[0]);
        hi_x = std::max(hi_x, p[0]);
        lo_y = std::min(lo_y, p[1]);
        hi_y = std::max(hi_y, p[1]);
    };
    for (const StepRecord& s : traj.steps) {
        grow(s.z_mix_after);
        grow(s.z_src);
        grow(s.z_tar);
    }
    const double span = std::max({hi_x - lo_x, hi_y - lo_y, 1e-9});
    const ViewMap view{lo_x - 0.05 * span, lo_y - 0.05 * span,
                       (ViewMap::kSize - 2.0 * ViewMap::kPad) / (1.1 * span)};

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"600\" height=\"600\" "
           "viewBox=\"0 0 600 600\">\n";
    svg << "<rect width=\"600\" height=\"600\" fill=\"white\"/>\n";

    svg << "<polyline class=\"zmix-path\" fill=\"none\" stroke=\"#444444\" stroke-width=\"1.5\" "
           "points=\"";
    svg << fmt(view.x(traj.steps.front().z_mix_before[0])) << ','
        << fmt(view.y(traj.steps.front().z_mix_before[1]));
    for (const StepRecord& s : traj.steps)
        svg << ' ' << fmt(view.x(s.z_mix_after[0])) << ',' << fmt(view.y(s.z_mix_after[1]));
    svg << "\"/>\n";

    for (const StepRecord& s : traj.steps) {
        svg << "<circle class=\"z-src\" cx=\"" << fmt(view.x(s.z_src[0])) << "\" cy=\""
            << fmt(view.y(s.z_src[1])) << "\" r=\"2.5\" fill=\"#8faadc\"/>\n";
        svg << "<rect class=\"z-tar\" x=\"" << fmt(view.x(s.z_tar[0]) - 2.5) << "\" y=\""
            << fmt(view.y(s.z_tar[1]) - 2.5)
            << "\" width=\"5\" height=\"5\" fill=\"#f4b183\"/>\n";
    }

    svg << "<circle class=\"source\" cx=\"" << fmt(view.x(traj.source.values[0])) << "\" cy=\""
        << fmt(view.y(traj.source.values[1])) << "\" r=\"5\" fill=\"#2e75b6\"/>\n";
    svg << "<circle class=\"output\" cx=\"" << fmt(view.x(traj.output.values[0])) << "\" cy=\""
        << fmt(view.y(traj.output.values[1])) << "\" r=\"5\" fill=\"#c00000\"/>\n";
    svg << "</svg>\n";
    return svg.str();
}

void write_trajectory_svg(const std::string& path, const Trajectory& traj) {
    write_file(path, trajectory_svg(traj));
}

std::string latent_pgm(const Latent& lat) {
    if (lat.layout != Layout::grid) throw ConfigError("PGM output requires grid-layout latents");
    lat.validate();
    const int side = lat.grid_side;
    const double lo = lat.values.minCoeff();
    const double hi = lat.values.maxCoeff();
    const double range = hi - lo;

    std::string out = "P5\n" + std::to_string(side) + " " + std::to_string(side) + "\n65535\n";
    out.reserve(out.size() + static_cast<std::size_t>(side) * side * 2);
    for (Eigen::Index i = 0; i < lat.values.size(); ++i) {
        const double unit = range > 0.0 ? (lat.values[i] - lo) / range : 0.0;
        const auto pixel = static_cast<std::uint16_t>(std::lround(unit * 65535.0));
        out.push_back(static_cast<char>(pixel >> 8));
        out.push_back(static_cast<char>(pixel & 0xff));
    }
    return out;
}

void write_latent_pgm(const std::string& path, const Latent& lat) {
    write_file(path, latent_pgm(lat));
}

}  // namespace tweeze
