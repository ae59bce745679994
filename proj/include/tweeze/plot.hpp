#pragma once

#include <string>

#include "tweeze/editor.hpp"
#include "tweeze/latent.hpp"

namespace tweeze {

/// Renders a 2D vector-layout trajectory: source and output points, the
/// z_mix polyline, and per-step z_src / z_tar markers.
std::string trajectory_svg(const Trajectory& traj);
void write_trajectory_svg(const std::string& path, const Trajectory& traj);

/// Binary 16-bit PGM (P5, maxval 65535, big-endian, row-major), linearly
/// scaled from the latent's [min, max] range.
std::string latent_pgm(const Latent& lat);
void write_latent_pgm(const std::string& path, const Latent& lat);

}  // namespace tweeze
