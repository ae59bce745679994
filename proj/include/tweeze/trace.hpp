#pragma once

#include <iosfwd>
#include <string>

#include "tweeze/editor.hpp"

namespace tweeze {

/// JSON-lines trajectory format: one header line carrying config and source,
/// then one line per StepRecord with vectors as flat arrays. Serialized
/// doubles round-trip bit-exactly.
void write_trajectory_jsonl(std::ostream& out, const Trajectory& traj);
void write_trajectory_jsonl(const std::string& path, const Trajectory& traj);

Trajectory read_trajectory_jsonl(std::istream& in);
Trajectory read_trajectory_jsonl(const std::string& path);

/// Checks every recorded invariant: the trajectory starts at the source, each
/// z_tar is exactly the shared-noise reconstruction from (z_mix_before,
/// z0_src, z_src), each update satisfies z_mix_after == v_t - reg_grad
/// bit-for-bit, and consecutive steps chain. Throws VerificationError.
void validate_trajectory(const Trajectory& traj);

}  // namespace tweeze
