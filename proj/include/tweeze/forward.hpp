#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>

#include "tweeze/denoiser.hpp"
#include "tweeze/schedule.hpp"

namespace tweeze {

/// Forward diffusion: sqrt(alpha_bar(t)) * z0 + sqrt(1 - alpha_bar(t)) * eps.
Eigen::VectorXd diffuse(const Eigen::Ref<const Eigen::VectorXd>& z0, double t,
                        const Eigen::Ref<const Eigen::VectorXd>& eps,
                        const NoiseSchedule& schedule);

/// Diffuses the source with the given eps and places the target at
/// z_mix - z0_src + z_src, so that z_tar - z_src == z_mix - z0_src holds
/// bitwise. Both samples see the same noise draw.
std::pair<Eigen::VectorXd, Eigen::VectorXd> shared_noise_pair(
    const Eigen::Ref<const Eigen::VectorXd>& z0_src,
    const Eigen::Ref<const Eigen::VectorXd>& z_mix, double t,
    const Eigen::Ref<const Eigen::VectorXd>& eps, const NoiseSchedule& schedule);

/// Multistep consistency sampling down the grid: re-noise the clean
/// prediction to the next level, with fresh noise keyed by (seed, step). The
/// final step returns the prediction itself without re-noising.
Eigen::VectorXd consistency_sample(const Denoiser& f, const PromptCondition& prompt,
                                   const TimestepGrid& grid,
                                   const Eigen::Ref<const Eigen::VectorXd>& z_init,
                                   std::uint64_t rng_seed, const NoiseSchedule& schedule);

}  // namespace tweeze
