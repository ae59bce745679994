#pragma once

#include <Eigen/Dense>

#include "tweeze/denoiser.hpp"
#include "tweeze/schedule.hpp"

namespace tweeze {

/// One deterministic denoising step from t to t_next with a fixed predicted
/// epsilon. Holding eps_hat fixed, the (t, t_next) and (t_next, t) steps are
/// algebraic inverses of each other.
Eigen::VectorXd ddim_denoise_step(const Eigen::Ref<const Eigen::VectorXd>& z_t, double t,
                                  double t_next, const Eigen::Ref<const Eigen::VectorXd>& eps_hat,
                                  const NoiseSchedule& schedule);

/// Explicit inversion: ascend 0 -> grid.back() -> ... -> grid.front(),
/// re-estimating eps_hat from the denoiser at the current point each step.
/// This is the error-prone estimate the direct-path editor avoids.
Eigen::VectorXd ddim_invert(const Denoiser& f, const PromptCondition& prompt,
                            const Eigen::Ref<const Eigen::VectorXd>& z0, const TimestepGrid& grid,
                            const NoiseSchedule& schedule);

/// Deterministic reconstruction: descend the grid from its first timestep
/// down to t = 0, re-estimating eps_hat each step.
Eigen::VectorXd ddim_denoise(const Denoiser& f, const PromptCondition& prompt,
                             const Eigen::Ref<const Eigen::VectorXd>& z_top,
                             const TimestepGrid& grid, const NoiseSchedule& schedule);

/// The predicted epsilon at (z, t) via the clean->noise adapter, with its
/// exact limit (zero) at alpha_bar == 1.
Eigen::VectorXd ddim_estimate_noise(const Denoiser& f, const PromptCondition& prompt,
                                    const Eigen::Ref<const Eigen::VectorXd>& z, double t,
                                    const NoiseSchedule& schedule);

}  // namespace tweeze
