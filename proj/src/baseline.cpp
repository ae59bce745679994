#include "tweeze/baseline.hpp"

#include <cmath>

#include "tweeze/errors.hpp"
#include "tweeze/latent.hpp"

namespace tweeze {

// At alpha_bar == 1 the denoiser reproduces its input and the adapter would
// divide 0 / 0; zero is the exact limit there.
Eigen::VectorXd ddim_estimate_noise(const Denoiser& f, const PromptCondition& prompt,
                                    const Eigen::Ref<const Eigen::VectorXd>& z, double t,
                                    const NoiseSchedule& schedule) {
    const double ab = schedule.alpha_bar(t);
    if (1.0 - ab == 0.0) return Eigen::VectorXd::Zero(z.size());
    const Eigen::VectorXd clean = f.predict(z, t, prompt);
    return noise_from_clean_pred(z, t, clean, schedule);
}

Eigen::VectorXd ddim_denoise_step(const Eigen::Ref<const Eigen::VectorXd>& z_t, double t,
                                  double t_next, const Eigen::Ref<const Eigen::VectorXd>& eps_hat,
                                  const NoiseSchedule& schedule) {
    require_same_dim(z_t, eps_hat, "ddim_denoise_step");
    if (schedule.clamped_at(t) || schedule.clamped_at(t_next))
        throw DegenerateTimestepError("ddim step touches the clamped alpha_bar region");
    const double ab = schedule.alpha_bar(t);
    const double ab_next = schedule.alpha_bar(t_next);
    const Eigen::VectorXd clean = (z_t - std::sqrt(1.0 - ab) * eps_hat) / std::sqrt(ab);
    return std::sqrt(ab_next) * clean + std::sqrt(1.0 - ab_next) * eps_hat;
}

Eigen::VectorXd ddim_invert(const Denoiser& f, const PromptCondition& prompt,
                            const Eigen::Ref<const Eigen::VectorXd>& z0, const TimestepGrid& grid,
                            const NoiseSchedule& schedule) {
    if (grid.timesteps.empty()) throw ConfigError("ddim_invert needs a non-empty grid");
    require_finite(z0, "ddim_invert");

    Eigen::VectorXd z = z0;
    double t = 0.0;
    for (std::size_t i = grid.timesteps.size(); i-- > 0;) {
        const double t_up = grid.timesteps[i];
        const Eigen::VectorXd eps_hat = ddim_estimate_noise(f, prompt, z, t, schedule);
        z = ddim_denoise_step(z, t, t_up, eps_hat, schedule);
        t = t_up;
    }
    return z;
}

Eigen::VectorXd ddim_denoise(const Denoiser& f, const PromptCondition& prompt,
                             const Eigen::Ref<const Eigen::VectorXd>& z_top,
                             const TimestepGrid& grid, const NoiseSchedule& schedule) {
    if (grid.timesteps.empty()) throw ConfigError("ddim_denoise needs a non-empty grid");
    require_finite(z_top, "ddim_denoise");

    Eigen::VectorXd z = z_top;
    for (std::size_t i = 0; i < grid.timesteps.size(); ++i) {
        const double t = grid.timesteps[i];
        const double t_next = grid.next_after(i);
        const Eigen::VectorXd eps_hat = ddim_estimate_noise(f, prompt, z, t, schedule);
        z = ddim_denoise_step(z, t, t_next, eps_hat, schedule);
    }
    return z;
}

}  // namespace tweeze
