#include "tweeze/forward.hpp"

#include <cmath>

#include "tweeze/errors.hpp"
#include "tweeze/latent.hpp"
#include "tweeze/rng.hpp"

namespace tweeze {

Eigen::VectorXd diffuse(const Eigen::Ref<const Eigen::VectorXd>& z0, double t,
                        const Eigen::Ref<const Eigen::VectorXd>& eps,
                        const NoiseSchedule& schedule) {
    require_same_dim(z0, eps, "diffuse");
    const double ab = schedule.alpha_bar(t);
    return std::sqrt(ab) * z0 + std::sqrt(1.0 - ab) * eps;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> shared_noise_pair(
    const Eigen::Ref<const Eigen::VectorXd>& z0_src,
    const Eigen::Ref<const Eigen::VectorXd>& z_mix, double t,
    const Eigen::Ref<const Eigen::VectorXd>& eps, const NoiseSchedule& schedule) {
    require_same_dim(z0_src, z_mix, "shared_noise_pair");
    Eigen::VectorXd z_src = diffuse(z0_src, t, eps, schedule);
    Eigen::VectorXd z_tar = z_mix - z0_src + z_src;
    return {std::move(z_src), std::move(z_tar)};
}

Eigen::VectorXd consistency_sample(const Denoiser& f, const PromptCondition& prompt,
                                   const TimestepGrid& grid,
                                   const Eigen::Ref<const Eigen::VectorXd>& z_init,
                                   std::uint64_t rng_seed, const NoiseSchedule& schedule) {
    if (grid.timesteps.empty()) throw ConfigError("consistency_sample needs a non-empty grid");
    require_finite(z_init, "consistency_sample");

    Eigen::VectorXd z = z_init;
    const std::size_t n = grid.timesteps.size();
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double t = grid.timesteps[i];
        const double t_next = grid.timesteps[i + 1];
        const Eigen::VectorXd clean = f.predict(z, t, prompt);
        const NoiseDraw eps = draw_noise(rng_seed, static_cast<std::int64_t>(i), z.size());
        z = std::sqrt(schedule.alpha_bar(t_next)) * clean + schedule.sigma(t_next) * eps.values;
    }
    return f.predict(z, grid.timesteps.back(), prompt);
}

}  // namespace tweeze
