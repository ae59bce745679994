#include "tweeze/editor.hpp"

#include <cmath>

#include "tweeze/errors.hpp"
#include "tweeze/forward.hpp"
#include "tweeze/rng.hpp"

namespace tweeze {

RegForm reg_form_from_string(const std::string& name) {
    if (name == "full_eq10") return RegForm::full_eq10;
    if (name == "simplified") return RegForm::simplified;
    if (name == "bypass") return RegForm::bypass;
    throw ConfigError("unknown regularization form: " + name);
}

std::string to_string(RegForm form) {
    switch (form) {
        case RegForm::full_eq10: return "full_eq10";
        case RegForm::simplified: return "simplified";
        default: return "bypass";
    }
}

void RegSchedule::validate(std::size_t grid_len) const {
    if (!(strength >= 0.0 && strength <= 1.0))
        throw ConfigError("reg.strength must lie in [0, 1]");
    if (active_steps < 0 || static_cast<std::size_t>(active_steps) > grid_len)
        throw ConfigError("reg.active_steps must lie in [0, grid length]");
    if (!(taylor_delta > 0.0 && taylor_delta <= 1.0))
        throw ConfigError("reg.taylor_delta must lie in (0, 1]");
}

void EditConfig::validate() const {
    if (grid.timesteps.empty()) throw ConfigError("edit config needs a timestep grid");
    reg.validate(grid.size());
    if (guidance.src_scale < 0.0 || guidance.tar_scale < 0.0)
        throw ConfigError("guidance scales must be >= 0");
}

Eigen::VectorXd calibrated_target_prediction(const Eigen::Ref<const Eigen::VectorXd>& zhat0_tar,
                                             const Eigen::Ref<const Eigen::VectorXd>& zhat0_src,
                                             const Eigen::Ref<const Eigen::VectorXd>& z0_src) {
    require_same_dim(zhat0_tar, zhat0_src, "calibrated_target_prediction");
    require_same_dim(zhat0_tar, z0_src, "calibrated_target_prediction");
    // correction-first ordering so equal predictions cancel exactly
    return zhat0_tar - zhat0_src + z0_src;
}

Eigen::VectorXd edit_direction(const Eigen::Ref<const Eigen::VectorXd>& z0_src,
                               const Eigen::Ref<const Eigen::VectorXd>& zhat0_src,
                               const Eigen::Ref<const Eigen::VectorXd>& zhat0_tar, double t_next,
                               const NoiseSchedule& schedule) {
    require_same_dim(z0_src, zhat0_src, "edit_direction");
    require_same_dim(z0_src, zhat0_tar, "edit_direction");
    const double coeff = std::sqrt(schedule.alpha_bar(t_next));
    return z0_src + coeff * (zhat0_tar - zhat0_src);
}

Eigen::VectorXd reg_gradient_full(const Eigen::Ref<const Eigen::VectorXd>& z_src,
                                  const Eigen::Ref<const Eigen::VectorXd>& z_tar,
                                  const Eigen::Ref<const Eigen::VectorXd>& zhat0_src,
                                  const Eigen::Ref<const Eigen::VectorXd>& zhat0_tar, double t,
                                  double gamma_hat, const NoiseSchedule& schedule,
                                  double taylor_delta) {
    require_same_dim(z_src, z_tar, "reg_gradient_full");
    require_same_dim(zhat0_src, zhat0_tar, "reg_gradient_full");
    if (schedule.clamped_at(t))
        throw DegenerateTimestepError(
            "full-form regularization gradient in the clamped alpha_bar region");
    const double ab = schedule.alpha_bar(t);
    const double coeff = taylor_delta * schedule.alpha_bar_dot(t) / (2.0 * std::sqrt(ab));
    return gamma_hat * (z_src - z_tar - coeff * (zhat0_src - zhat0_tar));
}

Eigen::VectorXd reg_gradient_simplified(const Eigen::Ref<const Eigen::VectorXd>& zhat0_src,
                                        const Eigen::Ref<const Eigen::VectorXd>& zhat0_tar,
                                        double gamma_hat) {
    require_same_dim(zhat0_src, zhat0_tar, "reg_gradient_simplified");
    return gamma_hat * (zhat0_src - zhat0_tar);
}

double gamma_hat_for_step(const RegSchedule& reg, int step_index, double t, double t_next,
                          const NoiseSchedule& schedule) {
    if (step_index >= reg.active_steps || reg.strength == 0.0) return 0.0;
    const double sqrt_ab = std::sqrt(schedule.alpha_bar(t));
    const double sqrt_ab_next = std::sqrt(schedule.alpha_bar(t_next));
    return reg.strength * (sqrt_ab - sqrt_ab_next);
}

namespace {

Eigen::VectorXd predict_guided(const Denoiser& f, const Eigen::Ref<const Eigen::VectorXd>& z,
                               double t, const PromptCondition& cond,
                               const GuidanceConfig& guidance, double scale) {
    if (guidance.uncond_label.empty() || scale == 1.0) return f.predict(z, t, cond);
    return guided_predict(f, z, t, cond, PromptCondition::ref(guidance.uncond_label), scale);
}

}  // namespace

std::pair<Latent, Trajectory> tweeze_edit(const Denoiser& f, const Latent& z0_src_latent,
                                          const PromptCondition& p_src,
                                          const PromptCondition& p_tar, const EditConfig& config,
                                          const NoiseSchedule& schedule) {
    config.validate();
    z0_src_latent.validate();

    const Eigen::VectorXd& z0_src = z0_src_latent.values;
    const Eigen::Index dim = z0_src.size();
    const std::size_t n_steps = config.grid.size();

    Trajectory traj;
    traj.source = z0_src_latent;
    traj.config = config;
    if (config.record_trajectory) traj.steps.reserve(n_steps);

    Eigen::VectorXd z_mix = z0_src;
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(dim);

    for (std::size_t i = 0; i < n_steps; ++i) {
        const double t = config.grid.timesteps[i];
        const double t_next = config.grid.next_after(i);
        const double gamma_hat =
            gamma_hat_for_step(config.reg, static_cast<int>(i), t, t_next, schedule);

        const NoiseDraw eps = draw_noise(config.seed, static_cast<std::int64_t>(i), dim);
        auto [z_src, z_tar] = shared_noise_pair(z0_src, z_mix, t, eps.values, schedule);

        Eigen::VectorXd zhat0_src, zhat0_tar, v_t, reg_grad, z_mix_after;
        const bool bypassed =
            config.reg.form == RegForm::bypass && static_cast<int>(i) < config.reg.active_steps;
        if (bypassed) {
            // Carry the direct-path offset forward at the ideal ratio instead
            // of consulting the model.
            const double ratio =
                std::sqrt(schedule.alpha_bar(t_next)) / std::sqrt(schedule.alpha_bar(t));
            v_t = z0_src + ratio * (z_mix - z0_src);
            reg_grad = zero;
            z_mix_after = v_t - reg_grad;
        } else {
            zhat0_src =
                predict_guided(f, z_src, t, p_src, config.guidance, config.guidance.src_scale);
            zhat0_tar =
                predict_guided(f, z_tar, t, p_tar, config.guidance, config.guidance.tar_scale);
            v_t = edit_direction(z0_src, zhat0_src, zhat0_tar, t_next, schedule);
            if (gamma_hat == 0.0) {
                reg_grad = zero;
            } else if (config.reg.form == RegForm::simplified) {
                reg_grad = reg_gradient_simplified(zhat0_src, zhat0_tar, gamma_hat);
            } else {
                reg_grad = reg_gradient_full(z_src, z_tar, zhat0_src, zhat0_tar, t, gamma_hat,
                                             schedule, config.reg.taylor_delta);
            }
            z_mix_after = v_t - reg_grad;
        }
        if (!z_mix_after.allFinite())
            throw NumericError("tweeze_edit produced a non-finite state at step " +
                               std::to_string(i));

        traj.path_length_sum += (z_mix_after - z_mix).norm();
        if (config.record_trajectory) {
            StepRecord rec;
            rec.step_index = static_cast<int>(i);
            rec.t = t;
            rec.alpha_bar = schedule.alpha_bar(t);
            rec.z_mix_before = z_mix;
            rec.z_src = std::move(z_src);
            rec.z_tar = std::move(z_tar);
            rec.zhat0_src = std::move(zhat0_src);
            rec.zhat0_tar = std::move(zhat0_tar);
            rec.v_t = v_t;
            rec.reg_grad = std::move(reg_grad);
            rec.z_mix_after = z_mix_after;
            traj.steps.push_back(std::move(rec));
        }
        z_mix = std::move(z_mix_after);
    }

    traj.output = z0_src_latent.with_values(z_mix);
    return {traj.output, std::move(traj)};
}

}  // namespace tweeze
