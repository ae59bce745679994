#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "tweeze/denoiser.hpp"
#include "tweeze/latent.hpp"
#include "tweeze/schedule.hpp"

namespace tweeze {

enum class RegForm { full_eq10, simplified, bypass };

RegForm reg_form_from_string(const std::string& name);
std::string to_string(RegForm form);

/// Per-step regularization policy. strength s in [0, 1] interpolates the
/// effective update coefficient between pure editing (s = 0) and full source
/// preservation (s = 1); only the first active_steps grid steps are
/// regularized.
struct RegSchedule {
    RegForm form = RegForm::simplified;
    double strength = 1.0;
    int active_steps = 6;
    double taylor_delta = 0.5;

    void validate(std::size_t grid_len) const;
};

struct GuidanceConfig {
    double src_scale = 1.5;
    double tar_scale = 1.5;
    std::string uncond_label;  // empty: plain conditional prediction
};

struct EditConfig {
    TimestepGrid grid;
    RegSchedule reg;
    GuidanceConfig guidance;
    std::uint64_t seed = 0;
    bool record_trajectory = true;

    void validate() const;
};

/// Full per-step state of one edit. On bypassed steps the prediction fields
/// are empty vectors and reg_grad is zero.
struct StepRecord {
    int step_index = 0;
    double t = 0.0;
    double alpha_bar = 0.0;
    Eigen::VectorXd z_mix_before;
    Eigen::VectorXd z_src;
    Eigen::VectorXd z_tar;
    Eigen::VectorXd zhat0_src;
    Eigen::VectorXd zhat0_tar;
    Eigen::VectorXd v_t;
    Eigen::VectorXd reg_grad;
    Eigen::VectorXd z_mix_after;
};

struct Trajectory {
    Latent source;
    Latent output;
    std::vector<StepRecord> steps;
    EditConfig config;
    // Running sum of per-step moves; filled even when steps are not recorded.
    double path_length_sum = 0.0;
};

/// Calibration trick: correct the target prediction by the known source
/// prediction error.
Eigen::VectorXd calibrated_target_prediction(const Eigen::Ref<const Eigen::VectorXd>& zhat0_tar,
                                             const Eigen::Ref<const Eigen::VectorXd>& zhat0_src,
                                             const Eigen::Ref<const Eigen::VectorXd>& z0_src);

/// Editing direction along the direct path:
/// z0_src + sqrt(alpha_bar(t_next)) * (zhat0_tar - zhat0_src).
Eigen::VectorXd edit_direction(const Eigen::Ref<const Eigen::VectorXd>& z0_src,
                               const Eigen::Ref<const Eigen::VectorXd>& zhat0_src,
                               const Eigen::Ref<const Eigen::VectorXd>& zhat0_tar, double t_next,
                               const NoiseSchedule& schedule);

/// Path-regularization gradient, full form:
/// gamma_hat * [z_src - z_tar - delta * abar_dot / (2 sqrt(abar)) * (zhat0_src - zhat0_tar)].
/// Requires an unclamped alpha_bar at t.
Eigen::VectorXd reg_gradient_full(const Eigen::Ref<const Eigen::VectorXd>& z_src,
                                  const Eigen::Ref<const Eigen::VectorXd>& z_tar,
                                  const Eigen::Ref<const Eigen::VectorXd>& zhat0_src,
                                  const Eigen::Ref<const Eigen::VectorXd>& zhat0_tar, double t,
                                  double gamma_hat, const NoiseSchedule& schedule,
                                  double taylor_delta = 0.5);

/// Simplified form: gamma_hat * (zhat0_src - zhat0_tar).
Eigen::VectorXd reg_gradient_simplified(const Eigen::Ref<const Eigen::VectorXd>& zhat0_src,
                                        const Eigen::Ref<const Eigen::VectorXd>& zhat0_tar,
                                        double gamma_hat);

/// Regularization strength for one grid step. Zero past active_steps;
/// otherwise the value that moves the effective update coefficient to
/// c = sqrt(abar(t_next)) + s * (sqrt(abar(t)) - sqrt(abar(t_next))),
/// i.e. gamma_hat = s * (sqrt(abar(t)) - sqrt(abar(t_next))) <= 0.
double gamma_hat_for_step(const RegSchedule& reg, int step_index, double t, double t_next,
                          const NoiseSchedule& schedule);

/// The edit loop: direct-path interpolation with shared-noise sampling,
/// calibrated editing direction, and denoising-path regularization.
/// Deterministic given (config, schedule, denoiser).
std::pair<Latent, Trajectory> tweeze_edit(const Denoiser& f, const Latent& z0_src,
                                          const PromptCondition& p_src,
                                          const PromptCondition& p_tar, const EditConfig& config,
                                          const NoiseSchedule& schedule);

}  // namespace tweeze
