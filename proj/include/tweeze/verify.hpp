#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>

#include "tweeze/denoiser.hpp"
#include "tweeze/schedule.hpp"

namespace tweeze {

/// State held fixed while the surrogate objective is probed in z_mix. The
/// target denoiser is frozen as the linear map implied by eps_hat_tar, which
/// is exactly the Jacobian convention under which the full-form gradient is
/// derived (d f / d z_mix = I / sqrt(alpha_bar)).
struct SurrogateFrozenState {
    Eigen::VectorXd z0_src;
    Eigen::VectorXd z_src;
    Eigen::VectorXd eps_hat_tar;
    Eigen::VectorXd zhat0_src;
};

/// gamma_t * || z_src - z_tar(z_mix) - c (zhat0_src - f~(z_tar(z_mix))) ||^2
/// with z_tar(z_mix) = z_mix - z0_src + z_src and
/// c = taylor_delta * abar_dot / (2 sqrt(abar)). Accumulated in long double.
double surrogate_objective(const Eigen::Ref<const Eigen::VectorXd>& z_mix,
                           const SurrogateFrozenState& frozen, double t, double gamma_t,
                           const NoiseSchedule& schedule, double taylor_delta = 0.5);

/// The gamma_hat that makes the full-form gradient the exact analytic
/// gradient of surrogate_objective: 2 gamma_t (-1 + abar_dot / (4 abar)).
double gamma_hat_from_gamma(double gamma_t, double t, const NoiseSchedule& schedule,
                            double taylor_delta = 0.5);

/// Central finite differences, coordinate by coordinate.
Eigen::VectorXd finite_diff_gradient(const std::function<double(const Eigen::VectorXd&)>& objective,
                                     const Eigen::Ref<const Eigen::VectorXd>& z, double h);

struct GradCheckReport {
    double max_rel_error = 0.0;
    Eigen::VectorXd per_coordinate_errors;
    bool passed = false;
    double tolerance = 0.0;
};

constexpr double kGradCheckStep = 1e-6;
constexpr double kGradCheckTolerance = 1e-5;

/// Checks the analytic full-form gradient against finite differences of the
/// surrogate at one random state (deterministic per seed).
GradCheckReport check_reg_gradient_once(std::uint64_t seed, const NoiseSchedule& schedule,
                                        double tolerance = kGradCheckTolerance,
                                        double h = kGradCheckStep);

/// n_states independent checks; per_coordinate_errors holds the per-state
/// maxima and max_rel_error the overall maximum.
GradCheckReport run_gradient_check(int n_states, std::uint64_t seed, const NoiseSchedule& schedule,
                                   double tolerance = kGradCheckTolerance,
                                   double h = kGradCheckStep);

struct McEstimate {
    Eigen::VectorXd estimate;
    Eigen::VectorXd std_error;
    double effective_sample_size = 0.0;
};

/// Self-normalized importance estimate of E[z0 | z_t = z]: z0 sampled from
/// the mixture, weighted by the forward-process likelihood of z. Standard
/// errors via the delta method for the ratio estimator.
McEstimate mc_posterior_mean(const GaussianMixture& mixture,
                             const Eigen::Ref<const Eigen::VectorXd>& z, double t, int n_samples,
                             std::uint64_t seed, const NoiseSchedule& schedule);

struct McCoverageReport {
    int agreements = 0;
    int total = 0;
    bool passed = false;
};

/// Compares gmm_posterior_mean against the importance estimate on random
/// (mixture, z, t) triples; a triple agrees when every coordinate lands
/// within 3 standard errors.
McCoverageReport run_mc_coverage_check(int n_triples, int n_samples, int min_agreements,
                                       std::uint64_t seed, const NoiseSchedule& schedule);

}  // namespace tweeze
