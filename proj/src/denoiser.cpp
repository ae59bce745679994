#include "tweeze/denoiser.hpp"

#include <cmath>
#include <numeric>

#include "tweeze/errors.hpp"

namespace tweeze {

void GaussianMixture::validate() const {
    if (weights.empty() || weights.size() != means.size())
        throw ConfigError("mixture needs matching, non-empty weights and means");
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (std::abs(total - 1.0) > 1e-12) throw ConfigError("mixture weights must sum to 1");
    for (double w : weights)
        if (!(w > 0.0)) throw ConfigError("mixture weights must be positive");
    if (!(component_sigma > 0.0)) throw ConfigError("component_sigma must be positive");
    const Eigen::Index d = means.front().size();
    if (d < 1) throw ConfigError("mixture dimension must be >= 1");
    for (const auto& mu : means)
        if (mu.size() != d) throw ConfigError("mixture components must share one dimension");
}

double GaussianMixture::neg_log_density(const Eigen::Ref<const Eigen::VectorXd>& z) const {
    if (z.size() != dim()) throw ShapeError("neg_log_density: dimension mismatch");
    const double var = component_sigma * component_sigma;
    const double d = static_cast<double>(dim());
    double max_term = -std::numeric_limits<double>::infinity();
    std::vector<double> terms(weights.size());
    for (std::size_t k = 0; k < weights.size(); ++k) {
        terms[k] = std::log(weights[k]) - 0.5 * (z - means[k]).squaredNorm() / var;
        max_term = std::max(max_term, terms[k]);
    }
    double acc = 0.0;
    for (double term : terms) acc += std::exp(term - max_term);
    const double log_density =
        max_term + std::log(acc) - 0.5 * d * std::log(2.0 * M_PI * var);
    return -log_density;
}

Eigen::VectorXd gmm_posterior_mean(const GaussianMixture& mixture,
                                   const Eigen::Ref<const Eigen::VectorXd>& z, double t,
                                   const NoiseSchedule& schedule) {
    if (z.size() != mixture.dim()) throw ShapeError("gmm_posterior_mean: dimension mismatch");
    require_finite(z, "gmm_posterior_mean");

    const double ab = schedule.alpha_bar(t);
    if (ab == 1.0) return z;  // conditioning is degenerate on z0 == z
    const double sqrt_ab = std::sqrt(ab);
    const double comp_var = mixture.component_sigma * mixture.component_sigma;
    // Marginal per-component variance of z_t and the Kalman-style gain of the
    // conditional mean E[z0 | z_t, component k].
    const double marginal_var = ab * comp_var + (1.0 - ab);
    const double gain = sqrt_ab * comp_var / marginal_var;

    const std::size_t n = mixture.weights.size();
    std::vector<double> log_resp(n);
    double max_lr = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k) {
        log_resp[k] = std::log(mixture.weights[k]) -
                      0.5 * (z - sqrt_ab * mixture.means[k]).squaredNorm() / marginal_var;
        max_lr = std::max(max_lr, log_resp[k]);
    }
    double norm = 0.0;
    for (double lr : log_resp) norm += std::exp(lr - max_lr);

    Eigen::VectorXd mean = Eigen::VectorXd::Zero(z.size());
    for (std::size_t k = 0; k < n; ++k) {
        const double resp = std::exp(log_resp[k] - max_lr) / norm;
        mean.noalias() += resp * (mixture.means[k] + gain * (z - sqrt_ab * mixture.means[k]));
    }
    if (!mean.allFinite()) throw NumericError("gmm_posterior_mean produced non-finite output");
    return mean;
}

Eigen::VectorXd clean_from_noise_pred(const Eigen::Ref<const Eigen::VectorXd>& z, double t,
                                      const Eigen::Ref<const Eigen::VectorXd>& eps_hat,
                                      const NoiseSchedule& schedule) {
    require_same_dim(z, eps_hat, "clean_from_noise_pred");
    const double ab = schedule.alpha_bar(t);
    if (schedule.clamped_at(t))
        throw DegenerateTimestepError("noise adapter at clamped alpha_bar");
    return (z - std::sqrt(1.0 - ab) * eps_hat) / std::sqrt(ab);
}

Eigen::VectorXd noise_from_clean_pred(const Eigen::Ref<const Eigen::VectorXd>& z, double t,
                                      const Eigen::Ref<const Eigen::VectorXd>& clean,
                                      const NoiseSchedule& schedule) {
    require_same_dim(z, clean, "noise_from_clean_pred");
    const double ab = schedule.alpha_bar(t);
    if (1.0 - ab == 0.0)
        throw DegenerateTimestepError("noise_from_clean_pred undefined at alpha_bar == 1");
    return (z - std::sqrt(ab) * clean) / std::sqrt(1.0 - ab);
}

Eigen::VectorXd clean_from_velocity_pred(const Eigen::Ref<const Eigen::VectorXd>& z, double t_unit,
                                         const Eigen::Ref<const Eigen::VectorXd>& v_hat) {
    require_same_dim(z, v_hat, "clean_from_velocity_pred");
    if (!(t_unit >= 0.0 && t_unit <= 1.0))
        throw DomainError("velocity adapter time must lie in [0, 1]");
    return z - t_unit * v_hat;
}

Eigen::VectorXd velocity_from_clean_pred(const Eigen::Ref<const Eigen::VectorXd>& z, double t_unit,
                                         const Eigen::Ref<const Eigen::VectorXd>& clean) {
    require_same_dim(z, clean, "velocity_from_clean_pred");
    if (!(t_unit > 0.0 && t_unit <= 1.0))
        throw DomainError("velocity inversion needs t_unit in (0, 1]");
    return (z - clean) / t_unit;
}

Eigen::VectorXd guided_predict(const Denoiser& d, const Eigen::Ref<const Eigen::VectorXd>& z,
                               double t, const PromptCondition& cond,
                               const PromptCondition& uncond, double scale) {
    if (scale < 0.0) throw ConfigError("guidance scale must be >= 0");
    if (scale == 1.0) return d.predict(z, t, cond);
    if (scale == 0.0) return d.predict(z, t, uncond);
    const Eigen::VectorXd p_uncond = d.predict(z, t, uncond);
    const Eigen::VectorXd p_cond = d.predict(z, t, cond);
    return p_uncond + scale * (p_cond - p_uncond);
}

MixtureDenoiser::MixtureDenoiser(std::map<std::string, GaussianMixture> distributions,
                                 NoiseSchedule schedule)
    : distributions_(std::move(distributions)), schedule_(schedule) {
    for (const auto& [name, mixture] : distributions_) {
        (void)name;
        mixture.validate();
    }
}

const GaussianMixture& MixtureDenoiser::distribution(const std::string& name) const {
    const auto it = distributions_.find(name);
    if (it == distributions_.end())
        throw ConfigError("prompt does not resolve to a registered distribution: " + name);
    return it->second;
}

Eigen::VectorXd MixtureDenoiser::predict(const Eigen::Ref<const Eigen::VectorXd>& z, double t,
                                         const PromptCondition& prompt) const {
    return gmm_posterior_mean(distribution(prompt.distribution_ref), z, t, schedule_);
}

}  // namespace tweeze
