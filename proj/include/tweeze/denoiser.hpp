#pragma once

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "tweeze/latent.hpp"
#include "tweeze/schedule.hpp"

namespace tweeze {

/// A prompt is just a label that resolves to one registered data
/// distribution; conditioning on it means denoising under that distribution.
struct PromptCondition {
    std::string label;
    std::string distribution_ref;

    static PromptCondition ref(const std::string& name) { return {name, name}; }
};

inline bool operator==(const PromptCondition& a, const PromptCondition& b) {
    return a.label == b.label && a.distribution_ref == b.distribution_ref;
}

/// Isotropic Gaussian mixture with a shared per-component std deviation.
struct GaussianMixture {
    std::vector<double> weights;
    std::vector<Eigen::VectorXd> means;
    double component_sigma = 1.0;

    Eigen::Index dim() const { return means.empty() ? 0 : means.front().size(); }
    void validate() const;

    /// -log density at z. Log-sum-exp stabilized.
    double neg_log_density(const Eigen::Ref<const Eigen::VectorXd>& z) const;

    /// Draw one sample (component by weight, then Gaussian around its mean).
    template <typename Rng>
    Eigen::VectorXd sample(Rng& rng) const {
        const double u = rng.uniform01();
        double acc = 0.0;
        std::size_t k = weights.size() - 1;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            acc += weights[i];
            if (u <= acc) {
                k = i;
                break;
            }
        }
        return means[k] + component_sigma * rng.vector(dim());
    }
};

/// Conditional clean-state predictor f(z, t, prompt). Implementations must be
/// pure in their arguments and immutable after construction.
class Denoiser {
public:
    virtual ~Denoiser() = default;
    virtual Eigen::VectorXd predict(const Eigen::Ref<const Eigen::VectorXd>& z, double t,
                                    const PromptCondition& prompt) const = 0;
};

/// Exact posterior mean E[z0 | z_t = z] when z0 ~ mixture and z_t follows the
/// forward process at time t. This is the ideal consistency model for the
/// mixture. Responsibilities are computed in log space.
Eigen::VectorXd gmm_posterior_mean(const GaussianMixture& mixture,
                                   const Eigen::Ref<const Eigen::VectorXd>& z, double t,
                                   const NoiseSchedule& schedule);

/// Noise-predictor adapter: clean estimate from a predicted epsilon.
Eigen::VectorXd clean_from_noise_pred(const Eigen::Ref<const Eigen::VectorXd>& z, double t,
                                      const Eigen::Ref<const Eigen::VectorXd>& eps_hat,
                                      const NoiseSchedule& schedule);

/// Inverse of clean_from_noise_pred: the epsilon a noise predictor would have
/// to output for the given clean estimate. Degenerate at alpha_bar == 1.
Eigen::VectorXd noise_from_clean_pred(const Eigen::Ref<const Eigen::VectorXd>& z, double t,
                                      const Eigen::Ref<const Eigen::VectorXd>& clean,
                                      const NoiseSchedule& schedule);

/// Velocity-predictor adapter on unit-interval linear-path time.
Eigen::VectorXd clean_from_velocity_pred(const Eigen::Ref<const Eigen::VectorXd>& z, double t_unit,
                                         const Eigen::Ref<const Eigen::VectorXd>& v_hat);

Eigen::VectorXd velocity_from_clean_pred(const Eigen::Ref<const Eigen::VectorXd>& z, double t_unit,
                                         const Eigen::Ref<const Eigen::VectorXd>& clean);

/// Classifier-free-guidance blend: uncond + scale * (cond - uncond).
Eigen::VectorXd guided_predict(const Denoiser& d, const Eigen::Ref<const Eigen::VectorXd>& z,
                               double t, const PromptCondition& cond,
                               const PromptCondition& uncond, double scale);

/// Registry-backed analytic denoiser: each prompt label resolves to a
/// Gaussian mixture whose exact posterior mean is returned.
class MixtureDenoiser : public Denoiser {
public:
    MixtureDenoiser(std::map<std::string, GaussianMixture> distributions, NoiseSchedule schedule);

    Eigen::VectorXd predict(const Eigen::Ref<const Eigen::VectorXd>& z, double t,
                            const PromptCondition& prompt) const override;

    const GaussianMixture& distribution(const std::string& name) const;
    bool has(const std::string& name) const { return distributions_.count(name) > 0; }

private:
    std::map<std::string, GaussianMixture> distributions_;
    NoiseSchedule schedule_;
};

/// Wraps an arbitrary pure function as a Denoiser; used for stubs and for
/// adapter-backed predictors in tests.
class FunctionDenoiser : public Denoiser {
public:
    using Fn = std::function<Eigen::VectorXd(const Eigen::Ref<const Eigen::VectorXd>&, double,
                                             const PromptCondition&)>;
    explicit FunctionDenoiser(Fn fn) : fn_(std::move(fn)) {}

    Eigen::VectorXd predict(const Eigen::Ref<const Eigen::VectorXd>& z, double t,
                            const PromptCondition& prompt) const override {
        return fn_(z, t, prompt);
    }

private:
    Fn fn_;
};

}  // namespace tweeze
