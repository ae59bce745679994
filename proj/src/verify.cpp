#include "tweeze/verify.hpp"

#include <cmath>

#include "tweeze/editor.hpp"
#include "tweeze/errors.hpp"
#include "tweeze/forward.hpp"
#include "tweeze/latent.hpp"
#include "tweeze/rng.hpp"

namespace tweeze {

double surrogate_objective(const Eigen::Ref<const Eigen::VectorXd>& z_mix,
                           const SurrogateFrozenState& frozen, double t, double gamma_t,
                           const NoiseSchedule& schedule, double taylor_delta) {
    require_same_dim(z_mix, frozen.z0_src, "surrogate_objective");
    if (schedule.clamped_at(t))
        throw DegenerateTimestepError("surrogate objective in the clamped alpha_bar region");

    const double ab = schedule.alpha_bar(t);
    const double sqrt_ab = std::sqrt(ab);
    const double c = taylor_delta * schedule.alpha_bar_dot(t) / (2.0 * sqrt_ab);
    const double sigma = std::sqrt(1.0 - ab);

    long double acc = 0.0L;
    for (Eigen::Index i = 0; i < z_mix.size(); ++i) {
        const long double z_tar = (long double)z_mix[i] - frozen.z0_src[i] + frozen.z_src[i];
        const long double f_lin = (z_tar - (long double)sigma * frozen.eps_hat_tar[i]) / sqrt_ab;
        const long double r = (long double)frozen.z_src[i] - z_tar -
                              (long double)c * ((long double)frozen.zhat0_src[i] - f_lin);
        acc += r * r;
    }
    const double value = static_cast<double>((long double)gamma_t * acc);
    if (!std::isfinite(value)) throw NumericError("surrogate objective is non-finite");
    return value;
}

double gamma_hat_from_gamma(double gamma_t, double t, const NoiseSchedule& schedule,
                            double taylor_delta) {
    const double ab = schedule.alpha_bar(t);
    // d r / d z_mix = (-1 + c / sqrt(abar)) I with c as in the objective.
    return 2.0 * gamma_t * (-1.0 + taylor_delta * schedule.alpha_bar_dot(t) / (2.0 * ab));
}

Eigen::VectorXd finite_diff_gradient(const std::function<double(const Eigen::VectorXd&)>& objective,
                                     const Eigen::Ref<const Eigen::VectorXd>& z, double h) {
    if (!(h > 0.0)) throw DomainError("finite difference step must be positive");
    Eigen::VectorXd probe = z;
    Eigen::VectorXd grad(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        const double saved = probe[i];
        probe[i] = saved + h;
        const double up = objective(probe);
        probe[i] = saved - h;
        const double down = objective(probe);
        probe[i] = saved;
        if (!std::isfinite(up) || !std::isfinite(down))
            throw NumericError("finite_diff_gradient: non-finite objective");
        grad[i] = (up - down) / (2.0 * h);
    }
    return grad;
}

namespace {

double relative_error(double analytic, double numeric) {
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
    return std::abs(analytic - numeric) / denom;
}

}  // namespace

GradCheckReport check_reg_gradient_once(std::uint64_t seed, const NoiseSchedule& schedule,
                                        double tolerance, double h) {
    GaussianRng rng(mix_seed(seed, 0x9dc3u));
    const Eigen::Index dim = 2 + static_cast<Eigen::Index>(rng.uniform01() * 3.0);

    // alpha_bar in [0.1, 0.9]
    const double ab_target = 0.1 + 0.8 * rng.uniform01();
    const double t = schedule.time_for_alpha_bar(ab_target);

    const Eigen::VectorXd z0_src = 1.5 * rng.vector(dim);
    const Eigen::VectorXd eps = rng.vector(dim);
    const Eigen::VectorXd z_src = diffuse(z0_src, t, eps, schedule);
    const Eigen::VectorXd z_mix = z0_src + 0.8 * rng.vector(dim);
    const Eigen::VectorXd zhat0_src = rng.vector(dim);
    const Eigen::VectorXd zhat0_tar = rng.vector(dim);
    const double gamma_t = 0.1 + 1.9 * rng.uniform01();

    const Eigen::VectorXd z_tar = z_mix - z0_src + z_src;
    SurrogateFrozenState frozen{z0_src, z_src, noise_from_clean_pred(z_tar, t, zhat0_tar, schedule),
                                zhat0_src};

    const double gamma_hat = gamma_hat_from_gamma(gamma_t, t, schedule);
    const Eigen::VectorXd analytic =
        reg_gradient_full(z_src, z_tar, zhat0_src, zhat0_tar, t, gamma_hat, schedule);
    const Eigen::VectorXd numeric = finite_diff_gradient(
        [&](const Eigen::VectorXd& probe) {
            return surrogate_objective(probe, frozen, t, gamma_t, schedule);
        },
        z_mix, h);

    GradCheckReport report;
    report.tolerance = tolerance;
    report.per_coordinate_errors.resize(dim);
    for (Eigen::Index i = 0; i < dim; ++i)
        report.per_coordinate_errors[i] = relative_error(analytic[i], numeric[i]);
    report.max_rel_error = report.per_coordinate_errors.maxCoeff();
    report.passed = report.max_rel_error <= tolerance;
    return report;
}

GradCheckReport run_gradient_check(int n_states, std::uint64_t seed, const NoiseSchedule& schedule,
                                   double tolerance, double h) {
    if (n_states < 1) throw ConfigError("gradient check needs at least one state");
    GradCheckReport summary;
    summary.tolerance = tolerance;
    summary.per_coordinate_errors.resize(n_states);
    for (int i = 0; i < n_states; ++i) {
        const GradCheckReport one =
            check_reg_gradient_once(mix_seed(seed, static_cast<std::uint64_t>(i)), schedule,
                                    tolerance, h);
        summary.per_coordinate_errors[i] = one.max_rel_error;
    }
    summary.max_rel_error = summary.per_coordinate_errors.maxCoeff();
    summary.passed = summary.max_rel_error <= tolerance;
    return summary;
}

McEstimate mc_posterior_mean(const GaussianMixture& mixture,
                             const Eigen::Ref<const Eigen::VectorXd>& z, double t, int n_samples,
                             std::uint64_t seed, const NoiseSchedule& schedule) {
    mixture.validate();
    if (z.size() != mixture.dim()) throw ShapeError("mc_posterior_mean: dimension mismatch");
    if (n_samples < 1000) throw ConfigError("mc_posterior_mean needs n_samples >= 1000");

    const double ab = schedule.alpha_bar(t);
    const Eigen::Index dim = z.size();
    if (1.0 - ab == 0.0) {
        // Degenerate weights: the posterior collapses onto z itself.
        return McEstimate{z, Eigen::VectorXd::Zero(dim), static_cast<double>(n_samples)};
    }
    const double sqrt_ab = std::sqrt(ab);
    const double inv_two_var = 0.5 / (1.0 - ab);

    GaussianRng rng(mix_seed(seed, 0x6d63u));
    // Streaming log-sum-exp accumulators: u = exp(lw - max_lw),
    // A* carry first-order sums, B* carry squared-weight sums.
    double max_lw = -std::numeric_limits<double>::infinity();
    double a0 = 0.0, b0 = 0.0;
    Eigen::VectorXd a1 = Eigen::VectorXd::Zero(dim);
    Eigen::VectorXd b1 = Eigen::VectorXd::Zero(dim);
    Eigen::VectorXd b2 = Eigen::VectorXd::Zero(dim);

    for (int s = 0; s < n_samples; ++s) {
        const Eigen::VectorXd z0 = mixture.sample(rng);
        const double lw = -inv_two_var * (z - sqrt_ab * z0).squaredNorm();
        if (lw > max_lw) {
            const double rescale = std::exp(max_lw - lw);
            const double rescale2 = rescale * rescale;
            a0 *= rescale;
            a1 *= rescale;
            b0 *= rescale2;
            b1 *= rescale2;
            b2 *= rescale2;
            max_lw = lw;
        }
        const double u = std::exp(lw - max_lw);
        const double u2 = u * u;
        a0 += u;
        b0 += u2;
        a1.noalias() += u * z0;
        b1.noalias() += u2 * z0;
        b2 += u2 * z0.cwiseProduct(z0);
    }

    const double ess = a0 * a0 / b0;
    if (!(ess >= 10.0))
        throw UnreliableEstimateError("importance estimate effective sample size below 10");

    McEstimate result;
    result.estimate = a1 / a0;
    result.std_error.resize(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        const double est = result.estimate[i];
        const double var = (b2[i] - 2.0 * est * b1[i] + est * est * b0) / (a0 * a0);
        result.std_error[i] = std::sqrt(std::max(0.0, var));
    }
    result.effective_sample_size = ess;
    return result;
}

McCoverageReport run_mc_coverage_check(int n_triples, int n_samples, int min_agreements,
                                       std::uint64_t seed, const NoiseSchedule& schedule) {
    McCoverageReport report;
    report.total = n_triples;
    for (int trial = 0; trial < n_triples; ++trial) {
        GaussianRng rng(mix_seed(seed, 0xc0ffee00ULL + trial));
        const Eigen::Index dim = 1 + static_cast<Eigen::Index>(rng.uniform01() * 3.0);
        const int n_components = 1 + static_cast<int>(rng.uniform01() * 3.0);

        GaussianMixture mixture;
        mixture.component_sigma = 0.4 + 0.8 * rng.uniform01();
        double weight_total = 0.0;
        for (int k = 0; k < n_components; ++k) {
            mixture.weights.push_back(0.2 + rng.uniform01());
            mixture.means.push_back(2.5 * rng.vector(dim));
            weight_total += mixture.weights.back();
        }
        for (double& w : mixture.weights) w /= weight_total;

        const double ab_target = 0.2 + 0.75 * rng.uniform01();
        const double t = schedule.time_for_alpha_bar(ab_target);
        // Probe point drawn from the forward process so weights stay healthy.
        const Eigen::VectorXd z0 = mixture.sample(rng);
        const Eigen::VectorXd z = diffuse(z0, t, rng.vector(dim), schedule);

        const Eigen::VectorXd exact = gmm_posterior_mean(mixture, z, t, schedule);
        const McEstimate mc =
            mc_posterior_mean(mixture, z, t, n_samples, mix_seed(seed, 0xabc0 + trial), schedule);

        bool ok = true;
        for (Eigen::Index i = 0; i < dim; ++i) {
            if (std::abs(exact[i] - mc.estimate[i]) > 3.0 * mc.std_error[i]) ok = false;
        }
        if (ok) ++report.agreements;
    }
    report.passed = report.agreements >= min_agreements;
    return report;
}

}  // namespace tweeze
