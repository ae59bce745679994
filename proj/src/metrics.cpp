#include "tweeze/metrics.hpp"

#include <cmath>
#include <limits>

#include "tweeze/errors.hpp"

namespace tweeze {

double mse(const Latent& a, const Latent& b) {
    require_same_dim(a.values, b.values, "mse");
    if (a.dim() == 0) throw ShapeError("mse on empty latents");
    return (a.values - b.values).squaredNorm() / static_cast<double>(a.dim());
}

PsnrValue psnr(const Latent& a, const Latent& b, double dynamic_range) {
    if (!(dynamic_range > 0.0)) throw DomainError("psnr dynamic range must be positive");
    const double err = mse(a, b);
    if (err == 0.0) return {std::numeric_limits<double>::infinity(), true};
    return {10.0 * std::log10(dynamic_range * dynamic_range / err), false};
}

double ssim(const Latent& a, const Latent& b, double dynamic_range) {
    if (a.layout != Layout::grid || b.layout != Layout::grid)
        throw ShapeError("ssim requires grid-layout latents");
    if (a.grid_side != b.grid_side) throw ShapeError("ssim grids must share one side length");
    const int side = a.grid_side;
    if (side < kSsimWindow) throw ShapeError("ssim grid smaller than the 7x7 window");
    if (!(dynamic_range > 0.0)) throw DomainError("ssim dynamic range must be positive");

    const double c1 = (0.01 * dynamic_range) * (0.01 * dynamic_range);
    const double c2 = (0.03 * dynamic_range) * (0.03 * dynamic_range);
    const double inv_n = 1.0 / (kSsimWindow * kSsimWindow);
    const auto at = [side](const Latent& lat, int r, int c) {
        return lat.values[static_cast<Eigen::Index>(r) * side + c];
    };

    double total = 0.0;
    int windows = 0;
    for (int r0 = 0; r0 + kSsimWindow <= side; ++r0) {
        for (int c0 = 0; c0 + kSsimWindow <= side; ++c0) {
            double sum_a = 0.0, sum_b = 0.0, sum_aa = 0.0, sum_bb = 0.0, sum_ab = 0.0;
            for (int r = r0; r < r0 + kSsimWindow; ++r) {
                for (int c = c0; c < c0 + kSsimWindow; ++c) {
                    const double va = at(a, r, c);
                    const double vb = at(b, r, c);
                    sum_a += va;
                    sum_b += vb;
                    sum_aa += va * va;
                    sum_bb += vb * vb;
                    sum_ab += va * vb;
                }
            }
            const double mu_a = sum_a * inv_n;
            const double mu_b = sum_b * inv_n;
            const double var_a = sum_aa * inv_n - mu_a * mu_a;
            const double var_b = sum_bb * inv_n - mu_b * mu_b;
            const double cov = sum_ab * inv_n - mu_a * mu_b;
            total += ((2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)) /
                     ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
            ++windows;
        }
    }
    return total / windows;
}

double path_length(const Trajectory& traj) {
    if (traj.steps.empty()) throw NumericError("path_length of an empty trajectory");
    double total = 0.0;
    for (const StepRecord& step : traj.steps)
        total += (step.z_mix_after - step.z_mix_before).norm();
    return total;
}

double target_nll(const Latent& z, const GaussianMixture& target) {
    return target.neg_log_density(z.values);
}

}  // namespace tweeze
