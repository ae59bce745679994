#pragma once

#include <optional>

#include "tweeze/denoiser.hpp"
#include "tweeze/editor.hpp"
#include "tweeze/latent.hpp"

namespace tweeze {

/// Consistency / alignment measurements for one edit. psnr_infinite flags the
/// mse == 0 case; ssim is only defined for grid-layout latents.
struct MetricReport {
    double mse = 0.0;
    double psnr_db = 0.0;
    bool psnr_infinite = false;
    std::optional<double> ssim;
    double path_length = 0.0;
    double target_nll = 0.0;
};

double mse(const Latent& a, const Latent& b);

struct PsnrValue {
    double db = 0.0;
    bool infinite = false;
};

PsnrValue psnr(const Latent& a, const Latent& b, double dynamic_range);

/// Single-scale SSIM with a 7x7 uniform window over valid positions,
/// C1 = (0.01 L)^2, C2 = (0.03 L)^2. Grid layout only.
double ssim(const Latent& a, const Latent& b, double dynamic_range);

/// Sum of per-step L2 moves of z_mix across the recorded steps.
double path_length(const Trajectory& traj);

/// Negative log density of z under the target mixture; the desk-scale
/// stand-in for prompt-alignment scoring.
double target_nll(const Latent& z, const GaussianMixture& target);

constexpr int kSsimWindow = 7;

}  // namespace tweeze
