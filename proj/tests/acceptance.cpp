// Acceptance suite: runs every gate criterion at its stated tolerance and
// prints one pass/fail line each. Exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "tweeze/baseline.hpp"
#include "tweeze/benchmark.hpp"
#include "tweeze/config.hpp"
#include "tweeze/editor.hpp"
#include "tweeze/errors.hpp"
#include "tweeze/forward.hpp"
#include "tweeze/metrics.hpp"
#include "tweeze/registry.hpp"
#include "tweeze/rng.hpp"
#include "tweeze/runner.hpp"
#include "tweeze/trace.hpp"
#include "tweeze/verify.hpp"

namespace {

using namespace tweeze;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Outcome {
    bool passed = false;
    std::string detail;
};

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* pattern, double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), pattern, value);
    return buf;
}

const NoiseSchedule& schedule() {
    static NoiseSchedule s(ScheduleKind::cosine);
    return s;
}

const MixtureDenoiser& denoiser() {
    static MixtureDenoiser d(default_benchmark_registry().mixtures(), schedule());
    return d;
}

const std::vector<BenchmarkInstance>& benchmark200() {
    static std::vector<BenchmarkInstance> instances = make_benchmark(
        default_benchmark_registry(), BenchmarkSpec{200, "src", "tar"}, 20250810);
    return instances;
}

EditConfig edit_config(std::uint64_t seed, double strength, int active_steps,
                       bool record = false) {
    EditConfig config;
    config.grid = make_timestep_grid(schedule(), 12);
    config.reg.strength = strength;
    config.reg.active_steps = active_steps;
    config.guidance.src_scale = 1.5;
    config.guidance.tar_scale = 1.5;
    config.guidance.uncond_label = "both";
    config.seed = seed;
    config.record_trajectory = record;
    return config;
}

bool bitwise_equal(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return a.size() == b.size() &&
           std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
}

// ---- criterion 1: identity-edit fixed point ------------------------------

Outcome criterion_identity() {
    const auto start = Clock::now();
    const double strengths[] = {0.0, 0.5, 1.0};
    const int masks[] = {0, 6, 12};
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        GaussianRng rng(mix_seed(seed, 0x1d));
        const Latent z0 = Latent::vector(Eigen::Vector2d(-2.0, 2.0) + rng.vector(2));
        EditConfig config = edit_config(seed, strengths[seed % 3], masks[seed % 3]);
        const auto [output, traj] = tweeze_edit(denoiser(), z0, PromptCondition::ref("src"),
                                                PromptCondition::ref("src"), config, schedule());
        worst = std::max(worst, (output.values - z0.values).lpNorm<Eigen::Infinity>());
    }
    const double elapsed = seconds_since(start);
    return {worst <= 1e-9 && elapsed < 5.0,
            "max |output - source| = " + fmt("%.2e", worst) + ", " + fmt("%.2f s", elapsed)};
}

// ---- criterion 2: gradient correctness -----------------------------------

Outcome criterion_gradient() {
    const auto start = Clock::now();
    const GradCheckReport report = run_gradient_check(100, 909090, schedule());
    const double elapsed = seconds_since(start);
    return {report.passed && elapsed < 10.0,
            "max relative error = " + fmt("%.2e", report.max_rel_error) + " (tol 1e-5), " +
                fmt("%.2f s", elapsed)};
}

// ---- criterion 3: s = 0 reduction, bitwise -------------------------------

// Direct-path-only loop, restated from the update equations without the
// editor machinery.
Eigen::VectorXd plain_direct_path(const Eigen::VectorXd& z0, std::uint64_t seed,
                                  const TimestepGrid& grid) {
    const auto p_src = PromptCondition::ref("src");
    const auto p_tar = PromptCondition::ref("tar");
    const auto p_unc = PromptCondition::ref("both");
    const NoiseSchedule& s = schedule();
    Eigen::VectorXd z_mix = z0;
    for (std::size_t i = 0; i < grid.timesteps.size(); ++i) {
        const double t = grid.timesteps[i];
        const double ab = s.alpha_bar(t);
        const double ab_next = s.alpha_bar(i + 1 < grid.timesteps.size() ? grid.timesteps[i + 1]
                                                                         : 0.0);
        const Eigen::VectorXd eps =
            draw_noise(seed, static_cast<std::int64_t>(i), z0.size()).values;
        const Eigen::VectorXd z_src = std::sqrt(ab) * z0 + std::sqrt(1.0 - ab) * eps;
        const Eigen::VectorXd z_tar = z_mix - z0 + z_src;
        const Eigen::VectorXd su = denoiser().predict(z_src, t, p_unc);
        const Eigen::VectorXd sc = denoiser().predict(z_src, t, p_src);
        const Eigen::VectorXd zhat_src = su + 1.5 * (sc - su);
        const Eigen::VectorXd tu = denoiser().predict(z_tar, t, p_unc);
        const Eigen::VectorXd tc = denoiser().predict(z_tar, t, p_tar);
        const Eigen::VectorXd zhat_tar = tu + 1.5 * (tc - tu);
        z_mix = z0 + std::sqrt(ab_next) * (zhat_tar - zhat_src);
    }
    return z_mix;
}

Outcome criterion_reduction() {
    int matched = 0;
    for (std::uint64_t seed = 300; seed < 350; ++seed) {
        GaussianRng rng(mix_seed(seed, 0x1d));
        const Latent z0 = Latent::vector(Eigen::Vector2d(-2.0, 2.0) + rng.vector(2));
        EditConfig config = edit_config(seed, 0.0, 6);
        const auto [output, traj] = tweeze_edit(denoiser(), z0, PromptCondition::ref("src"),
                                                PromptCondition::ref("tar"), config, schedule());
        if (bitwise_equal(output.values, plain_direct_path(z0.values, seed, config.grid)))
            ++matched;
    }
    return {matched == 50, "bitwise-identical runs: " + std::to_string(matched) + "/50"};
}

// ---- criterion 4: shared-noise identity ----------------------------------

Outcome criterion_shared_noise() {
    GaussianRng rng(777);
    double worst_rel = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double t = 980.0 * rng.uniform01();
        const Eigen::VectorXd a = rng.vector(16);
        const Eigen::VectorXd b = rng.vector(16);
        const Eigen::VectorXd eps = rng.vector(16);
        const double lhs =
            (diffuse(a, t, eps, schedule()) - diffuse(b, t, eps, schedule())).norm();
        const double rhs = std::sqrt(schedule().alpha_bar(t)) * (a - b).norm();
        worst_rel = std::max(worst_rel, std::abs(lhs - rhs) / rhs);
    }

    int larger = 0;
    for (int i = 0; i < 1000; ++i) {
        const double ab = 0.1 + 0.4 * rng.uniform01();
        const double t = schedule().time_for_alpha_bar(ab);
        const Eigen::VectorXd a = rng.vector(16);
        const Eigen::VectorXd b = rng.vector(16);
        const double lhs = (diffuse(a, t, rng.vector(16), schedule()) -
                            diffuse(b, t, rng.vector(16), schedule()))
                               .norm();
        if (lhs > std::sqrt(ab) * (a - b).norm()) ++larger;
    }
    return {worst_rel <= 1e-12 && larger >= 950,
            "shared-noise max rel dev = " + fmt("%.2e", worst_rel) +
                ", independent-noise breaks identity in " + std::to_string(larger) + "/1000"};
}

// ---- criterion 5: analytic-denoiser oracle -------------------------------

Outcome criterion_mc_oracle() {
    const auto start = Clock::now();
    const McCoverageReport report = run_mc_coverage_check(50, 1000000, 48, 616161, schedule());
    const double elapsed = seconds_since(start);
    return {report.passed && elapsed < 60.0,
            "agreements within 3 SE: " + std::to_string(report.agreements) + "/50, " +
                fmt("%.1f s", elapsed)};
}

// ---- criterion 6: predictor adapters -------------------------------------

Outcome criterion_adapters() {
    GaussianRng rng(4242);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double ab = 0.02 + 0.96 * rng.uniform01();
        const double t = schedule().time_for_alpha_bar(ab);
        const Eigen::VectorXd z = rng.vector(3);
        const Eigen::VectorXd f = rng.vector(3);

        const Eigen::VectorXd eps_hat = noise_from_clean_pred(z, t, f, schedule());
        worst = std::max(worst, (clean_from_noise_pred(z, t, eps_hat, schedule()) - f)
                                    .lpNorm<Eigen::Infinity>());

        const double t_unit = 0.02 + 0.98 * rng.uniform01();
        const Eigen::VectorXd v_hat = velocity_from_clean_pred(z, t_unit, f);
        worst = std::max(worst, (clean_from_velocity_pred(z, t_unit, v_hat) - f)
                                    .lpNorm<Eigen::Infinity>());
    }
    return {worst <= 1e-12, "max round-trip error = " + fmt("%.2e", worst)};
}

// ---- criteria 7 and 8: trend reproduction --------------------------------

struct TrendPoint {
    double mean_mse = 0.0;
    double mean_nll = 0.0;
    double mean_path = 0.0;
};

TrendPoint run_benchmark_cell(double strength, int active_steps) {
    const GaussianMixture target = default_benchmark_registry().at("tar").mixture;
    TrendPoint point;
    for (const BenchmarkInstance& inst : benchmark200()) {
        EditConfig config = edit_config(inst.instance_seed, strength, active_steps);
        const auto [output, traj] = tweeze_edit(denoiser(), inst.z0_src, inst.p_src, inst.p_tar,
                                                config, schedule());
        point.mean_mse += mse(output, inst.z0_src);
        point.mean_nll += target_nll(output, target);
        point.mean_path += traj.path_length_sum;
    }
    const double n = static_cast<double>(benchmark200().size());
    point.mean_mse /= n;
    point.mean_nll /= n;
    point.mean_path /= n;
    return point;
}

Outcome criterion_step_trend() {
    const auto start = Clock::now();
    std::ostringstream detail;
    bool mse_down = true, nll_up = true;
    double prev_mse = std::numeric_limits<double>::infinity();
    double prev_nll = -std::numeric_limits<double>::infinity();
    detail << "m -> mse|nll:";
    for (const int m : {0, 2, 4, 6, 8}) {
        const TrendPoint point = run_benchmark_cell(1.0, m);
        mse_down = mse_down && point.mean_mse < prev_mse;
        nll_up = nll_up && point.mean_nll > prev_nll;
        prev_mse = point.mean_mse;
        prev_nll = point.mean_nll;
        detail << " " << m << ": " << fmt("%.3f", point.mean_mse) << "|"
               << fmt("%.3f", point.mean_nll);
    }
    const double elapsed = seconds_since(start);
    return {mse_down && nll_up && elapsed < 120.0, detail.str() + ", " + fmt("%.1f s", elapsed)};
}

Outcome criterion_strength_trend() {
    std::ostringstream detail;
    bool monotone = true;
    double prev = std::numeric_limits<double>::infinity();
    detail << "s -> mse:";
    for (const double s : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        const TrendPoint point = run_benchmark_cell(s, 6);
        monotone = monotone && point.mean_mse < prev;
        prev = point.mean_mse;
        detail << " " << fmt("%.2f", s) << ": " << fmt("%.3f", point.mean_mse);
    }
    return {monotone, detail.str()};
}

// ---- criterion 9: inversion gap ------------------------------------------

Outcome criterion_inversion_gap() {
    const TimestepGrid grid = make_timestep_grid(schedule(), 12);
    double ddim_mse = 0.0, identity_mse = 0.0;
    for (const BenchmarkInstance& inst : benchmark200()) {
        const Eigen::VectorXd top =
            ddim_invert(denoiser(), inst.p_src, inst.z0_src.values, grid, schedule());
        const Eigen::VectorXd recon = ddim_denoise(denoiser(), inst.p_src, top, grid, schedule());
        ddim_mse += mse(inst.z0_src.with_values(recon), inst.z0_src);

        EditConfig config = edit_config(inst.instance_seed, 1.0, 6);
        const auto [output, traj] = tweeze_edit(denoiser(), inst.z0_src, inst.p_src, inst.p_src,
                                                config, schedule());
        identity_mse += mse(output, inst.z0_src);
    }
    ddim_mse /= benchmark200().size();
    identity_mse /= benchmark200().size();
    return {ddim_mse > identity_mse,
            "ddim reconstruct mse = " + fmt("%.3e", ddim_mse) +
                " vs identity-edit mse = " + fmt("%.3e", identity_mse)};
}

// ---- criterion 10: path-length claim -------------------------------------

Outcome criterion_path_length() {
    const TrendPoint reg = run_benchmark_cell(1.0, 6);
    const TrendPoint free_run = run_benchmark_cell(0.0, 6);
    return {reg.mean_path <= free_run.mean_path,
            "mean path length " + fmt("%.3f", reg.mean_path) + " (s=1, m=6) vs " +
                fmt("%.3f", free_run.mean_path) + " (s=0)"};
}

// ---- criterion 11: determinism and round trip ----------------------------

Outcome criterion_determinism() {
    const fs::path base = fs::temp_directory_path() / "tweeze_acceptance";
    fs::remove_all(base);
    ExperimentConfig cfg;
    cfg.benchmark_n_instances = 4;
    cfg.guidance_uncond = "both";
    cfg.seed = 12;
    cfg.quiet = true;

    std::ostringstream log;
    cfg.output_dir = (base / "a").string();
    run_edit(cfg, log);
    cfg.output_dir = (base / "b").string();
    run_edit(cfg, log);

    const auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        return buf.str();
    };
    const bool traces_equal =
        slurp(base / "a" / "trace.jsonl") == slurp(base / "b" / "trace.jsonl");
    const bool results_equal =
        slurp(base / "a" / "edit_result.json") == slurp(base / "b" / "edit_result.json");

    bool invariants_ok = true;
    try {
        validate_trajectory(read_trajectory_jsonl((base / "a" / "trace.jsonl").string()));
        load_run_result((base / "a" / "edit_result.json").string());
    } catch (const Error&) {
        invariants_ok = false;
    }
    return {traces_equal && results_equal && invariants_ok,
            std::string("traces byte-identical: ") + (traces_equal ? "yes" : "NO") +
                ", results byte-identical: " + (results_equal ? "yes" : "NO") +
                ", re-imported invariants: " + (invariants_ok ? "ok" : "VIOLATED")};
}

// ---- criterion 12: desk-scale efficiency ---------------------------------

Outcome criterion_efficiency() {
    GaussianRng rng(202);
    const Latent z0 = Latent::vector(Eigen::Vector2d(-2.0, 2.0) + rng.vector(2));
    for (int i = 0; i < 10; ++i) {  // warm-up
        EditConfig config = edit_config(i, 1.0, 6);
        tweeze_edit(denoiser(), z0, PromptCondition::ref("src"), PromptCondition::ref("tar"),
                    config, schedule());
    }
    const int reps = 200;
    const auto start = Clock::now();
    for (int i = 0; i < reps; ++i) {
        EditConfig config = edit_config(1000 + i, 1.0, 6);
        tweeze_edit(denoiser(), z0, PromptCondition::ref("src"), PromptCondition::ref("tar"),
                    config, schedule());
    }
    const double per_edit = seconds_since(start) / reps;
    return {per_edit < 1e-3, "mean 12-step 2D edit: " + fmt("%.1f", per_edit * 1e6) + " us"};
}

}  // namespace

int main() {
    struct Entry {
        int id;
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Entry> criteria = {
        {1, "identity-edit fixed point", criterion_identity},
        {2, "gradient correctness vs surrogate finite differences", criterion_gradient},
        {3, "s = 0 reduction is bitwise", criterion_reduction},
        {4, "shared-noise distance identity", criterion_shared_noise},
        {5, "analytic denoiser vs importance-sampling oracle", criterion_mc_oracle},
        {6, "noise/velocity predictor adapters", criterion_adapters},
        {7, "early-step regularization trend", criterion_step_trend},
        {8, "strength sweep trend", criterion_strength_trend},
        {9, "inversion reconstruction gap", criterion_inversion_gap},
        {10, "path-length reduction", criterion_path_length},
        {11, "determinism and trace round trip", criterion_determinism},
        {12, "desk-scale efficiency", criterion_efficiency},
    };

    const auto suite_start = Clock::now();
    int failures = 0;
    for (const Entry& entry : criteria) {
        Outcome outcome;
        try {
            outcome = entry.run();
        } catch (const std::exception& e) {
            outcome = {false, std::string("exception: ") + e.what()};
        }
        if (!outcome.passed) ++failures;
        std::printf("[%s] criterion %2d: %s (%s)\n", outcome.passed ? "PASS" : "FAIL", entry.id,
                    entry.name, outcome.detail.c_str());
        std::fflush(stdout);
    }
    const double total = seconds_since(suite_start);
    if (total >= 300.0) {
        ++failures;
        std::printf("[FAIL] suite runtime budget: %.1f s exceeds 300 s\n", total);
    }
    std::printf("acceptance: %d/%d criteria passed, %.1f s total\n",
                12 - (failures > 12 ? 12 : failures), 12, total);
    return failures == 0 ? 0 : 1;
}
