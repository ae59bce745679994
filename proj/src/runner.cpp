#include "tweeze/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "tweeze/baseline.hpp"
#include "tweeze/editor.hpp"
#include "tweeze/errors.hpp"
#include "tweeze/plot.hpp"
#include "tweeze/trace.hpp"
#include "tweeze/verify.hpp"

namespace tweeze {

using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

ordered_json config_to_json(const ExperimentConfig& c) {
    ordered_json j;
    j["schedule.kind"] = to_string(c.schedule_kind);
    j["schedule.T"] = c.schedule_T;
    j["schedule.alpha_floor"] = c.schedule_alpha_floor;
    j["grid.n_steps"] = c.grid_n_steps;
    j["grid.t_max_fraction"] = c.grid_t_max_fraction;
    j["grid.spacing"] = to_string(c.grid_spacing);
    j["reg.form"] = to_string(c.reg_form);
    j["reg.strength"] = c.reg_strength;
    j["reg.active_steps"] = c.reg_active_steps;
    j["reg.taylor_delta"] = c.reg_taylor_delta;
    j["guidance.src_scale"] = c.guidance_src_scale;
    j["guidance.tar_scale"] = c.guidance_tar_scale;
    j["guidance.uncond"] = c.guidance_uncond;
    j["seed"] = c.seed;
    j["model.registry"] = c.model_registry;
    j["benchmark.n_instances"] = c.benchmark_n_instances;
    j["benchmark.src_distribution"] = c.benchmark_src_distribution;
    j["benchmark.tar_distribution"] = c.benchmark_tar_distribution;
    j["metrics.dynamic_range"] = c.metrics_dynamic_range;
    return j;
}

ordered_json metrics_to_json(const MetricReport& m) {
    ordered_json j;
    j["mse"] = m.mse;
    if (m.psnr_infinite)
        j["psnr_db"] = nullptr;
    else
        j["psnr_db"] = m.psnr_db;
    j["psnr_infinite"] = m.psnr_infinite;
    if (m.ssim.has_value()) j["ssim"] = *m.ssim;
    j["path_length"] = m.path_length;
    j["target_nll"] = m.target_nll;
    return j;
}

MetricReport metrics_from_json(const ordered_json& j) {
    MetricReport m;
    m.mse = j.at("mse").get<double>();
    m.psnr_infinite = j.at("psnr_infinite").get<bool>();
    m.psnr_db = m.psnr_infinite ? std::numeric_limits<double>::infinity()
                                : j.at("psnr_db").get<double>();
    if (j.contains("ssim")) m.ssim = j.at("ssim").get<double>();
    m.path_length = j.at("path_length").get<double>();
    m.target_nll = j.at("target_nll").get<double>();
    return m;
}

// Emission-time sanity check of the report invariant.
void check_report_coherence(const MetricReport& m) {
    if ((m.mse == 0.0) != m.psnr_infinite)
        throw VerificationError("metric report: mse == 0 must match the infinite-psnr flag");
    if (m.mse == 0.0 && m.ssim.has_value() && *m.ssim != 1.0)
        throw VerificationError("metric report: identical inputs must give ssim == 1");
}

Aggregate aggregate_of(std::vector<double> values) {
    Aggregate agg;
    agg.count = static_cast<int>(values.size());
    if (values.empty()) return agg;
    double sum = 0.0;
    for (double v : values) sum += v;
    agg.mean = sum / agg.count;
    if (agg.count > 1) {
        double sq = 0.0;
        for (double v : values) sq += (v - agg.mean) * (v - agg.mean);
        agg.stddev = std::sqrt(sq / (agg.count - 1));
    }
    return agg;
}

std::string format_strength(double s) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", s);
    return buf;
}

struct Timing {
    std::vector<double> per_edit_seconds;
    double total_seconds = 0.0;
};

void write_timing_sidecar(const std::string& path, const Timing& timing) {
    ordered_json j;
    j["total_seconds"] = timing.total_seconds;
    double mean = 0.0;
    for (double v : timing.per_edit_seconds) mean += v;
    if (!timing.per_edit_seconds.empty()) mean /= timing.per_edit_seconds.size();
    j["mean_seconds_per_edit"] = mean;
    j["edits"] = timing.per_edit_seconds.size();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write timing sidecar: " + path);
    out << j.dump(2) << '\n';
}

}  // namespace

std::map<std::string, Aggregate> compute_aggregates(const std::vector<InstanceResult>& instances) {
    std::vector<double> mses, paths, nlls, psnrs, ssims;
    for (const InstanceResult& inst : instances) {
        mses.push_back(inst.metrics.mse);
        paths.push_back(inst.metrics.path_length);
        nlls.push_back(inst.metrics.target_nll);
        if (!inst.metrics.psnr_infinite) psnrs.push_back(inst.metrics.psnr_db);
        if (inst.metrics.ssim.has_value()) ssims.push_back(*inst.metrics.ssim);
    }
    std::map<std::string, Aggregate> aggregates;
    aggregates["mse"] = aggregate_of(std::move(mses));
    aggregates["path_length"] = aggregate_of(std::move(paths));
    aggregates["target_nll"] = aggregate_of(std::move(nlls));
    aggregates["psnr_db"] = aggregate_of(std::move(psnrs));
    if (!ssims.empty()) aggregates["ssim"] = aggregate_of(std::move(ssims));
    return aggregates;
}

namespace {

ordered_json run_result_to_json(const ExperimentConfig& config, const RunResult& result) {
    ordered_json j;
    j["config"] = config_to_json(config);
    ordered_json insts = ordered_json::array();
    for (const InstanceResult& inst : result.instances) {
        ordered_json e;
        e["index"] = inst.index;
        e["seed"] = inst.seed;
        e["metrics"] = metrics_to_json(inst.metrics);
        insts.push_back(std::move(e));
    }
    j["instances"] = std::move(insts);
    ordered_json aggs;
    for (const auto& [name, agg] : result.aggregates) {
        aggs[name] = {{"mean", agg.mean}, {"stddev", agg.stddev}, {"count", agg.count}};
    }
    j["aggregates"] = std::move(aggs);
    return j;
}

RunResult run_result_from_json(const ordered_json& j) {
    RunResult result;
    for (const auto& e : j.at("instances")) {
        InstanceResult inst;
        inst.index = e.at("index").get<int>();
        inst.seed = e.at("seed").get<std::uint64_t>();
        inst.metrics = metrics_from_json(e.at("metrics"));
        result.instances.push_back(std::move(inst));
    }
    for (const auto& [name, agg] : j.at("aggregates").items()) {
        result.aggregates[name] = Aggregate{agg.at("mean").get<double>(),
                                            agg.at("stddev").get<double>(),
                                            agg.at("count").get<int>()};
    }
    return result;
}

}  // namespace

void write_run_result(const std::string& path, const ExperimentConfig& config,
                      const RunResult& result) {
    for (const InstanceResult& inst : result.instances) check_report_coherence(inst.metrics);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write run result: " + path);
    out << run_result_to_json(config, result).dump(2) << '\n';
    if (!out) throw IoError("failed writing run result: " + path);
}

RunResult load_run_result(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open run result: " + path);
    ordered_json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("run result parse error: ") + e.what());
    }
    RunResult result = run_result_from_json(j);
    const auto recomputed = compute_aggregates(result.instances);
    if (recomputed.size() != result.aggregates.size())
        throw VerificationError("run result aggregates do not match per-instance entries");
    for (const auto& [name, agg] : recomputed) {
        const auto it = result.aggregates.find(name);
        if (it == result.aggregates.end() || it->second.mean != agg.mean ||
            it->second.stddev != agg.stddev || it->second.count != agg.count)
            throw VerificationError("run result aggregate '" + name + "' is not recomputable");
    }
    return result;
}

const GaussianMixture& RunContext::target_mixture() const {
    return registry.at(config.benchmark_tar_distribution).mixture;
}

namespace {

std::string resolve_registry_path(const ExperimentConfig& config) {
    const fs::path p(config.model_registry);
    if (p.is_absolute() || config.config_dir.empty()) return config.model_registry;
    return (fs::path(config.config_dir) / p).string();
}

}  // namespace

RunContext make_run_context(const ExperimentConfig& config) {
    config.validate();
    NoiseSchedule schedule = config.make_schedule();
    DistributionRegistry registry =
        config.model_registry == "builtin"
            ? default_benchmark_registry()
            : DistributionRegistry::from_file(resolve_registry_path(config));
    if (!config.guidance_uncond.empty() && !registry.has(config.guidance_uncond))
        throw ConfigError("guidance.uncond does not resolve: " + config.guidance_uncond);
    MixtureDenoiser denoiser(registry.mixtures(), schedule);
    BenchmarkSpec spec{config.benchmark_n_instances, config.benchmark_src_distribution,
                       config.benchmark_tar_distribution};
    std::vector<BenchmarkInstance> instances = make_benchmark(registry, spec, config.seed);
    return RunContext{config, std::move(schedule), std::move(registry), std::move(denoiser),
                      std::move(instances)};
}

namespace {

MetricReport evaluate_output(const RunContext& ctx, const Latent& source, const Latent& output,
                             double path_length_sum) {
    MetricReport report;
    report.mse = mse(output, source);
    const PsnrValue p = psnr(output, source, ctx.config.metrics_dynamic_range);
    report.psnr_db = p.db;
    report.psnr_infinite = p.infinite;
    if (source.layout == Layout::grid && source.grid_side >= kSsimWindow)
        report.ssim = ssim(output, source, ctx.config.metrics_dynamic_range);
    report.path_length = path_length_sum;
    report.target_nll = target_nll(output, ctx.target_mixture());
    check_report_coherence(report);
    return report;
}

RunResult evaluate_cell(const RunContext& ctx, const EditConfig& base_edit, Timing* timing) {
    RunResult result;
    result.instances.reserve(ctx.instances.size());
    for (std::size_t i = 0; i < ctx.instances.size(); ++i) {
        const BenchmarkInstance& inst = ctx.instances[i];
        EditConfig edit = base_edit;
        edit.seed = inst.instance_seed;
        const auto start = std::chrono::steady_clock::now();
        auto [output, traj] =
            tweeze_edit(ctx.denoiser, inst.z0_src, inst.p_src, inst.p_tar, edit, ctx.schedule);
        const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
        if (timing) {
            timing->per_edit_seconds.push_back(elapsed.count());
            timing->total_seconds += elapsed.count();
        }
        InstanceResult ir;
        ir.index = static_cast<int>(i);
        ir.seed = inst.instance_seed;
        ir.metrics = evaluate_output(ctx, inst.z0_src, output, traj.path_length_sum);
        result.instances.push_back(std::move(ir));
    }
    result.aggregates = compute_aggregates(result.instances);
    return result;
}

fs::path ensure_output_dir(const ExperimentConfig& config) {
    fs::path dir(config.output_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory: " + dir.string());
    return dir;
}

struct DdimOutcome {
    Latent output;
    double path_length = 0.0;
};

// Invert with the inversion prompt, then denoise with the denoising prompt,
// accumulating the moves of both phases.
DdimOutcome ddim_roundtrip(const RunContext& ctx, const Latent& z0,
                           const PromptCondition& invert_prompt,
                           const PromptCondition& denoise_prompt, const TimestepGrid& grid) {
    DdimOutcome outcome;
    Eigen::VectorXd z = z0.values;
    double t = 0.0;
    for (std::size_t i = grid.timesteps.size(); i-- > 0;) {
        const double t_up = grid.timesteps[i];
        const Eigen::VectorXd eps_hat =
            ddim_estimate_noise(ctx.denoiser, invert_prompt, z, t, ctx.schedule);
        Eigen::VectorXd z_next = ddim_denoise_step(z, t, t_up, eps_hat, ctx.schedule);
        outcome.path_length += (z_next - z).norm();
        z = std::move(z_next);
        t = t_up;
    }
    for (std::size_t i = 0; i < grid.timesteps.size(); ++i) {
        const double t_cur = grid.timesteps[i];
        const double t_next = grid.next_after(i);
        const Eigen::VectorXd eps_hat =
            ddim_estimate_noise(ctx.denoiser, denoise_prompt, z, t_cur, ctx.schedule);
        Eigen::VectorXd z_next = ddim_denoise_step(z, t_cur, t_next, eps_hat, ctx.schedule);
        outcome.path_length += (z_next - z).norm();
        z = std::move(z_next);
    }
    outcome.output = z0.with_values(std::move(z));
    return outcome;
}

}  // namespace

int run_edit(const ExperimentConfig& config, std::ostream& log) {
    RunContext ctx = make_run_context(config);
    if (config.edit_instance >= static_cast<int>(ctx.instances.size()))
        throw ConfigError("edit.instance is out of range for the benchmark size");
    const BenchmarkInstance& inst = ctx.instances[config.edit_instance];

    EditConfig edit = config.make_edit_config(ctx.schedule);
    edit.seed = inst.instance_seed;

    Timing timing;
    const auto start = std::chrono::steady_clock::now();
    auto [output, traj] =
        tweeze_edit(ctx.denoiser, inst.z0_src, inst.p_src, inst.p_tar, edit, ctx.schedule);
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    timing.per_edit_seconds.push_back(elapsed.count());
    timing.total_seconds = elapsed.count();

    const fs::path dir = ensure_output_dir(config);
    if (!config.no_trace) write_trajectory_jsonl((dir / "trace.jsonl").string(), traj);

    RunResult result;
    InstanceResult ir;
    ir.index = config.edit_instance;
    ir.seed = inst.instance_seed;
    ir.metrics = evaluate_output(ctx, inst.z0_src, output, traj.path_length_sum);
    result.instances.push_back(ir);
    result.aggregates = compute_aggregates(result.instances);
    write_run_result((dir / "edit_result.json").string(), config, result);
    write_timing_sidecar((dir / "edit_result.timing.json").string(), timing);

    if (!config.quiet) {
        log << "edit: instance " << config.edit_instance << " seed " << inst.instance_seed
            << " mse_to_source " << ir.metrics.mse << " target_nll " << ir.metrics.target_nll
            << " path_length " << ir.metrics.path_length << "\n";
    }
    return 0;
}

int run_sweep(const ExperimentConfig& config, std::ostream& log) {
    RunContext ctx = make_run_context(config);
    const std::vector<int> m_values =
        config.sweep_active_steps.empty() ? std::vector<int>{config.reg_active_steps}
                                          : config.sweep_active_steps;
    const std::vector<double> s_values = config.sweep_strength.empty()
                                             ? std::vector<double>{config.reg_strength}
                                             : config.sweep_strength;

    const fs::path dir = ensure_output_dir(config);
    ordered_json table = ordered_json::array();
    Timing timing;
    for (const int m : m_values) {
        for (const double s : s_values) {
            ExperimentConfig cell_cfg = config;
            cell_cfg.reg_active_steps = m;
            cell_cfg.reg_strength = s;
            EditConfig edit = cell_cfg.make_edit_config(ctx.schedule);
            edit.record_trajectory = false;
            const RunResult result = evaluate_cell(ctx, edit, &timing);

            const std::string name =
                "sweep_m" + std::to_string(m) + "_s" + format_strength(s) + ".json";
            write_run_result((dir / name).string(), cell_cfg, result);

            ordered_json row;
            row["active_steps"] = m;
            row["strength"] = s;
            row["mean_mse"] = result.aggregates.at("mse").mean;
            row["mean_target_nll"] = result.aggregates.at("target_nll").mean;
            row["mean_path_length"] = result.aggregates.at("path_length").mean;
            row["file"] = name;
            table.push_back(std::move(row));
            if (!config.quiet)
                log << "sweep m=" << m << " s=" << format_strength(s)
                    << " mean_mse=" << table.back()["mean_mse"].get<double>()
                    << " mean_target_nll=" << table.back()["mean_target_nll"].get<double>()
                    << "\n";
        }
    }
    {
        std::ofstream out(dir / "sweep_table.json", std::ios::binary);
        if (!out) throw IoError("cannot write sweep table");
        out << table.dump(2) << '\n';
    }
    write_timing_sidecar((dir / "sweep_table.timing.json").string(), timing);
    return 0;
}

int run_bench(const ExperimentConfig& config, std::ostream& log) {
    RunContext ctx = make_run_context(config);
    const fs::path dir = ensure_output_dir(config);
    const TimestepGrid grid = config.make_grid(ctx.schedule);

    ordered_json methods = ordered_json::array();
    Timing timing;

    const auto push_method = [&](const std::string& name, const RunResult& result,
                                 const ExperimentConfig& method_cfg) {
        write_run_result((dir / ("bench_" + name + ".json")).string(), method_cfg, result);
        ordered_json m;
        m["name"] = name;
        m["mean_mse"] = result.aggregates.at("mse").mean;
        m["mean_target_nll"] = result.aggregates.at("target_nll").mean;
        m["mean_path_length"] = result.aggregates.at("path_length").mean;
        ordered_json seeds = ordered_json::array();
        for (const InstanceResult& inst : result.instances) seeds.push_back(inst.seed);
        m["instance_seeds"] = std::move(seeds);
        methods.push_back(std::move(m));
        if (!config.quiet)
            log << "bench " << name << " mean_mse=" << result.aggregates.at("mse").mean
                << " mean_target_nll=" << result.aggregates.at("target_nll").mean << "\n";
    };

    {
        EditConfig edit = config.make_edit_config(ctx.schedule);
        edit.record_trajectory = false;
        push_method("tweeze", evaluate_cell(ctx, edit, &timing), config);
    }
    {
        ExperimentConfig s0 = config;
        s0.reg_strength = 0.0;
        EditConfig edit = s0.make_edit_config(ctx.schedule);
        edit.record_trajectory = false;
        push_method("tweeze_s0", evaluate_cell(ctx, edit, &timing), s0);
    }
    const auto run_ddim = [&](const std::string& name, bool edit_prompts) {
        RunResult result;
        for (std::size_t i = 0; i < ctx.instances.size(); ++i) {
            const BenchmarkInstance& inst = ctx.instances[i];
            const auto start = std::chrono::steady_clock::now();
            const DdimOutcome outcome =
                ddim_roundtrip(ctx, inst.z0_src, inst.p_src,
                               edit_prompts ? inst.p_tar : inst.p_src, grid);
            const std::chrono::duration<double> elapsed =
                std::chrono::steady_clock::now() - start;
            timing.per_edit_seconds.push_back(elapsed.count());
            timing.total_seconds += elapsed.count();
            InstanceResult ir;
            ir.index = static_cast<int>(i);
            ir.seed = inst.instance_seed;
            ir.metrics = evaluate_output(ctx, inst.z0_src, outcome.output, outcome.path_length);
            result.instances.push_back(std::move(ir));
        }
        result.aggregates = compute_aggregates(result.instances);
        push_method(name, result, config);
    };
    run_ddim("ddim_edit", true);
    run_ddim("ddim_reconstruct", false);

    ordered_json doc;
    doc["config"] = config_to_json(config);
    doc["methods"] = std::move(methods);
    {
        std::ofstream out(dir / "bench.json", std::ios::binary);
        if (!out) throw IoError("cannot write bench summary");
        out << doc.dump(2) << '\n';
    }
    write_timing_sidecar((dir / "bench.timing.json").string(), timing);
    return 0;
}

int run_verify(const ExperimentConfig& config, std::ostream& log) {
    config.validate();
    const NoiseSchedule schedule = config.make_schedule();
    const fs::path dir = ensure_output_dir(config);

    const GradCheckReport grad =
        run_gradient_check(config.verify_n_states, config.seed, schedule);
    log << "gradient check: states=" << config.verify_n_states
        << " max_rel_error=" << grad.max_rel_error << " tolerance=" << grad.tolerance << " -> "
        << (grad.passed ? "pass" : "FAIL") << "\n";

    const McCoverageReport coverage =
        run_mc_coverage_check(config.verify_mc_triples, config.verify_mc_samples,
                              config.verify_min_agreements, config.seed, schedule);
    log << "posterior-mean oracle: agreements=" << coverage.agreements << "/" << coverage.total
        << " (need >= " << config.verify_min_agreements << ") -> "
        << (coverage.passed ? "pass" : "FAIL") << "\n";

    ordered_json doc;
    doc["gradient_check"] = {{"states", config.verify_n_states},
                             {"max_rel_error", grad.max_rel_error},
                             {"tolerance", grad.tolerance},
                             {"passed", grad.passed}};
    doc["mc_coverage"] = {{"agreements", coverage.agreements},
                          {"total", coverage.total},
                          {"min_agreements", config.verify_min_agreements},
                          {"passed", coverage.passed}};
    std::ofstream out(dir / "verify.json", std::ios::binary);
    if (!out) throw IoError("cannot write verify report");
    out << doc.dump(2) << '\n';

    return (grad.passed && coverage.passed) ? 0 : kExitVerificationFailure;
}

int run_plot(const ExperimentConfig& config, std::ostream& log) {
    const fs::path dir = ensure_output_dir(config);
    Trajectory traj;
    if (!config.plot_trace.empty()) {
        traj = read_trajectory_jsonl(config.plot_trace);
    } else {
        RunContext ctx = make_run_context(config);
        if (config.edit_instance >= static_cast<int>(ctx.instances.size()))
            throw ConfigError("edit.instance is out of range for the benchmark size");
        const BenchmarkInstance& inst = ctx.instances[config.edit_instance];
        EditConfig edit = config.make_edit_config(ctx.schedule);
        edit.seed = inst.instance_seed;
        edit.record_trajectory = true;
        traj = std::move(
            tweeze_edit(ctx.denoiser, inst.z0_src, inst.p_src, inst.p_tar, edit, ctx.schedule)
                .second);
    }

    bool wrote = false;
    if (traj.source.layout == Layout::vector && traj.source.dim() == 2) {
        write_trajectory_svg((dir / "trajectory.svg").string(), traj);
        if (!config.quiet) log << "plot: wrote " << (dir / "trajectory.svg").string() << "\n";
        wrote = true;
    }
    if (traj.source.layout == Layout::grid) {
        write_latent_pgm((dir / "source.pgm").string(), traj.source);
        write_latent_pgm((dir / "output.pgm").string(), traj.output);
        if (!config.quiet)
            log << "plot: wrote " << (dir / "source.pgm").string() << " and "
                << (dir / "output.pgm").string() << "\n";
        wrote = true;
    }
    if (!wrote)
        throw ConfigError("plot supports 2D vector trajectories (SVG) and grid latents (PGM)");
    return 0;
}

}  // namespace tweeze
