#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tweeze/editor.hpp"
#include "tweeze/schedule.hpp"

namespace tweeze {

/// Full declarative description of a run. Parsed from a flat
/// `key = value` text file; every knob lives here so reruns are
/// reproducible from the file plus a seed.
struct ExperimentConfig {
    // schedule.*
    ScheduleKind schedule_kind = ScheduleKind::cosine;
    double schedule_T = 1000.0;
    double schedule_alpha_floor = 1e-6;

    // grid.*
    int grid_n_steps = kDefaultGridSteps;
    double grid_t_max_fraction = kDefaultTMaxFraction;
    GridSpacing grid_spacing = GridSpacing::uniform_t;

    // reg.*
    RegForm reg_form = RegForm::simplified;
    double reg_strength = 1.0;
    int reg_active_steps = 6;
    double reg_taylor_delta = 0.5;

    // guidance.*
    double guidance_src_scale = 1.5;
    double guidance_tar_scale = 1.5;
    std::string guidance_uncond;

    std::uint64_t seed = 0;

    // model.*: "builtin" or a registry JSON path
    std::string model_registry = "builtin";

    // benchmark.*
    int benchmark_n_instances = 200;
    std::string benchmark_src_distribution = "src";
    std::string benchmark_tar_distribution = "tar";

    std::string output_dir = "out";

    // metrics.*
    double metrics_dynamic_range = 1.0;

    // sweep.* (empty: use the single configured value)
    std::vector<int> sweep_active_steps;
    std::vector<double> sweep_strength;

    // verify.*
    int verify_n_states = 100;
    int verify_mc_triples = 50;
    int verify_mc_samples = 1000000;
    int verify_min_agreements = 48;

    // edit.* / plot.*
    int edit_instance = 0;
    std::string plot_trace;

    bool no_trace = false;
    bool quiet = false;

    // Directory of the config file; relative model.registry paths resolve
    // against it.
    std::string config_dir;

    NoiseSchedule make_schedule() const;
    TimestepGrid make_grid(const NoiseSchedule& schedule) const;
    EditConfig make_edit_config(const NoiseSchedule& schedule) const;
    void validate() const;
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

/// Applies one `key = value` assignment (also used for CLI overrides).
void apply_config_entry(ExperimentConfig& config, const std::string& key,
                        const std::string& value);

}  // namespace tweeze
