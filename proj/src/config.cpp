#include "tweeze/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "tweeze/errors.hpp"

namespace tweeze {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key " + key + ": not a number: '" + value + "'");
    }
}

long long parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key " + key + ": not an integer: '" + value + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError("config key " + key + ": not a boolean: '" + value + "'");
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> items;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) items.push_back(item);
    }
    return items;
}

}  // namespace

void apply_config_entry(ExperimentConfig& c, const std::string& key, const std::string& value) {
    if (key == "schedule.kind") c.schedule_kind = schedule_kind_from_string(value);
    else if (key == "schedule.T") c.schedule_T = parse_double(key, value);
    else if (key == "schedule.alpha_floor") c.schedule_alpha_floor = parse_double(key, value);
    else if (key == "grid.n_steps") c.grid_n_steps = static_cast<int>(parse_int(key, value));
    else if (key == "grid.t_max_fraction") c.grid_t_max_fraction = parse_double(key, value);
    else if (key == "grid.spacing") c.grid_spacing = grid_spacing_from_string(value);
    else if (key == "reg.form") c.reg_form = reg_form_from_string(value);
    else if (key == "reg.strength") c.reg_strength = parse_double(key, value);
    else if (key == "reg.active_steps") c.reg_active_steps = static_cast<int>(parse_int(key, value));
    else if (key == "reg.taylor_delta") c.reg_taylor_delta = parse_double(key, value);
    else if (key == "guidance.src_scale") c.guidance_src_scale = parse_double(key, value);
    else if (key == "guidance.tar_scale") c.guidance_tar_scale = parse_double(key, value);
    else if (key == "guidance.uncond") c.guidance_uncond = value;
    else if (key == "seed") c.seed = static_cast<std::uint64_t>(parse_int(key, value));
    else if (key == "model.registry") c.model_registry = value;
    else if (key == "benchmark.n_instances")
        c.benchmark_n_instances = static_cast<int>(parse_int(key, value));
    else if (key == "benchmark.src_distribution") c.benchmark_src_distribution = value;
    else if (key == "benchmark.tar_distribution") c.benchmark_tar_distribution = value;
    else if (key == "output_dir") c.output_dir = value;
    else if (key == "metrics.dynamic_range") c.metrics_dynamic_range = parse_double(key, value);
    else if (key == "sweep.active_steps") {
        c.sweep_active_steps.clear();
        for (const auto& item : split_list(value))
            c.sweep_active_steps.push_back(static_cast<int>(parse_int(key, item)));
    } else if (key == "sweep.strength") {
        c.sweep_strength.clear();
        for (const auto& item : split_list(value))
            c.sweep_strength.push_back(parse_double(key, item));
    } else if (key == "verify.n_states") c.verify_n_states = static_cast<int>(parse_int(key, value));
    else if (key == "verify.mc_triples")
        c.verify_mc_triples = static_cast<int>(parse_int(key, value));
    else if (key == "verify.mc_samples")
        c.verify_mc_samples = static_cast<int>(parse_int(key, value));
    else if (key == "verify.min_agreements")
        c.verify_min_agreements = static_cast<int>(parse_int(key, value));
    else if (key == "edit.instance") c.edit_instance = static_cast<int>(parse_int(key, value));
    else if (key == "plot.trace") c.plot_trace = value;
    else if (key == "no_trace") c.no_trace = parse_bool(key, value);
    else if (key == "quiet") c.quiet = parse_bool(key, value);
    else throw ConfigError("unknown config key: " + key);
}

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig config;
    std::stringstream ss(text);
    std::string line;
    int line_no = 0;
    while (std::getline(ss, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        apply_config_entry(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    config.validate();
    return config;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        ExperimentConfig config = parse_config_text(buf.str());
        const auto slash = path.find_last_of("/\\");
        config.config_dir = slash == std::string::npos ? "." : path.substr(0, slash);
        return config;
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

NoiseSchedule ExperimentConfig::make_schedule() const {
    return NoiseSchedule(schedule_kind, schedule_T, schedule_alpha_floor);
}

TimestepGrid ExperimentConfig::make_grid(const NoiseSchedule& schedule) const {
    return make_timestep_grid(schedule, grid_n_steps, grid_t_max_fraction, grid_spacing);
}

EditConfig ExperimentConfig::make_edit_config(const NoiseSchedule& schedule) const {
    EditConfig edit;
    edit.grid = make_grid(schedule);
    edit.reg.form = reg_form;
    edit.reg.strength = reg_strength;
    edit.reg.active_steps = reg_active_steps;
    edit.reg.taylor_delta = reg_taylor_delta;
    edit.guidance.src_scale = guidance_src_scale;
    edit.guidance.tar_scale = guidance_tar_scale;
    edit.guidance.uncond_label = guidance_uncond;
    edit.seed = seed;
    edit.record_trajectory = !no_trace;
    edit.validate();
    return edit;
}

void ExperimentConfig::validate() const {
    if (benchmark_n_instances < 0) throw ConfigError("benchmark.n_instances must be >= 0");
    if (edit_instance < 0) throw ConfigError("edit.instance must be >= 0");
    if (!(metrics_dynamic_range > 0.0)) throw ConfigError("metrics.dynamic_range must be > 0");
    if (verify_n_states < 1 || verify_mc_triples < 1)
        throw ConfigError("verify.* counts must be >= 1");
    if (verify_mc_samples < 1000) throw ConfigError("verify.mc_samples must be >= 1000");
    for (const int m : sweep_active_steps)
        if (m < 0) throw ConfigError("sweep.active_steps entries must be >= 0");
    for (const double s : sweep_strength)
        if (!(s >= 0.0 && s <= 1.0)) throw ConfigError("sweep.strength entries must lie in [0, 1]");
}

}  // namespace tweeze
