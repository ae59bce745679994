#include "tweeze/trace.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "tweeze/errors.hpp"

namespace tweeze {

using ordered_json = nlohmann::ordered_json;

namespace {

ordered_json vec_to_json(const Eigen::VectorXd& v) {
    ordered_json arr = ordered_json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

Eigen::VectorXd vec_from_json(const ordered_json& arr) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(arr.size()));
    Eigen::Index i = 0;
    for (const auto& x : arr) v[i++] = x.get<double>();
    return v;
}

ordered_json config_to_json(const EditConfig& config) {
    ordered_json j;
    j["grid"] = {{"timesteps", vec_to_json(Eigen::Map<const Eigen::VectorXd>(
                                   config.grid.timesteps.data(),
                                   static_cast<Eigen::Index>(config.grid.timesteps.size())))},
                 {"strides", vec_to_json(Eigen::Map<const Eigen::VectorXd>(
                                 config.grid.strides.data(),
                                 static_cast<Eigen::Index>(config.grid.strides.size())))}};
    j["reg"] = {{"form", to_string(config.reg.form)},
                {"strength", config.reg.strength},
                {"active_steps", config.reg.active_steps},
                {"taylor_delta", config.reg.taylor_delta}};
    j["guidance"] = {{"src_scale", config.guidance.src_scale},
                     {"tar_scale", config.guidance.tar_scale},
                     {"uncond", config.guidance.uncond_label}};
    j["seed"] = config.seed;
    return j;
}

EditConfig config_from_json(const ordered_json& j) {
    EditConfig config;
    const Eigen::VectorXd ts = vec_from_json(j.at("grid").at("timesteps"));
    const Eigen::VectorXd st = vec_from_json(j.at("grid").at("strides"));
    config.grid.timesteps.assign(ts.data(), ts.data() + ts.size());
    config.grid.strides.assign(st.data(), st.data() + st.size());
    config.reg.form = reg_form_from_string(j.at("reg").at("form").get<std::string>());
    config.reg.strength = j.at("reg").at("strength").get<double>();
    config.reg.active_steps = j.at("reg").at("active_steps").get<int>();
    config.reg.taylor_delta = j.at("reg").at("taylor_delta").get<double>();
    config.guidance.src_scale = j.at("guidance").at("src_scale").get<double>();
    config.guidance.tar_scale = j.at("guidance").at("tar_scale").get<double>();
    config.guidance.uncond_label = j.at("guidance").at("uncond").get<std::string>();
    config.seed = j.at("seed").get<std::uint64_t>();
    return config;
}

}  // namespace

void write_trajectory_jsonl(std::ostream& out, const Trajectory& traj) {
    if (traj.steps.empty())
        throw VerificationError("refusing to export a trajectory without recorded steps");
    ordered_json header;
    header["type"] = "header";
    header["config"] = config_to_json(traj.config);
    header["source"] = {{"values", vec_to_json(traj.source.values)},
                        {"layout", to_string(traj.source.layout)},
                        {"grid_side", traj.source.grid_side}};
    out << header.dump() << '\n';
    for (const StepRecord& step : traj.steps) {
        ordered_json line;
        line["step_index"] = step.step_index;
        line["t"] = step.t;
        line["alpha_bar"] = step.alpha_bar;
        line["z_mix_before"] = vec_to_json(step.z_mix_before);
        line["z_src"] = vec_to_json(step.z_src);
        line["z_tar"] = vec_to_json(step.z_tar);
        line["zhat0_src"] = vec_to_json(step.zhat0_src);
        line["zhat0_tar"] = vec_to_json(step.zhat0_tar);
        line["v_t"] = vec_to_json(step.v_t);
        line["reg_grad"] = vec_to_json(step.reg_grad);
        line["z_mix_after"] = vec_to_json(step.z_mix_after);
        out << line.dump() << '\n';
    }
}

void write_trajectory_jsonl(const std::string& path, const Trajectory& traj) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open trace for writing: " + path);
    write_trajectory_jsonl(out, traj);
    if (!out) throw IoError("failed writing trace: " + path);
}

Trajectory read_trajectory_jsonl(std::istream& in) {
    Trajectory traj;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ordered_json j;
        try {
            j = ordered_json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw IoError(std::string("trace parse error: ") + e.what());
        }
        if (!have_header) {
            if (j.value("type", "") != "header") throw IoError("trace must start with a header");
            traj.config = config_from_json(j.at("config"));
            const auto& src = j.at("source");
            traj.source.values = vec_from_json(src.at("values"));
            traj.source.layout = layout_from_string(src.at("layout").get<std::string>());
            traj.source.grid_side = src.at("grid_side").get<int>();
            have_header = true;
            continue;
        }
        StepRecord step;
        step.step_index = j.at("step_index").get<int>();
        step.t = j.at("t").get<double>();
        step.alpha_bar = j.at("alpha_bar").get<double>();
        step.z_mix_before = vec_from_json(j.at("z_mix_before"));
        step.z_src = vec_from_json(j.at("z_src"));
        step.z_tar = vec_from_json(j.at("z_tar"));
        step.zhat0_src = vec_from_json(j.at("zhat0_src"));
        step.zhat0_tar = vec_from_json(j.at("zhat0_tar"));
        step.v_t = vec_from_json(j.at("v_t"));
        step.reg_grad = vec_from_json(j.at("reg_grad"));
        step.z_mix_after = vec_from_json(j.at("z_mix_after"));
        traj.steps.push_back(std::move(step));
    }
    if (!have_header) throw IoError("trace is missing its header line");
    if (traj.steps.empty()) throw IoError("trace holds no step records");
    traj.output = traj.source.with_values(traj.steps.back().z_mix_after);
    traj.path_length_sum = 0.0;
    for (const StepRecord& step : traj.steps)
        traj.path_length_sum += (step.z_mix_after - step.z_mix_before).norm();
    return traj;
}

Trajectory read_trajectory_jsonl(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open trace for reading: " + path);
    return read_trajectory_jsonl(in);
}

namespace {

void require_bitwise(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const std::string& what) {
    if (a.size() != b.size())
        throw VerificationError(what + ": size mismatch");
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        if (std::memcmp(&a[i], &b[i], sizeof(double)) != 0)
            throw VerificationError(what + " violated at coordinate " + std::to_string(i));
    }
}

}  // namespace

void validate_trajectory(const Trajectory& traj) {
    if (traj.steps.empty()) throw VerificationError("trajectory holds no steps");
    require_bitwise(traj.steps.front().z_mix_before, traj.source.values,
                    "trajectory must start at the source");
    const Eigen::VectorXd& z0_src = traj.source.values;
    for (std::size_t i = 0; i < traj.steps.size(); ++i) {
        const StepRecord& step = traj.steps[i];
        const Eigen::VectorXd z_tar_check = step.z_mix_before - z0_src + step.z_src;
        require_bitwise(step.z_tar, z_tar_check, "shared-noise identity (step " +
                                                     std::to_string(i) + ")");
        const Eigen::VectorXd update_check = step.v_t - step.reg_grad;
        require_bitwise(step.z_mix_after, update_check,
                        "update identity (step " + std::to_string(i) + ")");
        if (i + 1 < traj.steps.size())
            require_bitwise(traj.steps[i + 1].z_mix_before, step.z_mix_after,
                            "step chaining (step " + std::to_string(i) + ")");
    }
    require_bitwise(traj.output.values, traj.steps.back().z_mix_after,
                    "output must equal the last update");
}

}  // namespace tweeze
