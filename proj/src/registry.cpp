#include "tweeze/registry.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "tweeze/errors.hpp"

namespace tweeze {

using nlohmann::json;

Eigen::VectorXd render_blob_template(const std::vector<BlobSpec>& blobs, int grid_side) {
    if (grid_side < 1) throw ConfigError("template grid side must be >= 1");
    Eigen::VectorXd pixels = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid_side) * grid_side);
    for (int r = 0; r < grid_side; ++r) {
        const double y = (r + 0.5) / grid_side;
        for (int c = 0; c < grid_side; ++c) {
            const double x = (c + 0.5) / grid_side;
            double v = 0.0;
            for (const BlobSpec& blob : blobs) {
                const double dx = x - blob.center_x;
                const double dy = y - blob.center_y;
                v += blob.amplitude *
                     std::exp(-(dx * dx + dy * dy) / (2.0 * blob.width * blob.width));
            }
            pixels[static_cast<Eigen::Index>(r) * grid_side + c] = v;
        }
    }
    return pixels;
}

void DistributionRegistry::add(const std::string& name, RegisteredDistribution dist) {
    dist.mixture.validate();
    if (dist.layout == Layout::grid &&
        dist.mixture.dim() != static_cast<Eigen::Index>(dist.grid_side) * dist.grid_side)
        throw ConfigError("grid distribution dimension must equal grid_side^2");
    if (!entries_.emplace(name, std::move(dist)).second)
        throw ConfigError("duplicate distribution name: " + name);
}

const RegisteredDistribution& DistributionRegistry::at(const std::string& name) const {
    const auto it = entries_.find(name);
    if (it == entries_.end())
        throw ConfigError("unknown distribution: " + name);
    return it->second;
}

std::map<std::string, GaussianMixture> DistributionRegistry::mixtures() const {
    std::map<std::string, GaussianMixture> out;
    for (const auto& [name, dist] : entries_) out.emplace(name, dist.mixture);
    return out;
}

namespace {

std::vector<double> parse_weights(const json& entry, std::size_t n_components) {
    if (!entry.contains("weights")) {
        return std::vector<double>(n_components, 1.0 / static_cast<double>(n_components));
    }
    return entry.at("weights").get<std::vector<double>>();
}

RegisteredDistribution parse_gmm(const json& entry) {
    RegisteredDistribution dist;
    const auto& means = entry.at("means");
    for (const auto& mean : means) {
        const auto coords = mean.get<std::vector<double>>();
        dist.mixture.means.push_back(
            Eigen::Map<const Eigen::VectorXd>(coords.data(), static_cast<Eigen::Index>(coords.size())));
    }
    dist.mixture.weights = parse_weights(entry, dist.mixture.means.size());
    dist.mixture.component_sigma = entry.at("sigma").get<double>();
    return dist;
}

RegisteredDistribution parse_templates(const json& entry) {
    RegisteredDistribution dist;
    dist.layout = Layout::grid;
    dist.grid_side = entry.at("grid_side").get<int>();
    for (const auto& tmpl : entry.at("templates")) {
        std::vector<BlobSpec> blobs;
        for (const auto& blob : tmpl) {
            BlobSpec spec;
            const auto center = blob.at("center").get<std::vector<double>>();
            if (center.size() != 2) throw ConfigError("blob center must have 2 coordinates");
            spec.center_x = center[0];
            spec.center_y = center[1];
            spec.amplitude = blob.value("amplitude", 1.0);
            spec.width = blob.value("width", 0.1);
            blobs.push_back(spec);
        }
        dist.mixture.means.push_back(render_blob_template(blobs, dist.grid_side));
    }
    dist.mixture.weights = parse_weights(entry, dist.mixture.means.size());
    dist.mixture.component_sigma = entry.at("sigma").get<double>();
    return dist;
}

}  // namespace

DistributionRegistry DistributionRegistry::from_json_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("registry parse error: ") + e.what());
    }
    DistributionRegistry registry;
    try {
        for (const auto& entry : doc.at("distributions")) {
            const auto name = entry.at("name").get<std::string>();
            const auto kind = entry.at("kind").get<std::string>();
            if (kind == "gmm")
                registry.add(name, parse_gmm(entry));
            else if (kind == "templates")
                registry.add(name, parse_templates(entry));
            else
                throw ConfigError("unknown distribution kind: " + kind);
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("registry schema error: ") + e.what());
    }
    return registry;
}

DistributionRegistry DistributionRegistry::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open registry file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str());
}

DistributionRegistry default_benchmark_registry() {
    // sigma = 1 keeps late-step posterior pulls proportional to (1 - abar),
    // so preservation effects stay visible instead of saturating at the
    // component means.
    const auto make2 = [](double x) {
        GaussianMixture m;
        m.weights = {0.5, 0.5};
        m.means = {Eigen::Vector2d(x, -2.0), Eigen::Vector2d(x, 2.0)};
        m.component_sigma = 1.0;
        return m;
    };
    GaussianMixture both;
    both.weights = {0.25, 0.25, 0.25, 0.25};
    both.means = {Eigen::Vector2d(-2.0, -2.0), Eigen::Vector2d(-2.0, 2.0),
                  Eigen::Vector2d(2.0, -2.0), Eigen::Vector2d(2.0, 2.0)};
    both.component_sigma = 1.0;

    DistributionRegistry registry;
    registry.add("src", RegisteredDistribution{make2(-2.0), Layout::vector, 0});
    registry.add("tar", RegisteredDistribution{make2(2.0), Layout::vector, 0});
    registry.add("both", RegisteredDistribution{std::move(both), Layout::vector, 0});
    return registry;
}

}  // namespace tweeze
