#pragma once

#include <map>
#include <string>

#include "tweeze/denoiser.hpp"
#include "tweeze/latent.hpp"

namespace tweeze {

/// One registered data distribution: an inline mixture (vector layout) or a
/// template set rendered from blob specs onto a G x G grid (grid layout).
struct RegisteredDistribution {
    GaussianMixture mixture;
    Layout layout = Layout::vector;
    int grid_side = 0;
};

class DistributionRegistry {
public:
    static DistributionRegistry from_file(const std::string& path);
    static DistributionRegistry from_json_text(const std::string& text);

    void add(const std::string& name, RegisteredDistribution dist);
    const RegisteredDistribution& at(const std::string& name) const;
    bool has(const std::string& name) const { return entries_.count(name) > 0; }

    /// All entries as plain mixtures, for constructing a MixtureDenoiser.
    std::map<std::string, GaussianMixture> mixtures() const;

private:
    std::map<std::string, RegisteredDistribution> entries_;
};

/// A single isotropic blob on the unit square.
struct BlobSpec {
    double center_x = 0.5;
    double center_y = 0.5;
    double amplitude = 1.0;
    double width = 0.1;
};

/// Renders a list of blobs onto a G x G grid (row-major, pixel centers in the
/// unit square).
Eigen::VectorXd render_blob_template(const std::vector<BlobSpec>& blobs, int grid_side);

/// The built-in 2D benchmark: "src" and "tar" two-cluster mixtures plus a
/// "both" union used as the unconditional distribution.
DistributionRegistry default_benchmark_registry();

}  // namespace tweeze
