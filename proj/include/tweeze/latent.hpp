#pragma once

#include <Eigen/Dense>
#include <string>

#include "tweeze/errors.hpp"

namespace tweeze {

enum class Layout { vector, grid };

inline Layout layout_from_string(const std::string& name) {
    if (name == "vector") return Layout::vector;
    if (name == "grid") return Layout::grid;
    throw ConfigError("unknown latent layout: " + name);
}

inline std::string to_string(Layout layout) {
    return layout == Layout::vector ? "vector" : "grid";
}

/// A flat state vector plus how to interpret it. Grid layout means a square
/// G x G image stored row-major, with values.size() == G * G.
struct Latent {
    Eigen::VectorXd values;
    Layout layout = Layout::vector;
    int grid_side = 0;

    static Latent vector(Eigen::VectorXd v) { return Latent{std::move(v), Layout::vector, 0}; }

    static Latent grid(Eigen::VectorXd v, int side) {
        Latent lat{std::move(v), Layout::grid, side};
        lat.validate();
        return lat;
    }

    Eigen::Index dim() const { return values.size(); }

    void validate() const {
        if (!values.allFinite()) throw NumericError("latent contains non-finite values");
        if (layout == Layout::grid &&
            values.size() != static_cast<Eigen::Index>(grid_side) * grid_side)
            throw ShapeError("grid latent size does not match grid_side^2");
    }

    /// Same layout metadata, different values.
    Latent with_values(Eigen::VectorXd v) const {
        return Latent{std::move(v), layout, grid_side};
    }
};

inline void require_same_dim(const Eigen::Ref<const Eigen::VectorXd>& a,
                             const Eigen::Ref<const Eigen::VectorXd>& b, const char* what) {
    if (a.size() != b.size())
        throw ShapeError(std::string(what) + ": dimension mismatch (" + std::to_string(a.size()) +
                         " vs " + std::to_string(b.size()) + ")");
}

inline void require_finite(const Eigen::Ref<const Eigen::VectorXd>& v, const char* what) {
    if (!v.allFinite()) throw NumericError(std::string(what) + ": non-finite values");
}

}  // namespace tweeze
