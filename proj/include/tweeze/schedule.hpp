#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace tweeze {

enum class ScheduleKind { cosine, scaled_linear };

ScheduleKind schedule_kind_from_string(const std::string& name);
std::string to_string(ScheduleKind kind);

/// Continuous noise schedule over t in [0, T].
///
/// alpha_bar is clamped from below at alpha_floor so that downstream
/// coefficients of the form alpha_bar_dot / sqrt(alpha_bar) stay finite; the
/// cosine kind carries a closed-form derivative, the scaled_linear kind falls
/// back to a central finite difference.
class NoiseSchedule {
public:
    NoiseSchedule(ScheduleKind kind, double horizon_T = 1000.0, double alpha_floor = 1e-6);

    /// Clamped cumulative signal level, in [alpha_floor, 1]. Pure.
    double alpha_bar(double t) const;

    /// d/dt of the unclamped alpha_bar; throws DegenerateTimestepError when
    /// evaluated where the clamp is active.
    double alpha_bar_dot(double t) const;

    /// Re-noising scale sqrt(1 - alpha_bar(t)).
    double sigma(double t) const;

    bool clamped_at(double t) const;

    /// Smallest t with alpha_bar(t) == target (monotone bisection). target
    /// must lie in (alpha_floor, 1].
    double time_for_alpha_bar(double target) const;

    ScheduleKind kind() const { return kind_; }
    double horizon() const { return horizon_; }
    double alpha_floor() const { return alpha_floor_; }

private:
    double alpha_bar_unclamped(double t) const;
    void require_in_domain(double t) const;

    ScheduleKind kind_;
    double horizon_;
    double alpha_floor_;
};

enum class GridSpacing { uniform_t, uniform_sqrt_alpha };

GridSpacing grid_spacing_from_string(const std::string& name);
std::string to_string(GridSpacing spacing);

/// Descending evaluation timesteps plus per-step gaps. strides[i] is the gap
/// t[i] - t[i+1]; the last stride is the remaining gap down to t = 0.
struct TimestepGrid {
    std::vector<double> timesteps;
    std::vector<double> strides;

    std::size_t size() const { return timesteps.size(); }

    /// The next (smaller) timestep after position i, i.e. 0 past the end.
    double next_after(std::size_t i) const;

    void validate(double horizon_T, double t_max_fraction) const;
};

constexpr int kMinGridSteps = 2;
constexpr int kMaxGridSteps = 64;
constexpr int kDefaultGridSteps = 12;
constexpr double kDefaultTMaxFraction = 0.98;

TimestepGrid make_timestep_grid(const NoiseSchedule& schedule, int n_steps,
                                double t_max_fraction = kDefaultTMaxFraction,
                                GridSpacing spacing = GridSpacing::uniform_t);

}  // namespace tweeze
