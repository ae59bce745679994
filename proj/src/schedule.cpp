#include "tweeze/schedule.hpp"

#include <algorithm>
#include <cmath>

#include "tweeze/errors.hpp"

namespace tweeze {

namespace {

// Continuous analogue of the discrete beta schedule: beta runs linearly from
// kBetaMin to kBetaMax across [0, T], and log alpha_bar is the integral of
// log(1 - beta(s)), which has a closed form.
constexpr double kBetaMin = 1e-4;
constexpr double kBetaMax = 2e-2;

double scaled_linear_log_alpha_bar(double t, double T) {
    const double delta = kBetaMax - kBetaMin;
    const double u0 = 1.0 - kBetaMin;
    const double ut = 1.0 - (kBetaMin + delta * t / T);
    const double antideriv_u0 = u0 * std::log(u0) - u0;
    const double antideriv_ut = ut * std::log(ut) - ut;
    return (T / delta) * (antideriv_u0 - antideriv_ut);
}

}  // namespace

ScheduleKind schedule_kind_from_string(const std::string& name) {
    if (name == "cosine") return ScheduleKind::cosine;
    if (name == "scaled_linear") return ScheduleKind::scaled_linear;
    throw ConfigError("unknown schedule kind: " + name);
}

std::string to_string(ScheduleKind kind) {
    return kind == ScheduleKind::cosine ? "cosine" : "scaled_linear";
}

GridSpacing grid_spacing_from_string(const std::string& name) {
    if (name == "uniform_t") return GridSpacing::uniform_t;
    if (name == "uniform_sqrt_alpha") return GridSpacing::uniform_sqrt_alpha;
    throw ConfigError("unknown grid spacing: " + name);
}

std::string to_string(GridSpacing spacing) {
    return spacing == GridSpacing::uniform_t ? "uniform_t" : "uniform_sqrt_alpha";
}

NoiseSchedule::NoiseSchedule(ScheduleKind kind, double horizon_T, double alpha_floor)
    : kind_(kind), horizon_(horizon_T), alpha_floor_(alpha_floor) {
    if (!(horizon_T > 0.0)) throw ConfigError("schedule horizon T must be positive");
    if (!(alpha_floor > 0.0) || alpha_floor >= 1.0)
        throw ConfigError("alpha_floor must lie in (0, 1)");
}

void NoiseSchedule::require_in_domain(double t) const {
    if (!(t >= 0.0 && t <= horizon_))
        throw DomainError("timestep " + std::to_string(t) + " outside [0, T]");
}

double NoiseSchedule::alpha_bar_unclamped(double t) const {
    if (kind_ == ScheduleKind::cosine) {
        const double c = std::cos(0.5 * M_PI * t / horizon_);
        return c * c;
    }
    return std::exp(scaled_linear_log_alpha_bar(t, horizon_));
}

double NoiseSchedule::alpha_bar(double t) const {
    require_in_domain(t);
    return std::max(alpha_floor_, alpha_bar_unclamped(t));
}

bool NoiseSchedule::clamped_at(double t) const {
    require_in_domain(t);
    return alpha_bar_unclamped(t) <= alpha_floor_;
}

double NoiseSchedule::alpha_bar_dot(double t) const {
    require_in_domain(t);
    if (clamped_at(t))
        throw DegenerateTimestepError("alpha_bar_dot evaluated in the clamped region (t = " +
                                      std::to_string(t) + ")");
    if (kind_ == ScheduleKind::cosine)
        return -(M_PI / (2.0 * horizon_)) * std::sin(M_PI * t / horizon_);

    const double h = horizon_ * 1e-4;
    const double lo = std::max(0.0, t - h);
    const double hi = std::min(horizon_, t + h);
    return (alpha_bar_unclamped(hi) - alpha_bar_unclamped(lo)) / (hi - lo);
}

double NoiseSchedule::sigma(double t) const {
    return std::sqrt(1.0 - alpha_bar(t));
}

double NoiseSchedule::time_for_alpha_bar(double target) const {
    if (!(target > alpha_floor_ && target <= 1.0))
        throw DomainError("alpha_bar target outside (alpha_floor, 1]");
    double lo = 0.0, hi = horizon_;
    // alpha_bar_unclamped is strictly decreasing; bisect for ~1 ulp of t.
    for (int iter = 0; iter < 200 && hi - lo > 1e-13 * horizon_; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (alpha_bar_unclamped(mid) > target)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double TimestepGrid::next_after(std::size_t i) const {
    return i + 1 < timesteps.size() ? timesteps[i + 1] : 0.0;
}

void TimestepGrid::validate(double horizon_T, double t_max_fraction) const {
    const std::size_t n = timesteps.size();
    if (n < static_cast<std::size_t>(kMinGridSteps) || n > static_cast<std::size_t>(kMaxGridSteps))
        throw ConfigError("timestep grid length must lie in [2, 64]");
    if (strides.size() != n) throw ConfigError("strides/timesteps length mismatch");
    if (!(timesteps.front() <= t_max_fraction * horizon_T + 1e-9))
        throw ConfigError("grid exceeds t_max_fraction * T");
    if (!(timesteps.back() > 0.0)) throw ConfigError("grid must stay strictly above t = 0");
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (!(timesteps[i] > timesteps[i + 1]))
            throw ConfigError("timestep grid must be strictly descending");
    }
}

TimestepGrid make_timestep_grid(const NoiseSchedule& schedule, int n_steps,
                                double t_max_fraction, GridSpacing spacing) {
    if (n_steps < kMinGridSteps)
        throw ConfigError("timestep grid needs at least 2 steps");
    if (n_steps > kMaxGridSteps)
        throw ConfigError("timestep grid capped at 64 steps");
    if (!(t_max_fraction > 0.0 && t_max_fraction <= 1.0))
        throw ConfigError("t_max_fraction must lie in (0, 1]");

    const double T = schedule.horizon();
    const double t_max = t_max_fraction * T;
    const double t_min = T / static_cast<double>(n_steps);
    if (!(t_max > t_min))
        throw ConfigError("t_max_fraction too small for the requested step count");

    TimestepGrid grid;
    grid.timesteps.resize(n_steps);
    if (spacing == GridSpacing::uniform_t) {
        const double step = (t_max - t_min) / static_cast<double>(n_steps - 1);
        for (int i = 0; i < n_steps; ++i) grid.timesteps[i] = t_max - step * i;
    } else {
        const double s_lo = std::sqrt(schedule.alpha_bar(t_max));
        const double s_hi = std::sqrt(schedule.alpha_bar(t_min));
        const double step = (s_hi - s_lo) / static_cast<double>(n_steps - 1);
        for (int i = 1; i + 1 < n_steps; ++i) {
            const double s = s_lo + step * i;
            grid.timesteps[i] = schedule.time_for_alpha_bar(s * s);
        }
        grid.timesteps.front() = t_max;
        grid.timesteps.back() = t_min;
    }
    grid.timesteps.front() = t_max;
    grid.timesteps.back() = t_min;

    grid.strides.resize(n_steps);
    for (int i = 0; i < n_steps; ++i)
        grid.strides[i] = grid.timesteps[i] - (i + 1 < n_steps ? grid.timesteps[i + 1] : 0.0);

    grid.validate(T, t_max_fraction);
    return grid;
}

}  // namespace tweeze
