#include <doctest.h>

#include <cmath>

#include "tweeze/errors.hpp"
#include "tweeze/rng.hpp"
#include "tweeze/schedule.hpp"

using namespace tweeze;

namespace {

double central_fd(const NoiseSchedule& s, double t, double h) {
    return (s.alpha_bar(t + h) - s.alpha_bar(t - h)) / (2.0 * h);
}

}  // namespace

TEST_CASE("cosine alpha_bar boundary and midpoint values") {
    NoiseSchedule s(ScheduleKind::cosine);
    CHECK(s.alpha_bar(0.0) == 1.0);
    CHECK(s.alpha_bar(500.0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(s.alpha_bar(1000.0) == s.alpha_floor());
    CHECK(s.clamped_at(1000.0));
    CHECK_FALSE(s.clamped_at(500.0));
}

TEST_CASE("alpha_bar rejects times outside the horizon") {
    NoiseSchedule s(ScheduleKind::cosine);
    CHECK_THROWS_AS(s.alpha_bar(-1.0), DomainError);
    CHECK_THROWS_AS(s.alpha_bar(1000.5), DomainError);
}

TEST_CASE("cosine derivative closed form") {
    NoiseSchedule s(ScheduleKind::cosine);
    CHECK(s.alpha_bar_dot(0.0) == 0.0);
    CHECK(s.alpha_bar_dot(500.0) == doctest::Approx(-M_PI / 2000.0).epsilon(1e-14));

    const double t = 250.0;
    const double fd = central_fd(s, t, 1000.0 * 1e-5);
    CHECK(std::abs(s.alpha_bar_dot(t) - fd) / std::abs(fd) < 1e-8);
}

TEST_CASE("derivative evaluation in the clamped region is an error") {
    NoiseSchedule s(ScheduleKind::cosine);
    CHECK_THROWS_AS(s.alpha_bar_dot(1000.0), DegenerateTimestepError);
}

TEST_CASE("derivative consistency against finite differences (cosine)") {
    NoiseSchedule s(ScheduleKind::cosine);
    GaussianRng rng(20240501);
    const double h = 1000.0 * 1e-4;
    for (int i = 0; i < 1000; ++i) {
        const double t = 1.0 + 978.0 * rng.uniform01();  // stays well unclamped
        CHECK(std::abs(s.alpha_bar_dot(t) - central_fd(s, t, h)) <= 1e-6);
    }
}

TEST_CASE("sigma is sqrt(1 - alpha_bar)") {
    NoiseSchedule s(ScheduleKind::cosine);
    CHECK(s.sigma(0.0) == 0.0);
    const double t = s.time_for_alpha_bar(0.75);
    CHECK(s.sigma(t) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(s.sigma(1000.0) == doctest::Approx(std::sqrt(1.0 - s.alpha_floor())).epsilon(1e-14));
}

TEST_CASE("alpha_bar is monotone decreasing") {
    GaussianRng rng(77);
    for (const auto kind : {ScheduleKind::cosine, ScheduleKind::scaled_linear}) {
        NoiseSchedule s(kind);
        for (int i = 0; i < 1000; ++i) {
            double t1 = 1000.0 * rng.uniform01();
            double t2 = 1000.0 * rng.uniform01();
            if (t1 > t2) std::swap(t1, t2);
            CHECK(s.alpha_bar(t1) >= s.alpha_bar(t2));
            if (!s.clamped_at(t2) && t1 < t2) CHECK(s.alpha_bar(t1) > s.alpha_bar(t2));
        }
    }
}

TEST_CASE("scaled_linear matches its closed-form log-integral derivative") {
    NoiseSchedule s(ScheduleKind::scaled_linear);
    CHECK(s.alpha_bar(0.0) == 1.0);
    // Terminal value of the continuous product form; well above the floor.
    CHECK(s.alpha_bar(1000.0) < 5e-5);
    CHECK(s.alpha_bar(1000.0) > s.alpha_floor());

    // d/dt exp(F(t)) = alpha_bar(t) * log(1 - beta(t))
    for (const double t : {100.0, 400.0, 700.0}) {
        const double beta = 1e-4 + (2e-2 - 1e-4) * t / 1000.0;
        const double exact = s.alpha_bar(t) * std::log(1.0 - beta);
        CHECK(s.alpha_bar_dot(t) == doctest::Approx(exact).epsilon(1e-8));
    }
}

TEST_CASE("uniform_t grid spans t_max down to T/n") {
    NoiseSchedule s(ScheduleKind::cosine);
    const TimestepGrid grid = make_timestep_grid(s, 12, 0.98, GridSpacing::uniform_t);
    REQUIRE(grid.size() == 12);
    CHECK(grid.timesteps.front() == doctest::Approx(980.0));
    CHECK(grid.timesteps.back() == doctest::Approx(1000.0 / 12.0));
    const double step = grid.timesteps[0] - grid.timesteps[1];
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        CHECK(grid.timesteps[i] > grid.timesteps[i + 1]);
        CHECK(grid.timesteps[i] - grid.timesteps[i + 1] == doctest::Approx(step).epsilon(1e-12));
        CHECK(grid.strides[i] == doctest::Approx(step).epsilon(1e-12));
    }
    CHECK(grid.strides.back() == doctest::Approx(grid.timesteps.back()));
}

TEST_CASE("two-point grid with full range") {
    NoiseSchedule s(ScheduleKind::cosine);
    const TimestepGrid grid = make_timestep_grid(s, 2, 1.0, GridSpacing::uniform_t);
    REQUIRE(grid.size() == 2);
    CHECK(grid.timesteps[0] == 1000.0);
    CHECK(grid.timesteps[1] == 500.0);
}

TEST_CASE("uniform_sqrt_alpha spacing is even in sqrt(alpha_bar)") {
    NoiseSchedule s(ScheduleKind::cosine);
    const TimestepGrid grid = make_timestep_grid(s, 12, 0.98, GridSpacing::uniform_sqrt_alpha);
    REQUIRE(grid.size() == 12);
    const double s0 = std::sqrt(s.alpha_bar(grid.timesteps[0]));
    const double s1 = std::sqrt(s.alpha_bar(grid.timesteps[1]));
    const double gap = s1 - s0;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        CHECK(grid.timesteps[i] > grid.timesteps[i + 1]);
        const double a = std::sqrt(s.alpha_bar(grid.timesteps[i]));
        const double b = std::sqrt(s.alpha_bar(grid.timesteps[i + 1]));
        CHECK(b - a == doctest::Approx(gap).epsilon(1e-6));
    }
}

TEST_CASE("grid ordering holds across random requests") {
    NoiseSchedule s(ScheduleKind::cosine);
    GaussianRng rng(42);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 2 + static_cast<int>(rng.uniform01() * 62.0);
        const double frac = 0.3 + 0.7 * rng.uniform01();
        const auto spacing =
            rng.uniform01() < 0.5 ? GridSpacing::uniform_t : GridSpacing::uniform_sqrt_alpha;
        const TimestepGrid grid = make_timestep_grid(s, n, frac, spacing);
        CHECK(grid.timesteps.front() <= frac * 1000.0 + 1e-9);
        CHECK(grid.timesteps.back() > 0.0);
        for (std::size_t i = 0; i + 1 < grid.size(); ++i)
            CHECK(grid.timesteps[i] > grid.timesteps[i + 1]);
    }
}

TEST_CASE("grid construction rejects bad step counts") {
    NoiseSchedule s(ScheduleKind::cosine);
    CHECK_THROWS_AS(make_timestep_grid(s, 1, 0.98, GridSpacing::uniform_t), ConfigError);
    CHECK_THROWS_AS(make_timestep_grid(s, 65, 0.98, GridSpacing::uniform_t), ConfigError);
    CHECK_THROWS_AS(make_timestep_grid(s, 12, 0.0, GridSpacing::uniform_t), ConfigError);
}
