#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>

namespace tweeze {

/// splitmix64 finalizer; used to derive independent streams from (seed, key)
/// pairs without any shared generator state.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t key) {
    std::uint64_t x = seed + 0x9e3779b97f4a7c15ULL * (key + 1);
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

/// Deterministic standard-normal stream. Box-Muller over explicit 53-bit
/// uniforms so the byte-for-byte output depends only on the engine, never on
/// the standard library's std::normal_distribution algorithm.
class GaussianRng {
public:
    explicit GaussianRng(std::uint64_t seed) : engine_(seed) {}

    double uniform01() {
        // in (0, 1]; keeps log() finite below
        return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
    }

    double next() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * M_PI * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    Eigen::VectorXd vector(Eigen::Index dim) {
        Eigen::VectorXd v(dim);
        for (Eigen::Index i = 0; i < dim; ++i) v[i] = next();
        return v;
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// One reproducible epsilon ~ N(0, I) draw, keyed by (seed, step_index).
/// Re-drawing with the same key always yields the same values, so editing
/// configurations that skip or add steps cannot desynchronize the noise seen
/// by compared runs.
struct NoiseDraw {
    Eigen::VectorXd values;
    std::uint64_t seed = 0;
    std::int64_t step_index = 0;
};

inline NoiseDraw draw_noise(std::uint64_t seed, std::int64_t step_index, Eigen::Index dim) {
    GaussianRng rng(mix_seed(seed, static_cast<std::uint64_t>(step_index)));
    return NoiseDraw{rng.vector(dim), seed, step_index};
}

}  // namespace tweeze
