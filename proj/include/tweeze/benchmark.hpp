#pragma once

#include <cstdint>
#include <vector>

#include "tweeze/denoiser.hpp"
#include "tweeze/latent.hpp"
#include "tweeze/registry.hpp"

namespace tweeze {

struct BenchmarkSpec {
    int n_instances = 200;
    std::string src_distribution = "src";
    std::string tar_distribution = "tar";
};

struct BenchmarkInstance {
    Latent z0_src;
    PromptCondition p_src;
    PromptCondition p_tar;
    std::uint64_t instance_seed = 0;
};

/// Deterministic synthetic benchmark: n sources sampled from the source
/// distribution, each paired with (src, tar) prompt conditions and a derived
/// per-instance seed shared by every method that edits it.
std::vector<BenchmarkInstance> make_benchmark(const DistributionRegistry& registry,
                                              const BenchmarkSpec& spec, std::uint64_t seed);

}  // namespace tweeze
