#include "tweeze/benchmark.hpp"

#include "tweeze/errors.hpp"
#include "tweeze/rng.hpp"

namespace tweeze {

std::vector<BenchmarkInstance> make_benchmark(const DistributionRegistry& registry,
                                              const BenchmarkSpec& spec, std::uint64_t seed) {
    if (spec.n_instances < 0) throw ConfigError("benchmark size must be >= 0");
    const RegisteredDistribution& src = registry.at(spec.src_distribution);
    registry.at(spec.tar_distribution);  // must resolve too

    std::vector<BenchmarkInstance> instances;
    instances.reserve(spec.n_instances);
    for (int i = 0; i < spec.n_instances; ++i) {
        GaussianRng rng(mix_seed(seed, 0xbe9c0000ULL + static_cast<std::uint64_t>(i)));
        BenchmarkInstance inst;
        Eigen::VectorXd z0 = src.mixture.sample(rng);
        inst.z0_src = src.layout == Layout::grid ? Latent::grid(std::move(z0), src.grid_side)
                                                 : Latent::vector(std::move(z0));
        inst.p_src = PromptCondition::ref(spec.src_distribution);
        inst.p_tar = PromptCondition::ref(spec.tar_distribution);
        inst.instance_seed = mix_seed(seed, 0x5eed0000ULL + static_cast<std::uint64_t>(i));
        instances.push_back(std::move(inst));
    }
    return instances;
}

}  // namespace tweeze
