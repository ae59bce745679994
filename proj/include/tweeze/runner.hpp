#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "tweeze/benchmark.hpp"
#include "tweeze/config.hpp"
#include "tweeze/metrics.hpp"
#include "tweeze/registry.hpp"

namespace tweeze {

struct InstanceResult {
    int index = 0;
    std::uint64_t seed = 0;
    MetricReport metrics;
};

struct Aggregate {
    double mean = 0.0;
    double stddev = 0.0;
    int count = 0;
};

/// Per-instance metrics plus aggregates recomputable from them. Serialized as
/// one JSON document; wall-clock timings go to a separate sidecar so result
/// files stay byte-identical across reruns.
struct RunResult {
    std::vector<InstanceResult> instances;
    std::map<std::string, Aggregate> aggregates;
};

std::map<std::string, Aggregate> compute_aggregates(const std::vector<InstanceResult>& instances);

void write_run_result(const std::string& path, const ExperimentConfig& config,
                      const RunResult& result);

/// Loads a result file and re-derives the aggregates from the per-instance
/// entries; throws VerificationError if they do not match exactly.
RunResult load_run_result(const std::string& path);

/// Everything a subcommand needs, resolved once from the config.
struct RunContext {
    ExperimentConfig config;
    NoiseSchedule schedule;
    DistributionRegistry registry;
    MixtureDenoiser denoiser;
    std::vector<BenchmarkInstance> instances;

    const GaussianMixture& target_mixture() const;
};

RunContext make_run_context(const ExperimentConfig& config);

int run_edit(const ExperimentConfig& config, std::ostream& log);
int run_sweep(const ExperimentConfig& config, std::ostream& log);
int run_bench(const ExperimentConfig& config, std::ostream& log);
int run_verify(const ExperimentConfig& config, std::ostream& log);
int run_plot(const ExperimentConfig& config, std::ostream& log);

}  // namespace tweeze
