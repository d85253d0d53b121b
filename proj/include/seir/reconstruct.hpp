#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "seir/model.hpp"
#include "seir/simulate.hpp"

namespace seir {

/// Daily reported symptomatic case counts for a population of size N.
struct IncidenceSeries {
    std::vector<std::string> dates;
    std::vector<std::int64_t> counts;
    std::int64_t population_n = 0;

    /// Throws Error(EmptyInput) for an empty series, Error(NegativeCount)
    /// for negative counts and Error(InvalidArgument) when N < max(count).
    void validate() const;
};

/// count / N for every record.
std::vector<double> normalize(const IncidenceSeries& series);

enum class InitMode {
    Fixed,  ///< use init_e / init_ia as given
    Prior,  ///< draw E(0), I_a(0) from uniform(47, 2100) / N per replicate
};

struct ReconstructConfig {
    ModelParams params;
    double init_e = 0.0;
    double init_ia = 0.0;
    double init_r = 0.0;
    double dt = 1e-3;
    std::uint64_t seed = 0;
    InitMode init_mode = InitMode::Fixed;
    std::int64_t population_n = kReferencePopulation;  ///< used by InitMode::Prior
    Scheme scheme = Scheme::EulerMaruyama;
    Positivity positivity = Positivity::Reject;
    /// Reproduce the published update lines verbatim, typos included.
    bool pedantic_paper = false;

    void validate() const;
};

/// Config with the reference parameters and initial conditions.
ReconstructConfig reference_reconstruct_config(std::uint64_t seed = 0);

/// Latent S, E, I_a driven by one Wiener increment per grid step with I_s
/// pinned to the observations; R closes the simplex. Uses stream `stream`
/// of cfg.seed.
Path reconstruct_latent(std::span<const double> obs_is, const ReconstructConfig& cfg,
                        std::uint64_t stream = 0);

enum class SeedSplit {
    PerReplicate,  ///< replicate i uses stream i
    Shared,        ///< every replicate uses stream 0 (identical replicates)
};

/// n_rep reconstructions; replicate i uses stream i of cfg.seed.
std::vector<Path> replicate_reconstructions(std::span<const double> obs_is,
                                            const ReconstructConfig& cfg, std::size_t n_rep,
                                            SeedSplit split = SeedSplit::PerReplicate);

}  // namespace seir
