#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "seir/model.hpp"
#include "seir/reconstruct.hpp"

namespace seir {

/// p ~ Uniform(p_lo, p_hi), kappa ~ Gamma(shape, rate).
struct PriorSpec {
    double p_lo = 0.3;
    double p_hi = 0.8;
    double kappa_shape = 10.0;
    double kappa_rate = 50.0;
    void validate() const;
    /// Log prior density up to a constant; -inf outside the support.
    double log_density(double p, double kappa) const;
};

struct McmcConfig {
    std::size_t iterations = 100'000;
    std::size_t burn_in = 10'000;
    std::array<double, 2> proposal_sd{0.02, 0.01};  ///< (p, kappa)
    std::uint64_t seed = 0;
    /// Starting (p, kappa); the prior means when absent.
    std::optional<std::array<double, 2>> initial;
    /// ODE initial state; reference_initial_state() when absent.
    std::optional<StateVec> init;
    double ode_dt = 0.1;
    void validate() const;
};

/// Classical RK4 on the deterministic system including the death
/// compartment D (started at init.d, or 0).
Path ode_rk4(const ModelParams& params, const StateVec& init, double dt, std::size_t n_steps);

/// Cumulative symptomatic incidence in counts:
/// lambda_n = sum_{k < n} (1-p) kappa E(t_k) dt N, so lambda_0 = 0.
std::vector<double> cumulative_incidence(const Path& path, const ModelParams& params,
                                         double population_n);

/// Sum of y ln(lambda) - lambda - ln(y!) over matching entries.
/// Throws Error(LengthMismatch) or Error(Domain) when lambda <= 0 with y > 0.
double poisson_loglik(std::span<const std::int64_t> counts, std::span<const double> lambda);
double poisson_loglik(const IncidenceSeries& counts, std::span<const double> lambda);

/// Log-likelihood of the daily series under (p, kappa): record 0 is day 0,
/// and day j >= 1 is compared through Y_j = counts[1] + ... + counts[j]
/// against the model's cumulative incidence at t = j.
double incidence_loglik(const IncidenceSeries& series, const ModelParams& params,
                        const StateVec& init, double ode_dt);

struct ChainResult {
    std::vector<std::vector<double>> states;  ///< post burn-in draws
    std::vector<double> log_target;           ///< log target of each draw
    double acceptance_rate = 0.0;             ///< over all iterations
    std::size_t out_of_support = 0;           ///< proposals with log target -inf
};

/// Gaussian random-walk Metropolis on an arbitrary log target. Proposals
/// with log target -inf are rejected and counted.
ChainResult random_walk_metropolis(const std::function<double(std::span<const double>)>& log_target,
                                   std::vector<double> initial, std::span<const double> proposal_sd,
                                   std::size_t iterations, std::size_t burn_in,
                                   std::uint64_t seed);

struct McmcSample {
    std::size_t iter = 0;
    double p = 0.0;
    double kappa = 0.0;
    double loglik = 0.0;  ///< Poisson log-likelihood (no prior)
};

struct McmcResult {
    std::vector<McmcSample> samples;
    double acceptance_rate = 0.0;
    std::size_t out_of_support = 0;
};

/// Posterior sampling of (p, kappa) with every other parameter taken from
/// `fixed`. An empty series gives a flat likelihood.
McmcResult metropolis(const IncidenceSeries& series, const PriorSpec& priors,
                      const ModelParams& fixed, const McmcConfig& cfg);

}  // namespace seir
