#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "seir/estimate.hpp"
#include "seir/model.hpp"
#include "seir/simulate.hpp"

namespace seir {

struct ResidualSeries {
    std::vector<double> raw;           ///< recovered increments, sqrt(day) scale
    std::vector<double> standardized;  ///< raw / sqrt(dt)
    double dt = 0.0;
};

/// Wiener increments recovered from the log-transformed S equation, with
/// the drift evaluated at the left endpoint of each interval:
///   dW_k = -(1/sigma) [log(1-S_k) - log(1-S_{k-1})] - (mu/sigma + sigma/2) dt
///          + (dt/sigma) [S f / (1-S) - gamma R / (1-S)]_{k-1}.
/// Uses params.sigma and the transmission rates in `params`.
ResidualSeries residual_increments(const Path& path, const ModelParams& params);

/// Standard normal quantile by Acklam's rational approximation
/// (relative error below 1.15e-9 over (0,1)).
double inverse_normal_cdf(double prob);

struct QQPoint {
    double theoretical = 0.0;
    double empirical = 0.0;
};

/// Sorted sample against standard normal quantiles at (i - 0.5) / n.
std::vector<QQPoint> qq_points(std::span<const double> sample);

struct NormalityVerdict {
    double statistic = 0.0;
    double threshold = 0.0;
    bool pass = false;
    std::string test_name;
};

/// Jarque-Bera test: n (skew^2/6 + (kurt-3)^2/24) against the chi-square(2)
/// critical value. alpha must be 0.01 or 0.05.
NormalityVerdict normality_test(std::span<const double> sample, double alpha);

struct ConsistencyOptions {
    Scheme scheme = Scheme::EulerMaruyama;
    /// Initial state; defaults to reference_initial_state().
    std::optional<StateVec> init;
    /// Plug the true sigma into the drift estimators instead of sigma_hat.
    bool known_sigma = false;
};

struct ConsistencyRow {
    double horizon = 0.0;
    double abs_err_beta_s = 0.0;  ///< median |beta_s_hat - beta_s|
    double abs_err_beta_a = 0.0;
    double abs_err_p = 0.0;
    /// Fraction of replicates whose hypothesis window is empty.
    double window_violation_rate = 0.0;
    bool flagged = false;  ///< window_violation_rate > 0.2
    std::size_t n_ok = 0;
    std::size_t n_failed = 0;
};

/// Replicate r simulates one path to the longest horizon from stream r of
/// `seed`; every horizon estimates on the corresponding prefix of that
/// same path. Throws Error(WindowViolated) when every replicate at some
/// horizon has an empty window.
std::vector<ConsistencyRow> consistency_study(const ModelParams& truth,
                                              std::span<const double> horizons,
                                              std::size_t n_rep, double dt, std::uint64_t seed,
                                              const ConsistencyOptions& options = {});

}  // namespace seir
