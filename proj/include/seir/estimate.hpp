#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seir/error.hpp"
#include "seir/model.hpp"
#include "seir/reconstruct.hpp"

namespace seir {

// -- discretised integrals ---------------------------------------------------

/// Sum of values[k] * dt over every element (left-point rectangle rule when
/// called with all but the last sample of a path).
double left_riemann(std::span<const double> values, double dt);

/// Ito (left-point) approximation of int f d(ln x):
/// sum_{k < n-1} f[k] (ln x[k+1] - ln x[k]).
double ito_log_integral(std::span<const double> f, std::span<const double> x);

/// Realised quadratic variation sum (x[k+1] - x[k])^2.
double quadratic_variation(std::span<const double> x);

// -- estimators ----------------------------------------------------------------

struct SigmaEstimate {
    double sigma_hat = 0.0;
    /// Per-equation estimates of sigma^2 for S, E, I_a, I_s, R.
    std::array<double, 5> components{};
};

/// Quadratic-variation estimator: sigma_hat^2 is the mean of the five ratios
/// <X,X>_T / int c(X)^2 dt with c(S) = 1-S and c(X) = X otherwise.
SigmaEstimate estimate_sigma(const Path& path);

struct JFunctionals {
    double j_s = 0.0;
    double j_a = 0.0;
    double j_sa = 0.0;
    double j_2 = 0.0;
};

JFunctionals j_functionals(const Path& path, double kappa);

/// Parameters treated as known when estimating the transmission rates.
struct BetaKnown {
    double mu = 0.0;
    double gamma = 0.0;
    double kappa = 0.0;
    double sigma = 0.0;
};

struct BetaEstimate {
    double beta_s = 0.0;
    double beta_a = 0.0;
    double condition_number = 0.0;
};

/// Solves [J_s J_sa; J_sa J_a] (beta_s, beta_a) = (A_s, A_a) by explicit
/// inversion. Throws Error(SingularSystem) when
/// J_s J_a - J_sa^2 <= 1e-12 J_s J_a.
BetaEstimate estimate_betas(const Path& path, const BetaKnown& known);

/// The same estimator written out as the expanded closed forms, one
/// integral per term. Kept as an independent route for cross-checking.
BetaEstimate estimate_betas_closed_form(const Path& path, const BetaKnown& known);

struct PKnown {
    double kappa = 0.0;
    double alpha_a = 0.0;
    double alpha_s = 0.0;
    double mu = 0.0;
    double sigma = 0.0;
};

struct PEstimate {
    double p_hat = 0.0;      ///< raw estimate
    double p_clamped = 0.0;  ///< p_hat clamped to [0,1]
    bool out_of_range = false;
};

PEstimate estimate_p(const Path& path, const PKnown& known);

struct DriftParams {
    double beta_s = 0.0;
    double beta_a = 0.0;
    double p = 0.0;
};

/// Log Radon-Nikodym derivative of the law under `theta` against the law
/// under `theta0`, discretised with left-point sums. Increments come from
/// `increments` when given, otherwise from path.wiener; Error(MissingIncrements)
/// if neither is available.
double girsanov_loglik(const Path& path, const DriftParams& theta, const DriftParams& theta0,
                       double kappa, double sigma,
                       std::optional<std::span<const double>> increments = std::nullopt);

/// The same ratio with the noise recovered separately from each
/// log-transformed equation under theta0,
///   dW_i = -(1/sigma) d log c(X_i) - F_i(theta0) dt   (i = S, E, I_a, I_s),
/// i.e. the discretised likelihood of the observed path. Its maximiser over
/// theta is exactly (estimate_betas, estimate_p) at the same sigma.
/// mu, gamma, kappa, alpha_a, alpha_s and sigma come from `theta0`.
double girsanov_loglik_observed(const Path& path, const DriftParams& theta,
                                const ModelParams& theta0);

// -- reports -------------------------------------------------------------------

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

struct ParamIntervals {
    Interval beta_s, beta_a, p, sigma;
};

struct EstimateReport {
    double beta_s_hat = 0.0;
    double beta_a_hat = 0.0;
    double p_hat = 0.0;
    double sigma_hat = 0.0;
    std::array<double, 5> sigma_components{};
    JFunctionals j;
    double condition_number = 0.0;
    HypothesisWindow window;

    double p_clamped = 0.0;
    bool p_out_of_range = false;
    bool window_truncated = false;
    std::optional<ParamIntervals> ci;
};

struct EstimateOptions {
    /// Estimate on hypothesis_window(path) only. Off by default: at the
    /// reference design the window usually closes within a few steps.
    bool restrict_to_window = false;
    /// Use this sigma in the drift estimators instead of sigma_hat.
    std::optional<double> known_sigma;
};

/// sigma_hat, then (beta_s, beta_a) and p with sigma plugged in. `known`
/// supplies mu, gamma, kappa, alpha_a, alpha_s.
EstimateReport estimate_path(const Path& path, const ModelParams& known,
                             const EstimateOptions& options = {});

struct ReplicateFailure {
    std::size_t index = 0;
    ErrorKind kind = ErrorKind::InvalidArgument;
    std::string message;
};

struct ReplicateEstimates {
    /// Replicate means with 2.5 / 97.5 percentile intervals. J-functionals
    /// are averaged, condition_number is the median and window the
    /// shortest among successful replicates.
    EstimateReport summary;
    std::vector<EstimateReport> replicates;  ///< successful replicates, in index order
    std::vector<std::size_t> indices;        ///< replicate index of each entry above
    std::vector<ReplicateFailure> failures;
};

/// Linear-interpolation percentile (q in [0,1]) of an unsorted sample.
double percentile(std::vector<double> values, double q);

/// Summary statistics over already-computed per-replicate reports.
EstimateReport summarize_replicates(std::span<const EstimateReport> reports);

/// reconstruct_latent -> estimate_path for replicates 0..n_rep-1. Throws
/// Error(ReplicateFailure) when more than 10% of replicates fail.
ReplicateEstimates replicate_estimates(std::span<const double> obs_is,
                                       const ReconstructConfig& cfg, std::size_t n_rep,
                                       const EstimateOptions& options = {});

}  // namespace seir
