#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace seir {

/// Epidemiological rates (per day) plus the noise intensity on the
/// natural mortality rate (per sqrt(day)).
struct ModelParams {
    double mu = 0.0;       ///< natural death rate
    double beta_s = 0.0;   ///< symptomatic transmission rate
    double beta_a = 0.0;   ///< asymptomatic transmission rate
    double kappa = 0.0;    ///< exposed -> infectious rate
    double p = 0.0;        ///< fraction of E entering the asymptomatic branch
    double theta = 0.0;    ///< symptomatic case fatality
    double alpha_a = 0.0;  ///< asymptomatic recovery rate
    double alpha_s = 0.0;  ///< symptomatic recovery rate
    double gamma = 0.0;    ///< immunity loss rate
    double sigma = 0.0;    ///< noise intensity

    /// Throws Error(InvalidArgument) unless all rates are positive,
    /// p and theta lie in [0,1] and sigma >= 0. Transmission rates may be 0.
    void validate() const;
};

/// Calibrated Mexico City values (growth phase, March-April 2020),
/// sigma = 0.01.
ModelParams reference_params();

/// Population of Mexico City used to normalise counts.
inline constexpr long long kReferencePopulation = 26'446'435;

/// One point of the five-compartment simplex, with an optional cumulative
/// death fraction carried by the deterministic model.
struct StateVec {
    double s = 0.0;
    double e = 0.0;
    double i_a = 0.0;
    double i_s = 0.0;
    double r = 0.0;
    std::optional<double> d;

    double sum() const noexcept { return s + e + i_a + i_s + r; }
    std::array<double, 5> as_array() const noexcept { return {s, e, i_a, i_s, r}; }
    static StateVec from_array(const std::array<double, 5>& x) {
        return {x[0], x[1], x[2], x[3], x[4], std::nullopt};
    }

    bool operator==(const StateVec&) const = default;
};

inline constexpr double kSimplexTolerance = 1e-12;

/// Throws Error(InvalidArgument) unless every compartment lies in [0,1]
/// and the five compartments sum to 1 within `tol`.
void validate_state(const StateVec& x, double tol = kSimplexTolerance);

/// Initial state from the reference calibration: E(0) and I_a(0) at their
/// posterior means, I_s(0) = 74/N, R(0) = 0 and S(0) closing the simplex.
StateVec reference_initial_state();

/// Uniform time grid with one state per grid point.
struct Path {
    double t0 = 0.0;
    double dt = 0.0;
    std::vector<StateVec> states;
    /// Wiener increments that drove the path; entry k moves t_k -> t_{k+1}.
    std::optional<std::vector<double>> wiener;
    /// Generator and normal-sampling algorithm that produced `wiener`.
    std::string rng_algorithm;

    std::size_t size() const noexcept { return states.size(); }
    double time(std::size_t k) const noexcept { return t0 + static_cast<double>(k) * dt; }
    double horizon() const noexcept { return size() < 2 ? 0.0 : time(size() - 1) - t0; }

    /// Path made of the first `n` states (and n-1 increments).
    Path prefix(std::size_t n) const;

    bool operator==(const Path&) const = default;
};

/// Checks dt > 0, a nonempty state list, the increment count, and the
/// state invariants of every point. Throws Error(InvalidArgument) naming
/// the first offending row.
void validate_path(const Path& path, double tol = kSimplexTolerance);

/// Rates of change of (S, E, I_a, I_s, R) and, when x.d is present, of D.
/// The R equation carries the (1 - theta) factor of the deterministic model.
StateVec deterministic_drift(const StateVec& x, const ModelParams& params);

/// Drift of the stochastic system: the deterministic field with theta = 0
/// in the R equation and no death compartment.
std::array<double, 5> stochastic_drift(const StateVec& x, const ModelParams& params);

/// Diffusion coefficients (sigma(1-S), -sigma E, -sigma I_a, -sigma I_s, -sigma R)
/// multiplying the single shared Wiener increment.
std::array<double, 5> stochastic_diffusion(const StateVec& x, double sigma);

/// Drift F of the log-transformed system
///   -(1/sigma) d(log(1-S), log E, log I_a, log I_s, log R) = F dt + dW.
/// Throws Error(Domain) when any log argument is <= 0 and Error(ZeroSigma)
/// when sigma <= 0.
std::array<double, 5> lamperti_drift(const StateVec& x, const ModelParams& params);

enum class R0Convention {
    Paper,       ///< p paired with beta_s, as originally published
    Consistent,  ///< p paired with beta_a, matching the compartment flows
};

/// Basic reproduction number of the deterministic model.
double r0(const ModelParams& params, R0Convention convention = R0Convention::Paper);

struct HypothesisWindow {
    double t_start = 0.0;
    double t_end = 0.0;
    std::size_t end_index = 0;  ///< index of the last grid point inside the window
    bool satisfied = false;
};

/// Largest prefix [t_0, T*] of the path on which S(T*) <= S(t) < S(t_0),
/// E(t) > E(t_0), I_a(t) > I_a(t_0) and I_s(t) > I_s(t_0) for every grid
/// point t in (t_0, T*].
HypothesisWindow hypothesis_window(const Path& path);

}  // namespace seir
