#include "seir/model.hpp"

#include <cmath>

#include <fmt/core.h>

#include "seir/error.hpp"

namespace seir {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::Domain: return "DomainError";
        case ErrorKind::Positivity: return "PositivityError";
        case ErrorKind::LengthMismatch: return "LengthMismatch";
        case ErrorKind::EmptyInput: return "EmptyInput";
        case ErrorKind::DegenerateDenominator: return "DegenerateDenominator";
        case ErrorKind::SingularSystem: return "SingularSystem";
        case ErrorKind::MissingIncrements: return "MissingIncrements";
        case ErrorKind::ZeroSigma: return "ZeroSigma";
        case ErrorKind::TooFewPoints: return "TooFewPoints";
        case ErrorKind::DegenerateSample: return "DegenerateSample";
        case ErrorKind::WindowViolated: return "WindowViolated";
        case ErrorKind::Parse: return "ParseError";
        case ErrorKind::NegativeCount: return "NegativeCount";
        case ErrorKind::Io: return "IoError";
        case ErrorKind::ReplicateFailure: return "ReplicateFailure";
    }
    return "Unknown";
}

int exit_code(ErrorKind kind) noexcept {
    // 1 and 2 are left to generic failures and usage errors.
    return 10 + static_cast<int>(kind);
}

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw Error(ErrorKind::InvalidArgument, what);
}

}  // namespace

void ModelParams::validate() const {
    auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
    auto nonneg = [](double v) { return std::isfinite(v) && v >= 0.0; };
    auto fraction = [](double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; };
    require(positive(mu), "mu must be positive");
    require(nonneg(beta_s), "beta_s must be nonnegative");
    require(nonneg(beta_a), "beta_a must be nonnegative");
    require(positive(kappa), "kappa must be positive");
    require(fraction(p), "p must lie in [0,1]");
    require(fraction(theta), "theta must lie in [0,1]");
    require(positive(alpha_a), "alpha_a must be positive");
    require(positive(alpha_s), "alpha_s must be positive");
    require(positive(gamma), "gamma must be positive");
    require(nonneg(sigma), "sigma must be nonnegative");
}

ModelParams reference_params() {
    ModelParams m;
    m.mu = 1.0 / (70.0 * 365.0);
    m.beta_s = 0.058215322606755;
    m.beta_a = 0.510968165093383;
    m.kappa = 0.196078;
    m.p = 0.585505;
    m.theta = 0.11;
    m.alpha_a = 0.167504;
    m.alpha_s = 0.092507;
    m.gamma = 1.0 / 365.0;
    m.sigma = 0.01;
    return m;
}

StateVec reference_initial_state() {
    const double n = static_cast<double>(kReferencePopulation);
    StateVec x;
    x.e = 198.504524717486 / n;
    x.i_a = 99.174034301964 / n;
    x.i_s = 74.0 / n;
    x.r = 0.0;
    x.s = 1.0 - (x.e + x.i_a + x.i_s + x.r);
    return x;
}

void validate_state(const StateVec& x, double tol) {
    const auto v = x.as_array();
    static constexpr const char* names[] = {"S", "E", "I_a", "I_s", "R"};
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v[i]) || v[i] < 0.0 || v[i] > 1.0)
            throw Error(ErrorKind::InvalidArgument,
                        fmt::format("{} = {} outside [0,1]", names[i], v[i]));
    }
    if (x.d && (!std::isfinite(*x.d) || *x.d < 0.0 || *x.d > 1.0))
        throw Error(ErrorKind::InvalidArgument, fmt::format("D = {} outside [0,1]", *x.d));
    if (std::abs(x.sum() - 1.0) > tol)
        throw Error(ErrorKind::InvalidArgument,
                    fmt::format("compartments sum to {:.17g}, not 1", x.sum()));
}

Path Path::prefix(std::size_t n) const {
    if (n == 0 || n > states.size())
        throw Error(ErrorKind::InvalidArgument,
                    fmt::format("prefix length {} outside [1, {}]", n, states.size()));
    Path out;
    out.t0 = t0;
    out.dt = dt;
    out.rng_algorithm = rng_algorithm;
    out.states.assign(states.begin(), states.begin() + static_cast<std::ptrdiff_t>(n));
    if (wiener)
        out.wiener = std::vector<double>(wiener->begin(),
                                         wiener->begin() + static_cast<std::ptrdiff_t>(n - 1));
    return out;
}

void validate_path(const Path& path, double tol) {
    if (!(path.dt > 0.0) || !std::isfinite(path.dt))
        throw Error(ErrorKind::InvalidArgument, "path dt must be positive");
    if (path.states.empty()) throw Error(ErrorKind::EmptyInput, "path has no states");
    if (path.wiener && path.wiener->size() + 1 != path.states.size())
        throw Error(ErrorKind::LengthMismatch,
                    fmt::format("path has {} states but {} increments", path.states.size(),
                                path.wiener->size()));
    for (std::size_t k = 0; k < path.states.size(); ++k) {
        try {
            validate_state(path.states[k], tol);
        } catch (const Error& err) {
            throw Error(err.kind(), fmt::format("row {}: {}", k, err.what()), k);
        }
    }
}

StateVec deterministic_drift(const StateVec& x, const ModelParams& m) {
    const double force = m.beta_s * x.i_s + m.beta_a * x.i_a;
    StateVec dx;
    dx.s = m.mu + m.gamma * x.r - (m.mu + force) * x.s;
    dx.e = force * x.s - (m.kappa + m.mu) * x.e;
    dx.i_a = m.p * m.kappa * x.e - (m.alpha_a + m.mu) * x.i_a;
    dx.i_s = (1.0 - m.p) * m.kappa * x.e - (m.alpha_s + m.mu) * x.i_s;
    dx.r = m.alpha_a * x.i_a + m.alpha_s * (1.0 - m.theta) * x.i_s - (m.mu + m.gamma) * x.r;
    if (x.d) dx.d = m.theta * m.alpha_s * x.i_s;
    return dx;
}

std::array<double, 5> stochastic_drift(const StateVec& x, const ModelParams& m) {
    const double force = m.beta_s * x.i_s + m.beta_a * x.i_a;
    return {
        m.mu - m.mu * x.s - force * x.s + m.gamma * x.r,
        force * x.s - m.kappa * x.e - m.mu * x.e,
        m.p * m.kappa * x.e - (m.alpha_a + m.mu) * x.i_a,
        (1.0 - m.p) * m.kappa * x.e - (m.alpha_s + m.mu) * x.i_s,
        m.alpha_a * x.i_a + m.alpha_s * x.i_s - (m.mu + m.gamma) * x.r,
    };
}

std::array<double, 5> stochastic_diffusion(const StateVec& x, double sigma) {
    return {sigma * (1.0 - x.s), -sigma * x.e, -sigma * x.i_a, -sigma * x.i_s, -sigma * x.r};
}

std::array<double, 5> lamperti_drift(const StateVec& x, const ModelParams& m) {
    if (!(m.sigma > 0.0)) throw Error(ErrorKind::ZeroSigma, "lamperti drift needs sigma > 0");
    const double one_minus_s = 1.0 - x.s;
    if (!(one_minus_s > 0.0) || !(x.e > 0.0) || !(x.i_a > 0.0) || !(x.i_s > 0.0) ||
        !(x.r > 0.0))
        throw Error(ErrorKind::Domain, "lamperti drift needs 1-S, E, I_a, I_s, R > 0");

    const double sig = m.sigma;
    const double force = m.beta_s * x.i_s + m.beta_a * x.i_a;
    const double half = 0.5 * sig;
    return {
        m.mu / sig - force * x.s / (sig * one_minus_s) + m.gamma * x.r / (sig * one_minus_s) + half,
        -force * x.s / (sig * x.e) + m.kappa / sig + m.mu / sig + half,
        -m.kappa * m.p * x.e / (sig * x.i_a) + (m.alpha_a + m.mu) / sig + half,
        -m.kappa * (1.0 - m.p) * x.e / (sig * x.i_s) + (m.alpha_s + m.mu) / sig + half,
        -(m.alpha_a * x.i_a + m.alpha_s * x.i_s) / (sig * x.r) + (m.mu + m.gamma) / sig + half,
    };
}

double r0(const ModelParams& m, R0Convention convention) {
    const double incubation = m.kappa / (m.mu + m.kappa);
    const double sym = m.beta_s / (m.mu + m.alpha_s);
    const double asym = m.beta_a / (m.mu + m.alpha_a);
    if (convention == R0Convention::Paper)
        return incubation * (m.p * sym + (1.0 - m.p) * asym);
    return incubation * ((1.0 - m.p) * sym + m.p * asym);
}

HypothesisWindow hypothesis_window(const Path& path) {
    if (path.states.empty()) throw Error(ErrorKind::EmptyInput, "path has no states");
    const StateVec& first = path.states.front();

    // Longest prefix on which the strict growth inequalities hold.
    std::size_t growth_end = 0;
    for (std::size_t k = 1; k < path.states.size(); ++k) {
        const StateVec& x = path.states[k];
        if (!(x.s < first.s && x.e > first.e && x.i_a > first.i_a && x.i_s > first.i_s)) break;
        growth_end = k;
    }

    // S(T*) must be the minimum of S over the window.
    std::size_t end = 0;
    double running_min = first.s;
    for (std::size_t k = 1; k <= growth_end; ++k) {
        if (path.states[k].s <= running_min) {
            running_min = path.states[k].s;
            end = k;
        }
    }

    HypothesisWindow w;
    w.t_start = path.t0;
    w.end_index = end;
    w.t_end = path.time(end);
    w.satisfied = end > 0;
    return w;
}

}  // namespace seir
