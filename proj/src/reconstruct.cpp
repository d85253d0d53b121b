#include "seir/reconstruct.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/core.h>

#include "seir/error.hpp"
#include "seir/parallel.hpp"
#include "seir/rng.hpp"

namespace seir {

void IncidenceSeries::validate() const {
    if (counts.empty()) throw Error(ErrorKind::EmptyInput, "incidence series has no records");
    if (!dates.empty() && dates.size() != counts.size())
        throw Error(ErrorKind::LengthMismatch, "dates and counts differ in length");
    for (std::size_t i = 0; i < counts.size(); ++i)
        if (counts[i] < 0)
            throw Error(ErrorKind::NegativeCount, fmt::format("record {}: negative count", i), i);
    const auto peak = *std::max_element(counts.begin(), counts.end());
    if (population_n <= 0 || population_n < peak)
        throw Error(ErrorKind::InvalidArgument,
                    fmt::format("population {} smaller than peak count {}", population_n, peak));
}

std::vector<double> normalize(const IncidenceSeries& series) {
    series.validate();
    const double n = static_cast<double>(series.population_n);
    std::vector<double> out;
    out.reserve(series.counts.size());
    for (auto c : series.counts) out.push_back(static_cast<double>(c) / n);
    return out;
}

void ReconstructConfig::validate() const {
    params.validate();
    auto fraction = [](double v) { return std::isfinite(v) && v >= 0.0 && v < 1.0; };
    if (!fraction(init_e) || !fraction(init_ia) || !fraction(init_r))
        throw Error(ErrorKind::InvalidArgument, "initial fractions must lie in [0,1)");
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw Error(ErrorKind::InvalidArgument, "dt must be positive");
    if (init_mode == InitMode::Prior && population_n <= 0)
        throw Error(ErrorKind::InvalidArgument, "prior initialisation needs a population size");
}

ReconstructConfig reference_reconstruct_config(std::uint64_t seed) {
    const StateVec x0 = reference_initial_state();
    ReconstructConfig cfg;
    cfg.params = reference_params();
    cfg.init_e = x0.e;
    cfg.init_ia = x0.i_a;
    cfg.init_r = x0.r;
    cfg.dt = 1e-3;
    cfg.seed = seed;
    return cfg;
}

namespace {

struct Latent {
    double s, e, i_a;
};

Latent corrected_update(const StateVec& x, double dw, const ReconstructConfig& cfg) {
    const ModelParams& m = cfg.params;
    const double dt = cfg.dt;
    const double force = m.beta_s * x.i_s + m.beta_a * x.i_a;
    Latent next{
        x.s + (m.mu - m.mu * x.s - force * x.s + m.gamma * x.r) * dt + m.sigma * (1.0 - x.s) * dw,
        x.e + (force * x.s - (m.kappa + m.mu) * x.e) * dt - m.sigma * x.e * dw,
        x.i_a + (m.p * m.kappa * x.e - (m.alpha_a + m.mu) * x.i_a) * dt - m.sigma * x.i_a * dw,
    };
    if (cfg.scheme == Scheme::Milstein) {
        const double c = 0.5 * m.sigma * m.sigma * (dw * dw - dt);
        next.s -= c * (1.0 - x.s);
        next.e += c * x.e;
        next.i_a += c * x.i_a;
    }
    return next;
}

// The published update lines, including the missing parenthesis in the E
// line and the I_a line that multiplies the inflow by I_a and drops dW.
Latent pedantic_update(const StateVec& x, double dw, const ReconstructConfig& cfg) {
    const ModelParams& m = cfg.params;
    const double dt = cfg.dt;
    return {
        x.s - (m.mu + m.beta_a * x.i_a + m.beta_s * x.i_s) * dt * x.s + (m.mu + m.gamma * x.r) * dt -
            m.sigma * (1.0 - x.s) * dw,
        x.e - (m.kappa + m.mu) * dt * x.e + dt * (m.beta_s * x.i_s + m.beta_a * x.i_a * x.s) -
            m.sigma * x.e * dw,
        x.i_a - m.p * m.kappa * x.e * dt * x.i_a - (m.alpha_a + m.mu) * x.i_a * dt -
            m.sigma * x.i_a * dt,
    };
}

void check_latent(double before, double& after, const char* name, Positivity policy,
                  std::size_t step) {
    const bool left = !std::isfinite(after) || after < 0.0 || after > 1.0 ||
                      (before > 0.0 && after <= 0.0);
    if (!left) return;
    if (policy == Positivity::Reject)
        throw Error(ErrorKind::Positivity,
                    fmt::format("step {}: {} left (0,1): {:.17g}", step, name, after), step);
    after = after > 1.0 ? 1.0 - kReflectFloor : kReflectFloor;
}

}  // namespace

Path reconstruct_latent(std::span<const double> obs_is, const ReconstructConfig& cfg,
                        std::uint64_t stream) {
    cfg.validate();
    if (obs_is.size() < 2)
        throw Error(ErrorKind::LengthMismatch, "reconstruction needs at least two observations");
    for (std::size_t k = 0; k < obs_is.size(); ++k)
        if (!std::isfinite(obs_is[k]) || obs_is[k] < 0.0 || obs_is[k] > 1.0)
            throw Error(ErrorKind::InvalidArgument,
                        fmt::format("observation {} = {} outside [0,1]", k, obs_is[k]), k);

    Pcg32 rng(cfg.seed, stream);
    double e0 = cfg.init_e;
    double ia0 = cfg.init_ia;
    if (cfg.init_mode == InitMode::Prior) {
        const double n = static_cast<double>(cfg.population_n);
        e0 = (47.0 + (2100.0 - 47.0) * rng.uniform()) / n;
        ia0 = (47.0 + (2100.0 - 47.0) * rng.uniform()) / n;
    }
    NormalSampler normal(rng);
    const double scale = std::sqrt(cfg.dt);

    Path path;
    path.t0 = 0.0;
    path.dt = cfg.dt;
    path.rng_algorithm = kRngAlgorithm;
    path.states.reserve(obs_is.size());
    std::vector<double> dw(obs_is.size() - 1);

    StateVec x;
    x.e = e0;
    x.i_a = ia0;
    x.r = cfg.init_r;
    x.i_s = obs_is[0];
    x.s = 1.0 - x.e - x.i_a - x.r - x.i_s;
    if (!(x.s > 0.0 && x.s <= 1.0))
        throw Error(ErrorKind::InvalidArgument, "initial conditions leave no susceptibles", 0);
    path.states.push_back(x);

    for (std::size_t k = 0; k + 1 < obs_is.size(); ++k) {
        dw[k] = scale * normal();
        const StateVec& cur = path.states.back();
        Latent nxt = cfg.pedantic_paper ? pedantic_update(cur, dw[k], cfg)
                                        : corrected_update(cur, dw[k], cfg);
        check_latent(cur.s, nxt.s, "S", cfg.positivity, k);
        check_latent(cur.e, nxt.e, "E", cfg.positivity, k);
        check_latent(cur.i_a, nxt.i_a, "I_a", cfg.positivity, k);

        StateVec y;
        y.s = nxt.s;
        y.e = nxt.e;
        y.i_a = nxt.i_a;
        y.i_s = obs_is[k + 1];
        y.r = 1.0 - (y.s + y.e + y.i_a + y.i_s);
        check_latent(cur.r, y.r, "R", cfg.positivity, k);
        path.states.push_back(y);
    }
    path.wiener = std::move(dw);
    return path;
}

std::vector<Path> replicate_reconstructions(std::span<const double> obs_is,
                                            const ReconstructConfig& cfg, std::size_t n_rep,
                                            SeedSplit split) {
    if (n_rep == 0) throw Error(ErrorKind::InvalidArgument, "n_rep must be at least 1");
    std::vector<Path> out(n_rep);
    parallel_for(n_rep, [&](std::size_t i) {
        const std::uint64_t stream = split == SeedSplit::PerReplicate ? i : 0;
        try {
            out[i] = reconstruct_latent(obs_is, cfg, stream);
        } catch (const Error& err) {
            throw Error(err.kind(), fmt::format("replicate {}: {}", i, err.what()), i);
        }
    });
    return out;
}

}  // namespace seir
