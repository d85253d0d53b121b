#include "seir/bayes.hpp"

#include <cmath>
#include <limits>

#include <fmt/core.h>

#include "seir/error.hpp"
#include "seir/rng.hpp"

namespace seir {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

void PriorSpec::validate() const {
    if (!(p_lo < p_hi)) throw Error(ErrorKind::InvalidArgument, "prior: need p_lo < p_hi");
    if (!(kappa_shape > 0.0 && kappa_rate > 0.0))
        throw Error(ErrorKind::InvalidArgument, "prior: gamma shape and rate must be positive");
}

double PriorSpec::log_density(double p, double kappa) const {
    if (!(p > p_lo && p < p_hi) || !(kappa > 0.0)) return kNegInf;
    return (kappa_shape - 1.0) * std::log(kappa) - kappa_rate * kappa;
}

void McmcConfig::validate() const {
    if (iterations == 0 || burn_in >= iterations)
        throw Error(ErrorKind::InvalidArgument, "mcmc: need 0 <= burn_in < iterations");
    for (double sd : proposal_sd)
        if (!(sd >= 0.0)) throw Error(ErrorKind::InvalidArgument, "mcmc: proposal_sd must be >= 0");
    if (!(ode_dt > 0.0 && ode_dt <= 1.0))
        throw Error(ErrorKind::InvalidArgument, "mcmc: ode_dt must lie in (0,1]");
    const double per_day = 1.0 / ode_dt;
    if (std::abs(per_day - std::round(per_day)) > 1e-9)
        throw Error(ErrorKind::InvalidArgument, "mcmc: 1/ode_dt must be an integer");
}

Path ode_rk4(const ModelParams& params, const StateVec& init, double dt, std::size_t n_steps) {
    params.validate();
    if (!(dt > 0.0)) throw Error(ErrorKind::InvalidArgument, "ode_rk4: dt must be positive");

    auto axpy = [](const StateVec& x, double h, const StateVec& k) {
        return StateVec{x.s + h * k.s,     x.e + h * k.e, x.i_a + h * k.i_a,
                        x.i_s + h * k.i_s, x.r + h * k.r, *x.d + h * *k.d};
    };

    Path path;
    path.dt = dt;
    path.states.reserve(n_steps + 1);
    StateVec x = init;
    x.d = init.d.value_or(0.0);
    path.states.push_back(x);
    for (std::size_t n = 0; n < n_steps; ++n) {
        const StateVec k1 = deterministic_drift(x, params);
        const StateVec k2 = deterministic_drift(axpy(x, 0.5 * dt, k1), params);
        const StateVec k3 = deterministic_drift(axpy(x, 0.5 * dt, k2), params);
        const StateVec k4 = deterministic_drift(axpy(x, dt, k3), params);
        const double h = dt / 6.0;
        x.s += h * (k1.s + 2.0 * k2.s + 2.0 * k3.s + k4.s);
        x.e += h * (k1.e + 2.0 * k2.e + 2.0 * k3.e + k4.e);
        x.i_a += h * (k1.i_a + 2.0 * k2.i_a + 2.0 * k3.i_a + k4.i_a);
        x.i_s += h * (k1.i_s + 2.0 * k2.i_s + 2.0 * k3.i_s + k4.i_s);
        x.r += h * (k1.r + 2.0 * k2.r + 2.0 * k3.r + k4.r);
        *x.d += h * (*k1.d + 2.0 * *k2.d + 2.0 * *k3.d + *k4.d);
        path.states.push_back(x);
    }
    return path;
}

std::vector<double> cumulative_incidence(const Path& path, const ModelParams& params,
                                         double population_n) {
    std::vector<double> out(path.size(), 0.0);
    const double scale = (1.0 - params.p) * params.kappa * path.dt * population_n;
    double acc = 0.0;
    for (std::size_t k = 1; k < path.size(); ++k) {
        acc += scale * path.states[k - 1].e;
        out[k] = acc;
    }
    return out;
}

double poisson_loglik(std::span<const std::int64_t> counts, std::span<const double> lambda) {
    if (counts.size() != lambda.size())
        throw Error(ErrorKind::LengthMismatch,
                    fmt::format("poisson_loglik: {} counts vs {} rates", counts.size(), lambda.size()));
    double total = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        const auto y = static_cast<double>(counts[i]);
        if (counts[i] < 0)
            throw Error(ErrorKind::NegativeCount, fmt::format("poisson_loglik: count {} < 0", i), i);
        if (counts[i] == 0) {
            if (lambda[i] < 0.0)
                throw Error(ErrorKind::Domain, fmt::format("poisson_loglik: lambda[{}] < 0", i), i);
            total -= lambda[i];
            continue;
        }
        if (!(lambda[i] > 0.0))
            throw Error(ErrorKind::Domain,
                        fmt::format("poisson_loglik: lambda[{}] = {} with count {}", i, lambda[i],
                                    counts[i]),
                        i);
        total += y * std::log(lambda[i]) - lambda[i] - std::lgamma(y + 1.0);
    }
    return total;
}

double poisson_loglik(const IncidenceSeries& counts, std::span<const double> lambda) {
    return poisson_loglik(std::span<const std::int64_t>(counts.counts), lambda);
}

double incidence_loglik(const IncidenceSeries& series, const ModelParams& params,
                        const StateVec& init, double ode_dt) {
    if (series.counts.size() < 2) return 0.0;
    const auto per_day = static_cast<std::size_t>(std::llround(1.0 / ode_dt));
    const std::size_t days = series.counts.size() - 1;
    const Path path = ode_rk4(params, init, ode_dt, days * per_day);
    const std::vector<double> lam =
        cumulative_incidence(path, params, static_cast<double>(series.population_n));

    std::vector<std::int64_t> y(days);
    std::vector<double> rate(days);
    std::int64_t acc = 0;
    for (std::size_t j = 1; j <= days; ++j) {
        acc += series.counts[j];
        y[j - 1] = acc;
        rate[j - 1] = lam[j * per_day];
    }
    return poisson_loglik(y, rate);
}

ChainResult random_walk_metropolis(const std::function<double(std::span<const double>)>& log_target,
                                   std::vector<double> initial, std::span<const double> proposal_sd,
                                   std::size_t iterations, std::size_t burn_in,
                                   std::uint64_t seed) {
    if (proposal_sd.size() != initial.size())
        throw Error(ErrorKind::LengthMismatch, "metropolis: proposal_sd and state differ in size");
    if (iterations == 0 || burn_in >= iterations)
        throw Error(ErrorKind::InvalidArgument, "metropolis: need 0 <= burn_in < iterations");

    Pcg32 rng(seed, 0);
    NormalSampler normal(rng);
    std::vector<double> cur = std::move(initial);
    double cur_lt = log_target(cur);
    if (!std::isfinite(cur_lt))
        throw Error(ErrorKind::InvalidArgument, "metropolis: initial state outside the support");

    ChainResult out;
    out.states.reserve(iterations - burn_in);
    out.log_target.reserve(iterations - burn_in);
    std::vector<double> prop(cur.size());
    std::size_t accepted = 0;
    for (std::size_t it = 0; it < iterations; ++it) {
        for (std::size_t i = 0; i < cur.size(); ++i) prop[i] = cur[i] + proposal_sd[i] * normal();
        const double prop_lt = log_target(prop);
        const double u = rng.uniform_open();
        if (prop_lt == kNegInf) {
            ++out.out_of_support;
        } else if (std::log(u) < prop_lt - cur_lt) {
            cur = prop;
            cur_lt = prop_lt;
            ++accepted;
        }
        if (it >= burn_in) {
            out.states.push_back(cur);
            out.log_target.push_back(cur_lt);
        }
    }
    out.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(iterations);
    return out;
}

McmcResult metropolis(const IncidenceSeries& series, const PriorSpec& priors,
                      const ModelParams& fixed, const McmcConfig& cfg) {
    priors.validate();
    cfg.validate();
    fixed.validate();
    if (!series.counts.empty()) series.validate();
    const StateVec init = cfg.init.value_or(reference_initial_state());

    auto loglik = [&](double p, double kappa) {
        ModelParams m = fixed;
        m.p = p;
        m.kappa = kappa;
        return incidence_loglik(series, m, init, cfg.ode_dt);
    };
    auto log_target = [&](std::span<const double> x) {
        const double lp = priors.log_density(x[0], x[1]);
        if (lp == kNegInf) return kNegInf;
        return lp + loglik(x[0], x[1]);
    };

    const std::array<double, 2> start = cfg.initial.value_or(std::array<double, 2>{
        0.5 * (priors.p_lo + priors.p_hi), priors.kappa_shape / priors.kappa_rate});
    const ChainResult chain =
        random_walk_metropolis(log_target, {start[0], start[1]}, cfg.proposal_sd, cfg.iterations,
                               cfg.burn_in, cfg.seed);

    McmcResult out;
    out.acceptance_rate = chain.acceptance_rate;
    out.out_of_support = chain.out_of_support;
    out.samples.reserve(chain.states.size());
    for (std::size_t i = 0; i < chain.states.size(); ++i) {
        const double p = chain.states[i][0];
        const double kappa = chain.states[i][1];
        out.samples.push_back({cfg.burn_in + i, p, kappa,
                               chain.log_target[i] - priors.log_density(p, kappa)});
    }
    return out;
}

}  // namespace seir
