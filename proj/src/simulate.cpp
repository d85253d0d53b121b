#include "seir/simulate.hpp"

#include <cmath>

#include <fmt/core.h>

#include "seir/error.hpp"
#include "seir/rng.hpp"

namespace seir {

void SimConfig::validate() const {
    params.validate();
    validate_state(init);
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw Error(ErrorKind::InvalidArgument, "dt must be positive");
}

WienerIncrements draw_increments(std::uint64_t seed, std::size_t n_steps, double dt,
                                 std::uint64_t stream) {
    if (!(dt > 0.0)) throw Error(ErrorKind::InvalidArgument, "dt must be positive");
    Pcg32 rng(seed, stream);
    NormalSampler normal(rng);
    const double scale = std::sqrt(dt);
    WienerIncrements out;
    out.values.resize(n_steps);
    for (auto& v : out.values) v = scale * normal();
    return out;
}

namespace {

// A compartment "leaves" (0,1) when it ends outside [0,1], or hits zero
// having been positive. Compartments that start at exactly 0 may stay there.
StateVec enforce_positivity(const StateVec& before, std::array<double, 5> after,
                            Positivity policy) {
    const auto prev = before.as_array();
    for (std::size_t i = 0; i < after.size(); ++i) {
        const bool left = after[i] < 0.0 || after[i] > 1.0 || (prev[i] > 0.0 && after[i] <= 0.0) ||
                          !std::isfinite(after[i]);
        if (!left) continue;
        if (policy == Positivity::Reject) {
            static constexpr const char* names[] = {"S", "E", "I_a", "I_s", "R"};
            throw Error(ErrorKind::Positivity,
                        fmt::format("{} left (0,1): {:.17g}", names[i], after[i]));
        }
        after[i] = after[i] > 1.0 ? 1.0 - kReflectFloor : kReflectFloor;
    }
    return StateVec::from_array(after);
}

std::array<double, 5> em_update(const StateVec& x, double dw, const SimConfig& cfg) {
    const auto drift = stochastic_drift(x, cfg.params);
    const auto diffusion = stochastic_diffusion(x, cfg.params.sigma);
    auto next = x.as_array();
    for (std::size_t i = 0; i < next.size(); ++i) next[i] += drift[i] * cfg.dt + diffusion[i] * dw;
    return next;
}

}  // namespace

StateVec step_em(const StateVec& x, double dw, const SimConfig& cfg) {
    return enforce_positivity(x, em_update(x, dw, cfg), cfg.positivity);
}

StateVec step_milstein(const StateVec& x, double dw, const SimConfig& cfg) {
    auto next = em_update(x, dw, cfg);
    const double sig = cfg.params.sigma;
    const double c = 0.5 * sig * sig * (dw * dw - cfg.dt);
    next[0] -= c * (1.0 - x.s);
    next[1] += c * x.e;
    next[2] += c * x.i_a;
    next[3] += c * x.i_s;
    next[4] += c * x.r;
    return enforce_positivity(x, next, cfg.positivity);
}

Path simulate_with_increments(const SimConfig& cfg, std::span<const double> increments) {
    cfg.validate();
    Path path;
    path.t0 = 0.0;
    path.dt = cfg.dt;
    path.rng_algorithm = kRngAlgorithm;
    path.states.reserve(increments.size() + 1);
    path.states.push_back(cfg.init);
    path.states.back().d.reset();
    for (std::size_t k = 0; k < increments.size(); ++k) {
        const StateVec& x = path.states.back();
        try {
            path.states.push_back(cfg.scheme == Scheme::Milstein
                                      ? step_milstein(x, increments[k], cfg)
                                      : step_em(x, increments[k], cfg));
        } catch (const Error& err) {
            throw Error(err.kind(), fmt::format("step {}: {}", k, err.what()), k);
        }
    }
    path.wiener = std::vector<double>(increments.begin(), increments.end());
    return path;
}

Path simulate_path(const SimConfig& cfg) {
    cfg.validate();
    const auto dw = draw_increments(cfg.seed, cfg.n_steps, cfg.dt, cfg.stream);
    return simulate_with_increments(cfg, dw.values);
}

}  // namespace seir
