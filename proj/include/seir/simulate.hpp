#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "seir/model.hpp"

namespace seir {

enum class Scheme { EulerMaruyama, Milstein };

/// What a step does when a compartment would leave (0,1).
enum class Positivity {
    Reject,    ///< throw Error(Positivity) carrying the step index
    Reflect0,  ///< clamp the offending compartment to kReflectFloor
};

inline constexpr double kReflectFloor = 1e-12;

struct SimConfig {
    ModelParams params;
    StateVec init;
    double dt = 1e-3;
    std::size_t n_steps = 1;
    Scheme scheme = Scheme::EulerMaruyama;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    Positivity positivity = Positivity::Reject;

    void validate() const;
};

struct WienerIncrements {
    std::vector<double> values;
};

/// n_steps independent N(0, dt) draws from stream `stream` of `seed`.
WienerIncrements draw_increments(std::uint64_t seed, std::size_t n_steps, double dt,
                                 std::uint64_t stream = 0);

/// One Euler-Maruyama step of the stochastic system; the same dw enters
/// all five equations.
StateVec step_em(const StateVec& x, double dw, const SimConfig& cfg);

/// Euler-Maruyama step plus the Milstein corrections of the affine
/// diffusions: -sigma^2 (1-S)(dw^2-dt)/2 for S, +sigma^2 X (dw^2-dt)/2 otherwise.
StateVec step_milstein(const StateVec& x, double dw, const SimConfig& cfg);

/// Path of n_steps + 1 states driven by draw_increments(cfg.seed, ...).
Path simulate_path(const SimConfig& cfg);

/// Same as simulate_path but with caller-supplied increments; cfg.n_steps
/// is ignored in favour of increments.size().
Path simulate_with_increments(const SimConfig& cfg, std::span<const double> increments);

}  // namespace seir
