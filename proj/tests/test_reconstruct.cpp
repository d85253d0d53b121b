#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "seir/error.hpp"
#include "seir/reconstruct.hpp"
#include "seir/simulate.hpp"

using namespace seir;

namespace {

Path reference_simulation(std::uint64_t seed) {
    SimConfig cfg;
    cfg.params = reference_params();
    cfg.init = reference_initial_state();
    cfg.dt = 1e-3;
    cfg.n_steps = 46;  // 47 grid points
    cfg.seed = seed;
    return simulate_path(cfg);
}

std::vector<double> symptomatic(const Path& p) {
    std::vector<double> out;
    for (const auto& x : p.states) out.push_back(x.i_s);
    return out;
}

}  // namespace

TEST_CASE("normalize") {
    IncidenceSeries s;
    s.counts = {0, 0};
    s.population_n = 100;
    CHECK(normalize(s) == std::vector<double>{0.0, 0.0});

    s.counts = {74};
    s.population_n = 26446435;
    CHECK(normalize(s)[0] == doctest::Approx(2.798108705388836e-06).epsilon(1e-14));

    s.counts = {1, 2, 3};
    s.population_n = 10;
    const auto v = normalize(s);
    CHECK(v[0] == doctest::Approx(0.1));
    CHECK(v[1] == doctest::Approx(0.2));
    CHECK(v[2] == doctest::Approx(0.3));

    s.counts.clear();
    try {
        normalize(s);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::EmptyInput);
    }
    s.counts = {3, -1};
    CHECK_THROWS_AS(normalize(s), Error);
    s.counts = {30, 1};
    s.population_n = 10;
    CHECK_THROWS_AS(normalize(s), Error);
}

TEST_CASE("zero transmission and zero noise leave the latent chain at rest") {
    ReconstructConfig cfg;
    cfg.params = reference_params();
    cfg.params.beta_s = cfg.params.beta_a = 0.0;
    cfg.params.sigma = 0.0;
    const std::vector<double> obs(20, 0.0);
    const Path p = reconstruct_latent(obs, cfg);
    for (const auto& x : p.states) {
        CHECK(x.s == 1.0);
        CHECK(x.e == 0.0);
        CHECK(x.i_a == 0.0);
        CHECK(x.r == 0.0);
    }

    // With recovered mass present, S follows the deterministic update.
    cfg.init_r = 0.1;
    const Path q = reconstruct_latent(obs, cfg);
    const ModelParams& m = cfg.params;
    for (std::size_t k = 1; k < q.size(); ++k) {
        const StateVec& a = q.states[k - 1];
        CHECK(q.states[k].s == doctest::Approx(a.s + (m.mu * (1 - a.s) + m.gamma * a.r) * cfg.dt)
                                   .epsilon(1e-15));
    }
}

TEST_CASE("observations pinned, simplex closed by R") {
    const Path sim = reference_simulation(3);
    const auto obs = symptomatic(sim);
    ReconstructConfig cfg = reference_reconstruct_config(11);
    cfg.positivity = Positivity::Reflect0;
    const Path p = reconstruct_latent(obs, cfg);
    REQUIRE(p.size() == obs.size());
    for (std::size_t k = 0; k < p.size(); ++k) {
        CHECK(p.states[k].i_s == obs[k]);
        CHECK(std::abs(p.states[k].sum() - 1.0) <= 4e-16);
    }
    REQUIRE(p.wiener.has_value());
    CHECK(p.wiener->size() == obs.size() - 1);
}

TEST_CASE("recurrence replay: same seed and initials reproduce the simulated path") {
    const Path sim = reference_simulation(3);
    const auto obs = symptomatic(sim);
    const ReconstructConfig cfg = reference_reconstruct_config(3);
    const Path rec = reconstruct_latent(obs, cfg);
    REQUIRE(rec.size() == sim.size());
    CHECK(*rec.wiener == *sim.wiener);
    for (std::size_t k = 0; k < sim.size(); ++k) {
        CHECK(std::abs(rec.states[k].e - sim.states[k].e) <= 1e-13 * sim.states[k].e);
        CHECK(std::abs(rec.states[k].i_a - sim.states[k].i_a) <= 1e-13 * sim.states[k].i_a);
        CHECK(std::abs(rec.states[k].s - sim.states[k].s) <= 1e-15);
        CHECK(std::abs(rec.states[k].r - sim.states[k].r) <= 1e-15);
    }
}

TEST_CASE("errors") {
    ReconstructConfig cfg = reference_reconstruct_config(1);
    const std::vector<double> one{1e-6};
    try {
        reconstruct_latent(one, cfg);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::LengthMismatch);
    }

    // A jump in the observations pushes the closing R below zero.
    const std::vector<double> jump{1e-6, 0.5, 0.5};
    try {
        reconstruct_latent(jump, cfg);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Positivity);
        REQUIRE(e.index().has_value());
        CHECK(*e.index() == 0);
    }

    cfg.dt = -1.0;
    CHECK_THROWS_AS(reconstruct_latent(std::vector<double>{1e-6, 1e-6}, cfg), Error);
}

TEST_CASE("sigma = 0 reconstruction is independent of the seed") {
    const auto obs = symptomatic(reference_simulation(3));
    ReconstructConfig a = reference_reconstruct_config(1);
    a.params.sigma = 0.0;
    ReconstructConfig b = a;
    b.seed = 999;
    CHECK(reconstruct_latent(obs, a).states == reconstruct_latent(obs, b).states);
}

TEST_CASE("prior initialisation draws E(0), I_a(0) from the uniform prior") {
    const auto obs = symptomatic(reference_simulation(3));
    ReconstructConfig cfg = reference_reconstruct_config(5);
    cfg.init_mode = InitMode::Prior;
    cfg.positivity = Positivity::Reflect0;
    const double n = static_cast<double>(cfg.population_n);
    const auto paths = replicate_reconstructions(obs, cfg, 50);
    bool differ = false;
    for (const auto& p : paths) {
        CHECK(p.states[0].e * n >= 47.0);
        CHECK(p.states[0].e * n <= 2100.0);
        CHECK(p.states[0].i_a * n >= 47.0);
        CHECK(p.states[0].i_a * n <= 2100.0);
        differ = differ || p.states[0].e != paths[0].states[0].e;
    }
    CHECK(differ);
}

TEST_CASE("replicate seeding") {
    const auto obs = symptomatic(reference_simulation(3));
    ReconstructConfig cfg = reference_reconstruct_config(21);
    cfg.positivity = Positivity::Reflect0;
    const auto one = replicate_reconstructions(obs, cfg, 1);
    CHECK(one[0] == reconstruct_latent(obs, cfg));

    const auto shared = replicate_reconstructions(obs, cfg, 2, SeedSplit::Shared);
    CHECK(shared[0] == shared[1]);
    const auto split = replicate_reconstructions(obs, cfg, 2);
    CHECK(split[0].wiener != split[1].wiener);
    CHECK(split[1] == reconstruct_latent(obs, cfg, 1));
    CHECK(replicate_reconstructions(obs, cfg, 8) == replicate_reconstructions(obs, cfg, 8));
}

TEST_CASE("replicate errors carry the replicate index") {
    ReconstructConfig cfg = reference_reconstruct_config(1);
    const std::vector<double> jump{1e-6, 0.5, 0.5};
    try {
        replicate_reconstructions(jump, cfg, 3);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Positivity);
        CHECK(std::string(e.what()).find("replicate") != std::string::npos);
    }
}

TEST_CASE("replicate mean of E agrees with a larger oracle run") {
    const auto obs = symptomatic(reference_simulation(3));
    ReconstructConfig cfg = reference_reconstruct_config(100);
    cfg.positivity = Positivity::Reflect0;
    auto moments = [&](std::size_t n, std::uint64_t seed) {
        cfg.seed = seed;
        const auto paths = replicate_reconstructions(obs, cfg, n);
        std::vector<double> mean(obs.size(), 0.0), sq(obs.size(), 0.0);
        for (const auto& p : paths)
            for (std::size_t k = 0; k < obs.size(); ++k) {
                mean[k] += p.states[k].e;
                sq[k] += p.states[k].e * p.states[k].e;
            }
        std::vector<double> se(obs.size());
        for (std::size_t k = 0; k < obs.size(); ++k) {
            mean[k] /= static_cast<double>(n);
            const double var = sq[k] / static_cast<double>(n) - mean[k] * mean[k];
            se[k] = std::sqrt(std::max(var, 0.0) / static_cast<double>(n));
        }
        return std::pair{mean, se};
    };
    const auto [m1, se1] = moments(1000, 100);
    const auto [m2, se2] = moments(10000, 200);
    for (std::size_t k = 1; k < obs.size(); k += 5)
        CHECK(std::abs(m1[k] - m2[k]) <= 3.0 * std::hypot(se1[k], se2[k]));
}

TEST_CASE("pedantic mode reproduces the printed update lines") {
    const auto obs = symptomatic(reference_simulation(3));
    ReconstructConfig cfg = reference_reconstruct_config(3);
    cfg.pedantic_paper = true;
    cfg.positivity = Positivity::Reflect0;
    const Path p = reconstruct_latent(obs, cfg);
    const ModelParams& m = cfg.params;
    const StateVec& x = p.states[0];
    const double dt = cfg.dt;
    const double dw = (*p.wiener)[0];
    const double s1 = x.s - (m.mu + m.beta_a * x.i_a + m.beta_s * x.i_s) * dt * x.s +
                      (m.mu + m.gamma * x.r) * dt - m.sigma * (1 - x.s) * dw;
    const double e1 = x.e - (m.kappa + m.mu) * dt * x.e + dt * (m.beta_s * x.i_s + m.beta_a * x.i_a * x.s) -
                      m.sigma * x.e * dw;
    const double ia1 = x.i_a - m.p * m.kappa * x.e * dt * x.i_a - (m.alpha_a + m.mu) * x.i_a * dt -
                       m.sigma * x.i_a * dt;
    CHECK(p.states[1].s == doctest::Approx(s1).epsilon(1e-15));
    CHECK(p.states[1].e == doctest::Approx(e1).epsilon(1e-14));
    CHECK(p.states[1].i_a == doctest::Approx(ia1).epsilon(1e-14));

    cfg.pedantic_paper = false;
    CHECK(reconstruct_latent(obs, cfg).states[1].e != p.states[1].e);
}
