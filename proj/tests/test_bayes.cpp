#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "seir/bayes.hpp"
#include "seir/error.hpp"

using namespace seir;

namespace {

ErrorKind kind_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("no error thrown");
    return ErrorKind::InvalidArgument;
}

struct MeanSe {
    double mean;
    double se;
};

// Batch-means estimate of the chain mean and its Monte Carlo standard error.
MeanSe batch_means(const std::vector<double>& x, std::size_t n_batches = 50) {
    const std::size_t len = x.size() / n_batches;
    std::vector<double> means(n_batches);
    for (std::size_t b = 0; b < n_batches; ++b)
        means[b] = std::accumulate(x.begin() + b * len, x.begin() + (b + 1) * len, 0.0) / len;
    const double m = std::accumulate(means.begin(), means.end(), 0.0) / n_batches;
    double ss = 0.0;
    for (double v : means) ss += (v - m) * (v - m);
    return {m, std::sqrt(ss / (n_batches - 1) / n_batches)};
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

TEST_CASE("ode_rk4 against the closed-form susceptible equation") {
    ModelParams m = reference_params();
    m.beta_s = m.beta_a = 0.0;
    m.mu = 0.5;
    // The non-susceptible mass sits in D, which neither flows back nor dies.
    StateVec init{0.9, 0.0, 0.0, 0.0, 0.0, 0.1};
    const double dt = 0.01;
    const Path p = ode_rk4(m, init, dt, 1000);
    REQUIRE(p.size() == 1001);
    for (std::size_t k = 0; k < p.size(); k += 50) {
        const double t = static_cast<double>(k) * dt;
        CHECK(std::abs(p.states[k].s - (1.0 - 0.1 * std::exp(-m.mu * t))) <= 1e-10);
    }
    REQUIRE(p.states.back().d.has_value());
    CHECK(*p.states.back().d == 0.1);
}

TEST_CASE("ode_rk4 is fourth order") {
    const ModelParams m = reference_params();
    const StateVec init = reference_initial_state();
    const double horizon = 40.0;
    auto final_is = [&](double dt) {
        return ode_rk4(m, init, dt, static_cast<std::size_t>(std::llround(horizon / dt))).states.back().i_s;
    };
    const double reference = final_is(2.0 / 16.0);
    const double e1 = std::abs(final_is(2.0) - reference);
    const double e2 = std::abs(final_is(1.0) - reference);
    MESSAGE("error ratio " << e1 / e2);
    CHECK(e1 / e2 > 12.0);
    CHECK(e1 / e2 < 20.0);
}

TEST_CASE("ode_rk4 conserves the simplex without fatalities") {
    ModelParams m = reference_params();
    m.theta = 0.0;
    const Path p = ode_rk4(m, reference_initial_state(), 0.1, 1000);
    for (const auto& x : p.states) CHECK(std::abs(x.sum() - 1.0) <= 1e-10);

    // With fatalities births replace deaths from the living classes only,
    // so the total including D grows by the integral of mu D.
    const ModelParams f = reference_params();
    const Path q = ode_rk4(f, reference_initial_state(), 0.1, 1000);
    const StateVec& last = q.states.back();
    const double excess = last.sum() + *last.d - 1.0;
    CHECK(*last.d > 0.0);
    CHECK(excess > 0.0);
    CHECK(excess <= f.mu * 100.0 * *last.d);
}

TEST_CASE("reference configuration grows over 47 days") {
    const Path p = ode_rk4(reference_params(), reference_initial_state(), 0.1, 470);
    for (std::size_t k = 1; k < p.size(); ++k) CHECK(p.states[k].i_s > p.states[k - 1].i_s);
}

TEST_CASE("cumulative_incidence") {
    ModelParams m = reference_params();
    Path p;
    p.dt = 0.5;
    StateVec x{0.99, 0.0, 0.005, 0.005, 0.0, std::nullopt};
    p.states.assign(5, x);
    for (double v : cumulative_incidence(p, m, 1000.0)) CHECK(v == 0.0);

    x.e = 0.002;
    x.s -= 0.002;
    p.states.assign(5, x);
    m.p = 1.0;
    for (double v : cumulative_incidence(p, m, 1000.0)) CHECK(v == 0.0);

    m.p = 0.4;
    const auto lam = cumulative_incidence(p, m, 1000.0);
    REQUIRE(lam.size() == 5);
    CHECK(lam[0] == 0.0);
    CHECK(lam[4] == doctest::Approx(0.6 * m.kappa * 0.002 * 2.0 * 1000.0).epsilon(1e-14));

    const Path growth = ode_rk4(reference_params(), reference_initial_state(), 0.1, 470);
    const auto c = cumulative_incidence(growth, reference_params(), 26446435.0);
    CHECK(std::is_sorted(c.begin(), c.end()));
}

TEST_CASE("poisson_loglik") {
    const std::vector<std::int64_t> zero{0};
    CHECK(poisson_loglik(zero, std::vector<double>{0.0}) == 0.0);
    const std::vector<std::int64_t> two{2};
    CHECK(poisson_loglik(two, std::vector<double>{2.0}) ==
          doctest::Approx(2 * std::log(2.0) - 2 - std::log(2.0)).epsilon(1e-14));
    CHECK(poisson_loglik(two, std::vector<double>{2.0}) == doctest::Approx(-1.3069).epsilon(1e-4));

    const std::vector<std::int64_t> y{3, 7, 1, 4, 10};
    const double ybar = 5.0;
    auto ll = [&](double lam) { return poisson_loglik(y, std::vector<double>(y.size(), lam)); };
    for (double d : {-1.0, -0.1, -1e-3, 1e-3, 0.1, 1.0}) CHECK(ll(ybar + d) < ll(ybar));

    CHECK(kind_of([&] { poisson_loglik(two, std::vector<double>{0.0}); }) == ErrorKind::Domain);
    CHECK(kind_of([&] { poisson_loglik(two, std::vector<double>{1.0, 2.0}); }) ==
          ErrorKind::LengthMismatch);
    const std::vector<std::int64_t> neg{-1};
    CHECK(kind_of([&] { poisson_loglik(neg, std::vector<double>{1.0}); }) == ErrorKind::NegativeCount);
}

TEST_CASE("prior density") {
    const PriorSpec prior;
    CHECK(prior.log_density(0.2, 0.2) == -std::numeric_limits<double>::infinity());
    CHECK(prior.log_density(0.5, -0.1) == -std::numeric_limits<double>::infinity());
    CHECK(prior.log_density(0.5, 0.3) - prior.log_density(0.6, 0.2) ==
          doctest::Approx(9 * std::log(1.5) - 50 * 0.1).epsilon(1e-13));
    PriorSpec bad;
    bad.p_hi = 0.2;
    CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("flat likelihood recovers the prior means") {
    IncidenceSeries empty;
    empty.population_n = 26446435;
    McmcConfig cfg;
    cfg.seed = 3;
    cfg.proposal_sd = {0.15, 0.06};
    const McmcResult r = metropolis(empty, PriorSpec{}, reference_params(), cfg);
    REQUIRE(r.samples.size() == 90000);
    std::vector<double> p, k;
    for (const auto& s : r.samples) {
        p.push_back(s.p);
        k.push_back(s.kappa);
        CHECK(s.loglik == 0.0);
    }
    const MeanSe mp = batch_means(p), mk = batch_means(k);
    INFO("p " << mp.mean << " +- " << mp.se << ", kappa " << mk.mean << " +- " << mk.se);
    CHECK(std::abs(mp.mean - 0.55) <= 3 * mp.se);
    CHECK(std::abs(mk.mean - 0.2) <= 3 * mk.se);
    CHECK(r.out_of_support > 0);
}

TEST_CASE("zero proposal scale keeps the chain in place") {
    IncidenceSeries empty;
    empty.population_n = 1000;
    McmcConfig cfg;
    cfg.iterations = 500;
    cfg.burn_in = 100;
    cfg.proposal_sd = {0.0, 0.0};
    const McmcResult r = metropolis(empty, PriorSpec{}, reference_params(), cfg);
    CHECK(r.acceptance_rate == 1.0);
    for (const auto& s : r.samples) {
        CHECK(s.p == 0.55);
        CHECK(s.kappa == 0.2);
    }
}

TEST_CASE("chain is deterministic given the seed") {
    IncidenceSeries empty;
    empty.population_n = 1000;
    McmcConfig cfg;
    cfg.iterations = 2000;
    cfg.burn_in = 0;
    cfg.seed = 11;
    const McmcResult a = metropolis(empty, PriorSpec{}, reference_params(), cfg);
    const McmcResult b = metropolis(empty, PriorSpec{}, reference_params(), cfg);
    REQUIRE(a.samples.size() == b.samples.size());
    for (std::size_t i = 0; i < a.samples.size(); ++i) CHECK(a.samples[i].p == b.samples[i].p);
    cfg.seed = 12;
    CHECK(metropolis(empty, PriorSpec{}, reference_params(), cfg).samples.back().p != a.samples.back().p);
}

TEST_CASE("two-state toy target") {
    // Density 1 on [0,1), 3 on [1,2): the chain spends a quarter of its time below 1.
    auto log_target = [](std::span<const double> x) {
        if (x[0] < 0.0 || x[0] >= 2.0) return -std::numeric_limits<double>::infinity();
        return x[0] < 1.0 ? 0.0 : std::log(3.0);
    };
    const std::vector<double> sd{1.0};
    const ChainResult c = random_walk_metropolis(log_target, {0.5}, sd, 1'000'000, 0, 21);
    double low = 0.0;
    for (const auto& s : c.states) low += s[0] < 1.0;
    low /= static_cast<double>(c.states.size());
    MESSAGE("fraction below 1: " << low);
    CHECK(std::abs(low - 0.25) <= 0.01 * 0.25);
    CHECK(c.out_of_support > 0);
}

TEST_CASE("synthetic recovery of (p, kappa)") {
    const ModelParams truth = reference_params();
    const StateVec init = reference_initial_state();
    const std::int64_t n = 26446435;
    const Path ode = ode_rk4(truth, init, 0.1, 460);
    const auto lam = cumulative_incidence(ode, truth, static_cast<double>(n));

    std::mt19937_64 gen(2020);
    IncidenceSeries series;
    series.population_n = n;
    series.counts.push_back(74);
    for (std::size_t day = 1; day <= 46; ++day) {
        std::poisson_distribution<std::int64_t> draw(lam[day * 10] - lam[(day - 1) * 10]);
        series.counts.push_back(draw(gen));
    }

    McmcConfig cfg;
    cfg.seed = 5;
    cfg.proposal_sd = {0.01, 0.002};
    const McmcResult r = metropolis(series, PriorSpec{}, truth, cfg);
    std::vector<double> p, k;
    for (const auto& s : r.samples) {
        p.push_back(s.p);
        k.push_back(s.kappa);
    }
    const double mp = median(p), mk = median(k);
    MESSAGE("median p " << mp << ", median kappa " << mk << ", acceptance " << r.acceptance_rate);
    CHECK(std::abs(mp - truth.p) <= 0.1 * truth.p);
    CHECK(std::abs(mk - truth.kappa) <= 0.1 * truth.kappa);
}

TEST_CASE("configuration errors") {
    McmcConfig cfg;
    cfg.burn_in = cfg.iterations;
    CHECK(kind_of([&] { cfg.validate(); }) == ErrorKind::InvalidArgument);
    cfg = McmcConfig{};
    cfg.ode_dt = 0.3;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = McmcConfig{};
    cfg.proposal_sd = {-0.1, 0.01};
    CHECK_THROWS_AS(cfg.validate(), Error);
}
