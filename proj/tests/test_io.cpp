#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "seir/error.hpp"
#include "seir/io.hpp"

using namespace seir;
namespace fs = std::filesystem;

namespace {

Path simulated(std::uint64_t seed) {
    SimConfig cfg;
    cfg.params = reference_params();
    cfg.init = reference_initial_state();
    cfg.n_steps = 46;
    cfg.seed = seed;
    return simulate_path(cfg);
}

IncidenceSeries parse(const std::string& text) {
    std::istringstream in(text);
    return parse_incidence(in, kReferencePopulation);
}

std::string first_line(const std::string& text) { return text.substr(0, text.find('\n')); }

std::set<std::string> keys_of(const nlohmann::json& j) {
    std::set<std::string> out;
    for (auto it = j.begin(); it != j.end(); ++it) out.insert(it.key());
    return out;
}

}  // namespace

TEST_CASE("path CSV round trip is exact") {
    const Path p = simulated(7);
    std::stringstream buf;
    write_path_csv(buf, p);
    CHECK(first_line(buf.str()) == "t,S,E,Ia,Is,R,dW");
    const Path q = read_path_csv(buf);
    CHECK(q == p);

    Path bare = p;
    bare.wiener.reset();
    bare.rng_algorithm.clear();
    std::stringstream b2;
    write_path_csv(b2, bare);
    CHECK(first_line(b2.str()) == "t,S,E,Ia,Is,R");
    CHECK(read_path_csv(b2) == bare);

    const fs::path dir = fs::temp_directory_path() / "seir_io_test";
    fs::remove_all(dir);
    write_path_csv(dir / "nested" / "path.csv", p);
    CHECK(read_path_csv(dir / "nested" / "path.csv") == p);
    fs::remove_all(dir);
}

TEST_CASE("path CSV errors") {
    std::istringstream bad_header("t,S,E\n0,1,0\n");
    CHECK_THROWS_AS(read_path_csv(bad_header), Error);
    std::istringstream bad_number("t,S,E,Ia,Is,R\n0,0.9,0.1,0,0,0\n0.1,x,0.1,0,0,0\n");
    try {
        read_path_csv(bad_number);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Parse);
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    CHECK_THROWS_AS(read_path_csv(fs::path("/nonexistent/dir/path.csv")), Error);
}

TEST_CASE("incidence CSV") {
    const IncidenceSeries s = parse("date,count\n2020-03-10,74\n2020-03-11,80\n");
    REQUIRE(s.counts.size() == 2);
    CHECK(s.counts[0] == 74);
    CHECK(s.population_n == 26446435);
    CHECK(s.dates.front() == "2020-03-10");

    try {
        parse("date,count\n");
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Parse);
        CHECK(std::string(e.what()).find("no records") != std::string::npos);
    }
    try {
        parse("date,count\n2020-03-10,74\n2020-03-11,7.5\n");
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Parse);
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    try {
        parse("date,count\n2020-03-10,-4\n");
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NegativeCount);
    }
    CHECK_THROWS_AS(parse("day,n\n2020-03-10,4\n"), Error);
    CHECK_THROWS_AS(parse("date,count\n2020-03-10\n"), Error);
}

TEST_CASE("estimate report JSON has exactly the documented keys") {
    const EstimateReport r = estimate_path(simulated(1), reference_params());
    const nlohmann::json j = to_json(r);
    CHECK(keys_of(j) == std::set<std::string>{"beta_s", "beta_a", "p", "sigma", "ci", "j_functionals",
                                              "condition_number", "window"});
    CHECK(j["ci"].is_null());
    CHECK(keys_of(j["j_functionals"]) == std::set<std::string>{"J_s", "J_a", "J_sa", "J_2"});
    CHECK(keys_of(j["window"]) == std::set<std::string>{"t_start", "t_end", "end_index", "satisfied"});
    CHECK(j["beta_s"].get<double>() == r.beta_s_hat);

    EstimateReport with_ci = r;
    with_ci.ci = ParamIntervals{{0.0, 1.0}, {0.1, 0.9}, {0.2, 0.8}, {0.3, 0.7}};
    const nlohmann::json c = to_json(with_ci)["ci"];
    CHECK(keys_of(c) == std::set<std::string>{"beta_s", "beta_a", "p", "sigma"});
    CHECK(keys_of(c["p"]) == std::set<std::string>{"lo", "hi"});
    CHECK(c["p"]["lo"].get<double>() == 0.2);

    const nlohmann::json v = to_json(NormalityVerdict{1.5, 9.21, true, "jarque-bera"});
    CHECK(v["pass"].get<bool>());
    CHECK(v["test"].get<std::string>() == "jarque-bera");
}

TEST_CASE("artifact CSV headers") {
    std::ostringstream qq, res, cons, samples;
    const std::vector<QQPoint> pts{{-1.0, -0.5}};
    write_qq_csv(qq, pts);
    CHECK(first_line(qq.str()) == "theoretical,empirical");
    write_residual_csv(res, ResidualSeries{{0.1}, {0.2}, 0.25});
    CHECK(first_line(res.str()) == "k,raw,standardized");
    const std::vector<ConsistencyRow> rows{ConsistencyRow{}};
    write_consistency_csv(cons, rows);
    CHECK(first_line(cons.str()) == "T,abs_err_beta_s,abs_err_beta_a,abs_err_p,window_violation_rate");
    const std::vector<McmcSample> draws{{0, 0.5, 0.2, -3.0}};
    write_samples_csv(samples, draws);
    CHECK(first_line(samples.str()) == "iter,p,kappa,loglik");
    CHECK(samples.str().find("0,0.5,0.20000000000000001,-3") != std::string::npos);
}

TEST_CASE("run configuration") {
    const RunConfig defaults = parse_config(nlohmann::json::object());
    CHECK(defaults.params.beta_s == reference_params().beta_s);
    CHECK(defaults.simulate.n_steps == 47);

    const auto doc = nlohmann::json::parse(R"({
        "sigma": 0.02, "p": 0.5,
        "simulate": {"n_steps": 100, "scheme": "milstein", "positivity": "reflect0"},
        "reconstruct": {"n_rep": 3, "init_mode": "prior"},
        "estimate": {"known_sigma": 0.01},
        "mc_study": {"horizons": [0.01, 0.02], "n_rep": 4},
        "mcmc": {"iterations": 2000, "burn_in": 100, "priors": {"kappa_rate": 40}}
    })");
    const RunConfig c = parse_config(doc);
    CHECK(c.params.sigma == 0.02);
    CHECK(c.params.p == 0.5);
    CHECK(c.simulate.n_steps == 100);
    CHECK(c.simulate.scheme == Scheme::Milstein);
    CHECK(c.simulate.positivity == Positivity::Reflect0);
    CHECK(c.reconstruct.init_mode == InitMode::Prior);
    CHECK(c.estimate.known_sigma == 0.01);
    CHECK(c.mc_study.horizons == std::vector<double>{0.01, 0.02});
    CHECK(c.mcmc.config.iterations == 2000);
    CHECK(c.mcmc.priors.kappa_rate == 40.0);

    const ReconstructConfig rc = make_reconstruct_config(c, 9);
    CHECK(rc.seed == 9);
    CHECK(rc.params.sigma == 0.02);
    CHECK(rc.init_mode == InitMode::Prior);

    auto kind = [](const char* text) {
        try {
            parse_config(nlohmann::json::parse(text));
        } catch (const Error& e) {
            return e.kind();
        }
        return ErrorKind::InvalidArgument;
    };
    CHECK(kind(R"({"sigmaa": 0.01})") == ErrorKind::Parse);
    CHECK(kind(R"({"simulate": {"steps": 10}})") == ErrorKind::Parse);
    CHECK(kind(R"({"sigma": "small"})") == ErrorKind::Parse);
    CHECK(kind(R"({"simulate": {"scheme": "heun"}})") == ErrorKind::Parse);
}

TEST_CASE("write_text reports unwritable targets") {
    try {
        write_text("/proc/seir_cannot_write/x.txt", "x");
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Io);
    }
}
