// Command-line driver: simulate, reconstruct, estimate, validate, mc-study,
// mcmc and r0. Every library error maps to exit code 10 + ErrorKind.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <fmt/core.h>

#include "seir/bayes.hpp"
#include "seir/diagnostics.hpp"
#include "seir/error.hpp"
#include "seir/estimate.hpp"
#include "seir/io.hpp"
#include "seir/model.hpp"
#include "seir/reconstruct.hpp"
#include "seir/rng.hpp"
#include "seir/simulate.hpp"

namespace fs = std::filesystem;
using namespace seir;

namespace {

struct Globals {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out = ".";
    bool pedantic = false;
    std::string r0_convention = "paper";
};

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

RunConfig config_of(const Globals& g) {
    return g.config.empty() ? RunConfig{} : load_config(g.config);
}

std::uint64_t need_seed(const Globals& g, const char* cmd) {
    if (!g.seed) throw UsageError(fmt::format("{} is stochastic: --seed is required", cmd));
    return *g.seed;
}

void dump_json(const fs::path& file, const nlohmann::json& doc) {
    write_text(file, doc.dump(2) + "\n");
}

template <typename Fn>
void write_csv(const fs::path& file, Fn&& fn) {
    std::ostringstream os;
    fn(os);
    write_text(file, os.str());
}

std::vector<double> load_obs(const std::string& file, std::int64_t population_n) {
    return normalize(load_incidence(file, population_n));
}

int cmd_simulate(const Globals& g) {
    const RunConfig rc = config_of(g);
    SimConfig cfg;
    cfg.params = rc.params;
    cfg.init = rc.simulate.init;
    cfg.dt = rc.simulate.dt;
    cfg.n_steps = rc.simulate.n_steps;
    cfg.scheme = rc.simulate.scheme;
    cfg.positivity = rc.simulate.positivity;
    cfg.seed = need_seed(g, "simulate");
    const fs::path file = fs::path(g.out) / "path.csv";
    write_path_csv(file, simulate_path(cfg));
    std::cout << file.string() << '\n';
    return 0;
}

int cmd_reconstruct(const Globals& g, const std::string& incidence) {
    const RunConfig rc = config_of(g);
    ReconstructConfig cfg = make_reconstruct_config(rc, need_seed(g, "reconstruct"));
    cfg.pedantic_paper = g.pedantic;
    const auto obs = load_obs(incidence, rc.reconstruct.population_n);
    const auto paths = replicate_reconstructions(obs, cfg, rc.reconstruct.n_rep);

    nlohmann::json manifest;
    manifest["seed"] = cfg.seed;
    manifest["rng"] = kRngAlgorithm;
    manifest["pedantic_paper"] = cfg.pedantic_paper;
    manifest["source"] = incidence;
    manifest["replicates"] = nlohmann::json::array();
    for (std::size_t i = 0; i < paths.size(); ++i) {
        const std::string name = fmt::format("replicate_{:04d}.csv", i);
        write_path_csv(fs::path(g.out) / name, paths[i]);
        manifest["replicates"].push_back({{"index", i}, {"stream", i}, {"file", name}});
    }
    dump_json(fs::path(g.out) / "manifest.json", manifest);
    return 0;
}

int cmd_estimate(const Globals& g, const std::string& path_file, const std::string& incidence) {
    const RunConfig rc = config_of(g);
    EstimateOptions opts;
    opts.restrict_to_window = rc.estimate.restrict_to_window;
    opts.known_sigma = rc.estimate.known_sigma;

    EstimateReport report;
    if (!path_file.empty()) {
        const Path path = read_path_csv(path_file);
        report = estimate_path(path, rc.params, opts);
    } else if (!incidence.empty()) {
        ReconstructConfig cfg = make_reconstruct_config(rc, need_seed(g, "estimate"));
        cfg.pedantic_paper = g.pedantic;
        const auto obs = load_obs(incidence, rc.reconstruct.population_n);
        const auto rep = replicate_estimates(obs, cfg, rc.reconstruct.n_rep, opts);
        for (const auto& f : rep.failures)
            std::cerr << fmt::format("warning: replicate {} failed: {}\n", f.index, f.message);
        report = rep.summary;
    } else {
        throw UsageError("estimate needs --path or --incidence");
    }
    if (report.window_truncated)
        std::cerr << fmt::format("warning: estimation restricted to [{}, {}]\n",
                                 report.window.t_start, report.window.t_end);
    if (report.p_out_of_range)
        std::cerr << fmt::format("warning: p_hat = {} lies outside [0,1]\n", report.p_hat);
    dump_json(fs::path(g.out) / "report.json", to_json(report));
    return 0;
}

int cmd_validate(const Globals& g, const std::string& path_file) {
    const RunConfig rc = config_of(g);
    const Path path = read_path_csv(path_file);
    const ResidualSeries res = residual_increments(path, rc.params);
    const auto qq = qq_points(res.standardized);
    const NormalityVerdict verdict = normality_test(res.standardized, rc.validate.alpha);
    const fs::path out(g.out);
    write_csv(out / "residuals.csv", [&](std::ostream& os) { write_residual_csv(os, res); });
    write_csv(out / "qq.csv", [&](std::ostream& os) { write_qq_csv(os, qq); });
    dump_json(out / "normality.json", to_json(verdict));
    return 0;
}

int cmd_mc_study(const Globals& g) {
    const RunConfig rc = config_of(g);
    ConsistencyOptions opts;
    opts.scheme = rc.mc_study.scheme;
    opts.known_sigma = rc.mc_study.known_sigma;
    const auto rows = consistency_study(rc.params, rc.mc_study.horizons, rc.mc_study.n_rep,
                                        rc.mc_study.dt, need_seed(g, "mc-study"), opts);
    for (const auto& r : rows)
        if (r.flagged)
            std::cerr << fmt::format("warning: T = {}: {:.0f}% of replicates violate the window\n",
                                     r.horizon, 100.0 * r.window_violation_rate);
    write_csv(fs::path(g.out) / "consistency.csv",
              [&](std::ostream& os) { write_consistency_csv(os, rows); });
    return 0;
}

int cmd_mcmc(const Globals& g, const std::string& incidence) {
    const RunConfig rc = config_of(g);
    IncidenceSeries series;
    series.population_n = rc.mcmc.population_n;
    if (!incidence.empty()) series = load_incidence(incidence, rc.mcmc.population_n);
    McmcConfig cfg = rc.mcmc.config;
    cfg.seed = need_seed(g, "mcmc");
    if (!series.counts.empty() && !cfg.init) {
        StateVec x = reference_initial_state();
        x.i_s = static_cast<double>(series.counts.front()) / static_cast<double>(series.population_n);
        x.s = 1.0 - x.e - x.i_a - x.i_s - x.r;
        cfg.init = x;
    }
    const McmcResult res = metropolis(series, rc.mcmc.priors, rc.params, cfg);
    write_csv(fs::path(g.out) / "samples.csv",
              [&](std::ostream& os) { write_samples_csv(os, res.samples); });
    std::cout << fmt::format("acceptance_rate {:.4f} out_of_support {}\n", res.acceptance_rate,
                             res.out_of_support);
    return 0;
}

int cmd_r0(const Globals& g) {
    const RunConfig rc = config_of(g);
    R0Convention conv = R0Convention::Paper;
    if (g.r0_convention == "consistent") conv = R0Convention::Consistent;
    std::cout << fmt::format("{:#.6g}\n", r0(rc.params, conv));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stochastic SEIR simulation and estimation"};
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--config", g.config, "JSON run configuration")->check(CLI::ExistingFile);
    app.add_option("--seed", g.seed, "RNG seed (required for stochastic subcommands)");
    app.add_option("--out", g.out, "output directory");
    app.add_flag("--pedantic-paper", g.pedantic, "use the published update lines verbatim");
    app.add_option("--r0-convention", g.r0_convention, "paper or consistent")
        ->check(CLI::IsMember({"paper", "consistent"}));

    std::string path_file, incidence;
    auto* simulate = app.add_subcommand("simulate", "simulate one path");
    auto* reconstruct = app.add_subcommand("reconstruct", "latent paths from an incidence CSV");
    reconstruct->add_option("--incidence", incidence, "date,count CSV")->required();
    auto* estimate = app.add_subcommand("estimate", "estimate parameters");
    estimate->add_option("--path", path_file, "Path CSV");
    estimate->add_option("--incidence", incidence, "date,count CSV (replicate workflow)");
    auto* validate = app.add_subcommand("validate", "residual diagnostics of a path");
    validate->add_option("--path", path_file, "Path CSV")->required();
    auto* mc_study = app.add_subcommand("mc-study", "Monte Carlo consistency study");
    auto* mcmc = app.add_subcommand("mcmc", "Metropolis calibration of the ODE model");
    mcmc->add_option("--incidence", incidence, "date,count CSV (empty: prior only)");
    auto* r0_cmd = app.add_subcommand("r0", "basic reproduction number");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*simulate) return cmd_simulate(g);
        if (*reconstruct) return cmd_reconstruct(g, incidence);
        if (*estimate) return cmd_estimate(g, path_file, incidence);
        if (*validate) return cmd_validate(g, path_file);
        if (*mc_study) return cmd_mc_study(g);
        if (*mcmc) return cmd_mcmc(g, incidence);
        if (*r0_cmd) return cmd_r0(g);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        std::cerr << fmt::format("error[{}]: {}\n", to_string(e.kind()), e.what());
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
