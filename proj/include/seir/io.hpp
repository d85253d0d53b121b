#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "seir/bayes.hpp"
#include "seir/diagnostics.hpp"
#include "seir/estimate.hpp"
#include "seir/model.hpp"
#include "seir/reconstruct.hpp"
#include "seir/simulate.hpp"

namespace seir {

// -- Path CSV: t,S,E,Ia,Is,R[,dW] ----------------------------------------------
// The dW entry on row k is the increment that led into t_k; row 0 leaves it
// empty. Numbers use 17 significant digits so a write/read cycle is exact.

void write_path_csv(std::ostream& out, const Path& path);
void write_path_csv(const std::filesystem::path& file, const Path& path);
Path read_path_csv(std::istream& in);
Path read_path_csv(const std::filesystem::path& file);

// -- incidence CSV: date,count -------------------------------------------------

/// Throws Error(Parse) naming the line for malformed rows or an empty data
/// section, and Error(NegativeCount) for negative counts.
IncidenceSeries parse_incidence(std::istream& in, std::int64_t population_n);
IncidenceSeries load_incidence(const std::filesystem::path& file, std::int64_t population_n);

// -- reports -------------------------------------------------------------------

nlohmann::json to_json(const EstimateReport& report);
nlohmann::json to_json(const NormalityVerdict& verdict);

void write_qq_csv(std::ostream& out, std::span<const QQPoint> points);
void write_residual_csv(std::ostream& out, const ResidualSeries& residuals);
void write_consistency_csv(std::ostream& out, std::span<const ConsistencyRow> rows);
void write_samples_csv(std::ostream& out, std::span<const McmcSample> samples);

/// Writes `text` to `file`, creating parent directories. Error(Io) on failure.
void write_text(const std::filesystem::path& file, const std::string& text);

// -- run configuration ---------------------------------------------------------

struct SimulateBlock {
    double dt = 1e-3;
    std::size_t n_steps = 47;
    Scheme scheme = Scheme::EulerMaruyama;
    Positivity positivity = Positivity::Reject;
    StateVec init = reference_initial_state();
};

struct ReconstructBlock {
    std::size_t n_rep = 10;
    double dt = 1e-3;
    double init_e = reference_initial_state().e;
    double init_ia = reference_initial_state().i_a;
    double init_r = 0.0;
    InitMode init_mode = InitMode::Fixed;
    std::int64_t population_n = kReferencePopulation;
    Scheme scheme = Scheme::EulerMaruyama;
    Positivity positivity = Positivity::Reject;
};

struct EstimateBlock {
    bool restrict_to_window = false;
    std::optional<double> known_sigma;
};

struct ValidateBlock {
    double alpha = 0.01;
};

struct McStudyBlock {
    std::vector<double> horizons{0.02, 0.04, 0.08};
    std::size_t n_rep = 200;
    double dt = 1e-3;
    Scheme scheme = Scheme::EulerMaruyama;
    bool known_sigma = false;
};

struct McmcBlock {
    McmcConfig config;
    PriorSpec priors;
    std::int64_t population_n = kReferencePopulation;
};

/// Model parameters at the top level (keys named after the ModelParams
/// fields) plus one optional block per subcommand. Missing keys keep the
/// reference values; unknown keys are rejected.
struct RunConfig {
    ModelParams params = reference_params();
    SimulateBlock simulate;
    ReconstructBlock reconstruct;
    EstimateBlock estimate;
    ValidateBlock validate;
    McStudyBlock mc_study;
    McmcBlock mcmc;
};

/// Throws Error(Parse) for unknown keys or wrongly typed values.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::filesystem::path& file);
ReconstructConfig make_reconstruct_config(const RunConfig& cfg, std::uint64_t seed);

}  // namespace seir
