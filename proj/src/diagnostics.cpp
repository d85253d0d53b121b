#include "seir/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/core.h>

#include "seir/error.hpp"
#include "seir/parallel.hpp"

namespace seir {

ResidualSeries residual_increments(const Path& path, const ModelParams& params) {
    const double sig = params.sigma;
    if (!(sig > 0.0)) throw Error(ErrorKind::ZeroSigma, "residual_increments needs sigma > 0");
    if (path.size() < 2)
        throw Error(ErrorKind::LengthMismatch, "residual_increments: need at least two states");
    for (std::size_t k = 0; k < path.size(); ++k)
        if (!(1.0 - path.states[k].s > 0.0))
            throw Error(ErrorKind::Domain,
                        fmt::format("residual_increments: row {}: 1-S must be positive", k), k);

    ResidualSeries out;
    out.dt = path.dt;
    out.raw.reserve(path.size() - 1);
    out.standardized.reserve(path.size() - 1);
    const double root_dt = std::sqrt(path.dt);
    for (std::size_t k = 1; k < path.size(); ++k) {
        const StateVec& prev = path.states[k - 1];
        const StateVec& cur = path.states[k];
        const double one_minus_prev = 1.0 - prev.s;
        const double force = params.beta_s * prev.i_s + params.beta_a * prev.i_a;
        const double dw = -(std::log(1.0 - cur.s) - std::log(one_minus_prev)) / sig -
                          (params.mu / sig + 0.5 * sig) * path.dt +
                          (path.dt / sig) * (prev.s * force / one_minus_prev -
                                             params.gamma * prev.r / one_minus_prev);
        out.raw.push_back(dw);
        out.standardized.push_back(dw / root_dt);
    }
    return out;
}

double inverse_normal_cdf(double prob) {
    if (!(prob > 0.0 && prob < 1.0))
        throw Error(ErrorKind::Domain, fmt::format("inverse_normal_cdf: {} outside (0,1)", prob));

    // Acklam's coefficients.
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    static constexpr double p_low = 0.02425;

    if (prob < p_low) {
        const double q = std::sqrt(-2.0 * std::log(prob));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (prob > 1.0 - p_low) {
        const double q = std::sqrt(-2.0 * std::log1p(-prob));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = prob - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

std::vector<QQPoint> qq_points(std::span<const double> sample) {
    if (sample.size() < 3)
        throw Error(ErrorKind::TooFewPoints, "qq_points needs at least three values");
    std::vector<double> sorted(sample.begin(), sample.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    std::vector<QQPoint> out(sorted.size());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        out[i].theoretical = inverse_normal_cdf((static_cast<double>(i) + 0.5) / n);
        out[i].empirical = sorted[i];
    }
    return out;
}

NormalityVerdict normality_test(std::span<const double> sample, double alpha) {
    // chi-square(2) upper quantiles, -2 ln(alpha).
    double threshold = 0.0;
    if (alpha == 0.01) threshold = 9.210340371976184;
    else if (alpha == 0.05) threshold = 5.991464547107979;
    else throw Error(ErrorKind::InvalidArgument, "normality_test: alpha must be 0.01 or 0.05");
    if (sample.size() < 8)
        throw Error(ErrorKind::TooFewPoints, "normality_test needs at least eight values");

    const double n = static_cast<double>(sample.size());
    const double mean = std::accumulate(sample.begin(), sample.end(), 0.0) / n;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double x : sample) {
        const double d = x - mean;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    if (!(m2 > 0.0))
        throw Error(ErrorKind::DegenerateSample, "normality_test: sample has zero variance");
    const double skew = m3 / std::pow(m2, 1.5);
    const double kurt = m4 / (m2 * m2);

    NormalityVerdict v;
    v.test_name = "jarque-bera";
    v.statistic = n * (skew * skew / 6.0 + (kurt - 3.0) * (kurt - 3.0) / 24.0);
    v.threshold = threshold;
    v.pass = v.statistic <= v.threshold;
    return v;
}

std::vector<ConsistencyRow> consistency_study(const ModelParams& truth,
                                              std::span<const double> horizons,
                                              std::size_t n_rep, double dt, std::uint64_t seed,
                                              const ConsistencyOptions& options) {
    if (horizons.empty()) throw Error(ErrorKind::EmptyInput, "consistency_study: no horizons");
    if (n_rep == 0) throw Error(ErrorKind::InvalidArgument, "consistency_study: n_rep must be >= 1");
    if (!(dt > 0.0)) throw Error(ErrorKind::InvalidArgument, "consistency_study: dt must be positive");
    std::vector<std::size_t> steps;
    for (std::size_t h = 0; h < horizons.size(); ++h) {
        if (h > 0 && !(horizons[h] > horizons[h - 1]))
            throw Error(ErrorKind::InvalidArgument, "consistency_study: horizons must increase");
        const auto n = static_cast<std::size_t>(std::llround(horizons[h] / dt));
        if (n < 1) throw Error(ErrorKind::InvalidArgument, "consistency_study: horizon below dt");
        steps.push_back(n);
    }

    SimConfig cfg;
    cfg.params = truth;
    cfg.init = options.init.value_or(reference_initial_state());
    cfg.dt = dt;
    cfg.n_steps = steps.back();
    cfg.scheme = options.scheme;
    cfg.seed = seed;
    EstimateOptions est;
    if (options.known_sigma) est.known_sigma = truth.sigma;

    struct Cell {
        bool ok = false;
        bool window_empty = false;
        double err_bs = 0.0, err_ba = 0.0, err_p = 0.0;
    };
    std::vector<std::vector<Cell>> cells(n_rep, std::vector<Cell>(horizons.size()));
    parallel_for(n_rep, [&](std::size_t r) {
        SimConfig local = cfg;
        local.stream = r;
        Path full;
        try {
            full = simulate_path(local);
        } catch (const Error&) {
            return;
        }
        for (std::size_t h = 0; h < horizons.size(); ++h) {
            const Path path = full.prefix(steps[h] + 1);
            Cell& cell = cells[r][h];
            cell.window_empty = !hypothesis_window(path).satisfied;
            try {
                const EstimateReport rep = estimate_path(path, truth, est);
                cell.err_bs = std::abs(rep.beta_s_hat - truth.beta_s);
                cell.err_ba = std::abs(rep.beta_a_hat - truth.beta_a);
                cell.err_p = std::abs(rep.p_hat - truth.p);
                cell.ok = true;
            } catch (const Error&) {
            }
        }
    });

    std::vector<ConsistencyRow> rows;
    for (std::size_t h = 0; h < horizons.size(); ++h) {
        ConsistencyRow row;
        row.horizon = horizons[h];
        std::vector<double> bs, ba, p;
        std::size_t empty = 0;
        for (std::size_t r = 0; r < n_rep; ++r) {
            const Cell& cell = cells[r][h];
            if (cell.window_empty) ++empty;
            if (!cell.ok) {
                ++row.n_failed;
                continue;
            }
            bs.push_back(cell.err_bs);
            ba.push_back(cell.err_ba);
            p.push_back(cell.err_p);
        }
        if (empty == n_rep)
            throw Error(ErrorKind::WindowViolated,
                        fmt::format("every replicate violates the hypothesis window at T = {}",
                                    horizons[h]),
                        h);
        if (bs.empty())
            throw Error(ErrorKind::ReplicateFailure,
                        fmt::format("every replicate failed at T = {}", horizons[h]), h);
        row.n_ok = bs.size();
        row.abs_err_beta_s = percentile(bs, 0.5);
        row.abs_err_beta_a = percentile(ba, 0.5);
        row.abs_err_p = percentile(p, 0.5);
        row.window_violation_rate = static_cast<double>(empty) / static_cast<double>(n_rep);
        row.flagged = row.window_violation_rate > 0.2;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace seir
