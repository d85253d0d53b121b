#include "seir/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/core.h>

#include "seir/error.hpp"
#include "seir/parallel.hpp"

namespace seir {

double left_riemann(std::span<const double> values, double dt) {
    if (values.empty()) throw Error(ErrorKind::EmptyInput, "left_riemann: no values");
    if (!(dt > 0.0)) throw Error(ErrorKind::InvalidArgument, "left_riemann: dt must be positive");
    double acc = 0.0;
    for (double v : values) acc += v * dt;
    return acc;
}

double ito_log_integral(std::span<const double> f, std::span<const double> x) {
    if (f.size() != x.size() || x.size() < 2)
        throw Error(ErrorKind::LengthMismatch,
                    fmt::format("ito_log_integral: need equal lengths >= 2, got {} and {}",
                                f.size(), x.size()));
    for (std::size_t k = 0; k < x.size(); ++k)
        if (!(x[k] > 0.0))
            throw Error(ErrorKind::Domain,
                        fmt::format("ito_log_integral: x[{}] = {} is not positive", k, x[k]), k);
    double acc = 0.0;
    double log_prev = std::log(x[0]);
    for (std::size_t k = 0; k + 1 < x.size(); ++k) {
        const double log_next = std::log(x[k + 1]);
        acc += f[k] * (log_next - log_prev);
        log_prev = log_next;
    }
    return acc;
}

double quadratic_variation(std::span<const double> x) {
    if (x.size() < 2)
        throw Error(ErrorKind::LengthMismatch, "quadratic_variation: need at least two points");
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < x.size(); ++k) {
        const double d = x[k + 1] - x[k];
        acc += d * d;
    }
    return acc;
}

namespace {

struct Columns {
    std::vector<double> s, one_minus_s, e, i_a, i_s, r;
};

Columns columns(const Path& path) {
    Columns c;
    const std::size_t n = path.size();
    c.s.reserve(n);
    c.one_minus_s.reserve(n);
    c.e.reserve(n);
    c.i_a.reserve(n);
    c.i_s.reserve(n);
    c.r.reserve(n);
    for (const auto& x : path.states) {
        c.s.push_back(x.s);
        c.one_minus_s.push_back(1.0 - x.s);
        c.e.push_back(x.e);
        c.i_a.push_back(x.i_a);
        c.i_s.push_back(x.i_s);
        c.r.push_back(x.r);
    }
    return c;
}

// All but the last sample: the left endpoints of the grid intervals.
std::span<const double> left(const std::vector<double>& v) {
    return std::span<const double>(v).first(v.size() - 1);
}

void require_length(const Path& path, const char* who) {
    if (!(path.dt > 0.0)) throw Error(ErrorKind::InvalidArgument, fmt::format("{}: dt <= 0", who));
    if (path.size() < 2)
        throw Error(ErrorKind::LengthMismatch, fmt::format("{}: need at least two states", who));
}

// 1-S, E, I_a, I_s must be positive at every grid point.
void require_interior(const Path& path, const char* who) {
    for (std::size_t k = 0; k < path.size(); ++k) {
        const StateVec& x = path.states[k];
        const char* bad = nullptr;
        if (!(1.0 - x.s > 0.0)) bad = "1-S";
        else if (!(x.e > 0.0)) bad = "E";
        else if (!(x.i_a > 0.0)) bad = "I_a";
        else if (!(x.i_s > 0.0)) bad = "I_s";
        if (bad)
            throw Error(ErrorKind::Domain,
                        fmt::format("{}: row {}: {} must be positive", who, k, bad), k);
    }
}

double symmetric_condition_number(double a, double b, double c) {
    const double mean = 0.5 * (a + c);
    const double radius = std::hypot(0.5 * (a - c), b);
    const double big = mean + radius;
    const double det = a * c - b * b;
    if (!(det > 0.0)) return std::numeric_limits<double>::infinity();
    return big / (det / big);
}

void guard_determinant(const JFunctionals& j) {
    const double det = j.j_s * j.j_a - j.j_sa * j.j_sa;
    if (!(det > 1e-12 * j.j_s * j.j_a) || !(j.j_s > 0.0) || !(j.j_a > 0.0))
        throw Error(ErrorKind::SingularSystem,
                    fmt::format("beta normal equations singular: det = {:.6g}, J_s J_a = {:.6g}",
                                det, j.j_s * j.j_a));
}

}  // namespace

SigmaEstimate estimate_sigma(const Path& path) {
    require_length(path, "estimate_sigma");
    const Columns c = columns(path);
    static constexpr const char* names[] = {"S", "E", "I_a", "I_s", "R"};
    const std::array<const std::vector<double>*, 5> level = {&c.s, &c.e, &c.i_a, &c.i_s, &c.r};
    const std::array<const std::vector<double>*, 5> scale = {&c.one_minus_s, &c.e, &c.i_a,
                                                             &c.i_s, &c.r};
    SigmaEstimate out;
    double total = 0.0;
    for (std::size_t i = 0; i < 5; ++i) {
        std::vector<double> sq(path.size() - 1);
        const auto& v = *scale[i];
        for (std::size_t k = 0; k + 1 < v.size(); ++k) sq[k] = v[k] * v[k];
        const double denom = left_riemann(sq, path.dt);
        if (!(denom >= 1e-30))
            throw Error(ErrorKind::DegenerateDenominator,
                        fmt::format("estimate_sigma: integral of squared {} level is {:.3g}",
                                    names[i], denom));
        out.components[i] = quadratic_variation(*level[i]) / denom;
        total += out.components[i];
    }
    out.sigma_hat = std::sqrt(total / 5.0);
    return out;
}

JFunctionals j_functionals(const Path& path, double kappa) {
    require_length(path, "j_functionals");
    require_interior(path, "j_functionals");
    JFunctionals j;
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
        const StateVec& x = path.states[k];
        const double u = x.s / (1.0 - x.s);
        const double v = x.s / x.e;
        const double w = u * u + v * v;
        j.j_s += x.i_s * x.i_s * w;
        j.j_a += x.i_a * x.i_a * w;
        j.j_sa += x.i_a * x.i_s * w;
        const double hs = kappa * x.e / x.i_s;
        const double ha = kappa * x.e / x.i_a;
        j.j_2 += hs * hs + ha * ha;
    }
    j.j_s *= path.dt;
    j.j_a *= path.dt;
    j.j_sa *= path.dt;
    j.j_2 *= path.dt;
    return j;
}

BetaEstimate estimate_betas(const Path& path, const BetaKnown& known) {
    const JFunctionals j = j_functionals(path, known.kappa);
    guard_determinant(j);

    const double half_var = 0.5 * known.sigma * known.sigma;
    double a_s = 0.0;
    double a_a = 0.0;
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
        const StateVec& x = path.states[k];
        const StateVec& y = path.states[k + 1];
        const double one_minus_s = 1.0 - x.s;
        const double dlog_s = std::log(1.0 - y.s) - std::log(one_minus_s);
        const double dlog_e = std::log(y.e) - std::log(x.e);
        // Coefficients multiplying I_star in the S and E equations.
        const double c_s = x.s / one_minus_s;
        const double c_e = x.s / x.e;
        const double rhs_s =
            dlog_s + (known.mu + known.gamma * x.r / one_minus_s + half_var) * path.dt;
        const double rhs_e = dlog_e + (known.mu + half_var + known.kappa) * path.dt;
        const double g = c_s * rhs_s + c_e * rhs_e;
        a_s += x.i_s * g;
        a_a += x.i_a * g;
    }

    const double det = j.j_s * j.j_a - j.j_sa * j.j_sa;
    BetaEstimate out;
    out.beta_s = (j.j_a * a_s - j.j_sa * a_a) / det;
    out.beta_a = (j.j_s * a_a - j.j_sa * a_s) / det;
    out.condition_number = symmetric_condition_number(j.j_s, j.j_sa, j.j_a);
    return out;
}

BetaEstimate estimate_betas_closed_form(const Path& path, const BetaKnown& known) {
    const JFunctionals j = j_functionals(path, known.kappa);
    guard_determinant(j);
    const Columns c = columns(path);
    const std::size_t n = path.size();
    const double dt = path.dt;
    const double half_var = 0.5 * known.sigma * known.sigma;

    // Integrands S I_star / (1-S) and S I_star / E, star = s, a.
    std::vector<double> fs_s(n), fe_s(n), fs_a(n), fe_a(n);
    for (std::size_t k = 0; k < n; ++k) {
        fs_s[k] = c.s[k] * c.i_s[k] / c.one_minus_s[k];
        fe_s[k] = c.s[k] * c.i_s[k] / c.e[k];
        fs_a[k] = c.s[k] * c.i_a[k] / c.one_minus_s[k];
        fe_a[k] = c.s[k] * c.i_a[k] / c.e[k];
    }
    auto times = [n](const std::vector<double>& a, auto&& weight) {
        std::vector<double> out(n);
        for (std::size_t k = 0; k < n; ++k) out[k] = a[k] * weight(k);
        return out;
    };
    auto susceptible_weight = [&](std::size_t k) {
        return known.mu + known.gamma * c.r[k] / c.one_minus_s[k] + half_var;
    };
    auto exposed_weight = [&](std::size_t) { return known.mu + half_var; };

    struct Terms {
        double log_s, drift_s, log_e, drift_e, inflow;
    };
    auto terms = [&](const std::vector<double>& fs, const std::vector<double>& fe) {
        return Terms{
            ito_log_integral(fs, c.one_minus_s),
            left_riemann(left(times(fs, susceptible_weight)), dt),
            ito_log_integral(fe, c.e),
            left_riemann(left(times(fe, exposed_weight)), dt),
            left_riemann(left(fe), dt),
        };
    };
    const Terms ts = terms(fs_s, fe_s);
    const Terms ta = terms(fs_a, fe_a);
    const double kap = known.kappa;
    const double det = j.j_s * j.j_a - j.j_sa * j.j_sa;

    BetaEstimate out;
    out.beta_s = (j.j_a * ts.log_s + j.j_a * ts.drift_s + j.j_a * ts.log_e + j.j_a * ts.drift_e +
                  kap * j.j_a * ts.inflow - j.j_sa * ta.log_s - j.j_sa * ta.drift_s -
                  j.j_sa * ta.log_e - j.j_sa * ta.drift_e - kap * j.j_sa * ta.inflow) /
                 det;
    out.beta_a = (-j.j_sa * ts.log_s - j.j_sa * ts.drift_s - j.j_sa * ts.log_e -
                  j.j_sa * ts.drift_e - kap * j.j_sa * ts.inflow + j.j_s * ta.log_s +
                  j.j_s * ta.drift_s + j.j_s * ta.log_e + j.j_s * ta.drift_e +
                  kap * j.j_s * ta.inflow) /
                 det;
    out.condition_number = symmetric_condition_number(j.j_s, j.j_sa, j.j_a);
    return out;
}

PEstimate estimate_p(const Path& path, const PKnown& known) {
    const JFunctionals j = j_functionals(path, known.kappa);
    if (!(j.j_2 > 1e-30))
        throw Error(ErrorKind::DegenerateDenominator,
                    fmt::format("estimate_p: J_2 = {:.3g}", j.j_2));
    const Columns c = columns(path);
    const std::size_t n = path.size();
    std::vector<double> ratio_s(n), ratio_a(n), ratio_s_sq(n);
    for (std::size_t k = 0; k < n; ++k) {
        ratio_s[k] = c.e[k] / c.i_s[k];
        ratio_a[k] = c.e[k] / c.i_a[k];
        ratio_s_sq[k] = ratio_s[k] * ratio_s[k];
    }
    const double kap = known.kappa;
    const double half_var = 0.5 * known.sigma * known.sigma;
    const double dt = path.dt;
    const double num = kap * kap * left_riemann(left(ratio_s_sq), dt) -
                       kap * ito_log_integral(ratio_s, c.i_s) +
                       kap * ito_log_integral(ratio_a, c.i_a) -
                       kap * (known.alpha_s + known.mu + half_var) * left_riemann(left(ratio_s), dt) +
                       kap * (known.alpha_a + known.mu + half_var) * left_riemann(left(ratio_a), dt);
    PEstimate out;
    out.p_hat = num / j.j_2;
    out.p_clamped = std::clamp(out.p_hat, 0.0, 1.0);
    out.out_of_range = out.p_hat < 0.0 || out.p_hat > 1.0;
    return out;
}

double girsanov_loglik(const Path& path, const DriftParams& theta, const DriftParams& theta0,
                       double kappa, double sigma,
                       std::optional<std::span<const double>> increments) {
    require_length(path, "girsanov_loglik");
    if (!(sigma > 0.0)) throw Error(ErrorKind::ZeroSigma, "girsanov_loglik needs sigma > 0");
    std::span<const double> dw;
    if (increments) dw = *increments;
    else if (path.wiener) dw = *path.wiener;
    else throw Error(ErrorKind::MissingIncrements, "girsanov_loglik: no Wiener increments");
    if (dw.size() + 1 != path.size())
        throw Error(ErrorKind::LengthMismatch,
                    fmt::format("girsanov_loglik: {} increments for {} states", dw.size(),
                                path.size()));
    require_interior(path, "girsanov_loglik");

    const double d_bs = theta.beta_s - theta0.beta_s;
    const double d_ba = theta.beta_a - theta0.beta_a;
    const double d_p = theta.p - theta0.p;
    double stochastic = 0.0;
    double quadratic = 0.0;
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
        const StateVec& x = path.states[k];
        const double d_force = d_bs * x.i_s + d_ba * x.i_a;
        const std::array<double, 4> diff = {
            -d_force * x.s / (sigma * (1.0 - x.s)),
            -d_force * x.s / (sigma * x.e),
            -d_p * kappa * x.e / (sigma * x.i_a),
            d_p * kappa * x.e / (sigma * x.i_s),
        };
        double sum = 0.0;
        double sq = 0.0;
        for (double v : diff) {
            sum += v;
            sq += v * v;
        }
        stochastic += sum * dw[k];
        quadratic += sq * path.dt;
    }
    return stochastic - 0.5 * quadratic;
}

double girsanov_loglik_observed(const Path& path, const DriftParams& theta,
                                const ModelParams& m) {
    require_length(path, "girsanov_loglik_observed");
    if (!(m.sigma > 0.0))
        throw Error(ErrorKind::ZeroSigma, "girsanov_loglik_observed needs sigma > 0");
    require_interior(path, "girsanov_loglik_observed");

    const double sig = m.sigma;
    const double dt = path.dt;
    const double d_bs = theta.beta_s - m.beta_s;
    const double d_ba = theta.beta_a - m.beta_a;
    const double d_p = theta.p - m.p;
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
        const StateVec& x = path.states[k];
        const StateVec& y = path.states[k + 1];
        const double oms = 1.0 - x.s;
        const double force0 = m.beta_s * x.i_s + m.beta_a * x.i_a;
        // Drift of -(1/sigma) d log c(X_i) under theta0.
        const std::array<double, 4> f0 = {
            (m.mu - force0 * x.s / oms + m.gamma * x.r / oms) / sig + 0.5 * sig,
            (-force0 * x.s / x.e + m.kappa + m.mu) / sig + 0.5 * sig,
            (-m.kappa * m.p * x.e / x.i_a + m.alpha_a + m.mu) / sig + 0.5 * sig,
            (-m.kappa * (1.0 - m.p) * x.e / x.i_s + m.alpha_s + m.mu) / sig + 0.5 * sig,
        };
        const std::array<double, 4> dlog = {
            std::log(1.0 - y.s) - std::log(oms),
            std::log(y.e) - std::log(x.e),
            std::log(y.i_a) - std::log(x.i_a),
            std::log(y.i_s) - std::log(x.i_s),
        };
        const double d_force = d_bs * x.i_s + d_ba * x.i_a;
        const std::array<double, 4> diff = {
            -d_force * x.s / (sig * oms),
            -d_force * x.s / (sig * x.e),
            -d_p * m.kappa * x.e / (sig * x.i_a),
            d_p * m.kappa * x.e / (sig * x.i_s),
        };
        for (std::size_t i = 0; i < 4; ++i) {
            const double dw = -dlog[i] / sig - f0[i] * dt;
            total += diff[i] * dw - 0.5 * diff[i] * diff[i] * dt;
        }
    }
    return total;
}

EstimateReport estimate_path(const Path& path, const ModelParams& known,
                             const EstimateOptions& options) {
    require_length(path, "estimate_path");
    EstimateReport rep;
    rep.window = hypothesis_window(path);

    const Path* used = &path;
    Path truncated;
    if (options.restrict_to_window) {
        if (!rep.window.satisfied)
            throw Error(ErrorKind::WindowViolated,
                        "hypothesis window is empty: the first step already violates it");
        if (rep.window.end_index + 1 < path.size()) {
            truncated = path.prefix(rep.window.end_index + 1);
            used = &truncated;
            rep.window_truncated = true;
        }
    }

    const SigmaEstimate sig = estimate_sigma(*used);
    rep.sigma_hat = sig.sigma_hat;
    rep.sigma_components = sig.components;
    const double sigma = options.known_sigma.value_or(sig.sigma_hat);

    const BetaEstimate betas =
        estimate_betas(*used, BetaKnown{known.mu, known.gamma, known.kappa, sigma});
    rep.beta_s_hat = betas.beta_s;
    rep.beta_a_hat = betas.beta_a;
    rep.condition_number = betas.condition_number;

    const PEstimate p =
        estimate_p(*used, PKnown{known.kappa, known.alpha_a, known.alpha_s, known.mu, sigma});
    rep.p_hat = p.p_hat;
    rep.p_clamped = p.p_clamped;
    rep.p_out_of_range = p.out_of_range;
    rep.j = j_functionals(*used, known.kappa);
    return rep;
}

double percentile(std::vector<double> values, double q) {
    if (values.empty()) throw Error(ErrorKind::EmptyInput, "percentile of an empty sample");
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

EstimateReport summarize_replicates(std::span<const EstimateReport> reports) {
    if (reports.empty()) throw Error(ErrorKind::EmptyInput, "no replicate reports to summarise");
    const double n = static_cast<double>(reports.size());
    auto collect = [&](auto field) {
        std::vector<double> v;
        v.reserve(reports.size());
        for (const auto& r : reports) v.push_back(field(r));
        return v;
    };
    auto mean = [n](const std::vector<double>& v) {
        return std::accumulate(v.begin(), v.end(), 0.0) / n;
    };
    auto interval = [](const std::vector<double>& v) {
        return Interval{percentile(v, 0.025), percentile(v, 0.975)};
    };

    const auto bs = collect([](const EstimateReport& r) { return r.beta_s_hat; });
    const auto ba = collect([](const EstimateReport& r) { return r.beta_a_hat; });
    const auto p = collect([](const EstimateReport& r) { return r.p_hat; });
    const auto sg = collect([](const EstimateReport& r) { return r.sigma_hat; });

    EstimateReport s;
    s.beta_s_hat = mean(bs);
    s.beta_a_hat = mean(ba);
    s.p_hat = mean(p);
    s.sigma_hat = mean(sg);
    s.p_clamped = std::clamp(s.p_hat, 0.0, 1.0);
    s.p_out_of_range = s.p_hat < 0.0 || s.p_hat > 1.0;
    for (std::size_t i = 0; i < 5; ++i)
        s.sigma_components[i] =
            mean(collect([i](const EstimateReport& r) { return r.sigma_components[i]; }));
    s.j.j_s = mean(collect([](const EstimateReport& r) { return r.j.j_s; }));
    s.j.j_a = mean(collect([](const EstimateReport& r) { return r.j.j_a; }));
    s.j.j_sa = mean(collect([](const EstimateReport& r) { return r.j.j_sa; }));
    s.j.j_2 = mean(collect([](const EstimateReport& r) { return r.j.j_2; }));
    s.condition_number =
        percentile(collect([](const EstimateReport& r) { return r.condition_number; }), 0.5);
    s.window = std::min_element(reports.begin(), reports.end(), [](const auto& a, const auto& b) {
                   return a.window.end_index < b.window.end_index;
               })->window;
    s.window_truncated =
        std::any_of(reports.begin(), reports.end(), [](const auto& r) { return r.window_truncated; });
    s.ci = ParamIntervals{interval(bs), interval(ba), interval(p), interval(sg)};
    return s;
}

ReplicateEstimates replicate_estimates(std::span<const double> obs_is,
                                       const ReconstructConfig& cfg, std::size_t n_rep,
                                       const EstimateOptions& options) {
    if (n_rep < 2) throw Error(ErrorKind::InvalidArgument, "replicate_estimates needs n_rep >= 2");
    cfg.validate();

    std::vector<std::optional<EstimateReport>> slots(n_rep);
    std::vector<std::optional<ReplicateFailure>> errors(n_rep);
    parallel_for(n_rep, [&](std::size_t i) {
        try {
            const Path path = reconstruct_latent(obs_is, cfg, i);
            slots[i] = estimate_path(path, cfg.params, options);
        } catch (const Error& err) {
            errors[i] = ReplicateFailure{i, err.kind(), err.what()};
        }
    });

    ReplicateEstimates out;
    for (std::size_t i = 0; i < n_rep; ++i) {
        if (slots[i]) {
            out.replicates.push_back(*slots[i]);
            out.indices.push_back(i);
        } else {
            out.failures.push_back(*errors[i]);
        }
    }
    if (out.failures.size() * 10 > n_rep || out.replicates.empty()) {
        const auto& first = out.failures.front();
        throw Error(ErrorKind::ReplicateFailure,
                    fmt::format("{} of {} replicates failed; first: replicate {}: {}",
                                out.failures.size(), n_rep, first.index, first.message),
                    first.index);
    }
    out.summary = summarize_replicates(out.replicates);
    return out;
}

}  // namespace seir
