#include "seir/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/core.h>

#include "seir/error.hpp"
#include "seir/rng.hpp"

namespace seir {

using nlohmann::json;

namespace {

std::string num(double x) { return fmt::format("{:.17g}", x); }

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

template <typename T>
bool parse_number(std::string_view field, T& value) {
    if (field.empty()) return false;
    if (field.front() == '+') field.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    return ec == std::errc() && ptr == field.data() + field.size();
}

[[noreturn]] void parse_error(std::size_t line, const std::string& what) {
    throw Error(ErrorKind::Parse, fmt::format("line {}: {}", line, what), line);
}

std::ifstream open_in(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw Error(ErrorKind::Io, fmt::format("cannot open {}", file.string()));
    return in;
}

}  // namespace

// -- Path CSV -------------------------------------------------------------------

void write_path_csv(std::ostream& out, const Path& path) {
    const bool with_dw = path.wiener.has_value();
    out << (with_dw ? "t,S,E,Ia,Is,R,dW\n" : "t,S,E,Ia,Is,R\n");
    for (std::size_t k = 0; k < path.size(); ++k) {
        const StateVec& x = path.states[k];
        out << num(path.time(k)) << ',' << num(x.s) << ',' << num(x.e) << ',' << num(x.i_a) << ','
            << num(x.i_s) << ',' << num(x.r);
        if (with_dw) {
            out << ',';
            if (k > 0) out << num((*path.wiener)[k - 1]);
        }
        out << '\n';
    }
}

void write_path_csv(const std::filesystem::path& file, const Path& path) {
    std::ostringstream os;
    write_path_csv(os, path);
    write_text(file, os.str());
}

Path read_path_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) parse_error(1, "missing header");
    const auto header = split(line);
    const std::vector<std::string_view> base{"t", "S", "E", "Ia", "Is", "R"};
    const bool with_dw = header.size() == 7 && header[6] == "dW";
    if (!(header.size() == 6 || with_dw) ||
        !std::equal(base.begin(), base.end(), header.begin()))
        parse_error(1, "expected header t,S,E,Ia,Is,R[,dW]");

    Path path;
    std::vector<double> times;
    std::vector<double> dw;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto fields = split(line);
        if (fields.size() != header.size())
            parse_error(lineno, fmt::format("expected {} fields, found {}", header.size(),
                                            fields.size()));
        double v[6];
        for (int i = 0; i < 6; ++i)
            if (!parse_number(fields[static_cast<std::size_t>(i)], v[i]))
                parse_error(lineno, fmt::format("bad number '{}'", fields[static_cast<std::size_t>(i)]));
        times.push_back(v[0]);
        path.states.push_back({v[1], v[2], v[3], v[4], v[5], std::nullopt});
        if (with_dw) {
            if (path.states.size() == 1) {
                if (!fields[6].empty()) parse_error(lineno, "first row must leave dW empty");
            } else {
                double w;
                if (!parse_number(fields[6], w))
                    parse_error(lineno, fmt::format("bad increment '{}'", fields[6]));
                dw.push_back(w);
            }
        }
    }
    if (path.states.empty()) parse_error(lineno, "no records");
    path.t0 = times.front();
    path.dt = times.size() > 1 ? times[1] - times[0] : 0.0;
    if (times.size() > 1 && !(path.dt > 0.0)) parse_error(3, "time column must increase");
    if (with_dw) {
        path.wiener = std::move(dw);
        path.rng_algorithm = kRngAlgorithm;
    }
    return path;
}

Path read_path_csv(const std::filesystem::path& file) {
    auto in = open_in(file);
    return read_path_csv(in);
}

// -- incidence -------------------------------------------------------------------

IncidenceSeries parse_incidence(std::istream& in, std::int64_t population_n) {
    std::string line;
    if (!std::getline(in, line)) parse_error(1, "no records");
    const auto header = split(line);
    if (header.size() != 2 || header[0] != "date" || header[1] != "count")
        parse_error(1, "expected header date,count");

    IncidenceSeries series;
    series.population_n = population_n;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto fields = split(line);
        if (fields.size() != 2)
            parse_error(lineno, fmt::format("expected 2 fields, found {}", fields.size()));
        std::int64_t count = 0;
        if (!parse_number(fields[1], count))
            parse_error(lineno, fmt::format("count '{}' is not an integer", fields[1]));
        if (count < 0)
            throw Error(ErrorKind::NegativeCount,
                        fmt::format("line {}: negative count {}", lineno, count), lineno);
        series.dates.emplace_back(fields[0]);
        series.counts.push_back(count);
    }
    if (series.counts.empty()) parse_error(lineno, "no records");
    series.validate();
    return series;
}

IncidenceSeries load_incidence(const std::filesystem::path& file, std::int64_t population_n) {
    auto in = open_in(file);
    return parse_incidence(in, population_n);
}

// -- reports -------------------------------------------------------------------

json to_json(const EstimateReport& r) {
    json ci = nullptr;
    if (r.ci) {
        auto iv = [](const Interval& i) { return json{{"lo", i.lo}, {"hi", i.hi}}; };
        ci = json{{"beta_s", iv(r.ci->beta_s)},
                  {"beta_a", iv(r.ci->beta_a)},
                  {"p", iv(r.ci->p)},
                  {"sigma", iv(r.ci->sigma)}};
    }
    return json{
        {"beta_s", r.beta_s_hat},
        {"beta_a", r.beta_a_hat},
        {"p", r.p_hat},
        {"sigma", r.sigma_hat},
        {"ci", ci},
        {"j_functionals", {{"J_s", r.j.j_s}, {"J_a", r.j.j_a}, {"J_sa", r.j.j_sa}, {"J_2", r.j.j_2}}},
        {"condition_number", r.condition_number},
        {"window",
         {{"t_start", r.window.t_start},
          {"t_end", r.window.t_end},
          {"end_index", r.window.end_index},
          {"satisfied", r.window.satisfied}}},
    };
}

json to_json(const NormalityVerdict& v) {
    return json{{"test", v.test_name},
                {"statistic", v.statistic},
                {"threshold", v.threshold},
                {"pass", v.pass}};
}

void write_qq_csv(std::ostream& out, std::span<const QQPoint> points) {
    out << "theoretical,empirical\n";
    for (const auto& q : points) out << num(q.theoretical) << ',' << num(q.empirical) << '\n';
}

void write_residual_csv(std::ostream& out, const ResidualSeries& res) {
    out << "k,raw,standardized\n";
    for (std::size_t k = 0; k < res.raw.size(); ++k)
        out << k + 1 << ',' << num(res.raw[k]) << ',' << num(res.standardized[k]) << '\n';
}

void write_consistency_csv(std::ostream& out, std::span<const ConsistencyRow> rows) {
    out << "T,abs_err_beta_s,abs_err_beta_a,abs_err_p,window_violation_rate\n";
    for (const auto& r : rows)
        out << num(r.horizon) << ',' << num(r.abs_err_beta_s) << ',' << num(r.abs_err_beta_a)
            << ',' << num(r.abs_err_p) << ',' << num(r.window_violation_rate) << '\n';
}

void write_samples_csv(std::ostream& out, std::span<const McmcSample> samples) {
    out << "iter,p,kappa,loglik\n";
    for (const auto& s : samples)
        out << s.iter << ',' << num(s.p) << ',' << num(s.kappa) << ',' << num(s.loglik) << '\n';
}

void write_text(const std::filesystem::path& file, const std::string& text) {
    std::error_code ec;
    if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path(), ec);
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, fmt::format("cannot write {}", file.string()));
    out << text;
    out.flush();
    if (!out) throw Error(ErrorKind::Io, fmt::format("write failed: {}", file.string()));
}

// -- configuration -----------------------------------------------------------------

namespace {

// Reads the keys of one JSON object, rejecting anything not consumed.
class Reader {
public:
    Reader(const json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
        if (!obj_.is_object()) throw Error(ErrorKind::Parse, where_ + ": expected an object");
    }

    template <typename T>
    void get(const char* key, T& out) {
        seen_.emplace_back(key);
        auto it = obj_.find(key);
        if (it == obj_.end()) return;
        try {
            out = it->template get<T>();
        } catch (const json::exception&) {
            throw Error(ErrorKind::Parse, fmt::format("{}.{}: wrong type", where_, key));
        }
    }

    template <typename T>
    void get_optional(const char* key, std::optional<T>& out) {
        seen_.emplace_back(key);
        auto it = obj_.find(key);
        if (it == obj_.end() || it->is_null()) return;
        T v{};
        try {
            v = it->template get<T>();
        } catch (const json::exception&) {
            throw Error(ErrorKind::Parse, fmt::format("{}.{}: wrong type", where_, key));
        }
        out = v;
    }

    template <typename Fn>
    void block(const char* key, Fn&& fn) {
        seen_.emplace_back(key);
        auto it = obj_.find(key);
        if (it == obj_.end()) return;
        Reader sub(*it, where_.empty() ? key : where_ + "." + key);
        fn(sub);
        sub.finish();
    }

    std::optional<std::string> get_string(const char* key) {
        std::optional<std::string> s;
        get_optional(key, s);
        return s;
    }

    void finish() const {
        for (auto it = obj_.begin(); it != obj_.end(); ++it)
            if (std::find(seen_.begin(), seen_.end(), it.key()) == seen_.end())
                throw Error(ErrorKind::Parse,
                            fmt::format("unknown key '{}{}'", where_.empty() ? "" : where_ + ".",
                                        it.key()));
    }

    const std::string& where() const { return where_; }

private:
    const json& obj_;
    std::string where_;
    std::vector<std::string> seen_;
};

Scheme parse_scheme(const std::string& s) {
    if (s == "euler-maruyama" || s == "em") return Scheme::EulerMaruyama;
    if (s == "milstein") return Scheme::Milstein;
    throw Error(ErrorKind::Parse, fmt::format("unknown scheme '{}'", s));
}

Positivity parse_positivity(const std::string& s) {
    if (s == "reject") return Positivity::Reject;
    if (s == "reflect0") return Positivity::Reflect0;
    throw Error(ErrorKind::Parse, fmt::format("unknown positivity policy '{}'", s));
}

void read_scheme(Reader& r, Scheme& out) {
    if (auto s = r.get_string("scheme")) out = parse_scheme(*s);
}

void read_positivity(Reader& r, Positivity& out) {
    if (auto s = r.get_string("positivity")) out = parse_positivity(*s);
}

}  // namespace

RunConfig parse_config(const json& doc) {
    RunConfig cfg;
    Reader top(doc, "");
    ModelParams& m = cfg.params;
    top.get("mu", m.mu);
    top.get("beta_s", m.beta_s);
    top.get("beta_a", m.beta_a);
    top.get("kappa", m.kappa);
    top.get("p", m.p);
    top.get("theta", m.theta);
    top.get("alpha_a", m.alpha_a);
    top.get("alpha_s", m.alpha_s);
    top.get("gamma", m.gamma);
    top.get("sigma", m.sigma);

    top.block("simulate", [&](Reader& r) {
        SimulateBlock& b = cfg.simulate;
        r.get("dt", b.dt);
        r.get("n_steps", b.n_steps);
        read_scheme(r, b.scheme);
        read_positivity(r, b.positivity);
        r.block("init", [&](Reader& s) {
            s.get("s", b.init.s);
            s.get("e", b.init.e);
            s.get("i_a", b.init.i_a);
            s.get("i_s", b.init.i_s);
            s.get("r", b.init.r);
        });
    });
    top.block("reconstruct", [&](Reader& r) {
        ReconstructBlock& b = cfg.reconstruct;
        r.get("n_rep", b.n_rep);
        r.get("dt", b.dt);
        r.get("init_e", b.init_e);
        r.get("init_ia", b.init_ia);
        r.get("init_r", b.init_r);
        r.get("population_n", b.population_n);
        read_scheme(r, b.scheme);
        read_positivity(r, b.positivity);
        if (auto s = r.get_string("init_mode")) {
            if (*s == "fixed") b.init_mode = InitMode::Fixed;
            else if (*s == "prior") b.init_mode = InitMode::Prior;
            else throw Error(ErrorKind::Parse, fmt::format("unknown init_mode '{}'", *s));
        }
    });
    top.block("estimate", [&](Reader& r) {
        r.get("restrict_to_window", cfg.estimate.restrict_to_window);
        r.get_optional("known_sigma", cfg.estimate.known_sigma);
    });
    top.block("validate", [&](Reader& r) { r.get("alpha", cfg.validate.alpha); });
    top.block("mc_study", [&](Reader& r) {
        McStudyBlock& b = cfg.mc_study;
        r.get("horizons", b.horizons);
        r.get("n_rep", b.n_rep);
        r.get("dt", b.dt);
        r.get("known_sigma", b.known_sigma);
        read_scheme(r, b.scheme);
    });
    top.block("mcmc", [&](Reader& r) {
        McmcBlock& b = cfg.mcmc;
        r.get("iterations", b.config.iterations);
        r.get("burn_in", b.config.burn_in);
        r.get("proposal_sd", b.config.proposal_sd);
        r.get("ode_dt", b.config.ode_dt);
        r.get_optional("initial", b.config.initial);
        r.get("population_n", b.population_n);
        r.block("priors", [&](Reader& p) {
            p.get("p_lo", b.priors.p_lo);
            p.get("p_hi", b.priors.p_hi);
            p.get("kappa_shape", b.priors.kappa_shape);
            p.get("kappa_rate", b.priors.kappa_rate);
        });
    });
    top.finish();
    cfg.params.validate();
    return cfg;
}

RunConfig load_config(const std::filesystem::path& file) {
    auto in = open_in(file);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::Parse, fmt::format("{}: {}", file.string(), e.what()));
    }
    return parse_config(doc);
}

ReconstructConfig make_reconstruct_config(const RunConfig& cfg, std::uint64_t seed) {
    ReconstructConfig rc;
    rc.params = cfg.params;
    rc.init_e = cfg.reconstruct.init_e;
    rc.init_ia = cfg.reconstruct.init_ia;
    rc.init_r = cfg.reconstruct.init_r;
    rc.dt = cfg.reconstruct.dt;
    rc.seed = seed;
    rc.init_mode = cfg.reconstruct.init_mode;
    rc.population_n = cfg.reconstruct.population_n;
    rc.scheme = cfg.reconstruct.scheme;
    rc.positivity = cfg.reconstruct.positivity;
    return rc;
}

}  // namespace seir
