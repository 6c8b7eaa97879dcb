#pragma once

// Run configurations and the batch driver behind the command-line tool.
// A configuration is one JSON document; every experiment writes its results
// into an output directory as CSV tables plus summary.json and manifest.json.

#include "acoustoplate/diagnostics.hpp"
#include "acoustoplate/equilibria.hpp"
#include "acoustoplate/integrator.hpp"
#include "acoustoplate/parallel.hpp"

#include "json.hpp"

#include <algorithm>
#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace acoustoplate {

inline constexpr const char* version_string = "0.1.0";

namespace cli {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

// --- configuration -------------------------------------------------------------------

struct TimeControls {
    double dt = 1e-3;
    double T = 1.0;
    double save_every = 0.1;
    double tol = 1e-12;
    int max_newton = 30;
};

struct InitialSpec {
    std::string kind = "energy_ball";  // energy_ball | zero | smooth
    double R = 20.0;                   // energy level for energy_ball
    double amplitude = 0.5;            // mode amplitude for smooth
};

struct EquilibriaBlock {
    int n_starts = 8;
    double tol = 1e-10;
    double dedupe = 1e-6;
    bool hessian = true;
};

struct DecayBlock {
    int n_trajectories = 4;
    double R = 50.0;
    double threshold = 1e-4;  // final distance counted as converged
};

struct StabilizabilityBlock {
    int n_pairs = 2;
    double R = 50.0;
    double delta = 0.25;
};

struct SampleBlock {
    int n_trajectories = 8;
    double T_burn = 20.0;
    double T_sample = 10.0;
    double sample_every = 0.1;
    double R = 50.0;
};

struct DimensionBlock {
    SampleBlock sample;
    int projection_dim = 8;
};

using ParamPair = std::pair<double, double>;  // (gamma, kappa)

struct SemicontinuityBlock {
    SampleBlock sample;
    ParamPair lambda0{0.5, 0.0};
    std::vector<ParamPair> lambdas;
};

struct SweepBlock {
    std::string experiment = "decay";
    std::vector<ParamPair> cells;
};

inline const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names{"simulate",  "equilibria", "decay",         "stabilizability",
                                                "dimension", "sweep",      "semicontinuity"};
    return names;
}

struct RunConfig {
    std::string experiment = "simulate";
    std::uint64_t seed = 1;
    int threads = 1;
    int nx = 16, ny = 16;
    ModelParams params;
    double load_uniform = 0.0;
    std::vector<double> load_nodes;  // overrides load_uniform when non-empty
    TimeControls time;
    InitialSpec initial;
    EquilibriaBlock equilibria;
    DecayBlock decay;
    StabilizabilityBlock stabilizability;
    DimensionBlock dimension;
    SemicontinuityBlock semicontinuity;
    SweepBlock sweep;

    GridSpec grid() const { return GridSpec::make(nx, ny); }
};

namespace detail {

[[noreturn]] inline void field_error(const std::string& path, const std::string& msg) {
    throw ConfigError("config field '" + path + "': " + msg);
}

/// Typed access to one JSON object; remembers which keys were read so that
/// misspelled keys are reported instead of silently ignored.
class Fields {
public:
    Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) field_error(path_.empty() ? "<root>" : path_, "expected an object");
    }

    std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    const json* raw(const std::string& key) {
        used_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    double number(const std::string& key, double def) {
        const json* v = raw(key);
        if (!v) return def;
        if (!v->is_number()) field_error(at(key), "expected a number, got " + std::string(v->type_name()));
        return v->get<double>();
    }

    int integer(const std::string& key, int def) {
        const json* v = raw(key);
        if (!v) return def;
        if (!v->is_number_integer()) field_error(at(key), "expected an integer, got " + std::string(v->type_name()));
        return v->get<int>();
    }

    std::uint64_t unsigned_integer(const std::string& key, std::uint64_t def) {
        const json* v = raw(key);
        if (!v) return def;
        if (!v->is_number_unsigned()) field_error(at(key), "expected a non-negative integer");
        return v->get<std::uint64_t>();
    }

    bool boolean(const std::string& key, bool def) {
        const json* v = raw(key);
        if (!v) return def;
        if (!v->is_boolean()) field_error(at(key), "expected true or false");
        return v->get<bool>();
    }

    std::string text(const std::string& key, const std::string& def) {
        const json* v = raw(key);
        if (!v) return def;
        if (!v->is_string()) field_error(at(key), "expected a string");
        return v->get<std::string>();
    }

    std::vector<double> numbers(const std::string& key, std::vector<double> def) {
        const json* v = raw(key);
        if (!v) return def;
        return number_list(*v, at(key));
    }

    std::optional<Fields> object(const std::string& key) {
        const json* v = raw(key);
        if (!v) return std::nullopt;
        return Fields(*v, at(key));
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!used_.count(it.key())) field_error(at(it.key()), "unknown key");
    }

    static std::vector<double> number_list(const json& v, const std::string& path) {
        if (!v.is_array()) field_error(path, "expected an array of numbers");
        std::vector<double> out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number()) field_error(path + "[" + std::to_string(i) + "]", "expected a number");
            out.push_back(v[i].get<double>());
        }
        return out;
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

inline NonlinearitySpec read_nonlinearity(Fields f, const NonlinearitySpec& def) {
    NonlinearitySpec out = def;
    const json* odd = f.raw("odd_coeffs");
    const json* ts = f.raw("table_s");
    const json* tv = f.raw("table_values");
    if (odd && (ts || tv)) field_error(f.at("odd_coeffs"), "give either odd_coeffs or table_s/table_values, not both");
    if (odd) {
        auto c = Fields::number_list(*odd, f.at("odd_coeffs"));
        if (c.empty()) field_error(f.at("odd_coeffs"), "needs at least one coefficient");
        out = NonlinearitySpec::odd_polynomial(std::move(c));
    } else if (ts || tv) {
        if (!ts || !tv) field_error(f.at(ts ? "table_values" : "table_s"), "missing (tables need both)");
        try {
            out = NonlinearitySpec::tabulated(Fields::number_list(*ts, f.at("table_s")),
                                              Fields::number_list(*tv, f.at("table_values")));
        } catch (const ConfigError& e) {
            field_error(f.at("table_s"), e.what());
        }
    }
    f.finish();
    return out;
}

inline json nonlinearity_json(const NonlinearitySpec& s) {
    json j;
    if (s.is_polynomial()) j["odd_coeffs"] = s.odd_coeffs;
    else {
        j["table_s"] = s.table_s;
        j["table_values"] = s.table_values;
    }
    return j;
}

inline std::vector<ParamPair> read_pairs(const json& v, const std::string& path) {
    if (!v.is_array()) field_error(path, "expected an array of [gamma, kappa] pairs");
    std::vector<ParamPair> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const auto xs = Fields::number_list(v[i], path + "[" + std::to_string(i) + "]");
        if (xs.size() != 2) field_error(path + "[" + std::to_string(i) + "]", "expected [gamma, kappa]");
        out.emplace_back(xs[0], xs[1]);
    }
    return out;
}

inline json pairs_json(const std::vector<ParamPair>& ps) {
    json a = json::array();
    for (const auto& [g, k] : ps) a.push_back({g, k});
    return a;
}

inline SampleBlock read_sample(Fields& f, SampleBlock d) {
    d.n_trajectories = f.integer("n_trajectories", d.n_trajectories);
    d.T_burn = f.number("T_burn", d.T_burn);
    d.T_sample = f.number("T_sample", d.T_sample);
    d.sample_every = f.number("sample_every", d.sample_every);
    d.R = f.number("R", d.R);
    return d;
}

inline void write_sample(json& j, const SampleBlock& s) {
    j["n_trajectories"] = s.n_trajectories;
    j["T_burn"] = s.T_burn;
    j["T_sample"] = s.T_sample;
    j["sample_every"] = s.sample_every;
    j["R"] = s.R;
}

inline void check_sample(const SampleBlock& s, const std::string& path) {
    if (s.n_trajectories < 1) field_error(path + ".n_trajectories", "must be >= 1");
    if (!(s.T_burn > 0.0)) field_error(path + ".T_burn", "must be positive");
    if (!(s.T_sample >= 0.0)) field_error(path + ".T_sample", "must be non-negative");
    if (!(s.sample_every > 0.0)) field_error(path + ".sample_every", "must be positive");
    if (!(s.R > 0.0)) field_error(path + ".R", "must be positive");
}

inline std::pair<std::size_t, std::size_t> line_col(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col > 1 ? col - 1 : 1};
}

} // namespace detail

inline RunConfig config_from_json(const json& root) {
    RunConfig c;
    detail::Fields top(root, "");
    c.experiment = top.text("experiment", c.experiment);
    c.seed = top.unsigned_integer("seed", c.seed);
    c.threads = top.integer("threads", c.threads);
    if (auto g = top.object("grid")) {
        c.nx = g->integer("nx", c.nx);
        c.ny = g->integer("ny", c.ny);
        g->finish();
    }
    if (auto p = top.object("params")) {
        auto& m = c.params;
        m.alpha = p->number("alpha", m.alpha);
        m.beta = p->number("beta", m.beta);
        m.gamma = p->number("gamma", m.gamma);
        m.kappa = p->number("kappa", m.kappa);
        m.Q = p->number("Q", m.Q);
        m.mu = p->number("mu", m.mu);
        if (const json* load = p->raw("p0")) {
            if (load->is_number()) c.load_uniform = load->get<double>();
            else c.load_nodes = detail::Fields::number_list(*load, p->at("p0"));
        }
        if (auto f = p->object("f")) m.f = detail::read_nonlinearity(*f, m.f);
        if (auto g = p->object("g")) m.g = detail::read_nonlinearity(*g, m.g);
        p->finish();
    }
    if (auto t = top.object("time")) {
        c.time.dt = t->number("dt", c.time.dt);
        c.time.T = t->number("T", c.time.T);
        c.time.save_every = t->number("save_every", c.time.save_every);
        c.time.tol = t->number("tol", c.time.tol);
        c.time.max_newton = t->integer("max_newton", c.time.max_newton);
        t->finish();
    }
    if (auto i = top.object("initial")) {
        c.initial.kind = i->text("kind", c.initial.kind);
        c.initial.R = i->number("R", c.initial.R);
        c.initial.amplitude = i->number("amplitude", c.initial.amplitude);
        i->finish();
    }
    if (auto e = top.object("equilibria")) {
        c.equilibria.n_starts = e->integer("n_starts", c.equilibria.n_starts);
        c.equilibria.tol = e->number("tol", c.equilibria.tol);
        c.equilibria.dedupe = e->number("dedupe", c.equilibria.dedupe);
        c.equilibria.hessian = e->boolean("hessian", c.equilibria.hessian);
        e->finish();
    }
    if (auto d = top.object("decay")) {
        c.decay.n_trajectories = d->integer("n_trajectories", c.decay.n_trajectories);
        c.decay.R = d->number("R", c.decay.R);
        c.decay.threshold = d->number("threshold", c.decay.threshold);
        d->finish();
    }
    if (auto s = top.object("stabilizability")) {
        c.stabilizability.n_pairs = s->integer("n_pairs", c.stabilizability.n_pairs);
        c.stabilizability.R = s->number("R", c.stabilizability.R);
        c.stabilizability.delta = s->number("delta", c.stabilizability.delta);
        s->finish();
    }
    if (auto d = top.object("dimension")) {
        c.dimension.sample = detail::read_sample(*d, c.dimension.sample);
        c.dimension.projection_dim = d->integer("projection_dim", c.dimension.projection_dim);
        d->finish();
    }
    if (auto s = top.object("semicontinuity")) {
        c.semicontinuity.sample = detail::read_sample(*s, c.semicontinuity.sample);
        if (const json* l0 = s->raw("lambda0")) {
            const auto xs = detail::Fields::number_list(*l0, s->at("lambda0"));
            if (xs.size() != 2) detail::field_error(s->at("lambda0"), "expected [gamma, kappa]");
            c.semicontinuity.lambda0 = {xs[0], xs[1]};
        }
        if (const json* ls = s->raw("lambdas")) c.semicontinuity.lambdas = detail::read_pairs(*ls, s->at("lambdas"));
        s->finish();
    }
    if (auto s = top.object("sweep")) {
        c.sweep.experiment = s->text("experiment", c.sweep.experiment);
        const json* cells = s->raw("cells");
        const json* gammas = s->raw("gamma");
        const json* kappas = s->raw("kappa");
        if (cells && (gammas || kappas)) detail::field_error(s->at("cells"), "give either cells or gamma/kappa lists");
        if (cells) c.sweep.cells = detail::read_pairs(*cells, s->at("cells"));
        if (gammas || kappas) {
            if (!gammas || !kappas) detail::field_error(s->at(gammas ? "kappa" : "gamma"), "missing");
            for (double g : detail::Fields::number_list(*gammas, s->at("gamma")))
                for (double k : detail::Fields::number_list(*kappas, s->at("kappa"))) c.sweep.cells.emplace_back(g, k);
        }
        s->finish();
    }
    top.finish();
    return c;
}

/// Parses configuration text; syntax errors carry line and column.
inline RunConfig parse_config(const std::string& text, const std::string& source = "<config>") {
    json root;
    try {
        root = json::parse(text, nullptr, true, true);
    } catch (const json::parse_error& e) {
        const auto [line, col] = detail::line_col(text, e.byte);
        throw ConfigError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": parse error: " + e.what());
    }
    return config_from_json(root);
}

inline RunConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.string());
}

/// Fully resolved configuration, defaults included.
inline json config_to_json(const RunConfig& c) {
    json j;
    j["experiment"] = c.experiment;
    j["seed"] = c.seed;
    j["threads"] = c.threads;
    j["grid"] = {{"nx", c.nx}, {"ny", c.ny}};
    json p;
    p["alpha"] = c.params.alpha;
    p["beta"] = c.params.beta;
    p["gamma"] = c.params.gamma;
    p["kappa"] = c.params.kappa;
    p["Q"] = c.params.Q;
    p["mu"] = c.params.mu;
    if (c.load_nodes.empty()) p["p0"] = c.load_uniform;
    else p["p0"] = c.load_nodes;
    p["f"] = detail::nonlinearity_json(c.params.f);
    p["g"] = detail::nonlinearity_json(c.params.g);
    j["params"] = p;
    j["time"] = {{"dt", c.time.dt},
                 {"T", c.time.T},
                 {"save_every", c.time.save_every},
                 {"tol", c.time.tol},
                 {"max_newton", c.time.max_newton}};
    j["initial"] = {{"kind", c.initial.kind}, {"R", c.initial.R}, {"amplitude", c.initial.amplitude}};
    j["equilibria"] = {{"n_starts", c.equilibria.n_starts},
                       {"tol", c.equilibria.tol},
                       {"dedupe", c.equilibria.dedupe},
                       {"hessian", c.equilibria.hessian}};
    j["decay"] = {{"n_trajectories", c.decay.n_trajectories}, {"R", c.decay.R}, {"threshold", c.decay.threshold}};
    j["stabilizability"] = {
        {"n_pairs", c.stabilizability.n_pairs}, {"R", c.stabilizability.R}, {"delta", c.stabilizability.delta}};
    json d;
    detail::write_sample(d, c.dimension.sample);
    d["projection_dim"] = c.dimension.projection_dim;
    j["dimension"] = d;
    json s;
    detail::write_sample(s, c.semicontinuity.sample);
    s["lambda0"] = {c.semicontinuity.lambda0.first, c.semicontinuity.lambda0.second};
    s["lambdas"] = detail::pairs_json(c.semicontinuity.lambdas);
    j["semicontinuity"] = s;
    j["sweep"] = {{"experiment", c.sweep.experiment}, {"cells", detail::pairs_json(c.sweep.cells)}};
    return j;
}

inline std::string config_hash(const RunConfig& c) {
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
    for (unsigned char ch : config_to_json(c).dump()) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
    return buf;
}

inline AssumptionLevel required_level(const std::string& experiment) {
    if (experiment == "decay") return AssumptionLevel::Attractor;
    if (experiment == "stabilizability" || experiment == "dimension" || experiment == "semicontinuity")
        return AssumptionLevel::Dimension;
    return AssumptionLevel::Basic;
}

inline ModelParams params_at(const RunConfig& c, double gamma, double kappa) {
    ModelParams p = c.params;
    p.gamma = gamma;
    p.kappa = kappa;
    const int nb = c.nx - 1;
    if (!c.load_nodes.empty()) {
        p.p0 = Eigen::Map<const Vector>(c.load_nodes.data(), static_cast<Eigen::Index>(c.load_nodes.size()));
    } else if (c.load_uniform != 0.0) {
        p.p0 = Vector::Constant(nb, c.load_uniform);
    }
    return p;
}

/// Every check that can fail before compute: structure, ranges, nonlinearity assumptions.
inline void validate(const RunConfig& c) {
    const auto& names = experiment_names();
    if (std::find(names.begin(), names.end(), c.experiment) == names.end())
        detail::field_error("experiment", "unknown experiment '" + c.experiment + "'");
    if (c.threads < 0) detail::field_error("threads", "must be >= 0 (0 means all cores)");
    try {
        c.grid().validate();
    } catch (const ConfigError& e) {
        detail::field_error("grid", e.what());
    }
    if (!(c.time.dt > 0.0)) detail::field_error("time.dt", "must be positive");
    if (!(c.time.T > 0.0)) detail::field_error("time.T", "must be positive");
    if (!(c.time.tol > 0.0)) detail::field_error("time.tol", "must be positive");
    if (!(c.time.save_every >= 0.0)) detail::field_error("time.save_every", "must be non-negative");
    if (c.time.max_newton < 1) detail::field_error("time.max_newton", "must be >= 1");
    if (!c.load_nodes.empty() && static_cast<int>(c.load_nodes.size()) != c.nx - 1)
        detail::field_error("params.p0", "needs " + std::to_string(c.nx - 1) + " interior beam values");

    std::string exp = c.experiment;
    std::vector<ParamPair> cells{{c.params.gamma, c.params.kappa}};
    if (exp == "sweep") {
        exp = c.sweep.experiment;
        if (exp == "sweep" || exp == "semicontinuity" ||
            std::find(names.begin(), names.end(), exp) == names.end())
            detail::field_error("sweep.experiment", "cannot sweep '" + exp + "'");
        if (c.sweep.cells.empty()) detail::field_error("sweep", "empty (gamma, kappa) grid");
        cells = c.sweep.cells;
    }
    if (exp == "semicontinuity") {
        const auto& s = c.semicontinuity;
        detail::check_sample(s.sample, "semicontinuity");
        if (s.lambdas.empty()) detail::field_error("semicontinuity.lambdas", "empty parameter list");
        cells = s.lambdas;
        cells.push_back(s.lambda0);
    }
    for (const auto& [g, k] : cells) {
        try {
            params_at(c, g, k).validate();
        } catch (const ConfigError& e) {
            detail::field_error("params", e.what());
        }
    }
    const std::set<std::string> kinds{"energy_ball", "zero", "smooth"};
    if (!kinds.count(c.initial.kind)) detail::field_error("initial.kind", "expected energy_ball, zero or smooth");
    if (c.initial.kind == "energy_ball" && !(c.initial.R > 0.0)) detail::field_error("initial.R", "must be positive");
    if (exp == "equilibria" || exp == "decay") {
        if (c.equilibria.n_starts < 1) detail::field_error("equilibria.n_starts", "must be >= 1");
        if (!(c.equilibria.tol > 0.0)) detail::field_error("equilibria.tol", "must be positive");
    }
    if (exp == "decay") {
        if (c.decay.n_trajectories < 1) detail::field_error("decay.n_trajectories", "must be >= 1");
        if (!(c.decay.R > 0.0)) detail::field_error("decay.R", "must be positive");
    }
    if (exp == "stabilizability") {
        if (c.stabilizability.n_pairs < 1) detail::field_error("stabilizability.n_pairs", "must be >= 1");
        if (!(c.stabilizability.R > 0.0)) detail::field_error("stabilizability.R", "must be positive");
        if (!(c.stabilizability.delta > 0.0 && c.stabilizability.delta < 1.0))
            detail::field_error("stabilizability.delta", "must lie in (0, 1)");
    }
    if (exp == "dimension") {
        detail::check_sample(c.dimension.sample, "dimension");
        if (c.dimension.projection_dim < 1) detail::field_error("dimension.projection_dim", "must be >= 1");
    }

    const AssumptionLevel level = required_level(exp);
    const auto rg = validate_assumptions(c.params.g, level, NonlinearityRole::Damping);
    if (!rg.ok())
        throw AssumptionError("assumption check failed at level '" + std::string(to_string(level)) + "': " + rg.summary());
    const auto rf = validate_assumptions(c.params.f, level, NonlinearityRole::Force);
    if (!rf.ok())
        throw AssumptionError("assumption check failed at level '" + std::string(to_string(level)) + "': " + rf.summary());
}

// --- artifact output -------------------------------------------------------------------

struct Column {
    std::string name;
    std::string description;
};

inline std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/// Output directory: CSV tables and JSON documents, with a schema of every CSV written.
class Artifacts {
public:
    explicit Artifacts(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

    const fs::path& dir() const { return dir_; }

    void csv(const std::string& name, const std::vector<Column>& cols, const std::vector<std::vector<std::string>>& rows) {
        std::ofstream out(dir_ / name);
        for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i].name;
        out << "\n";
        for (const auto& r : rows) {
            if (r.size() != cols.size()) throw std::logic_error("csv " + name + ": row width mismatch");
            for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << r[i];
            out << "\n";
        }
        if (!out) throw std::runtime_error("failed writing " + (dir_ / name).string());
        json s = json::array();
        for (const auto& c : cols) s.push_back({{"name", c.name}, {"description", c.description}});
        schema_[name] = s;
        files_.push_back(name);
    }

    void document(const std::string& name, const json& j) {
        std::ofstream out(dir_ / name);
        out << j.dump(2) << "\n";
        if (!out) throw std::runtime_error("failed writing " + (dir_ / name).string());
        files_.push_back(name);
    }

    const json& schema() const { return schema_; }
    const std::vector<std::string>& files() const { return files_; }

private:
    fs::path dir_;
    json schema_ = json::object();
    std::vector<std::string> files_;
};

inline json state_json(const SimState& s) {
    auto vec = [](const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
    return {{"t", s.t}, {"z", vec(s.z)}, {"zt", vec(s.zt)}, {"v", vec(s.v)}, {"vt", vec(s.vt)}, {"theta", vec(s.theta)}};
}

inline SimState state_from_json(const json& j) {
    auto vec = [&](const char* k) {
        const auto xs = j.at(k).get<std::vector<double>>();
        return Vector(Eigen::Map<const Vector>(xs.data(), static_cast<Eigen::Index>(xs.size())));
    };
    SimState s;
    s.t = j.at("t").get<double>();
    s.z = vec("z");
    s.zt = vec("zt");
    s.v = vec("v");
    s.vt = vec("vt");
    s.theta = vec("theta");
    return s;
}

// --- experiments -----------------------------------------------------------------------

/// Scalar results of one experiment, in a fixed order per experiment; sweeps tabulate these.
using Metrics = std::vector<std::pair<std::string, double>>;

struct ExperimentResult {
    json summary = json::object();
    Metrics metrics;
};

inline const std::vector<std::string>& metric_names(const std::string& experiment) {
    static const std::map<std::string, std::vector<std::string>> table{
        {"simulate", {"E_initial", "E_final", "max_abs_energy_residual", "max_energy_rise", "completed"}},
        {"equilibria", {"n_equilibria", "R_star_star", "max_residual", "failed_starts"}},
        {"decay",
         {"final_dist_max", "final_dist_median", "converged_fraction", "max_energy_rise", "n_equilibria",
          "failed_trajectories"}},
        {"stabilizability",
         {"omega_min", "omega_max", "C1_max", "C2_max", "violations", "omega_positive_fraction",
          "lp_feasible_fraction"}},
        {"dimension", {"slope", "uncertainty", "sample_size", "sup_uniform_bound", "sup_energy", "failed_trajectories"}},
        {"semicontinuity", {"max_semidistance", "max_product_semidistance", "max_h_semidistance"}},
    };
    auto it = table.find(experiment);
    if (it == table.end()) throw ConfigError("no metrics for experiment '" + experiment + "'");
    return it->second;
}

namespace detail {

inline SimulationOptions sim_options(const RunConfig& c, double T) {
    SimulationOptions o;
    o.dt = c.time.dt;
    o.T = T;
    o.save_every = c.time.save_every;
    o.tol = c.time.tol;
    o.max_newton = c.time.max_newton;
    return o;
}

inline AttractorSampleOptions sample_options(const RunConfig& c, const SampleBlock& s, int threads) {
    AttractorSampleOptions o;
    o.n_trajectories = s.n_trajectories;
    o.T_burn = s.T_burn;
    o.T_sample = s.T_sample;
    o.sample_every = s.sample_every;
    o.R = s.R;
    o.seed = c.seed;
    o.dt = c.time.dt;
    o.tol = c.time.tol;
    o.threads = threads;
    return o;
}

inline EquilibriumOptions equilibrium_options(const RunConfig& c, int threads) {
    EquilibriumOptions o;
    o.n_starts = c.equilibria.n_starts;
    o.tol = c.equilibria.tol;
    o.dedupe = c.equilibria.dedupe;
    o.hessian = c.equilibria.hessian;
    o.seed = c.seed;
    o.threads = threads;
    return o;
}

inline SimState initial_state(const RunConfig& c, const ModelParams& p, const DiscreteOperators& ops) {
    if (c.initial.kind == "zero") return SimState::zero(ops);
    if (c.initial.kind == "smooth") {
        const WaveSpectrum ws(ops);
        const BeamSpectrum bs(ops);
        SimState s = SimState::zero(ops);
        const double a = c.initial.amplitude;
        s.z = a * (ws.mode(1, 0) + 0.5 * ws.mode(0, 1));
        s.zt = 0.5 * a * ws.mode(1, 1);
        s.v = a * bs.mode(1);
        s.vt = 0.5 * a * bs.mode(2);
        s.theta = 0.25 * a * bs.mode(1);
        return s;
    }
    return initial_states_in_ball(p, ops, 1, c.initial.R, c.seed).front();
}

inline double median(std::vector<double> xs) {
    if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(xs.begin(), xs.end());
    const std::size_t n = xs.size();
    return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

inline ExperimentResult run_simulate(const RunConfig& c, const ModelParams& p, const DiscreteOperators& ops,
                                     Artifacts& out) {
    const SimState init = initial_state(c, p, ops);
    const Trajectory tr = simulate(init, p, ops, sim_options(c, c.time.T));
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < tr.states.size(); ++i) {
        const auto& L = tr.ledgers[i];
        rows.push_back({num(tr.states[i].t), num(L.Ez0), num(L.Ev0), num(L.Etheta), num(L.Pi), num(L.Phi),
                        num(L.E_total), num(L.E_plus), num(L.D_wave_accum), num(L.D_heat_accum)});
    }
    out.csv("energy.csv",
            {{"t", "time of the saved state"},
             {"Ez0", "quadratic wave energy (1/2)[(A z,z) + |z_t|^2]"},
             {"Ev0", "quadratic beam energy (1/2)[|A_beam v|^2 + (M_gamma v_t, v_t)]"},
             {"Etheta", "thermal energy (1/2)|theta|^2"},
             {"Pi", "wave potential (integral of the antiderivative of f - mu s)"},
             {"Phi", "beam potential (Berger stretching energy minus load work)"},
             {"E_total", "total energy beta(Ez0 + Pi) + alpha(Ev0 + Phi + Etheta)"},
             {"E_plus", "nonnegative energy used in the a priori bounds"},
             {"D_wave_accum", "accumulated wave dissipation beta * int (g(z_t), z_t)"},
             {"D_heat_accum", "accumulated heat dissipation alpha * int |A^{1/2} theta|^2"}},
            rows);
    rows.clear();
    for (std::size_t i = 0; i < tr.reports.size(); ++i) {
        const auto& r = tr.reports[i];
        rows.push_back({std::to_string(i + 1), num(init.t + static_cast<double>(i + 1) * c.time.dt),
                        std::to_string(r.newton_iters), num(r.newton_residual), num(r.energy_residual),
                        num(r.dissipation_wave), num(r.dissipation_heat)});
    }
    out.csv("steps.csv",
            {{"step", "step index (1-based)"},
             {"t", "time at the end of the step"},
             {"newton_iters", "Newton iterations used"},
             {"newton_residual", "final Newton residual (max norm)"},
             {"energy_residual", "E(n+1) - E(n) + dissipation over the step"},
             {"dissipation_wave", "wave dissipation over the step"},
             {"dissipation_heat", "heat dissipation over the step"}},
            rows);
    out.document("snapshots.json", {{"initial", state_json(tr.states.front())}, {"final", state_json(tr.final_state())}});

    ExperimentResult r;
    const double e0 = tr.ledgers.front().E_total, e1 = tr.ledgers.back().E_total;
    r.summary["completed"] = tr.completed;
    r.summary["error"] = tr.error;
    r.summary["stiff_warning"] = tr.stiff_warning;
    r.summary["steps"] = tr.reports.size();
    r.summary["E_initial"] = e0;
    r.summary["E_final"] = e1;
    r.summary["max_abs_energy_residual"] = tr.max_abs_energy_residual;
    r.summary["max_energy_rise"] = tr.max_energy_rise;
    r.metrics = {{"E_initial", e0},
                 {"E_final", e1},
                 {"max_abs_energy_residual", tr.max_abs_energy_residual},
                 {"max_energy_rise", tr.max_energy_rise},
                 {"completed", tr.completed ? 1.0 : 0.0}};
    if (!tr.completed) throw SolverError("simulation stopped early: " + tr.error, tr.max_abs_energy_residual);
    return r;
}

inline ExperimentResult run_equilibria(const RunConfig& c, const ModelParams& p, const DiscreteOperators& ops,
                                       Artifacts& out, int threads) {
    const auto set = enumerate_equilibria(p, ops, equilibrium_options(c, threads));
    std::vector<std::vector<std::string>> rows;
    const SimState zero = SimState::zero(ops);
    double max_res = 0.0;
    for (std::size_t i = 0; i < set.items.size(); ++i) {
        const auto& e = set.items[i];
        max_res = std::max({max_res, e.residual_wave, e.residual_plate});
        rows.push_back({std::to_string(i), e.label, num(ops.wave_inner(e.z_star, Vector::Ones(ops.wave_size()))),
                        num(first_mode_amplitude(e.v_star, ops)), num(e.residual_wave), num(e.residual_plate),
                        num(y_norm(e.as_state(ops), zero, p, ops)), num(e.min_hessian_eigenvalue)});
    }
    out.csv("equilibria.csv",
            {{"index", "equilibrium index"},
             {"label", "wave part | plate part tag"},
             {"mean_z", "mean of z* over the chamber"},
             {"first_mode", "coefficient of v* on the first beam mode"},
             {"residual_wave", "backward error of the wave stationary equation"},
             {"residual_plate", "backward error of the plate stationary equation"},
             {"y_norm", "Y-norm of (z*, 0, v*, 0, 0)"},
             {"min_hessian", "smallest eigenvalue of the linearized stationary operator (nan if skipped)"}},
            rows);
    json states = json::array();
    for (const auto& e : set.items) states.push_back({{"label", e.label}, {"state", state_json(e.as_state(ops))}});
    out.document("equilibria_states.json", states);

    ExperimentResult r;
    r.summary["n_equilibria"] = set.items.size();
    r.summary["R_star_star"] = set.R_star_star;
    r.summary["failed_starts"] = set.failed_starts;
    r.summary["wave_labels"] = set.wave_labels;
    r.summary["plate_labels"] = set.plate_labels;
    r.metrics = {{"n_equilibria", static_cast<double>(set.items.size())},
                 {"R_star_star", set.R_star_star},
                 {"max_residual", max_res},
                 {"failed_starts", static_cast<double>(set.failed_starts)}};
    return r;
}

inline ExperimentResult run_decay(const RunConfig& c, const ModelParams& p, const DiscreteOperators& ops, Artifacts& out,
                                  int threads) {
    const auto set = enumerate_equilibria(p, ops, equilibrium_options(c, threads));
    const auto inits = initial_states_in_ball(p, ops, c.decay.n_trajectories, c.decay.R, c.seed);
    const int n = static_cast<int>(inits.size());
    std::vector<Trajectory> runs(static_cast<std::size_t>(n));
    parallel_for(n, threads, [&](int i) {
        runs[static_cast<std::size_t>(i)] = simulate(inits[static_cast<std::size_t>(i)], p, ops, sim_options(c, c.time.T));
    });
    std::vector<std::vector<std::string>> rows;
    std::vector<double> finals;
    json per = json::array();
    int failed = 0, converged = 0;
    double rise = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto& tr = runs[static_cast<std::size_t>(i)];
        rise = std::max(rise, tr.max_energy_rise);
        double last = std::numeric_limits<double>::quiet_NaN();
        for (std::size_t k = 0; k < tr.states.size(); ++k) {
            last = dist_to_equilibria(tr.states[k], set.items, p, ops);
            rows.push_back({std::to_string(i), num(tr.states[k].t), num(tr.ledgers[k].E_total), num(last)});
        }
        if (!tr.ok()) {
            ++failed;
        } else {
            finals.push_back(last);
            if (last <= c.decay.threshold) ++converged;
        }
        per.push_back({{"trajectory", i}, {"completed", tr.ok()}, {"error", tr.error}, {"final_distance", last},
                       {"max_energy_rise", tr.max_energy_rise}});
    }
    out.csv("decay.csv",
            {{"trajectory", "trajectory index"},
             {"t", "time"},
             {"E_total", "total energy"},
             {"dist_to_equilibria", "Y-distance to the nearest enumerated equilibrium"}},
            rows);
    ExperimentResult r;
    const double fmax = finals.empty() ? std::numeric_limits<double>::quiet_NaN()
                                       : *std::max_element(finals.begin(), finals.end());
    r.summary["trajectories"] = per;
    r.summary["n_equilibria"] = set.items.size();
    r.summary["R_star_star"] = set.R_star_star;
    r.summary["threshold"] = c.decay.threshold;
    r.summary["converged"] = converged;
    r.metrics = {{"final_dist_max", fmax},
                 {"final_dist_median", median(finals)},
                 {"converged_fraction", static_cast<double>(converged) / n},
                 {"max_energy_rise", rise},
                 {"n_equilibria", static_cast<double>(set.items.size())},
                 {"failed_trajectories", static_cast<double>(failed)}};
    return r;
}

inline ExperimentResult run_stabilizability(const RunConfig& c, const ModelParams& p, const DiscreteOperators& ops,
                                            Artifacts& out, int threads) {
    const int m = c.stabilizability.n_pairs;
    const auto inits = initial_states_in_ball(p, ops, 2 * m, c.stabilizability.R, c.seed);
    std::vector<Trajectory> runs(inits.size());
    parallel_for(2 * m, threads, [&](int i) {
        runs[static_cast<std::size_t>(i)] = simulate(inits[static_cast<std::size_t>(i)], p, ops, sim_options(c, c.time.T));
    });
    std::vector<std::vector<std::string>> fit_rows, series_rows;
    json per = json::array();
    double om_min = std::numeric_limits<double>::infinity(), om_max = -om_min, c1max = 0.0, c2max = 0.0;
    int viol = 0, positive = 0, feasible = 0, failed = 0;
    for (int k = 0; k < m; ++k) {
        const auto& a = runs[static_cast<std::size_t>(2 * k)];
        const auto& b = runs[static_cast<std::size_t>(2 * k + 1)];
        json entry{{"pair", k}};
        if (!a.ok() || !b.ok()) {
            entry["error"] = a.ok() ? b.error : a.error;
            per.push_back(entry);
            ++failed;
            continue;
        }
        const auto fit = stabilizability_fit(a, b, p, ops, c.stabilizability.delta);
        DiffOptions dopt;
        dopt.delta = c.stabilizability.delta;
        const auto diff = difference_functionals(a, b, p, ops, dopt);
        om_min = std::min(om_min, fit.omega);
        om_max = std::max(om_max, fit.omega);
        c1max = std::max(c1max, fit.C1);
        c2max = std::max(c2max, fit.C2);
        viol += fit.violations;
        positive += fit.omega_positive ? 1 : 0;
        feasible += diff.fit.feasible ? 1 : 0;
        fit_rows.push_back({std::to_string(k), num(fit.C1), num(fit.omega), num(fit.C2),
                            std::to_string(fit.omega_positive ? 1 : 0), std::to_string(fit.violations),
                            num(fit.distance_sq.front()), std::to_string(diff.fit.feasible ? 1 : 0), num(diff.fit.c0),
                            num(diff.fit.c1), num(diff.fit.c2), num(diff.fit.min_ratio)});
        for (std::size_t i = 0; i < fit.times.size(); ++i)
            series_rows.push_back({std::to_string(k), num(fit.times[i]), num(fit.distance_sq[i]), num(fit.lot[i])});
        entry["note"] = fit.note;
        per.push_back(entry);
    }
    out.csv("stabilizability_fits.csv",
            {{"pair", "trajectory pair index"},
             {"C1", "fitted constant of the exponential term"},
             {"omega", "fitted decay rate"},
             {"C2", "fitted constant of the lower-order term"},
             {"omega_positive", "1 if a positive decay rate was found"},
             {"violations", "stored times where the fitted bound fails"},
             {"d0", "squared Y-distance of the initial states"},
             {"lp_feasible", "1 if the integrated difference inequality admits nonnegative constants"},
             {"c0", "difference inequality: constant of the initial-energy term"},
             {"c1", "difference inequality: constant of the damping term"},
             {"c2", "difference inequality: constant of the lower-order term"},
             {"min_ratio", "smallest right-hand / left-hand ratio after the fit"}},
            fit_rows);
    out.csv("stabilizability_series.csv",
            {{"pair", "trajectory pair index"},
             {"t", "time since the start"},
             {"distance_sq", "squared Y-distance of the two trajectories"},
             {"lot", "lower-order term: sup over [0,t] of the weakened norms of the difference"}},
            series_rows);
    ExperimentResult r;
    r.summary["pairs"] = per;
    r.summary["failed_pairs"] = failed;
    r.metrics = {{"omega_min", om_min},
                 {"omega_max", om_max},
                 {"C1_max", c1max},
                 {"C2_max", c2max},
                 {"violations", static_cast<double>(viol)},
                 {"omega_positive_fraction", static_cast<double>(positive) / m},
                 {"lp_feasible_fraction", static_cast<double>(feasible) / m}};
    return r;
}

inline ExperimentResult run_dimension(const RunConfig& c, const ModelParams& p, const DiscreteOperators& ops,
                                      Artifacts& out, int threads) {
    const auto sample = attractor_sample(p, ops, sample_options(c, c.dimension.sample, threads));
    const auto est = fractal_dimension(sample.states, c.dimension.projection_dim, p, ops);
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < est.counts.size(); ++i) {
        const int l = static_cast<int>(i);
        rows.push_back({std::to_string(i), num(est.epsilons[i]), std::to_string(est.counts[i]),
                        std::to_string(l >= est.window_begin && l < est.window_end ? 1 : 0)});
    }
    out.csv("dimension_ladder.csv",
            {{"level", "dyadic level"},
             {"epsilon", "box side length"},
             {"count", "occupied boxes"},
             {"in_window", "1 if the level enters the slope fit"}},
            rows);
    double ub = 0.0, en = 0.0;
    for (const auto& s : sample.states) {
        ub = std::max(ub, uniform_bound_functional(s, ops));
        en = std::max(en, total_energy(s, p, ops).E_total);
    }
    ExperimentResult r;
    r.summary["projection"] = est.projection;
    r.summary["stderr_fit"] = est.stderr_fit;
    r.summary["errors"] = sample.errors;
    r.metrics = {{"slope", est.slope},
                 {"uncertainty", est.uncertainty},
                 {"sample_size", static_cast<double>(sample.states.size())},
                 {"sup_uniform_bound", ub},
                 {"sup_energy", en},
                 {"failed_trajectories", static_cast<double>(sample.errors.size())}};
    return r;
}

inline ExperimentResult run_semicontinuity(const RunConfig& c, Artifacts& out, int threads) {
    SemicontinuityOptions o;
    o.sample = sample_options(c, c.semicontinuity.sample, threads);
    const auto rows_in = semicontinuity_experiment(c.semicontinuity.lambdas, c.semicontinuity.lambda0,
                                                   params_at(c, c.semicontinuity.lambda0.first,
                                                             c.semicontinuity.lambda0.second),
                                                   c.grid(), o);
    std::vector<std::vector<std::string>> rows;
    double m1 = 0.0, m2 = 0.0, m3 = 0.0;
    for (const auto& row : rows_in) {
        rows.push_back({num(row.gamma), num(row.kappa), num(row.semidistance), num(row.product_semidistance),
                        num(row.h_semidistance), std::to_string(row.sample_size),
                        std::to_string(row.failed_trajectories)});
        m1 = std::max(m1, row.semidistance);
        m2 = std::max(m2, row.product_semidistance);
        m3 = std::max(m3, row.h_semidistance);
    }
    out.csv("semicontinuity.csv",
            {{"gamma", "rotational inertia of the sampled attractor"},
             {"kappa", "coupling strength of the sampled attractor"},
             {"semidistance", "sup over the sample of the Y-distance to the reference sample"},
             {"product_semidistance", "same, to the product of the reference wave and plate samples (nan unless kappa0 = 0)"},
             {"h_semidistance", "plate-only semidistance in |A v|^2 + |v_t|^2 + |theta|^2"},
             {"sample_size", "states in the sample"},
             {"failed_trajectories", "trajectories that stopped early"}},
            rows);
    ExperimentResult r;
    r.summary["lambda0"] = {c.semicontinuity.lambda0.first, c.semicontinuity.lambda0.second};
    r.metrics = {{"max_semidistance", m1}, {"max_product_semidistance", m2}, {"max_h_semidistance", m3}};
    return r;
}

inline ExperimentResult run_single(const std::string& experiment, const RunConfig& c, const ModelParams& p,
                                   Artifacts& out, int threads) {
    if (experiment == "semicontinuity") return run_semicontinuity(c, out, threads);
    const auto ops = build_operators(c.grid(), p.mu, p.gamma);
    if (experiment == "simulate") return run_simulate(c, p, ops, out);
    if (experiment == "equilibria") return run_equilibria(c, p, ops, out, threads);
    if (experiment == "decay") return run_decay(c, p, ops, out, threads);
    if (experiment == "stabilizability") return run_stabilizability(c, p, ops, out, threads);
    if (experiment == "dimension") return run_dimension(c, p, ops, out, threads);
    throw ConfigError("unknown experiment '" + experiment + "'");
}

inline json metrics_json(const Metrics& m) {
    json j = json::object();
    for (const auto& [k, v] : m) j[k] = v;
    return j;
}

inline ExperimentResult run_sweep(const RunConfig& c, Artifacts& out, int threads) {
    const auto& cells = c.sweep.cells;
    const int n = static_cast<int>(cells.size());
    std::vector<ExperimentResult> results(cells.size());
    std::vector<std::string> errors(cells.size());
    auto cell_name = [](int i) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "cell_%03d", i);
        return std::string(buf);
    };
    parallel_for(n, threads, [&](int i) {
        const auto [g, k] = cells[static_cast<std::size_t>(i)];
        Artifacts cell(out.dir() / "cells" / cell_name(i));
        try {
            RunConfig sub = c;
            sub.experiment = c.sweep.experiment;
            sub.params.gamma = g;
            sub.params.kappa = k;
            sub.sweep = SweepBlock{};
            auto res = run_single(sub.experiment, sub, params_at(c, g, k), cell, 1);
            res.summary["gamma"] = g;
            res.summary["kappa"] = k;
            res.summary["metrics"] = metrics_json(res.metrics);
            cell.document("summary.json", res.summary);
            cell.document("schema.json", cell.schema());
            results[static_cast<std::size_t>(i)] = std::move(res);
        } catch (const std::exception& e) {
            errors[static_cast<std::size_t>(i)] = e.what();
            cell.document("summary.json", {{"gamma", g}, {"kappa", k}, {"error", e.what()}});
        }
    });
    const auto& names = metric_names(c.sweep.experiment);
    std::vector<Column> cols{{"cell", "cell index (subdirectory cells/cell_NNN)"},
                             {"gamma", "rotational inertia"},
                             {"kappa", "coupling strength"},
                             {"ok", "1 if the cell finished without error"}};
    for (const auto& m : names) cols.push_back({m, c.sweep.experiment + " metric (see the cell summary.json)"});
    std::vector<std::vector<std::string>> rows;
    json per = json::array();
    int failures = 0;
    for (int i = 0; i < n; ++i) {
        const auto& res = results[static_cast<std::size_t>(i)];
        const bool ok = errors[static_cast<std::size_t>(i)].empty();
        failures += ok ? 0 : 1;
        std::vector<std::string> row{std::to_string(i), num(cells[static_cast<std::size_t>(i)].first),
                                     num(cells[static_cast<std::size_t>(i)].second), ok ? "1" : "0"};
        for (const auto& m : names) {
            double v = std::numeric_limits<double>::quiet_NaN();
            for (const auto& [k, x] : res.metrics)
                if (k == m) v = x;
            row.push_back(num(v));
        }
        rows.push_back(row);
        per.push_back({{"cell", i}, {"ok", ok}, {"error", errors[static_cast<std::size_t>(i)]}});
    }
    out.csv("sweep.csv", cols, rows);
    ExperimentResult r;
    r.summary["sub_experiment"] = c.sweep.experiment;
    r.summary["cells"] = per;
    r.summary["failed_cells"] = failures;
    r.metrics = {{"cells", static_cast<double>(n)}, {"failed_cells", static_cast<double>(failures)}};
    return r;
}

} // namespace detail

struct RunOutcome {
    fs::path dir;
    json summary;
    std::string error;  // non-empty when the experiment itself failed after validation
    bool ok() const { return error.empty(); }
};

/// Validates, runs, and writes all artifacts of one configuration into `dir`.
/// Configuration and assumption errors are thrown before anything is written;
/// a failure during compute still leaves the resolved config, summary and manifest.
inline RunOutcome run_config(const RunConfig& c, const fs::path& dir) {
    validate(c);
    const auto start = std::chrono::steady_clock::now();
    Artifacts out(dir);
    out.document("config.resolved.json", config_to_json(c));
    const std::string hash = config_hash(c);
    RunOutcome outcome;
    outcome.dir = dir;
    ExperimentResult res;
    try {
        if (c.experiment == "sweep") res = detail::run_sweep(c, out, c.threads);
        else res = detail::run_single(c.experiment, c, params_at(c, c.params.gamma, c.params.kappa), out, c.threads);
    } catch (const std::exception& e) {
        outcome.error = e.what();
    }
    json summary{{"experiment", c.experiment}, {"seed", c.seed}, {"config_hash", hash}, {"ok", outcome.ok()}};
    if (!outcome.ok()) summary["error"] = outcome.error;
    summary["metrics"] = detail::metrics_json(res.metrics);
    for (auto it = res.summary.begin(); it != res.summary.end(); ++it) summary[it.key()] = it.value();
    out.document("summary.json", summary);
    out.document("schema.json", out.schema());
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    json files = out.files();
    files.push_back("manifest.json");
    out.document("manifest.json", {{"version", version_string},
                                   {"experiment", c.experiment},
                                   {"seed", c.seed},
                                   {"threads", c.threads},
                                   {"config_hash", hash},
                                   {"wall_time_s", wall},
                                   {"files", files}});
    outcome.summary = summary;
    return outcome;
}

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
};

inline RunConfig apply(RunConfig c, const Overrides& o) {
    if (o.seed) c.seed = *o.seed;
    if (o.threads) c.threads = *o.threads;
    return c;
}

} // namespace cli
} // namespace acoustoplate
