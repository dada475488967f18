#pragma once

#include <complex>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "ehrenfest/bath.hpp"
#include "ehrenfest/closure.hpp"
#include "ehrenfest/dynamics.hpp"
#include "ehrenfest/expr_io.hpp"
#include "ehrenfest/fock_oracle.hpp"
#include "ehrenfest/states.hpp"

namespace ehrenfest {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GridConfig {
    double t_end{10.0};
    std::size_t samples{1024};
};

struct OutputConfig {
    std::string trajectory_csv;
    std::string peaks_csv;
    bool derive_only{false};
    std::optional<int> bch_order;
    bool oracle_check{false};
    std::optional<int> max_order;
};

struct RunConfig {
    std::variant<HamiltonianSpec, BathSpec> hamiltonian;
    InitialStateSpec initial_state;
    GridConfig grid;
    OutputConfig outputs;
};

// exit codes of run()
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitDivergence = 3;
inline constexpr int kExitOracle = 4;

namespace detail_config {

using nlohmann::json;

template <typename T>
T field(const json& j, const char* name) {
    if (!j.contains(name)) throw ConfigError(std::string("missing field '") + name + "'");
    try {
        return j.at(name).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("field '") + name + "': " + e.what());
    }
}

template <typename T>
std::optional<T> opt_field(const json& j, const char* name) {
    if (!j.contains(name) || j.at(name).is_null()) return std::nullopt;
    return field<T>(j, name);
}

inline std::complex<double> complex_from(const json& j, const char* ctx) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
        return {j[0].get<double>(), j[1].get<double>()};
    throw ConfigError(std::string(ctx) + ": expected number or [re, im]");
}

inline TimeFunction time_function_from(const json& j) {
    const auto family = field<std::string>(j, "family");
    if (family == "const") return TimeFunction::constant();
    if (family == "sin") return TimeFunction::sin(field<double>(j, "omega"));
    if (family == "cos") return TimeFunction::cos(field<double>(j, "omega"));
    throw ConfigError("time function family must be const, sin or cos");
}

inline SpectralDensity density_from(const json& j) {
    const auto family = field<std::string>(j, "family");
    if (family == "ohmic")
        return OhmicDensity{field<double>(j, "gamma"), field<double>(j, "cutoff")};
    if (family == "lorentzian") {
        LorentzianDensity d;
        d.center = field<double>(j, "center");
        d.width = field<double>(j, "width");
        d.weight = opt_field<double>(j, "weight").value_or(1.0);
        if (auto s = opt_field<std::vector<double>>(j, "support")) {
            if (s->size() != 2) throw ConfigError("density support must be [min, max]");
            d.support_min = (*s)[0];
            d.support_max = (*s)[1];
        } else {
            d.support_min = 0.2 * d.center;
            d.support_max = 1.8 * d.center;
        }
        return d;
    }
    if (family == "tabulated") {
        if (j.contains("points")) {
            TabulatedDensity t;
            for (const auto& p : j.at("points")) {
                if (!p.is_array() || p.size() != 2)
                    throw ConfigError("tabulated density points must be [omega, value] pairs");
                t.points.emplace_back(p[0].get<double>(), p[1].get<double>());
            }
            return t;
        }
        const auto path = field<std::string>(j, "csv");
        std::ifstream in(path);
        if (!in) throw ConfigError("tabulated density: cannot open " + path);
        TabulatedDensity t;
        double w, v;
        char sep;
        while (in >> w) {
            if (in.peek() == ',') in >> sep;
            if (!(in >> v)) throw ConfigError("tabulated density: malformed row in " + path);
            t.points.emplace_back(w, v);
        }
        return t;
    }
    throw ConfigError("density family must be ohmic, lorentzian or tabulated");
}

inline json density_to(const SpectralDensity& d) {
    json j;
    if (const auto* o = std::get_if<OhmicDensity>(&d)) {
        j["family"] = "ohmic";
        j["gamma"] = o->gamma;
        j["cutoff"] = o->cutoff;
    } else if (const auto* l = std::get_if<LorentzianDensity>(&d)) {
        j["family"] = "lorentzian";
        j["center"] = l->center;
        j["width"] = l->width;
        j["weight"] = l->weight;
        j["support"] = {l->support_min, l->support_max};
    } else {
        const auto& t = std::get<TabulatedDensity>(d);
        j["family"] = "tabulated";
        json pts = json::array();
        for (auto [w, v] : t.points) pts.push_back({w, v});
        j["points"] = pts;
    }
    return j;
}

}  // namespace detail_config

inline RunConfig parse_config(const nlohmann::json& j) {
    using namespace detail_config;
    RunConfig cfg;

    const bool has_h = j.contains("hamiltonian");
    const bool has_b = j.contains("bath");
    if (has_h == has_b)
        throw ConfigError("config must contain exactly one of 'hamiltonian' or 'bath'");
    if (has_h) {
        const auto& h = j.at("hamiltonian");
        HamiltonianSpec spec;
        spec.frequencies = field<std::vector<double>>(h, "frequencies");
        spec.mode_count = spec.frequencies.size();
        if (h.contains("couplings"))
            for (const auto& c : h.at("couplings")) {
                if (!c.is_array() || c.size() != 3)
                    throw ConfigError("couplings entries must be [i, j, strength]");
                spec.couplings.push_back({c[0].get<std::uint32_t>(), c[1].get<std::uint32_t>(),
                                          c[2].get<double>()});
            }
        if (h.contains("extra_terms"))
            for (const auto& e : h.at("extra_terms")) {
                ExtraTerm term;
                try {
                    term.op = parse_expr(field<std::string>(e, "expr"));
                } catch (const ParseError& pe) {
                    throw ConfigError(std::string("extra_terms expr: ") + pe.what());
                }
                if (e.contains("time")) term.time_dependence = time_function_from(e.at("time"));
                spec.extra_terms.push_back(std::move(term));
            }
        cfg.hamiltonian = std::move(spec);
    } else {
        const auto& b = j.at("bath");
        BathSpec spec;
        spec.system_frequency = field<double>(b, "system_frequency");
        spec.mode_count = field<std::size_t>(b, "mode_count");
        spec.coupling = field<double>(b, "coupling");
        spec.density = b.contains("density") ? density_from(b.at("density"))
                                             : SpectralDensity(default_density(spec.system_frequency));
        cfg.hamiltonian = std::move(spec);
    }

    const auto& st = j.at("initial_state");
    const auto variant = field<std::string>(st, "variant");
    if (variant == "product_coherent") {
        ProductCoherent pc;
        for (const auto& a : st.at("alphas")) pc.alphas.push_back(complex_from(a, "alphas"));
        cfg.initial_state = std::move(pc);
    } else if (variant == "fock_superposition") {
        FockSuperpositionProduct fs;
        for (const auto& mode : st.at("amplitudes")) {
            std::vector<std::complex<double>> v;
            for (const auto& a : mode) v.push_back(complex_from(a, "amplitudes"));
            fs.amplitudes.push_back(std::move(v));
        }
        cfg.initial_state = std::move(fs);
    } else if (variant == "entangled_paper") {
        EntangledPaper e;
        e.xi = field<double>(st, "xi");
        e.zeta = field<double>(st, "zeta");
        e.delta = field<double>(st, "delta");
        if (auto bm = opt_field<std::size_t>(st, "bath_modes")) e.bath_modes = *bm;
        else {
            std::size_t modes = std::visit(
                [](const auto& h) -> std::size_t {
                    using T = std::decay_t<decltype(h)>;
                    if constexpr (std::is_same_v<T, HamiltonianSpec>) return h.mode_count;
                    else return h.mode_count + 1;
                },
                cfg.hamiltonian);
            if (modes < 3) throw ConfigError("entangled_paper state needs at least 3 modes");
            e.bath_modes = modes - 1;
        }
        cfg.initial_state = std::move(e);
    } else {
        throw ConfigError(
            "initial_state.variant must be product_coherent, fock_superposition or "
            "entangled_paper");
    }
    // convenience: bath runs may list only the leading (system) amplitudes and
    // leave the remaining bath modes in vacuum
    if (const auto* b = std::get_if<BathSpec>(&cfg.hamiltonian)) {
        if (auto* pc = std::get_if<ProductCoherent>(&cfg.initial_state)) {
            while (pc->alphas.size() < b->mode_count + 1) pc->alphas.emplace_back(0.0);
        }
    }
    try {
        validate_state(cfg.initial_state);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }

    const auto& g = j.at("grid");
    cfg.grid.t_end = field<double>(g, "t_end");
    cfg.grid.samples = field<std::size_t>(g, "samples");
    if (cfg.grid.samples < 2) throw ConfigError("grid.samples must be >= 2");

    if (j.contains("outputs")) {
        const auto& o = j.at("outputs");
        cfg.outputs.trajectory_csv = opt_field<std::string>(o, "trajectory_csv").value_or("");
        cfg.outputs.peaks_csv = opt_field<std::string>(o, "peaks_csv").value_or("");
        cfg.outputs.derive_only = opt_field<bool>(o, "derive_only").value_or(false);
        cfg.outputs.bch_order = opt_field<int>(o, "bch_order");
        cfg.outputs.oracle_check = opt_field<bool>(o, "oracle_check").value_or(false);
        cfg.outputs.max_order = opt_field<int>(o, "max_order");
    }
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return parse_config(j);
}

inline nlohmann::json serialize_config(const RunConfig& cfg) {
    using namespace detail_config;
    json j;
    if (const auto* h = std::get_if<HamiltonianSpec>(&cfg.hamiltonian)) {
        json hj;
        hj["frequencies"] = h->frequencies;
        json cj = json::array();
        for (const auto& c : h->couplings) cj.push_back({c.i, c.j, c.strength});
        hj["couplings"] = cj;
        json ej = json::array();
        for (const auto& e : h->extra_terms) {
            json t;
            t["expr"] = print_expr(e.op);
            if (e.time_dependence) {
                json tf;
                switch (e.time_dependence->kind) {
                    case TimeFunction::Kind::Constant: tf["family"] = "const"; break;
                    case TimeFunction::Kind::Sin: tf["family"] = "sin"; break;
                    case TimeFunction::Kind::Cos: tf["family"] = "cos"; break;
                }
                if (e.time_dependence->kind != TimeFunction::Kind::Constant)
                    tf["omega"] = e.time_dependence->omega;
                t["time"] = tf;
            }
            ej.push_back(t);
        }
        if (!ej.empty()) hj["extra_terms"] = ej;
        j["hamiltonian"] = hj;
    } else {
        const auto& b = std::get<BathSpec>(cfg.hamiltonian);
        json bj;
        bj["system_frequency"] = b.system_frequency;
        bj["mode_count"] = b.mode_count;
        bj["coupling"] = b.coupling;
        bj["density"] = density_to(b.density);
        j["bath"] = bj;
    }

    json sj;
    if (const auto* pc = std::get_if<ProductCoherent>(&cfg.initial_state)) {
        sj["variant"] = "product_coherent";
        json as = json::array();
        for (auto a : pc->alphas) as.push_back({a.real(), a.imag()});
        sj["alphas"] = as;
    } else if (const auto* fs = std::get_if<FockSuperpositionProduct>(&cfg.initial_state)) {
        sj["variant"] = "fock_superposition";
        json ms = json::array();
        for (const auto& mode : fs->amplitudes) {
            json v = json::array();
            for (auto a : mode) v.push_back({a.real(), a.imag()});
            ms.push_back(v);
        }
        sj["amplitudes"] = ms;
    } else {
        const auto& e = std::get<EntangledPaper>(cfg.initial_state);
        sj["variant"] = "entangled_paper";
        sj["xi"] = e.xi;
        sj["zeta"] = e.zeta;
        sj["delta"] = e.delta;
        sj["bath_modes"] = e.bath_modes;
    }
    j["initial_state"] = sj;

    j["grid"] = {{"t_end", cfg.grid.t_end}, {"samples", cfg.grid.samples}};
    json oj;
    oj["trajectory_csv"] = cfg.outputs.trajectory_csv;
    oj["peaks_csv"] = cfg.outputs.peaks_csv;
    oj["derive_only"] = cfg.outputs.derive_only;
    if (cfg.outputs.bch_order) oj["bch_order"] = *cfg.outputs.bch_order;
    oj["oracle_check"] = cfg.outputs.oracle_check;
    if (cfg.outputs.max_order) oj["max_order"] = *cfg.outputs.max_order;
    j["outputs"] = oj;
    return j;
}

namespace detail_config {

inline void write_trajectory_csv(const std::string& path, const TimeSeries& series) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    out << "t";
    for (const auto& k : series.variable_keys)
        out << ", re<" << k.str() << ">, im<" << k.str() << ">";
    out << "\n";
    for (std::size_t r = 0; r < series.values.size(); ++r) {
        out << detail_io::double_str(series.grid.time(r));
        for (const auto& v : series.values[r])
            out << ", " << detail_io::double_str(v.real()) << ", "
                << detail_io::double_str(v.imag());
        out << "\n";
    }
}

inline void write_peaks_csv(const std::string& path, const TimeSeries& series,
                            std::size_t mode_count, double omega0) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    out << "mode, dominant_frequency_over_omega0\n";
    for (std::size_t m = 0; m < mode_count; ++m) {
        TimeSeries q;
        q.grid = series.grid;
        q.variable_keys = {MomentKey::annihilator(static_cast<std::uint32_t>(m))};
        const auto trace = position_trace(series, static_cast<std::uint32_t>(m));
        q.values.resize(trace.size());
        for (std::size_t k = 0; k < trace.size(); ++k) q.values[k] = {trace[k]};
        out << m << ", " << detail_io::double_str(dominant_frequency(q, 0) / omega0) << "\n";
    }
}

/// Eq-4-style series trajectory of <q0>: expectations of the nested
/// commutators at t = 0 combined with (i t)^k / k!.
inline void write_bch_csv(const std::string& path, const LadderHamiltonian& h,
                          const InitialStateSpec& state, const TimeGrid& grid, int order) {
    const OperatorExpr q0 = to_ladder(OperatorExpr::symbol(position_op(0)));
    const auto series = bch_series(h.static_part, q0, order);
    std::vector<std::complex<double>> init;
    init.reserve(series.size());
    for (const auto& op : series) {
        std::complex<double> v = 0.0;
        for (const auto& t : op.terms()) {
            MomentKey key;
            key.factors = t.factors;
            v += t.coeff.to_complex() * expectation(state, key);
        }
        init.push_back(v);
    }
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    out << "t, re<q[0]>, im<q[0]>\n";
    for (std::size_t r = 0; r < grid.count; ++r) {
        const double t = grid.time(r);
        std::complex<double> sum = 0.0;
        std::complex<double> factor = 1.0;
        for (std::size_t k = 0; k < init.size(); ++k) {
            sum += factor * init[k];
            factor *= std::complex<double>(0.0, t) / static_cast<double>(k + 1);
        }
        out << detail_io::double_str(t) << ", " << detail_io::double_str(sum.real()) << ", "
            << detail_io::double_str(sum.imag()) << "\n";
    }
}

/// Compares first-moment closure trajectories against dense state-vector
/// evolution; returns the max absolute deviation.
inline double oracle_deviation(const OdeSystem& sys, const LadderHamiltonian& h,
                               const InitialStateSpec& state, const TimeGrid& grid,
                               std::size_t truncation = 12) {
    const auto series = integrate(sys, initial_vector(state, sys), grid);
    const auto dense0 = dense_state_from_spec(state, truncation);
    const auto snapshots = oracle_evolve(dense0, h.static_part, grid);
    double dev = 0.0;
    for (std::size_t r = 0; r < grid.count; ++r)
        for (std::size_t v = 0; v < sys.size(); ++v) {
            const auto expected =
                oracle_expectation(snapshots[r], sys.variables[v].expr());
            dev = std::max(dev, std::abs(series.values[r][v] - expected));
        }
    return dev;
}

inline RunConfig predefined_oracle_instance() {
    RunConfig cfg;
    HamiltonianSpec h;
    h.mode_count = 3;
    h.frequencies = {1.0, 0.95, 1.05};
    h.couplings = {{0, 1, 0.05}, {0, 2, 0.05}};
    cfg.hamiltonian = h;
    cfg.initial_state = EntangledPaper{1.0, 0.5, 0.5, 2};
    cfg.grid = {50.0, 1024};
    return cfg;
}

}  // namespace detail_config

/// Orchestrates one run: derive, evaluate initial conditions, integrate,
/// persist. Returns a process exit code.
inline int run(const RunConfig& cfg, std::ostream& log = std::cout) {
    using namespace detail_config;
    try {
        HamiltonianSpec spec;
        if (const auto* h = std::get_if<HamiltonianSpec>(&cfg.hamiltonian)) spec = *h;
        else spec = build_star(std::get<BathSpec>(cfg.hamiltonian));
        const double omega0 = spec.frequencies.empty() ? 1.0 : spec.frequencies[0];

        const LadderHamiltonian h = build_hamiltonian(spec);
        OdeSystem sys;
        try {
            sys = derive_closure(h, first_moment_seeds(spec.mode_count), cfg.outputs.max_order);
        } catch (const HierarchyDivergence& e) {
            log << "error: " << e.what() << "\n";
            return kExitDivergence;
        }
        if (cfg.outputs.derive_only) {
            log << print_ode_system(sys);
            return kExitOk;
        }

        if (state_mode_count(cfg.initial_state) != spec.mode_count)
            throw ConfigError("initial state mode count does not match the Hamiltonian");

        const TimeGrid grid = uniform_grid(cfg.grid.t_end, cfg.grid.samples);
        const auto y0 = initial_vector(cfg.initial_state, sys);
        const auto series = integrate(sys, y0, grid);

        if (!cfg.outputs.trajectory_csv.empty())
            write_trajectory_csv(cfg.outputs.trajectory_csv, series);
        if (!cfg.outputs.peaks_csv.empty())
            write_peaks_csv(cfg.outputs.peaks_csv, series, spec.mode_count, omega0);
        if (cfg.outputs.bch_order) {
            const std::string path = (cfg.outputs.trajectory_csv.empty()
                                          ? std::string("bch")
                                          : cfg.outputs.trajectory_csv) +
                                     ".bch.csv";
            write_bch_csv(path, h, cfg.initial_state, grid, *cfg.outputs.bch_order);
        }

        if (cfg.outputs.oracle_check) {
            if (!h.drives.empty())
                log << "note: the oracle comparison evolves the static Hamiltonian only\n";
            double dev;
            if (spec.mode_count <= 4) {
                dev = oracle_deviation(sys, h, cfg.initial_state, grid);
            } else {
                log << "config exceeds oracle scale; checking the predefined 3-mode instance\n";
                const RunConfig small = predefined_oracle_instance();
                const auto& sspec = std::get<HamiltonianSpec>(small.hamiltonian);
                const auto sh = build_hamiltonian(sspec);
                const auto ssys = derive_closure(sh, first_moment_seeds(sspec.mode_count));
                dev = oracle_deviation(ssys, sh, small.initial_state,
                                       uniform_grid(small.grid.t_end, small.grid.samples));
            }
            log << "oracle max deviation: " << dev << "\n";
            if (!(dev <= 1e-4)) return kExitOracle;
        }
        return kExitOk;
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        log << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
}

}  // namespace ehrenfest
