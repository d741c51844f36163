#pragma once

//! \file config.hpp
//! \brief Run configuration: one JSON document holding every knob of a simulation or
//! identification run. Missing keys take their documented defaults, unknown keys are
//! rejected, and render() always writes every effective value.

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <type_traits>

#include "vpid/chaboche.hpp"
#include "vpid/errors.hpp"
#include "vpid/experiment.hpp"
#include "vpid/gmkf.hpp"
#include "vpid/integrator.hpp"
#include "vpid/load_path.hpp"

namespace vpid {

struct LoadConfig {
    int load_case = 1;            //!< 1 constant amplitude, 2 linearly growing amplitude
    double amplitude_n = 3.0e8;   //!< [Pa]
    double amplitude_t = 1.5e8;   //!< [Pa]
    double period = 10.0;         //!< [s]
    int n_cycles = 10;

    friend bool operator==(const LoadConfig&, const LoadConfig&) = default;
};

struct PriorConfig {
    double mean_factor = 1.2;  //!< prior mean = factor x true value
    double cov = 0.15;         //!< coefficient of variation of every prior

    friend bool operator==(const PriorConfig&, const PriorConfig&) = default;
};

struct RunConfig {
    std::string name;                //!< run directory name; empty selects "case<N>"
    MaterialParams material;         //!< true parameters
    LoadConfig load;
    IntegratorOptions integrator;
    int n_obs = 60;
    double edge_length = 1.0;        //!< [m]
    PriorConfig prior;
    NoiseModel noise;
    PceSettings pce;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;

    std::string run_name() const { return name.empty() ? "case" + std::to_string(load.load_case) : name; }

    //! Throws ConfigError naming the first invalid field.
    void validate() const {
        auto require = [](bool ok, const std::string& field, const std::string& what) {
            if (!ok) throw ConfigError("config field '" + field + "': " + what);
        };
        try {
            material.validate();
        } catch (const InvalidArgument& e) {
            throw ConfigError(std::string("config section 'material': ") + e.what());
        }
        require(load.load_case == 1 || load.load_case == 2, "load.case", "must be 1 or 2");
        require(load.amplitude_n >= 0.0, "load.amplitude_n", "must be non-negative");
        require(load.amplitude_t >= 0.0, "load.amplitude_t", "must be non-negative");
        require(load.period > 0.0, "load.period", "must be positive");
        require(load.n_cycles >= 1, "load.n_cycles", "must be at least 1");
        require(integrator.dt > 0.0, "integrator.dt", "must be positive");
        require(integrator.dt <= load.period / 100.0 * (1.0 + 1e-12), "integrator.dt",
                "must resolve the period with at least 100 steps");
        require(integrator.rel_tol > 0.0, "integrator.rel_tol", "must be positive");
        require(integrator.max_halvings >= 0 && integrator.max_halvings <= 60, "integrator.max_halvings",
                "must be in [0, 60]");
        require(integrator.store_every >= 1, "integrator.store_every", "must be at least 1");
        require(n_obs >= 1, "observation.n_obs", "must be at least 1");
        require(edge_length > 0.0, "observation.edge_length", "must be positive");
        require(prior.mean_factor > 0.0, "prior.mean_factor", "must be positive");
        require(prior.cov > 0.0, "prior.cov", "must be positive");
        require(noise.relative_std >= 0.0, "noise.relative_std", "must be non-negative");
        require(noise.absolute_floor >= 0.0, "noise.absolute_floor", "must be non-negative");
        require(noise.relative_std > 0.0 || noise.absolute_floor > 0.0, "noise",
                "relative_std or absolute_floor must be positive");
        require(pce.degree >= 1 && pce.degree <= 8, "pce.degree", "must be in [1, 8]");
        require(pce.level >= 1 && pce.level <= 20, "pce.level", "must be in [1, 20]");
        require(pce.quadrature_cap >= 1.0, "pce.quadrature_cap", "must be at least 1");
        require(pce.posterior_samples >= 100, "pce.posterior_samples", "must be at least 100");
        require(pce.threads >= 1, "threads", "must be at least 1");
        const std::string& n = name;
        require(n.find('/') == std::string::npos && n != "." && n != ".." && (n.empty() || n.front() != '.'),
                "name", "must be a plain directory name");
    }

    LoadPath load_path() const {
        return load.load_case == 1
                   ? build_case1(load.amplitude_n, load.amplitude_t, load.period, load.n_cycles)
                   : build_case2(load.amplitude_n, load.amplitude_t, load.period, load.n_cycles);
    }

    ExperimentOptions experiment() const { return {integrator, n_obs, edge_length}; }

    IdentificationInputs identification_inputs() const {
        return {PriorSpec::around(material, prior.mean_factor, prior.cov), load_path(), noise, material, experiment(),
                pce};
    }
};

namespace detail {

//! Reads the members of one JSON object, rejecting unknown keys and wrong types.
class ObjectReader {
  public:
    ObjectReader(const nlohmann::json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
        if (!obj_.is_object()) throw ConfigError("config field '" + path_ + "': expected an object");
    }

    template <typename T>
    void read(const char* key, T& out) {
        seen_.insert(key);
        const auto it = obj_.find(key);
        if (it == obj_.end()) return;
        const std::string field = qualified(key);
        if constexpr (std::is_same_v<T, bool>) {
            if (!it->is_boolean()) throw ConfigError("config field '" + field + "': expected true or false");
            out = it->template get<bool>();
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!it->is_string()) throw ConfigError("config field '" + field + "': expected a string");
            out = it->template get<std::string>();
        } else if constexpr (std::is_same_v<T, std::uint64_t>) {
            if (!it->is_number_unsigned()) throw ConfigError("config field '" + field + "': expected an unsigned integer");
            out = it->template get<std::uint64_t>();
        } else if constexpr (std::is_integral_v<T>) {
            if (!it->is_number_integer()) throw ConfigError("config field '" + field + "': expected an integer");
            const auto v = it->template get<std::int64_t>();
            if (v < std::numeric_limits<T>::min() || v > std::numeric_limits<T>::max())
                throw ConfigError("config field '" + field + "': integer out of range");
            out = static_cast<T>(v);
        } else {
            if (!it->is_number()) throw ConfigError("config field '" + field + "': expected a number");
            out = it->template get<double>();
        }
    }

    ObjectReader section(const char* key) {
        seen_.insert(key);
        const auto it = obj_.find(key);
        static const nlohmann::json empty = nlohmann::json::object();
        return {it == obj_.end() ? empty : *it, qualified(key)};
    }

    void finish() const {
        for (const auto& [key, value] : obj_.items())
            if (!seen_.count(key)) throw ConfigError("config field '" + qualified(key.c_str()) + "': unknown key");
    }

  private:
    std::string qualified(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

    const nlohmann::json& obj_;
    std::string path_;
    std::set<std::string> seen_;
};

inline std::pair<int, int> line_column(const std::string& text, std::size_t byte) {
    int line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

}  // namespace detail

inline nlohmann::ordered_json to_json(const RunConfig& c) {
    nlohmann::ordered_json j;
    j["name"] = c.name;
    const MaterialParams& m = c.material;
    j["material"] = {{"kappa", m.kappa}, {"g", m.g},         {"sigma_y", m.sigma_y},
                     {"n", m.n},         {"k", m.k},         {"b_r", m.b_r},
                     {"h_r", m.h_r},     {"b_chi", m.b_chi}, {"h_chi", m.h_chi}};
    j["load"] = {{"case", c.load.load_case},
                 {"amplitude_n", c.load.amplitude_n},
                 {"amplitude_t", c.load.amplitude_t},
                 {"period", c.load.period},
                 {"n_cycles", c.load.n_cycles}};
    j["integrator"] = {{"dt", c.integrator.dt},
                       {"adaptive", c.integrator.adaptive},
                       {"rel_tol", c.integrator.rel_tol},
                       {"max_halvings", c.integrator.max_halvings},
                       {"store_every", c.integrator.store_every}};
    j["observation"] = {{"n_obs", c.n_obs}, {"edge_length", c.edge_length}};
    j["prior"] = {{"mean_factor", c.prior.mean_factor}, {"cov", c.prior.cov}};
    j["noise"] = {{"relative_std", c.noise.relative_std},
                  {"absolute_floor", c.noise.absolute_floor},
                  {"seed", c.noise.seed}};
    j["pce"] = {{"degree", c.pce.degree},
                {"level", c.pce.level},
                {"quadrature_cap", c.pce.quadrature_cap},
                {"posterior_samples", c.pce.posterior_samples},
                {"sample_seed", c.pce.sample_seed}};
    j["threads"] = c.pce.threads;
    return j;
}

inline std::string render(const RunConfig& c) { return to_json(c).dump(2) + "\n"; }

//! \throws ConfigError with line/column for syntax errors and the dotted field name otherwise
inline RunConfig parse_config(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        const auto [line, col] = detail::line_column(text, e.byte);
        throw ConfigError("config syntax error at line " + std::to_string(line) + ", column " + std::to_string(col) +
                          ": " + e.what());
    }
    RunConfig c;
    detail::ObjectReader root(j, "");
    root.read("name", c.name);

    auto mat = root.section("material");
    MaterialParams& m = c.material;
    mat.read("kappa", m.kappa);
    mat.read("g", m.g);
    mat.read("sigma_y", m.sigma_y);
    mat.read("n", m.n);
    mat.read("k", m.k);
    mat.read("b_r", m.b_r);
    mat.read("h_r", m.h_r);
    mat.read("b_chi", m.b_chi);
    mat.read("h_chi", m.h_chi);
    mat.finish();

    auto load = root.section("load");
    load.read("case", c.load.load_case);
    load.read("amplitude_n", c.load.amplitude_n);
    load.read("amplitude_t", c.load.amplitude_t);
    load.read("period", c.load.period);
    load.read("n_cycles", c.load.n_cycles);
    load.finish();

    auto integ = root.section("integrator");
    integ.read("dt", c.integrator.dt);
    integ.read("adaptive", c.integrator.adaptive);
    integ.read("rel_tol", c.integrator.rel_tol);
    integ.read("max_halvings", c.integrator.max_halvings);
    integ.read("store_every", c.integrator.store_every);
    integ.finish();

    auto obs = root.section("observation");
    obs.read("n_obs", c.n_obs);
    obs.read("edge_length", c.edge_length);
    obs.finish();

    auto prior = root.section("prior");
    prior.read("mean_factor", c.prior.mean_factor);
    prior.read("cov", c.prior.cov);
    prior.finish();

    auto noise = root.section("noise");
    noise.read("relative_std", c.noise.relative_std);
    noise.read("absolute_floor", c.noise.absolute_floor);
    noise.read("seed", c.noise.seed);
    noise.finish();

    auto pce = root.section("pce");
    pce.read("degree", c.pce.degree);
    pce.read("level", c.pce.level);
    pce.read("quadrature_cap", c.pce.quadrature_cap);
    pce.read("posterior_samples", c.pce.posterior_samples);
    pce.read("sample_seed", c.pce.sample_seed);
    pce.finish();

    root.read("threads", c.pce.threads);
    root.finish();

    c.validate();
    return c;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace vpid
