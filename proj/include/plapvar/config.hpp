#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "plapvar/eigen.hpp"
#include "plapvar/error.hpp"
#include "plapvar/expr.hpp"
#include "plapvar/limsup.hpp"
#include "plapvar/solver.hpp"

namespace plapvar {

/// A validated experiment description.
struct ExperimentConfig {
    std::string domain;  // interval | rectangle
    std::array<double, 4> bounds{0.0, 1.0, 0.0, 1.0};
    std::array<int, 2> cells{64, 0};
    double p = 2.0;
    std::string pipeline;  // eigen | solve | conditions | incomparability | all

    std::string nonlinearity = "zero";
    Expression d, mu, eta, a;
    double d_exponent = std::numeric_limits<double>::infinity();
    double eta_exponent = std::numeric_limits<double>::infinity();
    double beta = 0.0;
    std::string phi = "power";
    double alpha = 0.0;

    std::string h = "zero";  // zero | density | phi1
    Expression h_density;
    double h_scale = 0.01;

    EigenOptions eigen;
    SolveOptions solve;
    std::optional<double> truncation;
    double growth_q = 0.0;
    std::vector<double> f0_radii{1.0, 10.0};
    LimsupGrid limsup{1.0, 200};
    std::uint64_t seed = 0;
    std::string output = "out";

    /// Every key with its resolved value, defaults included.
    std::map<std::string, std::string> resolved;
};

/// Raised by parse_config with every problem found, not just the first.
class ConfigError : public Error {
public:
    explicit ConfigError(std::vector<std::string> errors)
        : Error("cli", "parse_config", join(errors)), errors_(std::move(errors)) {}
    const std::vector<std::string> &errors() const { return errors_; }

private:
    static std::string join(const std::vector<std::string> &e) {
        std::string out;
        for (const auto &s : e) out += (out.empty() ? "" : "; ") + s;
        return out;
    }
    std::vector<std::string> errors_;
};

namespace detail {

inline std::string trim(const std::string &s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::string fmt(double v) { return ExtendedReal(v).str(); }

class ConfigReader {
public:
    std::map<std::string, std::string> raw;
    std::vector<std::string> errors;
    std::map<std::string, std::string> resolved;

    bool has(const std::string &k) const { return raw.count(k) > 0; }

    std::string str(const std::string &k, const std::string &def, const std::set<std::string> &allowed = {}) {
        std::string v = has(k) ? raw.at(k) : def;
        if (!allowed.empty() && !allowed.count(v)) {
            std::string list;
            for (const auto &a : allowed) list += (list.empty() ? "" : ", ") + a;
            errors.push_back(k + ": unknown value '" + v + "' (expected one of " + list + ")");
        }
        resolved[k] = v;
        return v;
    }

    double real(const std::string &k, double def) {
        if (!has(k)) {
            resolved[k] = fmt(def);
            return def;
        }
        const auto v = parse_real(k, raw.at(k));
        resolved[k] = fmt(v.value_or(def));
        return v.value_or(def);
    }

    long integer(const std::string &k, long def, long lo) {
        if (!has(k)) {
            resolved[k] = std::to_string(def);
            return def;
        }
        const std::string &t = raw.at(k);
        try {
            std::size_t used = 0;
            const long v = std::stol(t, &used);
            if (used != t.size()) throw std::invalid_argument(t);
            if (v < lo) errors.push_back(k + " must be at least " + std::to_string(lo));
            resolved[k] = std::to_string(v);
            return v;
        } catch (const std::exception &) {
            errors.push_back(k + ": expected an integer, got '" + t + "'");
            return def;
        }
    }

    bool boolean(const std::string &k, bool def) {
        const std::string v = str(k, def ? "true" : "false", {"true", "false"});
        return v == "true";
    }

    std::vector<double> reals(const std::string &k, const std::vector<double> &def) {
        std::vector<double> out;
        if (!has(k)) {
            out = def;
        } else {
            std::istringstream in(raw.at(k));
            std::string tok;
            while (in >> tok) {
                if (auto v = parse_real(k, tok)) out.push_back(*v);
            }
        }
        std::string r;
        for (double v : out) r += (r.empty() ? "" : " ") + fmt(v);
        resolved[k] = r;
        return out;
    }

    Expression expression(const std::string &k, const std::string &def, const std::set<std::string> &vars) {
        const std::string text = has(k) ? raw.at(k) : def;
        resolved[k] = text;
        try {
            Expression e = Expression::parse(text);
            for (const auto &v : e.variables())
                if (!vars.count(v)) errors.push_back(k + ": variable '" + v + "' is not available here");
            return e;
        } catch (const Error &err) {
            errors.push_back(k + ": " + std::string(err.what()));
            return Expression::parse("0");
        }
    }

private:
    std::optional<double> parse_real(const std::string &k, const std::string &t) {
        if (t == "inf" || t == "+inf") return std::numeric_limits<double>::infinity();
        try {
            std::size_t used = 0;
            const double v = std::stod(t, &used);
            if (used != t.size()) throw std::invalid_argument(t);
            return v;
        } catch (const std::exception &) {
            errors.push_back(k + ": expected a number, got '" + t + "'");
            return std::nullopt;
        }
    }
};

inline const std::set<std::string> &known_keys() {
    static const std::set<std::string> keys = {
        "domain", "bounds", "cells", "p", "pipeline", "nonlinearity", "nl.d", "nl.d_exponent", "nl.mu", "nl.beta",
        "nl.eta", "nl.eta_exponent", "nl.a", "nl.phi", "nl.alpha", "h", "h.density", "h.scale", "eigen.max_iter",
        "eigen.tol", "eigen.residual_tol", "solve.max_iter", "solve.tol", "solve.multistart", "solve.starts",
        "solve.truncation", "conditions.q", "conditions.R", "limsup.r", "limsup.K", "seed", "output"};
    return keys;
}

}  // namespace detail

/// Parses the line-oriented `key = value` format (`#` starts a comment).
/// Unknown or repeated keys, missing required keys (domain, p, pipeline)
/// and out-of-range values are all collected before raising ConfigError.
inline ExperimentConfig parse_config(const std::string &text) {
    detail::ConfigReader rd;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            rd.errors.push_back("line " + std::to_string(lineno) + ": expected 'key = value'");
            continue;
        }
        std::string key = detail::trim(line.substr(0, eq));
        std::string value = detail::trim(line.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
        if (!detail::known_keys().count(key)) {
            rd.errors.push_back("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
            continue;
        }
        if (rd.has(key)) {
            rd.errors.push_back("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
            continue;
        }
        rd.raw[key] = value;
    }
    for (const char *req : {"domain", "p", "pipeline"})
        if (!rd.has(req)) rd.errors.push_back(std::string("missing required key '") + req + "'");

    ExperimentConfig c;
    c.domain = rd.str("domain", "interval", {"interval", "rectangle"});
    const bool rect = c.domain == "rectangle";
    c.p = rd.real("p", 2.0);
    if (!(c.p > 1.0) || !std::isfinite(c.p)) rd.errors.push_back("p must exceed 1");
    const double p = c.p > 1.0 && std::isfinite(c.p) ? c.p : 2.0;
    c.pipeline = rd.str("pipeline", "eigen", {"eigen", "solve", "conditions", "incomparability", "all"});

    const auto b = rd.reals("bounds", rect ? std::vector<double>{0, 1, 0, 1} : std::vector<double>{0, 1});
    if (b.size() != (rect ? 4u : 2u)) {
        rd.errors.push_back(std::string("bounds needs ") + (rect ? "4" : "2") + " numbers");
    } else {
        for (std::size_t i = 0; i < b.size(); ++i) c.bounds[i] = b[i];
        if (!(c.bounds[0] < c.bounds[1]) || (rect && !(c.bounds[2] < c.bounds[3])))
            rd.errors.push_back("bounds must be increasing");
    }
    const auto cl = rd.reals("cells", rect ? std::vector<double>{16, 16} : std::vector<double>{64});
    if (cl.size() != (rect ? 2u : 1u)) {
        rd.errors.push_back(std::string("cells needs ") + (rect ? "2" : "1") + " integer(s)");
    } else {
        for (std::size_t i = 0; i < cl.size(); ++i) {
            if (cl[i] != std::floor(cl[i]) || cl[i] < 2 || cl[i] > 1e6) rd.errors.push_back("cells must be integers >= 2");
            c.cells[i] = static_cast<int>(cl[i]);
        }
    }

    c.nonlinearity = rd.str("nonlinearity", "zero",
                            {"zero", "paper_example", "power_perturbation", "power_law", "eta_phi", "eta_linear",
                             "example4"});
    const std::set<std::string> space{"x", "y", "lambda1", "p"}, scalars{"lambda1", "p"};
    const std::string &nl = c.nonlinearity;
    c.d = rd.expression("nl.d", "1", space);
    c.d_exponent = rd.real("nl.d_exponent", std::numeric_limits<double>::infinity());
    c.beta = rd.real("nl.beta", (1.0 + p) / 2.0);
    if (nl == "power_perturbation" && !(c.beta > 1.0 && c.beta < p)) rd.errors.push_back("nl.beta must lie in (1, p)");
    c.mu = rd.expression("nl.mu", "-lambda1", scalars);
    c.eta = rd.expression("nl.eta", "2 * step(0.25 - x) - 1", space);
    c.eta_exponent = rd.real("nl.eta_exponent", std::numeric_limits<double>::infinity());
    c.a = rd.expression("nl.a", "-bump(4 * (x - 0.5))", space);
    c.phi = rd.str("nl.phi", "power", {"power", "power_log"});
    c.alpha = rd.real("nl.alpha", 1.0 + (p - 1.0) / 2.0);
    if (!(c.alpha >= 1.0 && c.alpha <= p)) rd.errors.push_back("nl.alpha must lie in [1, p]");
    if (c.phi == "power_log" && !(c.alpha > 1.0)) rd.errors.push_back("nl.alpha must exceed 1 for power_log");
    if (!(c.d_exponent >= 1.0)) rd.errors.push_back("nl.d_exponent must be at least 1");
    if (!(c.eta_exponent >= 1.0)) rd.errors.push_back("nl.eta_exponent must be at least 1");

    c.h = rd.str("h", "zero", {"zero", "density", "phi1"});
    c.h_density = rd.expression("h.density", "1", space);
    c.h_scale = rd.real("h.scale", 0.01);

    c.eigen.max_iterations = static_cast<int>(rd.integer("eigen.max_iter", 5000, 1));
    c.eigen.relative_decrease_tol = rd.real("eigen.tol", 1e-12);
    c.eigen.residual_tol = rd.real("eigen.residual_tol", 1e-9);
    c.solve.max_iterations = static_cast<int>(rd.integer("solve.max_iter", 2000, 1));
    c.solve.stationarity_tol = rd.real("solve.tol", 1e-8);
    c.solve.multistart = rd.boolean("solve.multistart", false);
    c.solve.starts = static_cast<int>(rd.integer("solve.starts", 5, 1));
    if (rd.has("solve.truncation")) {
        c.truncation = rd.real("solve.truncation", 1.0);
        if (!(*c.truncation > 0.0)) rd.errors.push_back("solve.truncation must be positive");
    } else {
        rd.resolved["solve.truncation"] = "auto";
    }
    c.growth_q = rd.real("conditions.q", p);
    if (!(c.growth_q > 1.0)) rd.errors.push_back("conditions.q must exceed 1");
    c.f0_radii = rd.reals("conditions.R", {1.0, 10.0});
    for (double R : c.f0_radii)
        if (!(R > 0.0)) rd.errors.push_back("conditions.R values must be positive");
    c.limsup.r = rd.real("limsup.r", 1.0);
    if (!(c.limsup.r > 0.0)) rd.errors.push_back("limsup.r must be positive");
    c.limsup.K = static_cast<int>(rd.integer("limsup.K", 200, 8));
    c.seed = static_cast<std::uint64_t>(rd.integer("seed", 0, 0));
    c.solve.seed = c.seed;
    c.output = rd.str("output", "out");

    if (!rd.errors.empty()) throw ConfigError(rd.errors);
    c.resolved = rd.resolved;
    return c;
}

}  // namespace plapvar
