#include "levystop/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include <json.hpp>

#include "levystop/errors.hpp"
#include "levystop/oracles.hpp"

namespace levystop {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::string fmt(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double to_double(const std::string& key, const std::string& v) {
    double out = 0.0;
    const std::string s = trim(v);
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw ConfigError(key + ": expected a number, got '" + v + "'");
    }
    return out;
}

template <class Int>
Int to_int(const std::string& key, const std::string& v) {
    Int out = 0;
    const std::string s = trim(v);
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw ConfigError(key + ": expected an integer, got '" + v + "'");
    }
    return out;
}

bool to_bool(const std::string& key, const std::string& v) {
    const std::string s = trim(v);
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(v);
    while (std::getline(in, cur, ',')) {
        const std::string t = trim(cur);
        if (!t.empty()) out.push_back(t);
    }
    return out;
}

std::vector<double> to_doubles(const std::string& key, const std::string& v) {
    std::vector<double> out;
    for (const auto& s : split_list(v)) out.push_back(to_double(key, s));
    return out;
}

template <class T, class F>
std::string join(const std::vector<T>& v, F f) {
    std::string out;
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (k) out += ", ";
        out += f(v[k]);
    }
    return out;
}

struct Field {
    const char* key;
    std::function<void(RunConfig&, const std::string& key, const std::string& v)> set;
    std::function<std::string(const RunConfig&)> get;
};

#define LS_DOUBLE(k, m) \
    Field{k, [](RunConfig& c, const std::string& key, const std::string& v) { c.m = to_double(key, v); }, \
          [](const RunConfig& c) { return fmt(c.m); }}
#define LS_INT(k, m) \
    Field{k, [](RunConfig& c, const std::string& key, const std::string& v) { c.m = to_int<int>(key, v); }, \
          [](const RunConfig& c) { return std::to_string(c.m); }}
#define LS_BOOL(k, m) \
    Field{k, [](RunConfig& c, const std::string& key, const std::string& v) { c.m = to_bool(key, v); }, \
          [](const RunConfig& c) { return std::string(c.m ? "true" : "false"); }}
#define LS_STRING(k, m) \
    Field{k, [](RunConfig& c, const std::string&, const std::string& v) { c.m = trim(v); }, \
          [](const RunConfig& c) { return c.m; }}
#define LS_DOUBLES(k, m) \
    Field{k, [](RunConfig& c, const std::string& key, const std::string& v) { c.m = to_doubles(key, v); }, \
          [](const RunConfig& c) { return join(c.m, fmt); }}

const std::vector<Field>& fields() {
    static const std::vector<Field> f{
        LS_STRING("problem.family", problem.family),
        LS_DOUBLE("problem.a", problem.a),
        Field{"problem.b",
              [](RunConfig& c, const std::string& key, const std::string& v) {
                  if (trim(v) == "risk_neutral") {
                      c.problem.b.reset();
                  } else {
                      c.problem.b = to_double(key, v);
                  }
              },
              [](const RunConfig& c) { return c.problem.b ? fmt(*c.problem.b) : std::string("risk_neutral"); }},
        LS_DOUBLE("problem.r", problem.r),
        LS_DOUBLE("problem.q", problem.q),
        LS_DOUBLE("problem.lambda_floor", problem.lambda_floor),
        LS_STRING("problem.payoff", problem.payoff),
        LS_DOUBLE("problem.strike", problem.strike),
        LS_DOUBLE("problem.cap", problem.cap),
        LS_DOUBLE("problem.curvature", problem.curvature),
        LS_DOUBLES("problem.custom_x", problem.custom_x),
        LS_DOUBLES("problem.custom_g", problem.custom_g),
        LS_STRING("problem.custom_csv", problem.custom_csv),
        LS_DOUBLE("problem.T", problem.T),

        LS_DOUBLE("numerics.x_lo", numerics.x_lo),
        LS_DOUBLE("numerics.x_hi", numerics.x_hi),
        LS_DOUBLE("numerics.pad", numerics.pad),
        LS_INT("numerics.nx", numerics.nx),
        LS_INT("numerics.nt", numerics.nt),
        LS_DOUBLES("numerics.eps_schedule", numerics.eps_schedule),
        LS_DOUBLE("numerics.theta", numerics.theta),
        LS_STRING("numerics.mode", numerics.mode),
        LS_DOUBLE("numerics.eps_split", numerics.eps_split),
        LS_DOUBLE("numerics.truncation_tol", numerics.truncation_tol),
        LS_STRING("numerics.extension", numerics.extension),
        LS_STRING("numerics.operator", numerics.op),
        LS_DOUBLE("numerics.lemma_c", numerics.lemma_c),
        LS_DOUBLE("numerics.gap_tol", numerics.gap_tol),
        LS_INT("numerics.collar", numerics.collar),
        LS_DOUBLE("numerics.terminal_layer", numerics.terminal_layer),

        LS_BOOL("oracle.mc", oracle.mc),
        LS_BOOL("oracle.binomial", oracle.binomial),
        LS_BOOL("oracle.series", oracle.series),
        LS_INT("oracle.mc_paths", oracle.mc_paths),
        LS_INT("oracle.mc_steps", oracle.mc_steps),
        Field{"oracle.seed",
              [](RunConfig& c, const std::string& key, const std::string& v) {
                  c.oracle.seed = to_int<std::uint64_t>(key, v);
              },
              [](const RunConfig& c) { return std::to_string(c.oracle.seed); }},
        LS_DOUBLE("oracle.mc_eps", oracle.mc_eps),
        LS_INT("oracle.lsm_degree", oracle.lsm_degree),
        LS_INT("oracle.binomial_steps", oracle.binomial_steps),
        LS_DOUBLES("oracle.probe_x", oracle.probe_x),
        LS_DOUBLES("oracle.probe_t", oracle.probe_t),

        LS_STRING("output.dir", output.dir),
        Field{"output.formats",
              [](RunConfig& c, const std::string&, const std::string& v) { c.output.formats = split_list(v); },
              [](const RunConfig& c) { return join(c.output.formats, [](const std::string& s) { return s; }); }},
    };
    return f;
}

#undef LS_DOUBLE
#undef LS_INT
#undef LS_BOOL
#undef LS_STRING
#undef LS_DOUBLES

constexpr std::string_view kLevyPrefix = "problem.levy.";

// Flattens nested objects into dotted keys; arrays become comma lists.
void flatten(const nlohmann::json& j, const std::string& prefix, RunConfig& rc) {
    auto scalar = [](const nlohmann::json& v) -> std::string {
        if (v.is_string()) return v.get<std::string>();
        if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
        if (v.is_number_float()) return fmt(v.get<double>());
        if (v.is_number()) return v.dump();
        throw ConfigError("unsupported JSON value " + v.dump());
    };
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
        const auto& v = it.value();
        if (v.is_object()) {
            flatten(v, key, rc);
        } else if (v.is_array()) {
            std::string joined;
            for (std::size_t k = 0; k < v.size(); ++k) joined += (k ? "," : "") + scalar(v[k]);
            rc.set(key, joined);
        } else if (v.is_null()) {
            throw ConfigError(key + ": null is not a value");
        } else {
            rc.set(key, scalar(v));
        }
    }
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
    if (key.starts_with(kLevyPrefix)) {
        const std::string name = key.substr(kLevyPrefix.size());
        if (name.empty()) throw ConfigError("empty Lévy parameter name");
        problem.levy[name] = to_double(key, value);
        return;
    }
    for (const auto& f : fields()) {
        if (key == f.key) {
            f.set(*this, key, value);
            return;
        }
    }
    throw ConfigError("unknown configuration key '" + key + "'");
}

std::string RunConfig::to_text() const {
    std::ostringstream out;
    std::string section;
    auto emit = [&](const std::string& key, const std::string& value) {
        const auto dot = key.find('.');
        const std::string sec = key.substr(0, dot);
        if (sec != section) {
            out << (section.empty() ? "" : "\n") << "[" << sec << "]\n";
            section = sec;
        }
        out << key.substr(dot + 1) << " = " << value << "\n";
    };
    for (const auto& f : fields()) {
        emit(f.key, f.get(*this));
        if (std::string_view(f.key) == "problem.family") {
            for (const auto& [name, v] : problem.levy) emit(std::string(kLevyPrefix) + name, fmt(v));
        }
    }
    return out.str();
}

void RunConfig::validate() const {
    (void)make_model(*this);
    (void)make_payoff(*this);
    (void)solve_mode_from_string(numerics.mode);
    try {
        (void)extension_from_string(numerics.extension);
    } catch (const Error& e) {
        throw ConfigError(std::string("numerics.extension: ") + e.what());
    }
    if (numerics.op != "full" && numerics.op != "reduced") {
        throw ConfigError("numerics.operator must be full or reduced");
    }
    if (!(problem.a >= 0.0)) throw ConfigError("problem.a must be >= 0");
    if (!(problem.r >= 0.0)) throw ConfigError("problem.r must be >= 0");
    if (!(numerics.lemma_c > 0.0)) throw ConfigError("numerics.lemma_c must be > 0");
    if (numerics.collar < 0) throw ConfigError("numerics.collar must be >= 0");
    if (!(numerics.terminal_layer >= 0.0 && numerics.terminal_layer < 1.0)) {
        throw ConfigError("numerics.terminal_layer must lie in [0, 1)");
    }
    if (oracle.mc_paths < 2) throw ConfigError("oracle.mc_paths must be >= 2");
    if (oracle.mc_steps < 1) throw ConfigError("oracle.mc_steps must be >= 1");
    if (oracle.lsm_degree < 0 || oracle.lsm_degree > 8) throw ConfigError("oracle.lsm_degree must lie in [0, 8]");
    if (oracle.binomial_steps < 10) throw ConfigError("oracle.binomial_steps must be >= 10");
    if (oracle.probe_x.empty() || oracle.probe_t.empty()) throw ConfigError("oracle.probe_x and probe_t must be nonempty");
    for (double x : oracle.probe_x) {
        if (!(x >= numerics.x_lo && x <= numerics.x_hi)) throw ConfigError("oracle.probe_x must lie in [x_lo, x_hi]");
    }
    for (double t : oracle.probe_t) {
        if (!(t >= 0.0 && t < problem.T)) throw ConfigError("oracle.probe_t must lie in [0, T)");
    }
    for (const auto& f : output.formats) {
        if (f != "csv" && f != "json") throw ConfigError("output.formats: unknown format '" + f + "'");
    }
    if (output.dir.empty()) throw ConfigError("output.dir is empty");
}

RunConfig parse_text(const std::string& text) {
    RunConfig rc;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        if (t.front() == '[') {
            if (t.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": unterminated section header");
            section = trim(std::string_view(t).substr(1, t.size() - 2));
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(std::string_view(t).substr(0, eq));
        const std::string value = trim(std::string_view(t).substr(eq + 1));
        if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        rc.set(section.empty() ? key : section + "." + key, value);
    }
    return rc;
}

RunConfig parse_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("JSON configuration must be an object");
    RunConfig rc;
    flatten(j, "", rc);
    return rc;
}

RunConfig parse_config(const std::string& text) {
    const auto b = text.find_first_not_of(" \t\r\n");
    if (b != std::string::npos && text[b] == '{') return parse_json(text);
    return parse_text(text);
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read configuration file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

LevyModel make_model(const RunConfig& rc) {
    try {
        const LevyFamily f = levy_family_from_string(rc.problem.family);
        if (f == LevyFamily::None) {
            if (!rc.problem.levy.empty()) throw ConfigError("family none takes no problem.levy parameters");
            return LevyModel::none();
        }
        return LevyModel::from_params(f, rc.problem.levy);
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(std::string("problem.levy: ") + e.what());
    }
}

PayoffSpec make_payoff(const RunConfig& rc) {
    const auto& p = rc.problem;
    try {
        switch (payoff_kind_from_string(p.payoff)) {
            case PayoffKind::Put: return PayoffSpec::put(p.strike);
            case PayoffKind::CappedCall: return PayoffSpec::capped_call(p.strike, p.cap, p.curvature);
            case PayoffKind::Custom:
                if (!p.custom_csv.empty()) {
                    if (!p.custom_x.empty() || !p.custom_g.empty()) {
                        throw ConfigError("problem.custom_csv excludes custom_x / custom_g");
                    }
                    return PayoffSpec::custom_from_csv(p.custom_csv);
                }
                return PayoffSpec::custom(p.custom_x, p.custom_g);
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(std::string("problem.payoff: ") + e.what());
    }
    throw ConfigError("problem.payoff: unknown kind");
}

SolveConfig to_solve_config(const RunConfig& rc, int refine) {
    if (refine < 0 || refine > 8) throw ConfigError("refine must lie in [0, 8]");
    rc.validate();
    SolveConfig c;
    c.grid.x_lo = rc.numerics.x_lo;
    c.grid.x_hi = rc.numerics.x_hi;
    c.grid.pad = rc.numerics.pad;
    c.grid.nx = rc.numerics.nx;
    c.grid.nt = rc.numerics.nt;
    c.grid.T = rc.problem.T;
    c.grid.validate();
    c.grid = c.grid.refined(refine);
    c.model = make_model(rc);
    c.payoff = make_payoff(rc);
    const double b = rc.problem.b ? *rc.problem.b
                                  : oracle::risk_neutral_drift(c.model, rc.problem.r, rc.problem.a, rc.problem.q);
    if (!std::isfinite(b)) throw ConfigError("risk-neutral drift is not finite (exponential moment of the jumps diverges)");
    c.coeffs = CoefficientField::constant(rc.problem.a, b, rc.problem.r, rc.problem.lambda_floor);
    c.eps_schedule = rc.numerics.eps_schedule;
    c.theta = rc.numerics.theta;
    c.mode = solve_mode_from_string(rc.numerics.mode);
    c.eps_split = rc.numerics.eps_split;
    c.truncation_tol = rc.numerics.truncation_tol;
    c.extension = extension_from_string(rc.numerics.extension);
    c.reduced_operator = rc.numerics.op == "reduced";
    c.validate();
    return c;
}

}  // namespace levystop
