#include "qflow/scenario.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

namespace qflow {

std::string scenario_name(ScenarioKind kind) {
    switch (kind) {
        case ScenarioKind::GaussianFree: return "gaussian-free";
        case ScenarioKind::GaussianBoosted: return "gaussian-boosted";
        case ScenarioKind::HarmonicCoherent: return "harmonic-coherent";
        case ScenarioKind::RouthDemo: return "routh-demo";
        case ScenarioKind::Custom: return "custom";
    }
    return "unknown";
}

ScenarioKind scenario_from_name(const std::string& name) {
    if (name == "gaussian-free") return ScenarioKind::GaussianFree;
    if (name == "gaussian-boosted") return ScenarioKind::GaussianBoosted;
    if (name == "harmonic-coherent") return ScenarioKind::HarmonicCoherent;
    if (name == "routh-demo") return ScenarioKind::RouthDemo;
    if (name == "custom") return ScenarioKind::Custom;
    throw ConfigError("unknown scenario '" + name + "'");
}

namespace {

struct Entry {
    std::string value;
    int line;
};

std::string trim(const std::string& s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

[[noreturn]] void fail(int line, const std::string& msg) {
    throw ConfigError("line " + std::to_string(line) + ": " + msg);
}

double parse_double(const Entry& e, const std::string& key) {
    const std::string v = trim(e.value);
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size())
        fail(e.line, "value for '" + key + "' is not a number: '" + v + "'");
    return x;
}

int parse_int(const Entry& e, const std::string& key) {
    const double x = parse_double(e, key);
    if (x != std::floor(x))
        fail(e.line, "value for '" + key + "' must be an integer");
    return static_cast<int>(x);
}

bool parse_bool(const Entry& e, const std::string& key) {
    const std::string v = trim(e.value);
    if (v == "on" || v == "true" || v == "1") return true;
    if (v == "off" || v == "false" || v == "0") return false;
    fail(e.line, "value for '" + key + "' must be on/off/true/false/1/0");
}

std::vector<double> parse_list(const Entry& e, const std::string& key) {
    std::vector<double> out;
    std::stringstream ss(e.value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        char* end = nullptr;
        const double x = std::strtod(item.c_str(), &end);
        if (end != item.c_str() + item.size())
            fail(e.line, "list entry for '" + key + "' is not a number: '" + item + "'");
        out.push_back(x);
    }
    if (out.empty()) fail(e.line, "'" + key + "' must contain at least one value");
    return out;
}

const std::map<std::string, std::vector<std::string>> kSectionKeys = {
    {"physical", {"hbar", "mass", "sigma0", "p0", "omega", "x0"}},
    {"numerics", {"n_labels", "m_grid", "dt", "t_final", "half_width", "output_stride",
                  "label_output_stride", "x_output_stride", "traj_tol", "conc_tol"}},
    {"toggles", {"run_reference", "run_concealed", "convergence_levels"}},
};

void apply_scenario_defaults(ScenarioConfig& c) {
    switch (c.scenario) {
        case ScenarioKind::GaussianFree:
            break;  // struct defaults are the gaussian-free defaults
        case ScenarioKind::GaussianBoosted:
            c.p0 = 10.0;
            c.half_width = 32.0;
            c.m_grid = 16384;
            break;
        case ScenarioKind::HarmonicCoherent:
            c.omega = 1.0;
            c.x0 = 1.0;
            c.t_final = 2.0 * std::numbers::pi;
            c.half_width = 8.0;
            break;
        case ScenarioKind::RouthDemo:
            c.dt = 1e-4;
            c.t_final = 1.0;
            c.run_reference = false;
            break;
        case ScenarioKind::Custom:
            break;
    }
}

void validate(ScenarioConfig& c) {
    auto require = [](bool ok, const std::string& msg) {
        if (!ok) throw ConfigError(msg);
    };
    require(c.hbar > 0.0, "hbar must be positive");
    require(c.mass > 0.0, "mass must be positive");
    require(c.sigma0 > 0.0, "sigma0 must be positive");
    require(c.omega >= 0.0, "omega must be non-negative");
    require(c.n_labels >= 16, "n_labels must be >= 16");
    require(c.m_grid >= 16, "m_grid must be >= 16");
    require(c.dt > 0.0, "dt must be positive");
    require(c.t_final >= 0.0, "t_final must be non-negative");
    require(c.half_width > 0.0, "half_width must be positive");
    require(c.output_stride >= 1, "output_stride must be >= 1");
    require(c.label_output_stride >= 0, "label_output_stride must be >= 0");
    require(c.x_output_stride >= 0, "x_output_stride must be >= 0");
    require(c.traj_tol > 0.0, "traj_tol must be positive");
    require(c.conc_tol > 0.0, "conc_tol must be positive");
    for (double f : c.convergence_levels)
        require(f >= 1.0, "convergence_levels entries must be >= 1");

    if (c.scenario == ScenarioKind::HarmonicCoherent) {
        require(c.omega > 0.0, "harmonic-coherent requires omega > 0");
        if (c.sigma0_explicit)
            throw ConfigError(
                "sigma0 is derived for harmonic-coherent (sigma0^2 = hbar/2m omega); "
                "use scenario=custom for other widths");
        if (c.p0 != 0.0)
            throw ConfigError("harmonic-coherent starts at the turning point; p0 must be 0");
        c.sigma0 = std::sqrt(0.5 * c.hbar / (c.mass * c.omega));
    }
    if (c.scenario == ScenarioKind::Custom) {
        require(c.sigma0_explicit, "custom scenario requires an explicit sigma0");
        require(c.half_width_explicit, "custom scenario requires an explicit half_width");
    }
}

}  // namespace

ScenarioConfig parse_config(std::istream& in) {
    std::map<std::string, Entry> entries;  // "section.key" -> value
    std::string scenario_value;
    int scenario_line = 0;

    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto pos = line.find('#'); pos != std::string::npos)
            line.erase(pos);
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') fail(lineno, "malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            if (!kSectionKeys.contains(section))
                fail(lineno, "unknown section [" + section + "]");
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string::npos) fail(lineno, "expected key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) fail(lineno, "empty key");

        if (section.empty()) {
            if (key != "scenario")
                fail(lineno, "key '" + key + "' must appear inside a section");
            scenario_value = value;
            scenario_line = lineno;
            continue;
        }
        const auto& allowed = kSectionKeys.at(section);
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            fail(lineno, "unknown key '" + key + "' in [" + section + "]");
        const std::string full = section + "." + key;
        if (entries.contains(full)) fail(lineno, "duplicate key '" + key + "'");
        entries[full] = Entry{value, lineno};
    }

    if (scenario_value.empty())
        throw ConfigError("missing scenario (expected a 'scenario=<name>' line)");

    ScenarioConfig c;
    try {
        c.scenario = scenario_from_name(scenario_value);
    } catch (const ConfigError& e) {
        fail(scenario_line, e.what());
    }
    apply_scenario_defaults(c);

    auto take_double = [&](const char* full, double& dst, bool* seen = nullptr) {
        if (const auto it = entries.find(full); it != entries.end()) {
            dst = parse_double(it->second, full);
            if (seen) *seen = true;
        }
    };
    auto take_int = [&](const char* full, int& dst) {
        if (const auto it = entries.find(full); it != entries.end())
            dst = parse_int(it->second, full);
    };
    auto take_bool = [&](const char* full, bool& dst) {
        if (const auto it = entries.find(full); it != entries.end())
            dst = parse_bool(it->second, full);
    };

    take_double("physical.hbar", c.hbar);
    take_double("physical.mass", c.mass);
    take_double("physical.sigma0", c.sigma0, &c.sigma0_explicit);
    take_double("physical.p0", c.p0);
    take_double("physical.omega", c.omega);
    take_double("physical.x0", c.x0);
    take_int("numerics.n_labels", c.n_labels);
    take_int("numerics.m_grid", c.m_grid);
    take_double("numerics.dt", c.dt);
    take_double("numerics.t_final", c.t_final);
    take_double("numerics.half_width", c.half_width, &c.half_width_explicit);
    take_int("numerics.output_stride", c.output_stride);
    take_int("numerics.label_output_stride", c.label_output_stride);
    take_int("numerics.x_output_stride", c.x_output_stride);
    take_double("numerics.traj_tol", c.traj_tol);
    take_double("numerics.conc_tol", c.conc_tol);
    take_bool("toggles.run_reference", c.run_reference);
    take_bool("toggles.run_concealed", c.run_concealed);
    if (const auto it = entries.find("toggles.convergence_levels"); it != entries.end())
        c.convergence_levels = parse_list(it->second, "convergence_levels");

    validate(c);
    return c;
}

ScenarioConfig parse_config_text(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

ScenarioConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse_config(in);
}

ScenarioConfig default_config(ScenarioKind kind) {
    ScenarioConfig c;
    c.scenario = kind;
    apply_scenario_defaults(c);
    if (kind == ScenarioKind::Custom) {
        c.sigma0_explicit = true;
        c.half_width_explicit = true;
    }
    validate(c);
    return c;
}

ScenarioSetup build_scenario(const ScenarioConfig& config) {
    if (config.scenario == ScenarioKind::RouthDemo)
        throw ConfigError("routh-demo has no fluid setup");

    ScenarioSetup setup;
    setup.params.hbar = config.hbar;
    setup.params.mass = config.mass;
    setup.params.dt = config.dt;
    setup.params.t_final = config.t_final;

    const double hbar = config.hbar, m = config.mass;
    const double sigma0 = config.sigma0, x0 = config.x0, p0 = config.p0;

    const bool trapped = config.omega > 0.0;
    if (trapped) setup.params.external = harmonic_potential(m, config.omega);

    setup.initial = gaussian_packet(hbar, m, sigma0, x0, p0);

    // Final packet width, used to size the spatial domain so the Dirichlet
    // walls stay dark (|psi| < 1e-8) for the whole run.
    const double kappa = hbar / (2.0 * m * sigma0 * sigma0);
    const double sigma_final =
        trapped ? sigma0 : sigma0 * std::hypot(1.0, kappa * config.t_final);
    const double drift = std::abs(p0 / m) * config.t_final;
    const double required = std::abs(x0) + drift + 9.3 * sigma_final;

    setup.half_width = config.half_width;
    if (config.scenario != ScenarioKind::Custom && setup.half_width < required) {
        setup.half_width = required;
        setup.widened = true;
    }

    switch (config.scenario) {
        case ScenarioKind::GaussianFree:
        case ScenarioKind::GaussianBoosted: {
            setup.has_closed_forms = true;
            const double v0 = p0 / m;
            setup.q_exact = [x0, v0, sigma0, kappa](double a, double t) {
                const double spread = std::hypot(1.0, kappa * t);
                return x0 + v0 * t + (a - x0) * spread;
            };
            setup.dQ_exact = [x0, kappa](double a, double t) {
                return -(a - x0) * std::atan(kappa * t);
            };
            break;
        }
        case ScenarioKind::HarmonicCoherent: {
            setup.has_closed_forms = true;
            const double omega = config.omega;
            setup.q_exact = [x0, omega](double a, double t) {
                return a + x0 * (std::cos(omega * t) - 1.0);
            };
            const double c = 0.5 * hbar / m;
            const double var = sigma0 * sigma0;
            setup.dQ_exact = [x0, c, var](double a, double t) {
                return -c * (a - x0) / var * t;
            };
            break;
        }
        default:
            break;
    }
    return setup;
}

}  // namespace qflow
