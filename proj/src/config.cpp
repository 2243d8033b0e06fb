#include "tomolab/config.hpp"

#include "tomolab/csv.hpp"
#include "tomolab/rng.hpp"

#include <fstream>
#include <sstream>

namespace tomolab {

namespace {
std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw ConfigError("config: " + key + " expects a boolean, got '" + v + "'");
}
} // namespace

void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    try {
        if (key == "seed") {
            if (value.empty() || value[0] == '-') throw std::invalid_argument("seed must be a non-negative integer");
            std::size_t pos = 0;
            cfg.master_seed = std::stoull(value, &pos, 10);
            if (pos != value.size()) throw std::invalid_argument("seed: trailing characters");
        } else if (key == "sigma") {
            cfg.sigma = parse_double(value, key);
        } else if (key == "p_min") {
            cfg.p_min = parse_double(value, key);
        } else if (key == "p_max") {
            cfg.p_max = parse_double(value, key);
        } else if (key == "sets") {
            cfg.num_gate_sets = int(parse_int(value, key));
        } else if (key == "schedule_cap") {
            cfg.schedule_cap = parse_int(value, key);
        } else if (key == "out") {
            cfg.output_dir = value;
        } else if (key == "strict_paper_rhs") {
            cfg.strict_paper_rhs = parse_bool(value, key);
        } else if (key == "iterate") {
            cfg.iterate_unital = parse_bool(value, key);
        } else if (key == "threads") {
            cfg.threads = int(parse_int(value, key));
        } else if (key == "trials") {
            cfg.trials = int(parse_int(value, key));
        } else if (key == "gates") {
            cfg.gates = int(parse_int(value, key));
        } else if (key == "mc_samples") {
            cfg.mc_samples = int(parse_int(value, key));
        } else if (key == "input") {
            cfg.input = value;
        } else {
            throw ConfigError("config: unknown key '" + key + "'");
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError("config: bad value for " + key + ": " + e.what());
    }
}

ExperimentConfig parse_config(const std::string& text, ExperimentConfig cfg) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
        try {
            apply_setting(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        } catch (const ConfigError& e) {
            throw ConfigError("config line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path, ExperimentConfig base) {
    std::ifstream f(path);
    if (!f) throw ConfigError("config: cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str(), std::move(base));
}

void validate(const ExperimentConfig& cfg, double dlo, double dhi) {
    const double lo = cfg.p_low(dlo), hi = cfg.p_high(dhi);
    if (!(cfg.sigma >= 0.0)) throw ConfigError("config: sigma must be >= 0");
    if (!(lo > 0.0) || !(hi < 0.5)) throw ConfigError("config: error-rate range must lie in (0, 0.5)");
    if (!(lo < hi)) throw ConfigError("config: p_min must be below p_max");
    if (cfg.num_gate_sets < 1) throw ConfigError("config: sets must be >= 1");
    if (cfg.trials < 1) throw ConfigError("config: trials must be >= 1");
    if (cfg.gates < 1) throw ConfigError("config: gates must be >= 1");
    if (cfg.mc_samples < 0) throw ConfigError("config: mc_samples must be >= 0");
    if (cfg.schedule_cap < 0) throw ConfigError("config: schedule_cap must be >= 0");
    if (cfg.threads < 0) throw ConfigError("config: threads must be >= 0");
}

std::string canonical(const ExperimentConfig& cfg, double dlo, double dhi) {
    std::ostringstream os;
    os << "seed=" << cfg.master_seed << "\n"
       << "sigma=" << fmt(cfg.sigma) << "\n"
       << "p_min=" << fmt(cfg.p_low(dlo)) << "\n"
       << "p_max=" << fmt(cfg.p_high(dhi)) << "\n"
       << "sets=" << cfg.num_gate_sets << "\n"
       << "schedule_cap=" << cfg.schedule_cap << "\n"
       << "strict_paper_rhs=" << (cfg.strict_paper_rhs ? 1 : 0) << "\n"
       << "iterate=" << (cfg.iterate_unital ? 1 : 0) << "\n"
       << "trials=" << cfg.trials << "\n"
       << "gates=" << cfg.gates << "\n"
       << "mc_samples=" << cfg.mc_samples << "\n"
       << "input=" << cfg.input << "\n";
    return os.str();
}

std::uint64_t config_hash(const ExperimentConfig& cfg, double dlo, double dhi) {
    const std::string s = canonical(cfg, dlo, dhi);
    return fnv1a(s.data(), s.size());
}

} // namespace tomolab
