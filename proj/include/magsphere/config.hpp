#ifndef MAGSPHERE_CONFIG_HPP
#define MAGSPHERE_CONFIG_HPP

#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

#include "katok_params.hpp"
#include "sequence.hpp"
#include "wfamily.hpp"

namespace magsphere {

/// Key-value text serialisation of the parameter sets, one section per
/// system kind.
struct ParamConfig {
    std::map<std::string, std::map<std::string, std::string>> sections;

    void set(const std::string& section, const std::string& key, double value) {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.17g", value);
        sections[section][key] = buf;
    }
    double get(const std::string& section, const std::string& key) const {
        return std::stod(sections.at(section).at(key));
    }
    bool has(const std::string& section) const { return sections.count(section) > 0; }
};

inline void config_put(ParamConfig& cfg, const KatokParams& p) {
    cfg.set("katok", "s", p.s);
    cfg.set("katok", "alpha", p.alpha);
    cfg.set("katok", "k", p.k);
}

inline void config_put(ParamConfig& cfg, const WParams& p) {
    cfg.set("wfamily", "s", p.s);
    cfg.set("wfamily", "epsilon", p.eps);
    cfg.set("wfamily", "shrink", p.shrink);
}

inline void config_put(ParamConfig& cfg, const SequenceSpec& p, int n) {
    cfg.set("sequence", "s", p.s);
    cfg.set("sequence", "n", n);
    cfg.set("sequence", "rule", p.rule == SequenceSpec::AlphaRule::GoldenK2 ? 0 : 1);
}

inline KatokParams katok_from_config(const ParamConfig& cfg) {
    return KatokParams(cfg.get("katok", "s"), cfg.get("katok", "alpha"), cfg.get("katok", "k"));
}

inline WParams wparams_from_config(const ParamConfig& cfg) {
    return WParams(cfg.get("wfamily", "s"), cfg.get("wfamily", "epsilon"),
                   cfg.get("wfamily", "shrink"));
}

inline void write_config(const ParamConfig& cfg, std::ostream& os) {
    for (const auto& [name, kv] : cfg.sections) {
        os << "[" << name << "]\n";
        for (const auto& [k, v] : kv) os << k << "=" << v << "\n";
    }
}

inline ParamConfig parse_config(std::istream& is) {
    ParamConfig cfg;
    std::string line, section;
    while (std::getline(is, line)) {
        // strip comments and whitespace
        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line.erase(hash);
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return (a == std::string::npos) ? std::string{} : s.substr(a, b - a + 1);
        };
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') {
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("config: expected key=value: " + line);
        cfg.sections[section][trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return cfg;
}

} // namespace magsphere

#endif
