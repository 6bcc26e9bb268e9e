#include "wicklab/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace wicklab {

const std::vector<std::string>& ExperimentConfig::known_keys() {
    static const std::vector<std::string> keys = {
        "d",    "N",     "k",       "alpha", "beta", "sigma", "T",     "t",    "h",
        "ell",  "k1",    "k2",      "samples", "seed", "shells", "jmin", "jmax", "tol",
        "steps", "radius", "out",   "table", "kind", "mode",  "case",  "a",    "b",
        "c",    "lo",    "hi",      "N_list", "levels", "nodes"};
    return keys;
}

std::string closest_key(const std::string& unknown) {
    // smallest edit distance among the known keys
    auto dist = [](const std::string& a, const std::string& b) {
        std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
        for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
        for (std::size_t i = 1; i <= a.size(); ++i) {
            cur[0] = i;
            for (std::size_t j = 1; j <= b.size(); ++j) {
                std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
                cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
            }
            std::swap(prev, cur);
        }
        return prev[b.size()];
    };
    std::string best;
    std::size_t best_d = std::size_t(-1);
    for (const auto& k : ExperimentConfig::known_keys()) {
        std::size_t d = dist(unknown, k);
        if (d < best_d) {
            best_d = d;
            best = k;
        }
    }
    return best;
}

static std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        const auto& keys = known_keys();
        if (std::find(keys.begin(), keys.end(), key) == keys.end())
            throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key +
                              "' (did you mean '" + closest_key(key) + "'?)");
        if (cfg.values_.count(key))
            throw ConfigError("config line " + std::to_string(lineno) + ": duplicate key '" + key +
                              "'");
        if (value.empty())
            throw ConfigError("config line " + std::to_string(lineno) + ": empty value for '" +
                              key + "'");
        cfg.values_[key] = value;
    }
    return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file " + path);
    std::stringstream buf;
    buf << is.rdbuf();
    return parse(buf.str());
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
    const auto& keys = known_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end())
        throw ConfigError("unknown config key '" + key + "' (did you mean '" + closest_key(key) +
                          "'?)");
    values_[key] = value;
}

bool ExperimentConfig::has(const std::string& key) const { return values_.count(key) != 0; }

std::string ExperimentConfig::get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("missing required setting '" + key + "'");
    return it->second;
}

std::string ExperimentConfig::get_or(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

double ExperimentConfig::get_double(const std::string& key) const {
    try {
        return std::stod(get(key));
    } catch (const std::invalid_argument&) {
        throw ConfigError("setting '" + key + "' is not a number: " + get(key));
    }
}

long ExperimentConfig::get_long(const std::string& key) const {
    try {
        return std::stol(get(key));
    } catch (const std::invalid_argument&) {
        throw ConfigError("setting '" + key + "' is not an integer: " + get(key));
    }
}

std::string ExperimentConfig::serialize() const {
    std::ostringstream os;
    for (const auto& [k, v] : values_) os << k << " = " << v << "\n";
    return os.str();
}

} // namespace wicklab
