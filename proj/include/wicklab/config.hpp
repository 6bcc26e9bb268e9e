// Flat key=value experiment configuration: file loading with precise error
// reporting, flag overrides, and byte-stable re-serialization for run records.
#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace wicklab {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

class ExperimentConfig {
public:
    static const std::vector<std::string>& known_keys();

    // parse `key = value` lines, '#' comments; duplicate keys and unknown
    // keys are errors (unknown keys carry a nearest-match suggestion)
    static ExperimentConfig parse(const std::string& text);
    static ExperimentConfig load(const std::string& path);

    void set(const std::string& key, const std::string& value); // validates key
    bool has(const std::string& key) const;
    std::string get(const std::string& key) const;
    std::string get_or(const std::string& key, const std::string& fallback) const;

    double get_double(const std::string& key) const;
    long get_long(const std::string& key) const;

    // canonical serialization: sorted "key = value" lines
    std::string serialize() const;

    const std::map<std::string, std::string>& values() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

std::string closest_key(const std::string& unknown);

} // namespace wicklab

namespace wicklab::cli {

// front door used by the binary and by tests
int run(const std::vector<std::string>& args);

} // namespace wicklab::cli
