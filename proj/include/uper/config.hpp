#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace uper {

// Raised for unknown keys, type mismatches, and missing experiment ids.
// The CLI maps it to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class ExperimentKind {
    kBandit,
    kBanditShifted,
    kGridworld,
    kPosteriorDemo,
    kBiasStudy,
};

ExperimentKind experiment_from_string(std::string_view name);
std::string_view experiment_name(ExperimentKind kind);

using ConfigValue = std::variant<bool, std::int64_t, double, std::string, std::vector<double>,
                                 std::vector<std::string>>;

// Flat typed key-value store. The per-experiment defaults define the schema:
// setting an unknown key or a value of the wrong type is an error naming the
// key.
class ConfigMap {
public:
    void define(std::string key, ConfigValue default_value);

    bool has(std::string_view key) const;
    void set(std::string_view key, ConfigValue value);
    // Parses `text` according to the key's declared type ("--set k=v" path).
    void set_from_text(std::string_view key, std::string_view text);

    bool get_bool(std::string_view key) const;
    std::int64_t get_int(std::string_view key) const;
    double get_double(std::string_view key) const;  // accepts int-valued keys
    const std::string& get_string(std::string_view key) const;
    const std::vector<double>& get_double_list(std::string_view key) const;
    const std::vector<std::string>& get_string_list(std::string_view key) const;

    const std::map<std::string, ConfigValue>& values() const { return values_; }

    // Serialized as a flat JSON object (the config echo).
    std::string to_json_text() const;

private:
    const ConfigValue& find(std::string_view key) const;

    std::map<std::string, ConfigValue> values_;
};

struct ExperimentConfig {
    ExperimentKind kind;
    ConfigMap values;

    std::vector<std::int64_t> seeds() const;
    std::vector<std::string> schemes() const;  // empty for scheme-free experiments
    std::uint64_t root_seed() const;
};

ConfigMap default_config(ExperimentKind kind);

// Defaults, then JSON file content (if any), then --set overrides, in that
// order. `json_text` must be a flat JSON object.
ExperimentConfig make_experiment_config(
    ExperimentKind kind, std::string_view json_text,
    const std::vector<std::pair<std::string, std::string>>& overrides);

}  // namespace uper
