#include "uper/config.hpp"

#include <json.hpp>

#include <charconv>

namespace uper {

namespace {

using nlohmann::json;

const char* type_name(const ConfigValue& v) {
    switch (v.index()) {
        case 0: return "bool";
        case 1: return "int";
        case 2: return "double";
        case 3: return "string";
        case 4: return "number list";
        case 5: return "string list";
    }
    return "?";
}

std::vector<std::string> split_commas(std::string_view text) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        const auto comma = text.find(',', pos);
        if (comma == std::string_view::npos) {
            out.emplace_back(text.substr(pos));
            break;
        }
        out.emplace_back(text.substr(pos, comma - pos));
        pos = comma + 1;
    }
    return out;
}

double parse_double_strict(std::string_view key, std::string_view text) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw ConfigError("type mismatch for key '" + std::string(key) + "': expected a number");
    return v;
}

std::int64_t parse_int_strict(std::string_view key, std::string_view text) {
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw ConfigError("type mismatch for key '" + std::string(key) + "': expected an integer");
    return v;
}

}  // namespace

ExperimentKind experiment_from_string(std::string_view name) {
    if (name == "bandit") return ExperimentKind::kBandit;
    if (name == "bandit-shifted") return ExperimentKind::kBanditShifted;
    if (name == "gridworld") return ExperimentKind::kGridworld;
    if (name == "posterior-demo") return ExperimentKind::kPosteriorDemo;
    if (name == "bias-study") return ExperimentKind::kBiasStudy;
    throw ConfigError("unknown experiment id '" + std::string(name) + "'");
}

std::string_view experiment_name(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::kBandit: return "bandit";
        case ExperimentKind::kBanditShifted: return "bandit-shifted";
        case ExperimentKind::kGridworld: return "gridworld";
        case ExperimentKind::kPosteriorDemo: return "posterior-demo";
        case ExperimentKind::kBiasStudy: return "bias-study";
    }
    return "?";
}

void ConfigMap::define(std::string key, ConfigValue default_value) {
    values_.emplace(std::move(key), std::move(default_value));
}

bool ConfigMap::has(std::string_view key) const { return values_.count(std::string(key)) != 0; }

const ConfigValue& ConfigMap::find(std::string_view key) const {
    const auto it = values_.find(std::string(key));
    if (it == values_.end()) throw ConfigError("unknown config key '" + std::string(key) + "'");
    return it->second;
}

void ConfigMap::set(std::string_view key, ConfigValue value) {
    const auto it = values_.find(std::string(key));
    if (it == values_.end()) throw ConfigError("unknown config key '" + std::string(key) + "'");
    // Integer literals are fine for double-typed keys (e.g. "alpha": 0).
    if (std::holds_alternative<double>(it->second) && std::holds_alternative<std::int64_t>(value))
        value = static_cast<double>(std::get<std::int64_t>(value));
    if (it->second.index() != value.index())
        throw ConfigError("type mismatch for key '" + std::string(key) + "': expected " +
                          type_name(it->second));
    it->second = std::move(value);
}

void ConfigMap::set_from_text(std::string_view key, std::string_view text) {
    const ConfigValue& current = find(key);
    switch (current.index()) {
        case 0: {
            if (text == "true" || text == "1")
                set(key, true);
            else if (text == "false" || text == "0")
                set(key, false);
            else
                throw ConfigError("type mismatch for key '" + std::string(key) +
                                  "': expected bool");
            break;
        }
        case 1: set(key, parse_int_strict(key, text)); break;
        case 2: set(key, parse_double_strict(key, text)); break;
        case 3: set(key, std::string(text)); break;
        case 4: {
            std::vector<double> out;
            for (const auto& piece : split_commas(text))
                out.push_back(parse_double_strict(key, piece));
            set(key, std::move(out));
            break;
        }
        case 5: set(key, split_commas(text)); break;
    }
}

bool ConfigMap::get_bool(std::string_view key) const { return std::get<bool>(find(key)); }

std::int64_t ConfigMap::get_int(std::string_view key) const {
    return std::get<std::int64_t>(find(key));
}

double ConfigMap::get_double(std::string_view key) const {
    const auto& v = find(key);
    if (std::holds_alternative<std::int64_t>(v))
        return static_cast<double>(std::get<std::int64_t>(v));
    return std::get<double>(v);
}

const std::string& ConfigMap::get_string(std::string_view key) const {
    return std::get<std::string>(find(key));
}

const std::vector<double>& ConfigMap::get_double_list(std::string_view key) const {
    return std::get<std::vector<double>>(find(key));
}

const std::vector<std::string>& ConfigMap::get_string_list(std::string_view key) const {
    return std::get<std::vector<std::string>>(find(key));
}

std::string ConfigMap::to_json_text() const {
    json out = json::object();
    for (const auto& [key, value] : values_) {
        std::visit([&](const auto& v) { out[key] = v; }, value);
    }
    return out.dump(2) + "\n";
}

std::vector<std::int64_t> ExperimentConfig::seeds() const {
    const auto& list = values.get_double_list("seed_list");
    if (!list.empty()) {
        std::vector<std::int64_t> out;
        out.reserve(list.size());
        for (double v : list) out.push_back(static_cast<std::int64_t>(v));
        return out;
    }
    const auto count = values.get_int("seeds");
    if (count < 1) throw ConfigError("config key 'seeds' must be >= 1");
    const auto base = values.get_int("seed_base");
    std::vector<std::int64_t> out;
    out.reserve(static_cast<std::size_t>(count));
    for (std::int64_t i = 0; i < count; ++i) out.push_back(base + i);
    return out;
}

std::vector<std::string> ExperimentConfig::schemes() const {
    if (!values.has("schemes")) return {};
    return values.get_string_list("schemes");
}

std::uint64_t ExperimentConfig::root_seed() const {
    return static_cast<std::uint64_t>(values.get_int("root_seed"));
}

namespace {

void define_common(ConfigMap& map, std::int64_t default_seeds) {
    map.define("seeds", default_seeds);
    map.define("seed_base", std::int64_t{0});
    map.define("seed_list", std::vector<double>{});
    map.define("root_seed", std::int64_t{0});
}

}  // namespace

ConfigMap default_config(ExperimentKind kind) {
    ConfigMap map;
    switch (kind) {
        case ExperimentKind::kBandit:
        case ExperimentKind::kBanditShifted: {
            const bool shifted = kind == ExperimentKind::kBanditShifted;
            map.define("means", shifted ? std::vector<double>{3.0, 2.75, 2.5, 2.25, 2.0}
                                        : std::vector<double>{2.0, 2.0, 2.0, 2.0, 2.0});
            map.define("sigma_max", 2.0);
            map.define("sigma_min", 0.1);
            map.define("n_quantiles", std::int64_t{30});
            map.define("n_ensemble", std::int64_t{30});
            map.define("train_steps", std::int64_t{200000});
            map.define("lr_base", 0.005);
            map.define("lr_half_life", 40000.0);
            map.define("alpha", 0.7);
            map.define("beta_start", 0.5);
            map.define("beta_end", 1.0);
            map.define("beta_fraction", 0.4);
            map.define("member_update_prob", 0.5);
            map.define("priority_floor", 1e-3);
            map.define("aleatoric_floor", 1e-6);
            map.define("record_interval", std::int64_t{1000});
            map.define("init_style", std::string("sorted_uniform"));
            map.define("weight_normalization", std::string("batch"));
            map.define("uper_aleatoric", std::string("quantile"));
            map.define("var_rate", 0.01);
            map.define("var_init_max", 0.1);
            map.define("schemes",
                       shifted ? std::vector<std::string>{"uper", "uper-plain"}
                               : std::vector<std::string>{"td", "inverse-count", "uper", "oracle"});
            define_common(map, 10);
            break;
        }
        case ExperimentKind::kGridworld: {
            map.define("map_file", std::string(""));
            map.define("goal_reward", 100.0);
            map.define("step_reward", -0.1);
            map.define("noise_std", 2.0);
            map.define("timeout", std::int64_t{1000});
            map.define("lr", 0.1);
            map.define("gamma", 0.9);
            map.define("epsilon", 0.95);
            map.define("epsilon_is_greedy_prob", true);
            map.define("buffer_capacity", std::int64_t{10000});
            map.define("alpha", 0.7);
            map.define("beta_start", 0.5);
            map.define("beta_end", 1.0);
            map.define("beta_fraction", 0.4);
            map.define("priority_floor", 1e-3);
            map.define("aleatoric_floor", 1e-6);
            map.define("direct_per_cycle", std::int64_t{10});
            map.define("planning_per_cycle", std::int64_t{5});
            map.define("episodes", std::int64_t{150});
            map.define("var_rate", 0.1);
            map.define("uper_proxy", std::string("td2_over_count"));
            map.define("weight_normalization", std::string("batch"));
            map.define("insert_priority", std::string("computed"));
            map.define("schemes", std::vector<std::string>{"er", "per", "uper", "none"});
            define_common(map, 100);
            break;
        }
        case ExperimentKind::kPosteriorDemo: {
            map.define("steps", std::int64_t{20000});
            map.define("n_regressors", std::int64_t{50});
            map.define("n_quantiles", std::int64_t{30});
            map.define("data_mean", 2.0);
            map.define("data_std", 1.0);
            map.define("prior_mean", 0.0);
            map.define("prior_std", 1.0);
            map.define("update_prob", 0.5);
            map.define("lr_base", 0.05);
            map.define("lr_half_life", 4000.0);
            define_common(map, 1);
            break;
        }
        case ExperimentKind::kBiasStudy: {
            map.define("n_samples", std::int64_t{100000});
            map.define("c_min", 1e-3);
            map.define("c_max", 10.0);
            map.define("c_points", std::int64_t{50});
            map.define("combos", std::string("standard8"));
            map.define("eta_dist", std::string("uniform"));
            map.define("eta_scale", 1.0);
            map.define("beta_dist", std::string("uniform"));
            map.define("beta_scale", 1.0);
            map.define("forms", std::vector<std::string>{"e", "e_u", "e2_u", "e3_u"});
            define_common(map, 1);
            break;
        }
    }
    return map;
}

ExperimentConfig make_experiment_config(
    ExperimentKind kind, std::string_view json_text,
    const std::vector<std::pair<std::string, std::string>>& overrides) {
    ExperimentConfig cfg{kind, default_config(kind)};

    if (!json_text.empty()) {
        json parsed;
        try {
            parsed = json::parse(json_text);
        } catch (const json::parse_error& e) {
            throw ConfigError(std::string("config file is not valid JSON: ") + e.what());
        }
        if (!parsed.is_object()) throw ConfigError("config file must hold a flat JSON object");
        for (const auto& [key, value] : parsed.items()) {
            if (!cfg.values.has(key)) throw ConfigError("unknown config key '" + key + "'");
            if (key == "seeds" && value.is_array()) {
                // "seeds" accepts either a count or an explicit list.
                try {
                    cfg.values.set("seed_list", value.get<std::vector<double>>());
                } catch (const json::exception&) {
                    throw ConfigError("type mismatch for key 'seeds'");
                }
                continue;
            }
            if (value.is_boolean())
                cfg.values.set(key, value.get<bool>());
            else if (value.is_number_integer())
                cfg.values.set(key, value.get<std::int64_t>());
            else if (value.is_number_float())
                cfg.values.set(key, value.get<double>());
            else if (value.is_string())
                cfg.values.set(key, value.get<std::string>());
            else if (value.is_array()) {
                try {
                    if (std::holds_alternative<std::vector<std::string>>(
                            cfg.values.values().at(key)))
                        cfg.values.set(key, value.get<std::vector<std::string>>());
                    else
                        cfg.values.set(key, value.get<std::vector<double>>());
                } catch (const json::exception&) {
                    throw ConfigError("type mismatch for key '" + key + "'");
                }
            } else {
                throw ConfigError("type mismatch for key '" + key + "': nested values not allowed");
            }
        }
    }

    for (const auto& [key, text] : overrides) cfg.values.set_from_text(key, text);
    return cfg;
}

}  // namespace uper
