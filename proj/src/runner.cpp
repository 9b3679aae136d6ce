#include "uper/runner.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <thread>

#include "uper/appendix_labs.hpp"
#include "uper/bandit_experiment.hpp"
#include "uper/csv.hpp"
#include "uper/gridworld_experiment.hpp"

namespace uper {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
    if (workers < 1) workers = 1;
    if (workers == 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const auto count = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
    pool.reserve(count);
    for (std::size_t w = 0; w < count; ++w) {
        pool.emplace_back([&] {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                fn(i);
            }
        });
    }
    for (auto& t : pool) t.join();
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file " + path.string());
    return out;
}

BanditConfig bandit_config_from(const ConfigMap& v) {
    BanditConfig cfg;
    cfg.means = v.get_double_list("means");
    cfg.sigma_max = v.get_double("sigma_max");
    cfg.sigma_min = v.get_double("sigma_min");
    cfg.n_quantiles = static_cast<int>(v.get_int("n_quantiles"));
    cfg.n_ensemble = static_cast<int>(v.get_int("n_ensemble"));
    cfg.train_steps = v.get_int("train_steps");
    cfg.lr_base = v.get_double("lr_base");
    cfg.lr_half_life = v.get_double("lr_half_life");
    cfg.alpha = v.get_double("alpha");
    cfg.beta_start = v.get_double("beta_start");
    cfg.beta_end = v.get_double("beta_end");
    cfg.beta_fraction = v.get_double("beta_fraction");
    cfg.member_update_prob = v.get_double("member_update_prob");
    cfg.priority_floor = v.get_double("priority_floor");
    cfg.aleatoric_floor = v.get_double("aleatoric_floor");
    cfg.record_interval = v.get_int("record_interval");
    const auto& style = v.get_string("init_style");
    if (style == "sorted_uniform")
        cfg.init_style = InitStyle::kSortedUniform;
    else if (style == "evenly_spaced")
        cfg.init_style = InitStyle::kEvenlySpaced;
    else
        throw ConfigError("config key 'init_style' must be sorted_uniform or evenly_spaced");
    const auto& norm = v.get_string("weight_normalization");
    if (norm == "batch")
        cfg.weight_normalization = WeightNormalization::kBatch;
    else if (norm == "buffer")
        cfg.weight_normalization = WeightNormalization::kBuffer;
    else
        throw ConfigError("config key 'weight_normalization' must be batch or buffer");
    const auto& ale = v.get_string("uper_aleatoric");
    if (ale == "quantile")
        cfg.uper_aleatoric = BanditAleatoric::kQuantile;
    else if (ale == "direct")
        cfg.uper_aleatoric = BanditAleatoric::kDirect;
    else
        throw ConfigError("config key 'uper_aleatoric' must be quantile or direct");
    cfg.var_rate = v.get_double("var_rate");
    cfg.var_init_max = v.get_double("var_init_max");
    return cfg;
}

GridworldConfig gridworld_config_from(const ConfigMap& v) {
    GridworldConfig cfg;
    const auto& map_file = v.get_string("map_file");
    if (!map_file.empty()) {
        std::ifstream in(map_file);
        if (!in) throw ConfigError("cannot read map_file '" + map_file + "'");
        std::stringstream buf;
        buf << in.rdbuf();
        cfg.map = GridMap::parse(buf.str());
    }
    cfg.goal_reward = v.get_double("goal_reward");
    cfg.step_reward = v.get_double("step_reward");
    cfg.noise_std = v.get_double("noise_std");
    cfg.timeout = static_cast<int>(v.get_int("timeout"));
    cfg.lr = v.get_double("lr");
    cfg.gamma = v.get_double("gamma");
    cfg.epsilon = v.get_double("epsilon");
    cfg.epsilon_is_greedy_prob = v.get_bool("epsilon_is_greedy_prob");
    cfg.buffer_capacity = static_cast<std::size_t>(v.get_int("buffer_capacity"));
    cfg.alpha = v.get_double("alpha");
    cfg.beta_start = v.get_double("beta_start");
    cfg.beta_end = v.get_double("beta_end");
    cfg.beta_fraction = v.get_double("beta_fraction");
    cfg.priority_floor = v.get_double("priority_floor");
    cfg.aleatoric_floor = v.get_double("aleatoric_floor");
    cfg.direct_per_cycle = static_cast<int>(v.get_int("direct_per_cycle"));
    cfg.planning_per_cycle = static_cast<int>(v.get_int("planning_per_cycle"));
    cfg.episodes = static_cast<int>(v.get_int("episodes"));
    cfg.var_rate = v.get_double("var_rate");
    const auto& proxy = v.get_string("uper_proxy");
    if (proxy == "td2_over_count")
        cfg.proxy = UperProxy::kTdSquaredOverCount;
    else if (proxy == "inverse_count")
        cfg.proxy = UperProxy::kInverseCount;
    else
        throw ConfigError("config key 'uper_proxy' must be td2_over_count or inverse_count");
    const auto& norm = v.get_string("weight_normalization");
    if (norm == "batch")
        cfg.weight_normalization = WeightNormalization::kBatch;
    else if (norm == "buffer")
        cfg.weight_normalization = WeightNormalization::kBuffer;
    else
        throw ConfigError("config key 'weight_normalization' must be batch or buffer");
    const auto& ins = v.get_string("insert_priority");
    if (ins == "computed")
        cfg.insert_priority = InsertPriority::kComputed;
    else if (ins == "max")
        cfg.insert_priority = InsertPriority::kMaxSoFar;
    else
        throw ConfigError("config key 'insert_priority' must be computed or max");
    return cfg;
}

PosteriorDemoConfig posterior_config_from(const ConfigMap& v) {
    PosteriorDemoConfig cfg;
    cfg.steps = static_cast<int>(v.get_int("steps"));
    cfg.n_regressors = static_cast<int>(v.get_int("n_regressors"));
    cfg.n_quantiles = static_cast<int>(v.get_int("n_quantiles"));
    cfg.data_mean = v.get_double("data_mean");
    cfg.data_std = v.get_double("data_std");
    cfg.prior_mean = v.get_double("prior_mean");
    cfg.prior_std = v.get_double("prior_std");
    cfg.update_prob = v.get_double("update_prob");
    cfg.lr_base = v.get_double("lr_base");
    cfg.lr_half_life = v.get_double("lr_half_life");
    return cfg;
}

struct BiasCombo {
    BiasDist eta_dist;
    double eta_scale;
    BiasDist beta_dist;
    double beta_scale;

    std::string tag() const {
        return std::string(bias_dist_name(eta_dist)) + format_double(eta_scale) + "_" +
               std::string(bias_dist_name(beta_dist)) + format_double(beta_scale);
    }
};

std::vector<BiasCombo> bias_combos_from(const ConfigMap& v) {
    const auto& mode = v.get_string("combos");
    if (mode == "single") {
        return {BiasCombo{bias_dist_from_string(v.get_string("eta_dist")),
                          v.get_double("eta_scale"),
                          bias_dist_from_string(v.get_string("beta_dist")),
                          v.get_double("beta_scale")}};
    }
    if (mode != "standard8")
        throw ConfigError("config key 'combos' must be standard8 or single");
    std::vector<BiasCombo> out;
    for (const auto dist : {BiasDist::kUniform, BiasDist::kHalfNormal})
        for (const double be : {1.0, 3.0})
            for (const double bb : {1.0, 3.0}) out.push_back({dist, be, dist, bb});
    return out;
}

// ---- bandit ----

std::vector<CellOutcome> execute_bandit(const ExperimentConfig& config, const fs::path& out_dir,
                                        int workers) {
    const auto cfg = bandit_config_from(config.values);
    const auto schemes = config.schemes();
    const auto seeds = config.seeds();
    if (schemes.empty()) throw ConfigError("config key 'schemes' must not be empty");
    std::vector<PriorityScheme> parsed;
    for (const auto& s : schemes) {
        try {
            parsed.push_back(scheme_from_string(s));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }

    const std::size_t n_cells = schemes.size() * seeds.size();
    std::vector<BanditRunResult> results(n_cells);
    std::vector<CellOutcome> outcomes(n_cells);

    RngStream root(config.root_seed());
    parallel_for(n_cells, workers, [&](std::size_t i) {
        const std::size_t si = i / seeds.size();
        const std::size_t ki = i % seeds.size();
        auto& outcome = outcomes[i];
        outcome.scheme = schemes[si];
        outcome.seed = seeds[ki];
        try {
            auto stream =
                root.split(schemes[si]).split(static_cast<std::uint64_t>(seeds[ki]));
            results[i] = run_bandit(cfg, parsed[si], stream);
            outcome.ok = true;
            outcome.metric_name = "final_true_mse";
            outcome.metric_value = results[i].final_true_mse();
        } catch (const std::exception& e) {
            outcome.error = e.what();
        }
    });

    const int n_arms = cfg.n_arms();
    std::vector<std::string> header{"seed", "step", "scheme", "true_mse"};
    for (const char* prefix : {"p_arm_", "ehat_arm_", "ahat_arm_", "delta2_arm_"})
        for (int a = 0; a < n_arms; ++a) header.push_back(prefix + format_int(a));

    for (std::size_t si = 0; si < schemes.size(); ++si) {
        auto out = open_output(out_dir / ("bandit_" + schemes[si] + ".csv"));
        CsvWriter csv(out, header);
        for (std::size_t ki = 0; ki < seeds.size(); ++ki) {
            const auto& cell = results[si * seeds.size() + ki];
            for (const auto& rec : cell.records) {
                csv.field(seeds[ki]).field(rec.step).field(schemes[si]).field(rec.true_mse);
                for (const auto* arr : {&rec.p_arm, &rec.ehat_arm, &rec.ahat_arm, &rec.delta2_arm})
                    for (double x : *arr) csv.field(x);
                csv.end_row();
            }
        }
    }
    return outcomes;
}

// ---- gridworld ----

void write_heatmap_csv(const fs::path& path, const GridMap& map,
                       const std::vector<std::uint64_t>& grid) {
    auto out = open_output(path);
    for (int r = 0; r < map.height; ++r) {
        for (int c = 0; c < map.width; ++c) {
            if (c) out << ',';
            out << format_int(static_cast<std::int64_t>(grid[map.cell(r, c)]));
        }
        out << '\n';
    }
}

std::vector<CellOutcome> execute_gridworld(const ExperimentConfig& config, const fs::path& out_dir,
                                           int workers) {
    const auto cfg = gridworld_config_from(config.values);
    const auto schemes = config.schemes();
    const auto seeds = config.seeds();
    if (schemes.empty()) throw ConfigError("config key 'schemes' must not be empty");
    std::vector<ReplayVariant> parsed;
    for (const auto& s : schemes) {
        try {
            parsed.push_back(replay_variant_from_string(s));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }
    const double threshold = 0.8 * optimal_return(cfg);

    const std::size_t n_cells = schemes.size() * seeds.size();
    std::vector<GridworldRunResult> results(n_cells);
    std::vector<CellOutcome> outcomes(n_cells);

    RngStream root(config.root_seed());
    parallel_for(n_cells, workers, [&](std::size_t i) {
        const std::size_t si = i / seeds.size();
        const std::size_t ki = i % seeds.size();
        auto& outcome = outcomes[i];
        outcome.scheme = schemes[si];
        outcome.seed = seeds[ki];
        try {
            auto stream =
                root.split(schemes[si]).split(static_cast<std::uint64_t>(seeds[ki]));
            results[i] = run_gridworld(cfg, parsed[si], stream);
            outcome.ok = true;
            outcome.metric_name = "episodes_to_threshold";
            outcome.metric_value = episodes_to_threshold(results[i].test_returns, threshold);
        } catch (const std::exception& e) {
            outcome.error = e.what();
        }
    });

    for (std::size_t si = 0; si < schemes.size(); ++si) {
        auto out = open_output(out_dir / ("gridworld_" + schemes[si] + ".csv"));
        CsvWriter csv(out, {"seed", "episode", "scheme", "test_return"});
        std::vector<std::uint64_t> aggregate(cfg.map.n_states(), 0);
        for (std::size_t ki = 0; ki < seeds.size(); ++ki) {
            const auto& cell = results[si * seeds.size() + ki];
            for (std::size_t ep = 0; ep < cell.test_returns.size(); ++ep) {
                csv.field(seeds[ki])
                    .field(static_cast<std::int64_t>(ep + 1))
                    .field(schemes[si])
                    .field(cell.test_returns[ep]);
                csv.end_row();
            }
            for (std::size_t s = 0; s < cell.heatmap.size(); ++s)
                aggregate[s] += cell.heatmap[s];
            write_heatmap_csv(out_dir / ("heatmap_" + schemes[si] + "_seed" +
                                         format_int(seeds[ki]) + ".csv"),
                              cfg.map, cell.heatmap);
        }
        write_heatmap_csv(out_dir / ("heatmap_" + schemes[si] + "_aggregate.csv"), cfg.map,
                          aggregate);
    }
    return outcomes;
}

// ---- posterior demo ----

std::vector<CellOutcome> execute_posterior_demo(const ExperimentConfig& config,
                                                const fs::path& out_dir, int workers) {
    const auto cfg = posterior_config_from(config.values);
    const auto seeds = config.seeds();

    std::vector<std::vector<PosteriorDemoRecord>> results(seeds.size());
    std::vector<CellOutcome> outcomes(seeds.size());

    RngStream root(config.root_seed());
    parallel_for(seeds.size(), workers, [&](std::size_t ki) {
        auto& outcome = outcomes[ki];
        outcome.scheme = "demo";
        outcome.seed = seeds[ki];
        try {
            auto stream = root.split("demo").split(static_cast<std::uint64_t>(seeds[ki]));
            results[ki] = run_posterior_demo(cfg, stream);
            outcome.ok = true;
            outcome.metric_name = "final_ens_epistemic";
            outcome.metric_value = results[ki].back().ens_epistemic;
        } catch (const std::exception& e) {
            outcome.error = e.what();
        }
    });

    auto out = open_output(out_dir / "posterior_demo.csv");
    CsvWriter csv(out, {"seed", "step", "ens_epistemic", "ens_aleatoric", "bayes_var",
                        "delta_theta"});
    for (std::size_t ki = 0; ki < seeds.size(); ++ki) {
        for (const auto& rec : results[ki]) {
            csv.field(seeds[ki])
                .field(rec.step)
                .field(rec.ens_epistemic)
                .field(rec.ens_aleatoric)
                .field(rec.bayes_var)
                .field(rec.delta_theta);
            csv.end_row();
        }
    }
    return outcomes;
}

// ---- bias study ----

std::vector<CellOutcome> execute_bias_study(const ExperimentConfig& config,
                                            const fs::path& out_dir, int workers) {
    const auto combos = bias_combos_from(config.values);
    const auto seeds = config.seeds();
    const auto& v = config.values;

    BiasStudyConfig base;
    base.n_samples = static_cast<std::size_t>(v.get_int("n_samples"));
    const auto c_points = static_cast<int>(v.get_int("c_points"));
    const double c_min = v.get_double("c_min"), c_max = v.get_double("c_max");
    if (c_points < 2 || c_min <= 0.0 || c_max <= c_min)
        throw ConfigError("config keys c_min/c_max/c_points describe an invalid grid");
    base.c_grid.resize(c_points);
    for (int i = 0; i < c_points; ++i)
        base.c_grid[i] =
            std::exp(std::log(c_min) + (std::log(c_max) - std::log(c_min)) * i / (c_points - 1));
    base.forms.clear();
    for (const auto& f : v.get_string_list("forms")) base.forms.push_back(bias_form_from_string(f));

    const std::size_t n_cells = combos.size() * seeds.size();
    std::vector<std::vector<BiasPoint>> results(n_cells);
    std::vector<CellOutcome> outcomes(n_cells);

    RngStream root(config.root_seed());
    parallel_for(n_cells, workers, [&](std::size_t i) {
        const std::size_t ci = i / seeds.size();
        const std::size_t ki = i % seeds.size();
        auto& outcome = outcomes[i];
        outcome.scheme = combos[ci].tag();
        outcome.seed = seeds[ki];
        try {
            BiasStudyConfig cfg = base;
            cfg.eta_dist = combos[ci].eta_dist;
            cfg.eta_scale = combos[ci].eta_scale;
            cfg.beta_dist = combos[ci].beta_dist;
            cfg.beta_scale = combos[ci].beta_scale;
            auto stream =
                root.split(combos[ci].tag()).split(static_cast<std::uint64_t>(seeds[ki]));
            results[i] = run_bias_study(cfg, stream);
            outcome.ok = true;
            outcome.metric_name = "entropy_gap_at_cmax";
            double gap = 0.0;
            for (const auto& pt : results[i])
                if (pt.form == BiasForm::kVanilla && pt.c == base.c_grid.back())
                    gap = std::log(static_cast<double>(cfg.n_samples)) - pt.entropy;
            outcome.metric_value = gap;
        } catch (const std::exception& e) {
            outcome.error = e.what();
        }
    });

    for (std::size_t ci = 0; ci < combos.size(); ++ci) {
        auto out = open_output(out_dir / ("bias_study_" + combos[ci].tag() + ".csv"));
        CsvWriter csv(out, {"form", "C", "seed", "entropy", "dev_mean", "dev_std"});
        for (std::size_t ki = 0; ki < seeds.size(); ++ki) {
            for (const auto& pt : results[ci * seeds.size() + ki]) {
                csv.field(bias_form_name(pt.form))
                    .field(pt.c)
                    .field(seeds[ki])
                    .field(pt.entropy)
                    .field(pt.dev_mean)
                    .field(pt.dev_std);
                csv.end_row();
            }
        }
    }
    return outcomes;
}

void write_summary(const fs::path& out_dir, const ExperimentConfig& config,
                   const std::vector<CellOutcome>& outcomes) {
    json cells = json::array();
    json failures = json::array();
    for (const auto& c : outcomes) {
        json cell{{"scheme", c.scheme}, {"seed", c.seed}, {"status", c.ok ? "ok" : "failed"}};
        if (c.ok) {
            cell["metric"] = {{"name", c.metric_name}, {"value", c.metric_value}};
        } else {
            cell["error"] = c.error;
            failures.push_back({{"scheme", c.scheme}, {"seed", c.seed}, {"error", c.error}});
        }
        cells.push_back(std::move(cell));
    }
    json summary{{"experiment", std::string(experiment_name(config.kind))},
                 {"cells", std::move(cells)},
                 {"failures", std::move(failures)}};
    auto out = open_output(out_dir / "summary.json");
    out << summary.dump(2) << "\n";
}

}  // namespace

int run_experiment(const ExperimentConfig& config, const fs::path& out_dir, int workers,
                   std::ostream& log) {
    fs::create_directories(out_dir);
    {
        auto echo = open_output(out_dir / "config.json");
        json body = json::parse(config.values.to_json_text());
        body["experiment"] = std::string(experiment_name(config.kind));
        echo << body.dump(2) << "\n";
    }

    std::vector<CellOutcome> outcomes;
    switch (config.kind) {
        case ExperimentKind::kBandit:
        case ExperimentKind::kBanditShifted:
            outcomes = execute_bandit(config, out_dir, workers);
            break;
        case ExperimentKind::kGridworld:
            outcomes = execute_gridworld(config, out_dir, workers);
            break;
        case ExperimentKind::kPosteriorDemo:
            outcomes = execute_posterior_demo(config, out_dir, workers);
            break;
        case ExperimentKind::kBiasStudy:
            outcomes = execute_bias_study(config, out_dir, workers);
            break;
    }

    write_summary(out_dir, config, outcomes);
    int failed = 0;
    for (const auto& c : outcomes)
        if (!c.ok) {
            ++failed;
            log << "cell failed: scheme=" << c.scheme << " seed=" << c.seed << ": " << c.error
                << "\n";
        }
    return failed == 0 ? 0 : 1;
}

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"uper-lab: uncertainty-prioritized replay experiments"};
    app.allow_extras(false);

    std::string experiment;
    std::string config_file;
    std::vector<std::string> sets;
    int seeds = -1;
    int workers = 1;
    std::string out_dir;

    app.add_option("experiment", experiment,
                   "bandit | bandit-shifted | gridworld | posterior-demo | bias-study");
    app.add_option("--config", config_file, "flat JSON config file");
    app.add_option("--set", sets, "key=value override (repeatable)");
    app.add_option("--seeds", seeds, "number of seeds");
    app.add_option("--workers", workers, "parallel worker threads");
    app.add_option("--out", out_dir, "output directory (default $UPER_LAB_OUT or ./out)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (experiment.empty()) throw ConfigError("missing experiment id");
        const auto kind = experiment_from_string(experiment);

        std::string json_text;
        if (!config_file.empty()) {
            std::ifstream in(config_file);
            if (!in) throw ConfigError("cannot read config file '" + config_file + "'");
            std::stringstream buf;
            buf << in.rdbuf();
            json_text = buf.str();
        }

        std::vector<std::pair<std::string, std::string>> overrides;
        for (const auto& kv : sets) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos)
                throw ConfigError("--set expects key=value, got '" + kv + "'");
            overrides.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
        }
        if (seeds >= 0) overrides.emplace_back("seeds", std::to_string(seeds));

        const auto config = make_experiment_config(kind, json_text, overrides);

        if (out_dir.empty()) {
            const char* env = std::getenv("UPER_LAB_OUT");
            out_dir = env != nullptr ? env : "out";
        }
        return run_experiment(config, fs::path(out_dir), workers, std::cerr);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace uper
