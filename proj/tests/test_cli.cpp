#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "uper/config.hpp"
#include "uper/csv.hpp"
#include "uper/runner.hpp"

using uper::ConfigError;
using uper::ExperimentKind;

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::path("cli_test_out") / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::map<std::string, std::string> dir_contents(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& entry : fs::directory_iterator(dir))
        out[entry.path().filename().string()] = slurp(entry.path());
    return out;
}

int run_cli(std::vector<std::string> args) {
    std::vector<const char*> argv{"uper-lab"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return uper::cli_main(static_cast<int>(argv.size()), argv.data());
}

}  // namespace

TEST_CASE("bandit defaults carry the reference hyperparameters") {
    const auto cfg = make_experiment_config(ExperimentKind::kBandit, "", {});
    CHECK(cfg.values.get_int("n_quantiles") == 30);
    CHECK(cfg.values.get_int("n_ensemble") == 30);
    CHECK(cfg.values.get_int("train_steps") == 200000);
    CHECK(cfg.values.get_double("lr_base") == doctest::Approx(0.005));
    CHECK(cfg.values.get_double("lr_half_life") == doctest::Approx(40000.0));
    CHECK(cfg.values.get_double("alpha") == doctest::Approx(0.7));
    CHECK(cfg.values.get_double("beta_start") == doctest::Approx(0.5));
    CHECK(cfg.values.get_double("member_update_prob") == doctest::Approx(0.5));
    CHECK(cfg.values.get_double_list("means") == std::vector<double>{2, 2, 2, 2, 2});
    CHECK(cfg.seeds().size() == 10);

    const auto shifted = make_experiment_config(ExperimentKind::kBanditShifted, "", {});
    CHECK(shifted.values.get_double_list("means") == std::vector<double>{3, 2.75, 2.5, 2.25, 2});
}

TEST_CASE("gridworld defaults carry the reference hyperparameters") {
    const auto cfg = make_experiment_config(ExperimentKind::kGridworld, "", {});
    CHECK(cfg.values.get_double("lr") == doctest::Approx(0.1));
    CHECK(cfg.values.get_double("gamma") == doctest::Approx(0.9));
    CHECK(cfg.values.get_double("epsilon") == doctest::Approx(0.95));
    CHECK(cfg.values.get_int("buffer_capacity") == 10000);
    CHECK(cfg.values.get_int("timeout") == 1000);
    CHECK(cfg.values.get_int("direct_per_cycle") == 10);
    CHECK(cfg.values.get_int("planning_per_cycle") == 5);
    CHECK(cfg.values.get_int("episodes") == 150);
    CHECK(cfg.values.get_double("noise_std") == doctest::Approx(2.0));
}

TEST_CASE("unknown keys are rejected by name") {
    try {
        make_experiment_config(ExperimentKind::kBandit, R"({"n_quantile": 10})", {});
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("n_quantile") != std::string::npos);
    }
    CHECK_THROWS_AS(make_experiment_config(ExperimentKind::kBandit, "", {{"n_quantile", "10"}}),
                    ConfigError);
}

TEST_CASE("type mismatches are rejected by name") {
    try {
        make_experiment_config(ExperimentKind::kBandit, R"({"train_steps": "many"})", {});
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("train_steps") != std::string::npos);
    }
    CHECK_THROWS_AS(make_experiment_config(ExperimentKind::kBandit, "", {{"alpha", "abc"}}),
                    ConfigError);
    CHECK_THROWS_AS(make_experiment_config(ExperimentKind::kBandit, R"({"means": {"a": 1}})", {}),
                    ConfigError);
}

TEST_CASE("overrides win over file values and coerce integers") {
    const auto cfg = make_experiment_config(ExperimentKind::kBandit, R"({"alpha": 0})",
                                            {{"n_ensemble", "4"}});
    CHECK(cfg.values.get_double("alpha") == 0.0);
    CHECK(cfg.values.get_int("n_ensemble") == 4);
}

TEST_CASE("seeds resolve from count, base, or an explicit list") {
    const auto counted =
        make_experiment_config(ExperimentKind::kBandit, R"({"seeds": 3, "seed_base": 10})", {});
    CHECK(counted.seeds() == std::vector<std::int64_t>{10, 11, 12});
    const auto listed = make_experiment_config(ExperimentKind::kBandit, R"({"seeds": [5, 9]})", {});
    CHECK(listed.seeds() == std::vector<std::int64_t>{5, 9});
}

TEST_CASE("unknown experiment ids and missing ids exit with code 2") {
    CHECK(run_cli({"no-such-experiment"}) == 2);
    CHECK(run_cli({}) == 2);
    CHECK(run_cli({"bandit", "--set", "n_quantile=10", "--out",
                   (fs::path("cli_test_out") / "err").string()}) == 2);
    CHECK(run_cli({"bandit", "--set", "whatever", "--out",
                   (fs::path("cli_test_out") / "err").string()}) == 2);
}

TEST_CASE("a small bandit run writes the full output set") {
    const auto dir = fresh_dir("bandit_small");
    const int code = run_cli({"bandit", "--set", "train_steps=2000", "--set",
                              "record_interval=500", "--set", "schemes=uniform,td", "--seeds", "2",
                              "--out", dir.string()});
    CHECK(code == 0);
    CHECK(fs::exists(dir / "config.json"));
    CHECK(fs::exists(dir / "summary.json"));
    CHECK(fs::exists(dir / "bandit_uniform.csv"));
    CHECK(fs::exists(dir / "bandit_td.csv"));

    // config echo resolves the defaults and the overrides
    const auto echo = slurp(dir / "config.json");
    CHECK(echo.find("\"experiment\": \"bandit\"") != std::string::npos);
    CHECK(echo.find("\"train_steps\": 2000") != std::string::npos);

    // the CSV parses back: header plus 2 seeds x 4 records, 4 + 4*5 columns
    std::ifstream in(dir / "bandit_uniform.csv");
    const auto rows = uper::parse_csv(in);
    REQUIRE(rows.size() == 1 + 2 * 4);
    CHECK(rows[0].size() == 4 + 4 * 5);
    CHECK(rows[0][0] == "seed");
    CHECK(rows[0][3] == "true_mse");
    CHECK(rows[1][2] == "uniform");
    CHECK(uper::parse_double(rows[1][4]) == doctest::Approx(0.2));  // p_arm_0 under uniform

    const auto summary = slurp(dir / "summary.json");
    CHECK(summary.find("\"failures\": []") != std::string::npos);
    CHECK(summary.find("final_true_mse") != std::string::npos);
}

TEST_CASE("reruns and worker counts produce byte-identical outputs") {
    const auto dir1 = fresh_dir("det_a");
    const auto dir2 = fresh_dir("det_b");
    const auto dir3 = fresh_dir("det_c");
    const std::vector<std::string> common{
        "gridworld", "--set", "episodes=4",      "--set", "schemes=er,uper",
        "--seeds",   "3",     "--set", "timeout=200"};
    auto with = [&](const fs::path& dir, const char* workers) {
        auto args = common;
        args.insert(args.end(), {"--workers", workers, "--out", dir.string()});
        return run_cli(args);
    };
    CHECK(with(dir1, "1") == 0);
    CHECK(with(dir2, "1") == 0);
    CHECK(with(dir3, "4") == 0);
    const auto a = dir_contents(dir1), b = dir_contents(dir2), c = dir_contents(dir3);
    CHECK(a == b);
    CHECK(a == c);
    CHECK(a.count("gridworld_er.csv") == 1);
    CHECK(a.count("heatmap_er_aggregate.csv") == 1);
    CHECK(a.count("heatmap_uper_seed2.csv") == 1);
}

TEST_CASE("posterior demo and bias study emit their schemas") {
    const auto demo_dir = fresh_dir("demo");
    CHECK(run_cli({"posterior-demo", "--set", "steps=100", "--out", demo_dir.string()}) == 0);
    std::ifstream demo_csv(demo_dir / "posterior_demo.csv");
    const auto demo_rows = uper::parse_csv(demo_csv);
    REQUIRE(demo_rows.size() == 1 + 101);
    CHECK(demo_rows[0] == std::vector<std::string>{"seed", "step", "ens_epistemic",
                                                   "ens_aleatoric", "bayes_var", "delta_theta"});
    CHECK(uper::parse_double(demo_rows[1][4]) == doctest::Approx(1.0));  // prior variance

    const auto bias_dir = fresh_dir("bias");
    CHECK(run_cli({"bias-study", "--set", "n_samples=500", "--set", "c_points=4", "--set",
                   "combos=single", "--out", bias_dir.string()}) == 0);
    std::ifstream bias_csv(bias_dir / "bias_study_uniform1_uniform1.csv");
    const auto bias_rows = uper::parse_csv(bias_csv);
    REQUIRE(bias_rows.size() == 1 + 4 * 4);
    CHECK(bias_rows[0] ==
          std::vector<std::string>{"form", "C", "seed", "entropy", "dev_mean", "dev_std"});
}

TEST_CASE("a failing cell keeps partial results and exits 1") {
    const auto dir = fresh_dir("failure");
    // means list of length 1 with an out-of-range... use an invalid scheme id
    const int code = run_cli({"bandit", "--set", "train_steps=100", "--set",
                              "record_interval=50", "--set", "schemes=uniform,bogus", "--seeds",
                              "1", "--out", dir.string()});
    CHECK(code == 2);  // scheme ids are validated at config time -> config error

    // genuine runtime failure: per-cell exceptions are collected
    const int code2 = run_cli({"bandit", "--set", "train_steps=100", "--set",
                               "record_interval=50", "--set", "sigma_min=-1", "--seeds", "1",
                               "--out", dir.string()});
    CHECK(code2 == 1);
    const auto summary = slurp(dir / "summary.json");
    CHECK(summary.find("\"status\": \"failed\"") != std::string::npos);
    CHECK(summary.find("sigmas must be nonnegative") != std::string::npos);
}

TEST_CASE("gridworld maps load from files and bad files are rejected") {
    const auto dir = fresh_dir("maps");
    const auto good = dir / "map.txt";
    {
        std::ofstream out(good);
        out << "S..\n.N.\n..G\n";
    }
    const int code = run_cli({"gridworld", "--set", "map_file=" + good.string(), "--set",
                              "episodes=2", "--set", "timeout=50", "--set", "schemes=er",
                              "--seeds", "1", "--out", (dir / "run").string()});
    CHECK(code == 0);
    CHECK(fs::exists(dir / "run" / "gridworld_er.csv"));

    const auto bad = dir / "bad.txt";
    {
        std::ofstream out(bad);
        out << "S..\n..\n..G\n";  // ragged
    }
    CHECK(run_cli({"gridworld", "--set", "map_file=" + bad.string(), "--out",
                   (dir / "run2").string()}) != 0);
    CHECK(run_cli({"gridworld", "--set", "map_file=" + (dir / "missing.txt").string(), "--out",
                   (dir / "run3").string()}) == 2);
}

TEST_CASE("the default output directory comes from the environment") {
    const auto dir = fresh_dir("envvar");
    setenv("UPER_LAB_OUT", dir.string().c_str(), 1);
    const int code = run_cli({"posterior-demo", "--set", "steps=20"});
    unsetenv("UPER_LAB_OUT");
    CHECK(code == 0);
    CHECK(fs::exists(dir / "posterior_demo.csv"));
}

TEST_CASE("emitted probabilities stay a distribution through the csv round trip") {
    const auto dir = fresh_dir("roundtrip");
    CHECK(run_cli({"bandit", "--set", "train_steps=1000", "--set", "record_interval=250",
                   "--set", "schemes=td", "--seeds", "1", "--out", dir.string()}) == 0);
    std::ifstream in(dir / "bandit_td.csv");
    const auto rows = uper::parse_csv(in);
    REQUIRE(rows.size() > 1);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        double total = 0.0;
        for (int arm = 0; arm < 5; ++arm) total += uper::parse_double(rows[r][4 + arm]);
        CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("csv doubles round-trip through the formatter") {
    for (const double v : {0.1, 1.0 / 3.0, 98.3, -107.25, 1e-12, 123456.789}) {
        CHECK(uper::parse_double(uper::format_double(v)) == v);
    }
}
