#include "uper/appendix_labs.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "uper/quantile_ensemble.hpp"
#include "uper/stats.hpp"
#include "uper/uncertainty.hpp"

namespace uper {

double GaussianPosterior::entropy() const {
    return 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e * var);
}

std::vector<PosteriorDemoRecord> run_posterior_demo(const PosteriorDemoConfig& cfg,
                                                    RngStream cell_stream) {
    if (cfg.steps < 1 || cfg.n_regressors < 2 || cfg.n_quantiles < 1)
        throw std::invalid_argument("run_posterior_demo: bad config");

    auto init_stream = cell_stream.split("init");
    auto prior_stream = cell_stream.split("prior");
    auto data_stream = cell_stream.split("data");
    auto mask_stream = cell_stream.split("mask");

    // Single-cell table (one state, one action); members start with their
    // quantile mean set to a draw from the prior.
    QuantileTable table(cfg.n_regressors, 1, 1, cfg.n_quantiles, InitStyle::kSortedUniform,
                        init_stream);
    for (int m = 0; m < cfg.n_regressors; ++m)
        table.set_member_mean(m, 0, 0, prior_stream.normal(cfg.prior_mean, cfg.prior_std));

    GaussianPosterior bayes{cfg.prior_mean, cfg.prior_std * cfg.prior_std};
    const LearningSchedule lr{cfg.lr_base, cfg.lr_half_life};
    const double data_var = cfg.data_std * cfg.data_std;

    std::vector<PosteriorDemoRecord> records;
    records.reserve(cfg.steps + 1);

    auto snapshot = [&](int step) {
        PosteriorDemoRecord r;
        r.step = step;
        r.ens_epistemic = epistemic(table, 0, 0);
        r.ens_aleatoric = aleatoric(table, 0, 0);
        r.bayes_var = bayes.var;
        r.delta_theta = std::fabs(table.q_value(0, 0) - cfg.data_mean);
        records.push_back(r);
    };

    snapshot(0);
    for (int step = 0; step < cfg.steps; ++step) {
        const double x = data_stream.normal(cfg.data_mean, cfg.data_std);
        const auto mask = bernoulli_mask(cfg.n_regressors, cfg.update_prob, mask_stream);
        table.masked_update(mask, 0, 0, x, lr.at(static_cast<double>(step)));
        bayes.observe(x, data_var);
        snapshot(step + 1);
    }
    return records;
}

BiasForm bias_form_from_string(std::string_view name) {
    if (name == "e") return BiasForm::kVanilla;
    if (name == "e_u") return BiasForm::kEU;
    if (name == "e2_u") return BiasForm::kE2U;
    if (name == "e3_u") return BiasForm::kE3U;
    throw std::invalid_argument(std::string("unknown bias form '") + std::string(name) + "'");
}

std::string_view bias_form_name(BiasForm form) {
    switch (form) {
        case BiasForm::kVanilla: return "e";
        case BiasForm::kEU: return "e_u";
        case BiasForm::kE2U: return "e2_u";
        case BiasForm::kE3U: return "e3_u";
    }
    return "?";
}

BiasDist bias_dist_from_string(std::string_view name) {
    if (name == "uniform") return BiasDist::kUniform;
    if (name == "half_normal") return BiasDist::kHalfNormal;
    throw std::invalid_argument(std::string("unknown bias distribution '") + std::string(name) +
                                "'");
}

std::string_view bias_dist_name(BiasDist dist) {
    switch (dist) {
        case BiasDist::kUniform: return "uniform";
        case BiasDist::kHalfNormal: return "half_normal";
    }
    return "?";
}

std::vector<double> BiasStudyConfig::default_c_grid() {
    constexpr int kPoints = 50;
    const double lo = std::log(1e-3), hi = std::log(10.0);
    std::vector<double> grid(kPoints);
    for (int i = 0; i < kPoints; ++i)
        grid[i] = std::exp(lo + (hi - lo) * i / (kPoints - 1));
    return grid;
}

namespace {

double draw_bias_sample(BiasDist dist, double scale, RngStream& rng) {
    switch (dist) {
        case BiasDist::kUniform: return rng.uniform(0.0, scale);
        case BiasDist::kHalfNormal: return std::fabs(rng.normal(0.0, scale));
    }
    throw std::logic_error("draw_bias_sample: unhandled distribution");
}

}  // namespace

std::vector<double> bias_priorities(BiasForm form, double c, std::span<const double> eta,
                                    std::span<const double> beta) {
    const std::size_t n = eta.size();
    std::vector<double> out(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = eta[i] + c;
        double p = 0.0;
        switch (form) {
            case BiasForm::kVanilla: p = e; break;
            case BiasForm::kEU: p = e / (e + beta[i]); break;
            case BiasForm::kE2U: p = e * e / (e + beta[i]); break;
            case BiasForm::kE3U: p = e * e * e / (e + beta[i]); break;
        }
        out[i] = p;
        total += p;
    }
    if (total <= 0.0)
        throw std::runtime_error("bias_priorities: degenerate all-zero priority distribution");
    for (auto& p : out) p /= total;
    return out;
}

std::vector<BiasPoint> run_bias_study(const BiasStudyConfig& cfg, RngStream cell_stream) {
    if (cfg.n_samples < 2) throw std::invalid_argument("run_bias_study: need >= 2 samples");
    const auto c_grid = cfg.c_grid.empty() ? BiasStudyConfig::default_c_grid() : cfg.c_grid;

    auto eta_stream = cell_stream.split("eta");
    auto beta_stream = cell_stream.split("beta");
    std::vector<double> eta(cfg.n_samples), beta(cfg.n_samples);
    for (auto& e : eta) e = draw_bias_sample(cfg.eta_dist, cfg.eta_scale, eta_stream);
    for (auto& b : beta) b = draw_bias_sample(cfg.beta_dist, cfg.beta_scale, beta_stream);

    // Reference distribution: vanilla form at zero bias.
    const auto reference = bias_priorities(BiasForm::kVanilla, 0.0, eta, beta);

    std::vector<BiasPoint> points;
    points.reserve(cfg.forms.size() * c_grid.size());
    std::vector<double> dev(cfg.n_samples);
    for (const auto form : cfg.forms) {
        for (const double c : c_grid) {
            const auto p = bias_priorities(form, c, eta, beta);
            for (std::size_t i = 0; i < cfg.n_samples; ++i)
                dev[i] = std::fabs(p[i] - reference[i]);
            BiasPoint pt;
            pt.form = form;
            pt.c = c;
            pt.entropy = stats::entropy_nats(p);
            pt.dev_mean = stats::mean(dev);
            pt.dev_std = std::sqrt(stats::var_population(dev));
            points.push_back(pt);
        }
    }
    return points;
}

}  // namespace uper
