#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "uper/rng.hpp"

namespace uper {

// Conjugate Gaussian posterior over a mean with known data variance.
struct GaussianPosterior {
    double mu = 0.0;
    double var = 1.0;

    void observe(double x, double data_var) {
        const double denom = data_var + var;
        mu = (data_var * mu + var * x) / denom;
        var = var * data_var / denom;
    }

    // 1/2 ln(2 pi e var)
    double entropy() const;
};

struct PosteriorDemoConfig {
    int steps = 20000;
    int n_regressors = 50;
    int n_quantiles = 30;
    double data_mean = 2.0;
    double data_std = 1.0;
    double prior_mean = 0.0;
    double prior_std = 1.0;
    double update_prob = 0.5;
    double lr_base = 0.05;
    double lr_half_life = 4000.0;
};

struct PosteriorDemoRecord {
    int step;               // number of observations consumed so far
    double ens_epistemic;   // E^ over the regressor ensemble
    double ens_aleatoric;   // A^ over the regressor ensemble
    double bayes_var;       // conjugate posterior variance
    double delta_theta;     // |grand mean - data mean|
};

// Ensemble of quantile regressors vs the conjugate Bayesian posterior on a
// shared sample stream. Row n holds the state after n observations, so
// bayes_var = 1/(n+1) when prior and data variance are 1.
std::vector<PosteriorDemoRecord> run_posterior_demo(const PosteriorDemoConfig& config,
                                                    RngStream cell_stream);

enum class BiasForm {
    kVanilla,  // p ~ eta + C
    kEU,       // p ~ (eta + C) / (eta + C + beta)
    kE2U,      // p ~ (eta + C)^2 / (eta + C + beta)
    kE3U,      // p ~ (eta + C)^3 / (eta + C + beta)
};

BiasForm bias_form_from_string(std::string_view name);
std::string_view bias_form_name(BiasForm form);

enum class BiasDist {
    kUniform,     // U(0, scale)
    kHalfNormal,  // |N(0, scale)|
};

BiasDist bias_dist_from_string(std::string_view name);
std::string_view bias_dist_name(BiasDist dist);

struct BiasStudyConfig {
    std::size_t n_samples = 100000;
    BiasDist eta_dist = BiasDist::kUniform;
    double eta_scale = 1.0;
    BiasDist beta_dist = BiasDist::kUniform;
    double beta_scale = 1.0;
    std::vector<double> c_grid;  // defaults to 50 log-spaced points in [1e-3, 10]
    std::vector<BiasForm> forms{BiasForm::kVanilla, BiasForm::kEU, BiasForm::kE2U, BiasForm::kE3U};

    static std::vector<double> default_c_grid();
};

struct BiasPoint {
    BiasForm form;
    double c;
    double entropy;   // Shannon entropy of the normalized priorities, nats
    double dev_mean;  // mean |p_i(form, C) - p_i(vanilla, C = 0)|
    double dev_std;
};

// Normalized priority distribution of one form at bias C over the shared
// (eta, beta) samples; errors when the total mass is zero.
std::vector<double> bias_priorities(BiasForm form, double c, std::span<const double> eta,
                                    std::span<const double> beta);

// The (eta, beta) samples are drawn once and shared across all forms and C
// values. Points come out grouped by form, C ascending within each form.
std::vector<BiasPoint> run_bias_study(const BiasStudyConfig& config, RngStream cell_stream);

}  // namespace uper
