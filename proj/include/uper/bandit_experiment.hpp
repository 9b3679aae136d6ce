#pragma once

#include <cstdint>
#include <vector>

#include "uper/environments.hpp"
#include "uper/priority_buffer.hpp"
#include "uper/quantile_ensemble.hpp"
#include "uper/uncertainty.hpp"

namespace uper {

// Aleatoric estimate used in the information-gain denominator for the
// uncertainty-based schemes. kQuantile uses the spread of the ensemble-mean
// quantiles; kDirect uses a running regression on the squared prediction
// error (one estimate per arm, initialized U(0, var_init_max)).
enum class BanditAleatoric {
    kQuantile,
    kDirect,
};

// Conal bandit run: a quantile ensemble trained from a one-slot-
// per-arm replay buffer, replay prioritized by the chosen scheme.
struct BanditConfig {
    std::vector<double> means{2.0, 2.0, 2.0, 2.0, 2.0};
    double sigma_max = 2.0;
    double sigma_min = 0.1;
    int n_quantiles = 30;
    int n_ensemble = 30;
    std::int64_t train_steps = 200000;
    double lr_base = 0.005;
    double lr_half_life = 40000.0;
    double alpha = 0.7;
    double beta_start = 0.5;
    double beta_end = 1.0;
    double beta_fraction = 0.4;
    double member_update_prob = 0.5;
    double priority_floor = 1e-3;
    double aleatoric_floor = 1e-6;
    std::int64_t record_interval = 1000;
    InitStyle init_style = InitStyle::kSortedUniform;
    WeightNormalization weight_normalization = WeightNormalization::kBatch;
    BanditAleatoric uper_aleatoric = BanditAleatoric::kQuantile;
    double var_rate = 0.01;
    double var_init_max = 0.1;

    int n_arms() const { return static_cast<int>(means.size()); }

    static std::vector<double> shifted_means() { return {3.0, 2.75, 2.5, 2.25, 2.0}; }
};

struct BanditRecord {
    std::int64_t step;
    double true_mse;                // (1/n_a) sum_a (Q(a) - mean(a))^2
    std::vector<double> p_arm;      // sampling probability per arm
    std::vector<double> ehat_arm;   // E^ per arm
    std::vector<double> ahat_arm;   // A^ per arm
    std::vector<double> delta2_arm; // (stored reward - grand mean)^2 per arm
};

struct BanditRunResult {
    std::vector<BanditRecord> records;

    double final_true_mse() const { return records.empty() ? 0.0 : records.back().true_mse; }
    double cumulative_true_mse() const;
    // Mean sampling probability of one arm over records with step > burn-in.
    double mean_arm_probability(int arm, double burn_in_fraction) const;
    double mean_arm_epistemic(int arm, double burn_in_fraction) const;
};

BanditRunResult run_bandit(const BanditConfig& config, PriorityScheme scheme,
                           RngStream cell_stream);

// Recorded sampling probabilities of one arm across the record grid.
std::vector<double> arm_probability_trace(const std::vector<BanditRecord>& records, int arm);

}  // namespace uper
