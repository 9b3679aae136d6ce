#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "uper/quantile_ensemble.hpp"

namespace uper {

inline constexpr double kAleatoricFloor = 1e-6;
inline constexpr double kRatioFloor = 1e-6;

// Per-transition uncertainty bundle. The pieces satisfy, exactly:
//   target_total = target_distance + epistemic + aleatoric
//   target_epistemic = target_distance + epistemic
struct UncertaintyReport {
    double aleatoric = 0.0;         // A^ = V_tau[E_psi theta]
    double epistemic = 0.0;         // E^ = E_tau[V_psi theta]
    double target_distance = 0.0;   // (target - grand mean)^2
    double target_epistemic = 0.0;  // E^_delta
    double target_total = 0.0;      // U^_delta = E_{tau,psi}[(target - theta)^2]
    double info_gain = 0.0;         // 1/2 ln(1 + E^_delta / A^), nats
};

// Variance across the quantile index of the ensemble-mean quantile values
// (population variance).
double aleatoric(const QuantileTable& table, int state, int action);

// Mean over quantiles of the across-member population variance.
// Disagreement is undefined for a single member: throws when n_ens < 2.
double epistemic(const QuantileTable& table, int state, int action);

// Squared distance from the target to the grand mean of theta.
double target_distance(const QuantileTable& table, int state, int action, double target);

// Mean over members and quantiles of the squared error to the target.
double target_total(const QuantileTable& table, int state, int action, double target);

// Average of target_total over a set of targets, e.g. one-step bootstrapped
// targets r + gamma * theta_{tau'} built from a second table.
double target_total_avg(const QuantileTable& table, int state, int action,
                        std::span<const double> targets);

// Entropy reduction of a Gaussian posterior after one observation; natural
// log. Exactly zero when target_epistemic is zero.
double info_gain(double target_epistemic, double aleatoric, double floor = kAleatoricFloor);

UncertaintyReport uncertainty_report(const QuantileTable& table, int state, int action,
                                     double target, double floor = kAleatoricFloor);

// Empirical DEUP decomposition over target samples for a scalar predictor:
// total = mean (theta - q)^2, aleatoric = Var(theta), epistemic = (q - mean theta)^2.
struct DeupResult {
    double total;
    double aleatoric;
    double epistemic;
};
DeupResult deup_check(std::span<const double> target_samples, double predictor);

// TD-style recursion for the action-value variance: meta reward delta^2,
// meta discount gamma^2, estimate clamped at zero.
class VarianceEstimator {
public:
    VarianceEstimator(int n_states, int n_actions, double rate);

    void update(int state, int action, int next_state, int next_action, double td_error,
                double gamma, bool terminal);
    double value(int state, int action) const { return v_[index(state, action)]; }
    double rate() const { return rate_; }

private:
    std::size_t index(int state, int action) const {
        return static_cast<std::size_t>(state) * n_actions_ + action;
    }

    int n_states_, n_actions_;
    double rate_;
    std::vector<double> v_;
};

enum class PriorityScheme {
    kUniform,
    kTd,              // mean over members of |target - member Q|
    kInverseCount,    // 1 / sqrt(1 + C)
    kOracle,          // |true mean - Q|
    kInfoGain,        // 1/2 ln(1 + E^_delta / A^)   (UPER)
    kInfoGainPlain,   // 1/2 ln(1 + E^ / A^)
    kEpistemic,       // E^_delta
    kEpistemicPlain,  // E^
    kTotalUncertainty,
    kRatioEU,   // E^_delta   / (U^_delta + floor)
    kRatioE2U,  // E^_delta^2 / (U^_delta + floor)
    kRatioE3U,  // E^_delta^3 / (U^_delta + floor)
};

PriorityScheme scheme_from_string(std::string_view name);
std::string_view scheme_name(PriorityScheme scheme);

// Whichever of these a scheme needs must be set; a missing field raises an
// error naming it.
struct PriorityContext {
    std::optional<double> td_abs;            // mean_psi |target - Q_psi|
    std::optional<double> count;             // visit count C
    std::optional<double> oracle_distance;   // |true mean - Q|
    std::optional<double> target_epistemic;  // E^_delta
    std::optional<double> epistemic;         // E^
    std::optional<double> aleatoric;         // A^
    std::optional<double> target_total;      // U^_delta
    double aleatoric_floor = kAleatoricFloor;
    double ratio_floor = kRatioFloor;
};

double priority(PriorityScheme scheme, const PriorityContext& ctx);

}  // namespace uper
