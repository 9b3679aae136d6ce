#include "uper/uncertainty.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace uper {

namespace {

double require(const std::optional<double>& field, const char* name) {
    if (!field)
        throw std::invalid_argument(std::string("priority: missing context field '") + name + "'");
    return *field;
}

}  // namespace

double aleatoric(const QuantileTable& table, int state, int action) {
    const int n_q = table.n_q();
    const int n_ens = table.n_ens();
    double mean_of_means = 0.0;
    std::vector<double> qmean(n_q, 0.0);
    for (int m = 0; m < n_ens; ++m) {
        const auto q = table.quantiles(m, state, action);
        for (int i = 0; i < n_q; ++i) qmean[i] += q[i];
    }
    for (int i = 0; i < n_q; ++i) {
        qmean[i] /= n_ens;
        mean_of_means += qmean[i];
    }
    mean_of_means /= n_q;
    double var = 0.0;
    for (int i = 0; i < n_q; ++i) {
        const double d = qmean[i] - mean_of_means;
        var += d * d;
    }
    return var / n_q;
}

double epistemic(const QuantileTable& table, int state, int action) {
    const int n_q = table.n_q();
    const int n_ens = table.n_ens();
    if (n_ens < 2)
        throw std::invalid_argument("epistemic: ensemble disagreement needs n_ens >= 2");
    double acc = 0.0;
    for (int i = 0; i < n_q; ++i) {
        double mean = 0.0;
        for (int m = 0; m < n_ens; ++m) mean += table.theta(m, state, action, i);
        mean /= n_ens;
        double var = 0.0;
        for (int m = 0; m < n_ens; ++m) {
            const double d = table.theta(m, state, action, i) - mean;
            var += d * d;
        }
        acc += var / n_ens;
    }
    return acc / n_q;
}

double target_distance(const QuantileTable& table, int state, int action, double target) {
    if (!std::isfinite(target))
        throw std::invalid_argument("target_distance: target must be finite");
    const double d = target - table.q_value(state, action);
    return d * d;
}

double target_total(const QuantileTable& table, int state, int action, double target) {
    if (!std::isfinite(target))
        throw std::invalid_argument("target_total: target must be finite");
    const int n_q = table.n_q();
    const int n_ens = table.n_ens();
    double acc = 0.0;
    for (int m = 0; m < n_ens; ++m) {
        const auto q = table.quantiles(m, state, action);
        for (int i = 0; i < n_q; ++i) {
            const double d = target - q[i];
            acc += d * d;
        }
    }
    return acc / (static_cast<double>(n_ens) * n_q);
}

double target_total_avg(const QuantileTable& table, int state, int action,
                        std::span<const double> targets) {
    if (targets.empty()) throw std::invalid_argument("target_total_avg: no targets");
    double acc = 0.0;
    for (double t : targets) acc += target_total(table, state, action, t);
    return acc / static_cast<double>(targets.size());
}

double info_gain(double target_epistemic, double aleatoric, double floor) {
    if (target_epistemic < 0.0 || aleatoric < 0.0)
        throw std::invalid_argument("info_gain: uncertainties must be nonnegative");
    if (target_epistemic == 0.0) return 0.0;
    return 0.5 * std::log1p(target_epistemic / (aleatoric + floor));
}

UncertaintyReport uncertainty_report(const QuantileTable& table, int state, int action,
                                     double target, double floor) {
    UncertaintyReport r;
    r.aleatoric = aleatoric(table, state, action);
    r.epistemic = epistemic(table, state, action);
    r.target_distance = target_distance(table, state, action, target);
    r.target_epistemic = r.target_distance + r.epistemic;
    r.target_total = target_total(table, state, action, target);
    r.info_gain = info_gain(r.target_epistemic, r.aleatoric, floor);
    return r;
}

DeupResult deup_check(std::span<const double> target_samples, double predictor) {
    if (target_samples.size() < 2) throw std::invalid_argument("deup_check: need >= 2 samples");
    const auto n = static_cast<double>(target_samples.size());
    double mean = 0.0;
    for (double t : target_samples) mean += t;
    mean /= n;
    double var = 0.0, total = 0.0;
    for (double t : target_samples) {
        var += (t - mean) * (t - mean);
        total += (t - predictor) * (t - predictor);
    }
    DeupResult r;
    r.total = total / n;
    r.aleatoric = var / n;
    r.epistemic = (predictor - mean) * (predictor - mean);
    return r;
}

VarianceEstimator::VarianceEstimator(int n_states, int n_actions, double rate)
    : n_states_(n_states), n_actions_(n_actions), rate_(rate) {
    if (n_states < 1 || n_actions < 1)
        throw std::invalid_argument("VarianceEstimator: counts must be positive");
    if (rate <= 0.0) throw std::invalid_argument("VarianceEstimator: rate must be positive");
    v_.assign(static_cast<std::size_t>(n_states) * n_actions, 0.0);
}

void VarianceEstimator::update(int state, int action, int next_state, int next_action,
                               double td_error, double gamma, bool terminal) {
    if (!std::isfinite(td_error))
        throw std::invalid_argument("VarianceEstimator::update: td_error must be finite");
    const double bootstrap = terminal ? 0.0 : v_[index(next_state, next_action)];
    double& v = v_[index(state, action)];
    const double meta_delta = td_error * td_error + gamma * gamma * bootstrap - v;
    v = std::max(0.0, v + rate_ * meta_delta);
}

PriorityScheme scheme_from_string(std::string_view name) {
    if (name == "uniform") return PriorityScheme::kUniform;
    if (name == "td") return PriorityScheme::kTd;
    if (name == "inverse-count") return PriorityScheme::kInverseCount;
    if (name == "oracle") return PriorityScheme::kOracle;
    if (name == "uper") return PriorityScheme::kInfoGain;
    if (name == "uper-plain") return PriorityScheme::kInfoGainPlain;
    if (name == "epistemic") return PriorityScheme::kEpistemic;
    if (name == "epistemic-plain") return PriorityScheme::kEpistemicPlain;
    if (name == "total-uncertainty") return PriorityScheme::kTotalUncertainty;
    if (name == "ratio-eu") return PriorityScheme::kRatioEU;
    if (name == "ratio-e2u") return PriorityScheme::kRatioE2U;
    if (name == "ratio-e3u") return PriorityScheme::kRatioE3U;
    throw std::invalid_argument(std::string("unknown priority scheme '") + std::string(name) + "'");
}

std::string_view scheme_name(PriorityScheme scheme) {
    switch (scheme) {
        case PriorityScheme::kUniform: return "uniform";
        case PriorityScheme::kTd: return "td";
        case PriorityScheme::kInverseCount: return "inverse-count";
        case PriorityScheme::kOracle: return "oracle";
        case PriorityScheme::kInfoGain: return "uper";
        case PriorityScheme::kInfoGainPlain: return "uper-plain";
        case PriorityScheme::kEpistemic: return "epistemic";
        case PriorityScheme::kEpistemicPlain: return "epistemic-plain";
        case PriorityScheme::kTotalUncertainty: return "total-uncertainty";
        case PriorityScheme::kRatioEU: return "ratio-eu";
        case PriorityScheme::kRatioE2U: return "ratio-e2u";
        case PriorityScheme::kRatioE3U: return "ratio-e3u";
    }
    return "?";
}

double priority(PriorityScheme scheme, const PriorityContext& ctx) {
    switch (scheme) {
        case PriorityScheme::kUniform:
            return 1.0;
        case PriorityScheme::kTd:
            return require(ctx.td_abs, "td_abs");
        case PriorityScheme::kInverseCount:
            return 1.0 / std::sqrt(1.0 + require(ctx.count, "count"));
        case PriorityScheme::kOracle:
            return require(ctx.oracle_distance, "oracle_distance");
        case PriorityScheme::kInfoGain:
            return info_gain(require(ctx.target_epistemic, "target_epistemic"),
                             require(ctx.aleatoric, "aleatoric"), ctx.aleatoric_floor);
        case PriorityScheme::kInfoGainPlain:
            return info_gain(require(ctx.epistemic, "epistemic"),
                             require(ctx.aleatoric, "aleatoric"), ctx.aleatoric_floor);
        case PriorityScheme::kEpistemic:
            return require(ctx.target_epistemic, "target_epistemic");
        case PriorityScheme::kEpistemicPlain:
            return require(ctx.epistemic, "epistemic");
        case PriorityScheme::kTotalUncertainty:
            return require(ctx.target_total, "target_total");
        case PriorityScheme::kRatioEU: {
            const double e = require(ctx.target_epistemic, "target_epistemic");
            return e / (require(ctx.target_total, "target_total") + ctx.ratio_floor);
        }
        case PriorityScheme::kRatioE2U: {
            const double e = require(ctx.target_epistemic, "target_epistemic");
            return e * e / (require(ctx.target_total, "target_total") + ctx.ratio_floor);
        }
        case PriorityScheme::kRatioE3U: {
            const double e = require(ctx.target_epistemic, "target_epistemic");
            return e * e * e / (require(ctx.target_total, "target_total") + ctx.ratio_floor);
        }
    }
    throw std::logic_error("priority: unhandled scheme");
}

}  // namespace uper
