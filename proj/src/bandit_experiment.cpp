#include "uper/bandit_experiment.hpp"

#include <cmath>
#include <stdexcept>

namespace uper {

double BanditRunResult::cumulative_true_mse() const {
    double acc = 0.0;
    for (const auto& r : records) acc += r.true_mse;
    return acc;
}

double BanditRunResult::mean_arm_probability(int arm, double burn_in_fraction) const {
    if (records.empty()) throw std::runtime_error("mean_arm_probability: no records");
    const auto skip = static_cast<std::size_t>(burn_in_fraction * records.size());
    double acc = 0.0;
    std::size_t n = 0;
    for (std::size_t i = skip; i < records.size(); ++i, ++n) acc += records[i].p_arm[arm];
    return acc / static_cast<double>(n);
}

double BanditRunResult::mean_arm_epistemic(int arm, double burn_in_fraction) const {
    if (records.empty()) throw std::runtime_error("mean_arm_epistemic: no records");
    const auto skip = static_cast<std::size_t>(burn_in_fraction * records.size());
    double acc = 0.0;
    std::size_t n = 0;
    for (std::size_t i = skip; i < records.size(); ++i, ++n) acc += records[i].ehat_arm[arm];
    return acc / static_cast<double>(n);
}

namespace {

double scheme_priority_for_arm(PriorityScheme scheme, const BanditConfig& cfg,
                               const QuantileTable& table, const ConalBandit& env, int arm,
                               double stored_reward, double count, double direct_variance) {
    PriorityContext ctx;
    ctx.aleatoric_floor = cfg.aleatoric_floor;
    switch (scheme) {
        case PriorityScheme::kUniform:
            break;
        case PriorityScheme::kTd: {
            double acc = 0.0;
            for (int m = 0; m < table.n_ens(); ++m)
                acc += std::fabs(stored_reward - table.member_q_value(m, 0, arm));
            ctx.td_abs = acc / table.n_ens();
            break;
        }
        case PriorityScheme::kInverseCount:
            ctx.count = count;
            break;
        case PriorityScheme::kOracle:
            ctx.oracle_distance = std::fabs(env.mean_reward(arm) - table.q_value(0, arm));
            break;
        default: {
            const auto rep = uncertainty_report(table, 0, arm, stored_reward, cfg.aleatoric_floor);
            ctx.target_epistemic = rep.target_epistemic;
            ctx.epistemic = rep.epistemic;
            ctx.aleatoric = cfg.uper_aleatoric == BanditAleatoric::kDirect ? direct_variance
                                                                           : rep.aleatoric;
            ctx.target_total = rep.target_total;
            break;
        }
    }
    return priority(scheme, ctx);
}

}  // namespace

BanditRunResult run_bandit(const BanditConfig& cfg, PriorityScheme scheme, RngStream cell_stream) {
    const int n_arms = cfg.n_arms();
    if (n_arms < 1) throw std::invalid_argument("run_bandit: need at least one arm");
    if (cfg.train_steps < 1 || cfg.record_interval < 1)
        throw std::invalid_argument("run_bandit: step counts must be positive");

    auto env_stream = cell_stream.split("env");
    auto init_stream = cell_stream.split("init");
    auto buffer_stream = cell_stream.split("buffer");
    auto mask_stream = cell_stream.split("mask");
    auto var_init_stream = cell_stream.split("varinit");

    ConalBandit env(cfg.means, cfg.sigma_min, cfg.sigma_max, env_stream);
    QuantileTable table(cfg.n_ensemble, 1, n_arms, cfg.n_quantiles, cfg.init_style, init_stream);
    const LearningSchedule lr{cfg.lr_base, cfg.lr_half_life};

    BetaSchedule beta{cfg.beta_start, cfg.beta_end, cfg.beta_fraction,
                      static_cast<std::uint64_t>(cfg.train_steps)};
    // One slot per arm; rewards are replaced in place, never evicted.
    PriorityBuffer buffer(static_cast<std::size_t>(n_arms), cfg.alpha, cfg.priority_floor, beta);

    std::vector<std::uint64_t> arm_entry(n_arms);
    for (int a = 0; a < n_arms; ++a) {
        Transition t;
        t.state = 0;
        t.action = a;
        t.reward = env.pull(a);
        t.next_state = 0;
        t.terminal = true;
        t.mask = bernoulli_mask(cfg.n_ensemble, 0.5, mask_stream);
        arm_entry[a] = buffer.insert(std::move(t), 1.0);
    }

    std::vector<double> update_count(n_arms, 0.0);
    std::vector<double> direct_variance(n_arms);
    for (auto& v : direct_variance) v = var_init_stream.uniform(0.0, cfg.var_init_max);

    BanditRunResult result;
    result.records.reserve(static_cast<std::size_t>(cfg.train_steps / cfg.record_interval));

    for (std::int64_t step = 0; step < cfg.train_steps; ++step) {
        // 1. draw an arm from the prioritized buffer
        const auto batch = buffer.sample(1, buffer_stream, static_cast<std::uint64_t>(step));
        const auto& s = batch.front();
        const int arm = s.transition.action;
        const double weight =
            cfg.weight_normalization == WeightNormalization::kBuffer ? s.weight : 1.0;

        // 2. quantile-regression update toward the stored reward; masks are
        //    re-drawn each step so each member trains with probability 1/2
        const double target = s.transition.reward;
        const auto mask = bernoulli_mask(cfg.n_ensemble, cfg.member_update_prob, mask_stream);
        table.masked_update(mask, 0, arm, target, lr.at(static_cast<double>(step)) * weight);
        update_count[arm] += 1.0;

        // 3. pull once and replace the stored reward
        const double new_reward = env.pull(arm);
        buffer.entry(s.id).reward = new_reward;

        // running squared-error regression, the direct aleatoric estimate
        const double residual = new_reward - table.q_value(0, arm);
        direct_variance[arm] += cfg.var_rate * (residual * residual - direct_variance[arm]);

        // 4. refresh this arm's priority under the active scheme
        buffer.update_priority(
            s.id, scheme_priority_for_arm(scheme, cfg, table, env, arm, new_reward,
                                          update_count[arm], direct_variance[arm]));

        // 5. periodic record
        if ((step + 1) % cfg.record_interval == 0) {
            BanditRecord rec;
            rec.step = step + 1;
            rec.p_arm.resize(n_arms);
            rec.ehat_arm.resize(n_arms);
            rec.ahat_arm.resize(n_arms);
            rec.delta2_arm.resize(n_arms);
            double mse = 0.0;
            for (int a = 0; a < n_arms; ++a) {
                const double q = table.q_value(0, a);
                const double err = q - env.mean_reward(a);
                mse += err * err;
                rec.p_arm[a] = buffer.probability_of(arm_entry[a]);
                rec.ehat_arm[a] = epistemic(table, 0, a);
                rec.ahat_arm[a] = aleatoric(table, 0, a);
                rec.delta2_arm[a] =
                    target_distance(table, 0, a, buffer.entry(arm_entry[a]).reward);
            }
            rec.true_mse = mse / n_arms;
            result.records.push_back(std::move(rec));
        }
    }
    return result;
}

std::vector<double> arm_probability_trace(const std::vector<BanditRecord>& records, int arm) {
    if (records.empty()) throw std::invalid_argument("arm_probability_trace: no records");
    std::vector<double> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.p_arm.at(arm));
    return out;
}

}  // namespace uper
