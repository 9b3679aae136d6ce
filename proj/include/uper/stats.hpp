#pragma once

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace uper::stats {

inline double mean(std::span<const double> xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

// Population variance (divisor n).
inline double var_population(std::span<const double> xs) {
    const double m = mean(xs);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return s / static_cast<double>(xs.size());
}

inline double var_sample(std::span<const double> xs) {
    const double m = mean(xs);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return s / static_cast<double>(xs.size() - 1);
}

// One-sided paired t-test for H1: mean(a) < mean(b). Returns the p-value.
inline double paired_t_pvalue_less(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2)
        throw std::invalid_argument("paired_t_pvalue_less: need equal sizes >= 2");
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    const double md = mean(d);
    const double sd = std::sqrt(var_sample(d));
    const auto n = static_cast<double>(d.size());
    if (sd == 0.0) return md < 0.0 ? 0.0 : 1.0;
    const double t = md / (sd / std::sqrt(n));
    boost::math::students_t dist(n - 1.0);
    return boost::math::cdf(dist, t);  // P(T <= t); small when mean(a) << mean(b)
}

// Chi-square goodness-of-fit p-value for observed counts vs expected probabilities.
inline double chi_square_pvalue(std::span<const std::uint64_t> observed,
                                std::span<const double> expected_prob, std::uint64_t n_draws) {
    if (observed.size() != expected_prob.size() || observed.size() < 2)
        throw std::invalid_argument("chi_square_pvalue: shape mismatch");
    double stat = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        const double e = expected_prob[i] * static_cast<double>(n_draws);
        const double diff = static_cast<double>(observed[i]) - e;
        stat += diff * diff / e;
    }
    boost::math::chi_squared dist(static_cast<double>(observed.size() - 1));
    return 1.0 - boost::math::cdf(dist, stat);
}

// Trailing moving average with the given window (first window-1 entries use
// the partial prefix), as used for curve smoothing before trend checks.
inline std::vector<double> smooth(std::span<const double> xs, std::size_t window) {
    std::vector<double> out(xs.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        acc += xs[i];
        if (i >= window) acc -= xs[i - window];
        out[i] = acc / static_cast<double>(std::min(i + 1, window));
    }
    return out;
}

// Shannon entropy in nats of a normalized distribution.
inline double entropy_nats(std::span<const double> p) {
    double h = 0.0;
    for (double x : p)
        if (x > 0.0) h -= x * std::log(x);
    return h;
}

}  // namespace uper::stats
