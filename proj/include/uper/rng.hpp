#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace uper {

// 64-bit FNV-1a, used to derive stable stream tags from names so that
// adding or reordering schemes never perturbs another cell's randomness.
constexpr std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<std::uint8_t>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Counter-based key split: children are a pure function of (key, tag),
// independent of how many values were drawn from the parent.
constexpr std::uint64_t mix_key(std::uint64_t key, std::uint64_t tag) {
    return splitmix64(key ^ splitmix64(tag + 0x9e3779b97f4a7c15ULL));
}

// Deterministic random stream. All conversions from raw bits are done
// here rather than through std distributions, so a (key, call sequence)
// pair fully determines every draw.
class RngStream {
public:
    explicit RngStream(std::uint64_t key) : key_(key), gen_(splitmix64(key)) {}

    RngStream split(std::uint64_t tag) const { return RngStream(mix_key(key_, tag)); }
    RngStream split(std::string_view tag) const { return split(fnv1a64(tag)); }

    std::uint64_t key() const { return key_; }

    // Uniform on [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Marsaglia polar method with a cached spare.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        has_spare_ = true;
        return u * m;
    }

    double normal(double mu, double sigma) { return mu + sigma * normal(); }

    bool bernoulli(double p) { return uniform() < p; }

    // Uniform integer on [0, n).
    std::uint32_t uniform_int(std::uint32_t n) {
        const auto k = static_cast<std::uint32_t>(uniform() * n);
        return k < n ? k : n - 1;
    }

private:
    std::uint64_t key_;
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace uper
