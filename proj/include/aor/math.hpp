#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>

namespace aor {

/// Digamma function Psi(x) = d/dx log Gamma(x), x > 0.
///
/// Uses the ascending recurrence Psi(x+1) = Psi(x) + 1/x to shift the
/// argument above 10, then the asymptotic expansion in Bernoulli numbers.
/// Absolute error is below 1e-13 over the positive axis.
inline double digamma(double x) {
    if (!(x > 0.0)) {
        throw std::domain_error("digamma: argument must be positive");
    }
    double acc = 0.0;
    while (x < 10.0) {
        acc -= 1.0 / x;
        x += 1.0;
    }
    // Psi(x) ~ ln x - 1/(2x) - sum_n B_{2n} / (2n x^{2n}), truncated at n=7.
    // At x >= 10 the first dropped term is ~4e-17.
    const double z = 1.0 / (x * x);
    const double series =
        z * (1.0 / 12.0 -
             z * (1.0 / 120.0 -
                  z * (1.0 / 252.0 -
                       z * (1.0 / 240.0 -
                            z * (1.0 / 132.0 -
                                 z * (691.0 / 32760.0 - z * (1.0 / 12.0)))))));
    return acc + std::log(x) - 0.5 / x - series;
}

/// log(sum_i exp(v_i)) with the usual max shift.
inline double log_sum_exp(const Eigen::VectorXd& v) {
    const double m = v.maxCoeff();
    if (!std::isfinite(m)) {
        return m;
    }
    return m + std::log((v.array() - m).exp().sum());
}

/// Index of the largest entry; ties resolve to the lowest index.
inline int argmax_lowest(const Eigen::VectorXd& v) {
    int best = 0;
    for (int i = 1; i < v.size(); ++i) {
        if (v(i) > v(best)) {
            best = i;
        }
    }
    return best;
}

/// SplitMix64 step, used to derive independent stream seeds.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// Deterministic random source. The raw engine is std::mt19937_64 but all
/// distributions are drawn by hand so that streams are pinned down to the
/// bit regardless of standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    /// Uniform double in [0, 1).
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, n).
    int uniform_int(int n) {
        if (n <= 0) {
            throw std::invalid_argument("Rng::uniform_int: n must be positive");
        }
        const std::uint64_t span = static_cast<std::uint64_t>(n);
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % span;
        std::uint64_t r;
        do {
            r = gen_();
        } while (r >= limit);
        return static_cast<int>(r % span);
    }

    /// Standard normal via Box-Muller, one value per call.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) {
            u1 = uniform();
        }
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * M_PI * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    std::uint64_t raw() { return gen_(); }

private:
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace aor
