#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "aor/math.hpp"

using aor::argmax_lowest;
using aor::digamma;
using aor::log_sum_exp;
using aor::Rng;

namespace {
// Euler-Mascheroni constant, independent of the implementation under test.
constexpr double kEulerGamma = 0.57721566490153286060;

// Independent oracle: central difference of std::lgamma with Richardson
// extrapolation. Good to roughly 1e-10 for moderate x.
double digamma_fd(double x) {
    const double h = 1e-3 * std::max(1.0, std::abs(x)) * 0.01;
    const double d1 = (std::lgamma(x + h) - std::lgamma(x - h)) / (2.0 * h);
    const double d2 = (std::lgamma(x + 2.0 * h) - std::lgamma(x - 2.0 * h)) / (4.0 * h);
    return (4.0 * d1 - d2) / 3.0;
}
}  // namespace

TEST_CASE("digamma at unit argument") {
    CHECK(digamma(1.0) == Catch::Approx(-kEulerGamma).margin(1e-10));
}

TEST_CASE("digamma at 2 follows the recurrence from 1") {
    CHECK(digamma(2.0) == Catch::Approx(-kEulerGamma + 1.0).margin(1e-10));
    CHECK(digamma(2.0) == Catch::Approx(0.4227843351).margin(1e-9));
}

TEST_CASE("digamma at one half matches the closed form") {
    const double expected = -kEulerGamma - 2.0 * std::log(2.0);
    CHECK(digamma(0.5) == Catch::Approx(expected).margin(1e-10));
    CHECK(digamma(0.5) == Catch::Approx(-1.9635100260).margin(1e-9));
}

TEST_CASE("digamma agrees with a finite-difference oracle on lgamma") {
    for (double x : {0.1, 0.37, 1.0, 2.5, 4.0, 7.3, 11.0, 25.0, 120.0, 3000.0}) {
        CAPTURE(x);
        CHECK(digamma(x) == Catch::Approx(digamma_fd(x)).margin(2e-8));
    }
}

TEST_CASE("digamma recurrence residual stays tiny across the domain") {
    for (double x = 1e-3; x <= 1e4; x *= 1.37) {
        CAPTURE(x);
        CHECK(std::abs(digamma(x + 1.0) - digamma(x) - 1.0 / x) <= 1e-9);
    }
}

TEST_CASE("digamma rejects non-positive arguments") {
    CHECK_THROWS_AS(digamma(0.0), std::domain_error);
    CHECK_THROWS_AS(digamma(-2.0), std::domain_error);
}

TEST_CASE("log_sum_exp matches direct evaluation and survives large inputs") {
    Eigen::VectorXd v(3);
    v << 0.0, 1.0, 2.0;
    CHECK(log_sum_exp(v) ==
          Catch::Approx(std::log(std::exp(0.0) + std::exp(1.0) + std::exp(2.0))));

    Eigen::VectorXd big(2);
    big << 1000.0, 1000.0;
    CHECK(log_sum_exp(big) == Catch::Approx(1000.0 + std::log(2.0)));
}

TEST_CASE("argmax breaks ties toward the lowest index") {
    Eigen::VectorXd v(4);
    v << 0.5, 0.9, 0.9, 0.1;
    CHECK(argmax_lowest(v) == 1);
    Eigen::VectorXd tie(2);
    tie << 0.5, 0.5;
    CHECK(argmax_lowest(tie) == 0);
}

TEST_CASE("rng streams are deterministic and in range") {
    Rng a(42);
    Rng b(42);
    for (int i = 0; i < 100; ++i) {
        CHECK(a.uniform() == b.uniform());
    }
    Rng r(7);
    std::set<int> seen;
    for (int i = 0; i < 1000; ++i) {
        const int k = r.uniform_int(5);
        CHECK(k >= 0);
        CHECK(k < 5);
        seen.insert(k);
        const double u = r.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
    CHECK(seen.size() == 5);
    CHECK_THROWS_AS(r.uniform_int(0), std::invalid_argument);
}
