#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "fex/mask_ops.hpp"
#include "fex/policy.hpp"

using namespace fex;

TEST_CASE("sampling: near-one policy emits all-ones masks") {
    const BernoulliPolicy pol(std::vector<double>(6, 1.0 - kLambdaClamp));
    for (const Mask& m : pol.sample_masks(50, 123)) {
        CHECK(retained_count(m) == 6);
    }
}

TEST_CASE("sampling: near-zero policy emits all-zero masks") {
    const BernoulliPolicy pol(std::vector<double>(6, kLambdaClamp));
    for (const Mask& m : pol.sample_masks(50, 123)) {
        CHECK(retained_count(m) == 0);
    }
}

TEST_CASE("sampling: per-coordinate mean near lambda (law of large numbers)") {
    const std::size_t n = 4;
    const BernoulliPolicy pol(std::vector<double>(n, 0.5));
    const auto masks = pol.sample_masks(10000, 2024);
    for (std::size_t i = 0; i < n; ++i) {
        double mean = 0.0;
        for (const Mask& m : masks) mean += m.bits[i];
        mean /= 10000.0;
        CHECK(std::abs(mean - 0.5) <= 0.02);
    }
}

TEST_CASE("sampling: deterministic under a fixed seed") {
    const BernoulliPolicy pol({0.3, 0.7, 0.5});
    CHECK(pol.sample_masks(20, 9) == pol.sample_masks(20, 9));
    CHECK(pol.sample_masks(20, 9) != pol.sample_masks(20, 10));
}

TEST_CASE("sampling: coordinates are independent (pairwise correlation)") {
    const std::size_t n = 5;
    const BernoulliPolicy pol(std::vector<double>(n, 0.5));
    const auto masks = pol.sample_masks(10000, 77);
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            double ma = 0.0, mb = 0.0, cov = 0.0;
            for (const Mask& m : masks) {
                ma += m.bits[a];
                mb += m.bits[b];
            }
            ma /= 10000.0;
            mb /= 10000.0;
            for (const Mask& m : masks) {
                cov += (m.bits[a] - ma) * (m.bits[b] - mb);
            }
            cov /= 10000.0;
            const double corr = cov / std::sqrt(ma * (1 - ma) * mb * (1 - mb));
            CHECK(std::abs(corr) <= 0.05);
        }
    }
}

TEST_CASE("log_prob worked examples") {
    CHECK(BernoulliPolicy({0.5, 0.5}).log_prob(Mask{1, 0}) ==
          doctest::Approx(std::log(0.25)).epsilon(1e-12));
    CHECK(BernoulliPolicy({0.9, 0.1}).log_prob(Mask{1, 0}) ==
          doctest::Approx(2.0 * std::log(0.9)).epsilon(1e-12));
    CHECK_THROWS_AS(BernoulliPolicy({0.5}).log_prob(Mask{1, 0}), DimensionError);
}

TEST_CASE("log_prob total mass sums to one by enumeration") {
    for (std::size_t n : {4u, 8u, 12u}) {
        std::vector<double> lambda(n);
        for (std::size_t i = 0; i < n; ++i) lambda[i] = 0.05 + 0.9 * (i + 1.0) / (n + 1.0);
        const BernoulliPolicy pol(lambda);
        double mass = std::exp(pol.log_prob(Mask::from_index(0, n)));
        for (const Mask& m : enumerate_nonzero_masks(n)) {
            mass += std::exp(pol.log_prob(m));
        }
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("log_prob gradient matches finite differences") {
    const std::vector<double> lambda{0.2, 0.55, 0.83, 0.4};
    const BernoulliPolicy pol(lambda);
    const Mask m{1, 0, 1, 1};
    const std::vector<double> grad = pol.log_prob_grad(m);
    const double h = 1e-7;
    for (std::size_t i = 0; i < lambda.size(); ++i) {
        std::vector<double> hi = lambda, lo = lambda;
        hi[i] += h;
        lo[i] -= h;
        const double numeric =
            (BernoulliPolicy(hi).log_prob(m) - BernoulliPolicy(lo).log_prob(m)) / (2 * h);
        CHECK(std::abs(grad[i] - numeric) / std::max(1.0, std::abs(numeric)) <= 1e-6);
    }
}

TEST_CASE("entropy worked examples") {
    const std::size_t n = 7;
    CHECK(BernoulliPolicy(std::vector<double>(n, 0.5)).entropy() ==
          doctest::Approx(n * std::log(2.0)).epsilon(1e-12));

    const BernoulliPolicy saturated(std::vector<double>(1, kLambdaClamp));
    CHECK(saturated.entropy() <= 0.0011);
    CHECK(saturated.entropy() >= 0.0);
}

TEST_CASE("entropy equals -E[log_prob] by enumeration") {
    for (std::size_t n : {3u, 6u, 10u}) {
        std::vector<double> lambda(n);
        for (std::size_t i = 0; i < n; ++i) lambda[i] = 0.1 + 0.8 * (i + 0.5) / n;
        const BernoulliPolicy pol(lambda);
        double expected = 0.0;
        for (std::uint64_t v = 0; v < (std::uint64_t{1} << n); ++v) {
            const double lp = pol.log_prob(Mask::from_index(v, n));
            expected -= std::exp(lp) * lp;
        }
        CHECK(pol.entropy() == doctest::Approx(expected).epsilon(1e-9));
    }
}

TEST_CASE("mean is the identity on lambda and matches enumeration") {
    const BernoulliPolicy pol({0.2, 0.8});
    const Attribution mean = pol.mean();
    CHECK(mean.normalized);
    CHECK(mean.values == std::vector<double>{0.2, 0.8});

    // enumeration cross-check for a wider policy
    std::vector<double> lambda{0.15, 0.5, 0.72, 0.9, 0.33};
    const BernoulliPolicy wide(lambda);
    std::vector<double> expect(lambda.size(), 0.0);
    for (std::uint64_t v = 0; v < (std::uint64_t{1} << lambda.size()); ++v) {
        const Mask m = Mask::from_index(v, lambda.size());
        const double q = std::exp(wide.log_prob(m));
        for (std::size_t i = 0; i < lambda.size(); ++i) {
            if (m.bits[i]) expect[i] += q;
        }
    }
    for (std::size_t i = 0; i < lambda.size(); ++i) {
        CHECK(wide.mean().values[i] == doctest::Approx(expect[i]).epsilon(1e-9));
    }
}

TEST_CASE("constructor clamps into the open unit interval") {
    const BernoulliPolicy pol({0.0, 1.0, 0.5});
    CHECK(pol.lambda()[0] == kLambdaClamp);
    CHECK(pol.lambda()[1] == 1.0 - kLambdaClamp);
    CHECK(pol.lambda()[2] == 0.5);
    CHECK_THROWS_AS(BernoulliPolicy({std::nan("")}), NumericError);
}
