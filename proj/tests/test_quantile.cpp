#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "qdcart/quantile.hpp"

using namespace qdcart;

TEST_SUITE("quantile") {

TEST_CASE("check loss values") {
    const QuantileLevel half(0.5);
    CHECK(rho(half, 2.0) == doctest::Approx(1.0));
    CHECK(rho(half, -2.0) == doctest::Approx(1.0));
    const QuantileLevel nine(0.9);
    CHECK(rho(nine, 1.0) == doctest::Approx(0.9));
    CHECK(rho(nine, -1.0) == doctest::Approx(0.1));
    CHECK(rho(QuantileLevel(0.25), -4.0) == doctest::Approx(3.0));
    CHECK(rho(half, 0.0) == 0.0);
}

TEST_CASE("check loss is convex and nonnegative") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ud(-10.0, 10.0);
    for (int trial = 0; trial < 200; ++trial) {
        const QuantileLevel tau(std::uniform_real_distribution<double>(0.05, 0.95)(rng));
        const double a = ud(rng), b = ud(rng);
        const double w = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        CHECK(rho(tau, a) >= 0.0);
        CHECK(rho(tau, w * a + (1 - w) * b) <= w * rho(tau, a) + (1 - w) * rho(tau, b) + 1e-12);
    }
}

TEST_CASE("quantile level validation") {
    CHECK_THROWS_AS(QuantileLevel(0.0), UsageError);
    CHECK_THROWS_AS(QuantileLevel(1.0), UsageError);
    CHECK_THROWS_AS(QuantileLevel(-0.3), UsageError);
}

TEST_CASE("empirical quantile picks the left-endpoint order statistic") {
    CHECK(empirical_quantile(QuantileLevel(0.5),
                             SortedSegment::from_unsorted({3, 1, 2})) == 2.0);
    CHECK(empirical_quantile(QuantileLevel(0.25),
                             SortedSegment::from_unsorted({1, 2, 3, 4})) == 1.0);
    CHECK(empirical_quantile(QuantileLevel(0.9), SortedSegment::from_unsorted(
                                                     {0, 0, 0, 0, 0, 0, 0, 0, 0, 100})) == 0.0);
    CHECK_THROWS_AS(empirical_quantile(QuantileLevel(0.5), SortedSegment{}), UsageError);
}

TEST_CASE("quantile minimizes the check loss over candidates") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t m = 1 + rng() % 50;
        std::vector<double> vals(m);
        std::normal_distribution<double> nd;
        for (auto& v : vals) v = rng() % 3 == 0 ? std::round(nd(rng)) : nd(rng);
        const double tau = std::uniform_real_distribution<double>(0.05, 0.95)(rng);
        const auto seg = SortedSegment::from_unsorted(vals);
        const auto cost = sql_cost(QuantileLevel(tau), seg);
        long double best = std::numeric_limits<long double>::infinity();
        double best_at = 0.0;
        for (double cand : seg.values) {
            const long double loss = oracle::direct_check_loss(tau, seg.values, cand);
            if (loss < best - 1e-15L) {
                best = loss;
                best_at = cand;
            }
        }
        CHECK(static_cast<double>(best) == doctest::Approx(cost.sql).epsilon(1e-12));
        // left endpoint: no smaller candidate achieves the minimum
        CHECK(cost.quantile <= best_at + 1e-15);
        // rank property at the fitted value
        const auto m_ll = static_cast<long long>(m);
        const auto k = static_cast<long long>(quantile_rank(QuantileLevel(tau), m));
        long long at_most = 0, at_least = 0;
        for (double v : seg.values) {
            if (v <= cost.quantile) ++at_most;
            if (v >= cost.quantile) ++at_least;
        }
        CHECK(at_most >= k);
        CHECK(at_least >= m_ll - k + 1);
    }
}

TEST_CASE("sql worked examples") {
    const auto c1 = sql_cost(QuantileLevel(0.5), SortedSegment::from_unsorted({0, 0, 10}));
    CHECK(c1.quantile == 0.0);
    CHECK(c1.sql == doctest::Approx(5.0));

    const auto c2 = sql_cost(QuantileLevel(0.3), SortedSegment::from_unsorted({4, 4, 4, 4}));
    CHECK(c2.sql == 0.0);

    const auto c3 = sql_cost(QuantileLevel(0.25), SortedSegment::from_unsorted({1, 2, 3, 4}));
    CHECK(c3.quantile == 1.0);
    CHECK(c3.sql == doctest::Approx(1.5));
}

TEST_CASE("closed-form sql equals direct summation within 8 ulp") {
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t m = 1 + rng() % 2000;
        std::vector<double> vals(m);
        for (auto& v : vals) v = nd(rng) * 10.0;
        const double tau = std::uniform_real_distribution<double>(0.05, 0.95)(rng);
        const auto seg = SortedSegment::from_unsorted(vals);
        const auto cost = sql_cost(QuantileLevel(tau), seg);
        const double direct = static_cast<double>(
            oracle::direct_check_loss(tau, seg.values, cost.quantile));
        const double scale = std::max(std::abs(direct), std::abs(cost.sql));
        CHECK(std::abs(cost.sql - direct) <= 8.0 * std::ldexp(scale, -52) + 1e-300);
    }
}

TEST_CASE("sql is translation equivariant") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> vals(1 + rng() % 100);
        for (auto& v : vals) v = nd(rng);
        const double shift = nd(rng) * 3.0;
        std::vector<double> shifted = vals;
        for (auto& v : shifted) v += shift;
        const QuantileLevel tau(0.3);
        const auto a = sql_cost(tau, SortedSegment::from_unsorted(vals));
        const auto b = sql_cost(tau, SortedSegment::from_unsorted(shifted));
        CHECK(b.quantile == doctest::Approx(a.quantile + shift).epsilon(1e-12));
        CHECK(b.sql == doctest::Approx(a.sql).epsilon(1e-9));
    }
}

TEST_CASE("merge keeps multisets and prefix sums consistent") {
    const auto a = SortedSegment::from_unsorted({1, 3});
    const auto b = SortedSegment::from_unsorted({2, 4});
    const auto m = merge(a, b);
    CHECK(m.values == std::vector<double>{1, 2, 3, 4});
    CHECK(static_cast<double>(m.prefix[4]) == doctest::Approx(10.0));

    const auto dup = merge(SortedSegment::single(5), SortedSegment::single(5));
    CHECK(dup.values == std::vector<double>{5, 5});

    // associativity up to multiset equality
    std::mt19937_64 rng(13);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 50; ++trial) {
        auto mk = [&](std::size_t count) {
            std::vector<double> v(count);
            for (auto& x : v) x = std::floor(nd(rng) * 4.0);
            return SortedSegment::from_unsorted(v);
        };
        const auto x = mk(1 + rng() % 10), y = mk(1 + rng() % 10), z = mk(1 + rng() % 10);
        CHECK(merge(merge(x, y), z).values == merge(x, merge(y, z)).values);
    }

    // prefix differences reproduce values
    for (std::size_t i = 0; i < m.size(); ++i)
        CHECK(static_cast<double>(m.prefix[i + 1] - m.prefix[i]) == doctest::Approx(m.values[i]));
}

TEST_CASE("sse from moments") {
    CHECK(sse_from_moments(4, 20.0, 200.0) == doctest::Approx(100.0));  // {0,0,10,10}
    CHECK(sse_from_moments(3, 12.0, 48.0) == doctest::Approx(0.0));     // constant 4s
    CHECK(sse_from_moments(2, 3.0, 5.0) == doctest::Approx(0.5));       // {1,2}
    CHECK_THROWS_AS(sse_from_moments(0, 0.0, 0.0), UsageError);
}

TEST_CASE("prefix moment tables match direct rectangle scans") {
    std::mt19937_64 rng(99);
    std::normal_distribution<double> nd;
    for (const LatticeShape& shape :
         {LatticeShape{12}, LatticeShape{5, 7}, LatticeShape{3, 4, 2}}) {
        std::vector<double> y(static_cast<std::size_t>(shape.cell_count()));
        for (auto& v : y) v = nd(rng);
        const PrefixMoments pm(shape, y);
        for (const auto& [id, r] : enumerate_dyadic_rects(shape)) {
            std::vector<double> vals;
            detail::for_each_cell_offset(shape, r, [&](long long off) {
                vals.push_back(y[static_cast<std::size_t>(off)]);
            });
            CHECK(pm.rect_sse(r) == doctest::Approx(oracle::direct_sse(vals)).epsilon(1e-9));
            CHECK(pm.rect_mean(r) == doctest::Approx(oracle::direct_mean(vals)).epsilon(1e-12));
            const auto mom = pm.rect_moments(r);
            CHECK(mom.count == r.size());
        }
    }
}

}  // TEST_SUITE
