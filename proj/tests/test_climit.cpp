#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "ncq/climit.hpp"
#include "ncq/errors.hpp"
#include "ncq/random.hpp"
#include "oracles.hpp"

using namespace ncq;
using namespace ncq::oracle;
using namespace ncq::climit;
using quasifree::TwoPointKernel;


TEST_CASE("Speicher generators") {
    SignMatrix one(1);
    const auto v1 = speicher_generators(1, one);
    CHECK(std::abs(v1[0](0, 1) - 1.0) == 0.0);
    CHECK(std::abs(v1[0](1, 0) - 1.0) == 0.0);
    SignMatrix s(2);
    s.set(1, 2, -1);
    const auto v = speicher_generators(2, s);
    CHECK(linalg::max_abs_entry(v[0] * v[1] + v[1] * v[0]) == 0.0);
    SplitMix64 rng(2);
    for (int n = 1; n <= 6; ++n) {
        SignMatrix r(n);
        for (int i = 1; i <= n; ++i)
            for (int j = i + 1; j <= n; ++j)
                r.set(i, j, rng.sign());
        const auto g = speicher_generators(n, r);
        for (int i = 0; i < n; ++i) {
            const auto &a = g[static_cast<std::size_t>(i)];
            CHECK(linalg::max_abs_entry(a * a - CMatrix::Identity(a.rows(), a.cols())) == 0.0);
            CHECK(linalg::max_abs_entry(a - a.adjoint()) == 0.0);
            for (int j = i + 1; j < n; ++j) {
                const auto &b = g[static_cast<std::size_t>(j)];
                CHECK(linalg::max_abs_entry(a * b - r.get(i + 1, j + 1) * (b * a)) == 0.0);
            }
        }
    }
    CHECK_THROWS_AS(speicher_generators(11, SignMatrix(11)), CapError);
}

TEST_CASE("word traces") {
    SignMatrix s(2);
    s.set(1, 2, -1);
    const std::vector<int> w1{1}, w1212{1, 2, 1, 2}, w11{1, 1}, w1221{1, 2, 2, 1};
    CHECK(word_trace(w1, s) == 0);
    CHECK(word_trace(w1212, s) == -1);
    CHECK(word_trace(w11, s) == 1);
    CHECK(word_sign_expectation(w1212, 0.3) == doctest::Approx(0.3));
    CHECK(word_sign_expectation(w1221, 0.3) == 1.0);
    CHECK(word_sign_expectation(w1, 0.3) == 0.0);

    SplitMix64 rng(19);
    int nonzero = 0;
    for (int t = 0; t < 200; ++t) {
        const int n = 1 + static_cast<int>(rng() % 6);
        const int half = 1 + static_cast<int>(rng() % 4);
        std::vector<int> w;
        for (int i = 0; i < half; ++i) {
            const int g = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(n));
            w.push_back(g);
            w.push_back(g);
        }
        if (t % 5 == 0)
            w.back() = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(n));
        for (std::size_t i = w.size(); i > 1; --i)
            std::swap(w[i - 1], w[rng() % i]);
        SignMatrix r(n);
        for (int i = 1; i <= n; ++i)
            for (int j = i + 1; j <= n; ++j)
                r.set(i, j, rng.sign());
        const auto v = speicher_generators(n, r);
        const double dense = dense_tau(v, w);
        CHECK(static_cast<double>(word_trace(w, r)) == dense);
        nonzero += dense != 0;
    }
    CHECK(nonzero > 100);
}

TEST_CASE("finite-n moments: second moment") {
    SplitMix64 rng(4);
    const auto k = random_kernel(rng, 2, 3);
    const std::vector<int> w{0, 1};
    CltInstance inst{k, w, 1.7, 0.2, {}};
    for (std::uint64_t n : {1u, 2u, 5u, 40u})
        CHECK(std::abs(finite_n_moment_exact(inst, n) - 1.7 * k.pair(0, 1)) <= 1e-13);
    const auto mc = finite_n_moment_mc(inst, 4, 50, 9);
    CHECK(std::abs(mc.mean - 1.7 * k.pair(0, 1)) <= 1e-13);
    CHECK(mc.std_error <= 1e-13);
}

TEST_CASE("finite-n moments agree with the dense oracle") {
    SplitMix64 rng(21);
    double worst = 0;
    for (int trial = 0; trial < 6; ++trial) {
        const auto k = random_kernel(rng, 3, 2);
        std::vector<int> w;
        for (int i = 0; i < 4; ++i)
            w.push_back(static_cast<int>(rng() % 3));
        for (double q : {-1.0, 0.0, 0.6}) {
            CltInstance inst{k, w, 1.3, q, {}};
            for (int n : {2, 3}) {
                const Complex a = finite_n_moment_exact(inst, static_cast<std::uint64_t>(n));
                const Complex b = dense_moment(inst, n);
                worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::abs(b)));
            }
        }
    }
    CHECK(worst <= 1e-12);
    // Six letters at n = 2.
    const auto k = random_kernel(rng, 2, 2);
    CltInstance six{k, {0, 1, 0, 1, 1, 0}, 1.0, 0.4, {}};
    CHECK(std::abs(finite_n_moment_exact(six, 2) - dense_moment(six, 2)) <= 1e-12);
}

TEST_CASE("coloured finite-n moments agree with the dense oracle") {
    SplitMix64 rng(23);
    double worst = 0;
    for (int trial = 0; trial < 4; ++trial) {
        const auto k = random_kernel(rng, 2, 2);
        const std::vector<int> w{0, 1, 1, 0};
        const std::vector<std::vector<double>> palettes{
            {0.5, -0.4, 0.5, -0.4}, {0.2, 0.2, -0.7, 0.9}, {0.3, 0.3, 0.3, 0.3}};
        for (const auto &c : palettes) {
            CltInstance inst{k, w, 1.0, 0.0, c};
            for (int n : {2, 3}) {
                const Complex a = finite_n_moment_exact(inst, static_cast<std::uint64_t>(n));
                const Complex b = dense_coloured_moment(inst, n);
                worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::abs(b)));
            }
        }
    }
    CHECK(worst <= 1e-12);
}

TEST_CASE("coloured path reduces to the single-q path") {
    SplitMix64 rng(29);
    const auto k = random_kernel(rng, 3, 2);
    const std::vector<int> w{0, 1, 2, 0, 1, 2};
    for (double q : {-1.0, -0.2, 0.5, 1.0}) {
        CltInstance a{k, w, 1.0, q, {}};
        CltInstance b{k, w, 1.0, 0.0, std::vector<double>(6, q)};
        for (std::uint64_t n : {1u, 3u, 7u})
            CHECK(std::abs(finite_n_moment_exact(a, n) - finite_n_moment_exact(b, n)) <= 1e-12);
    }
}

TEST_CASE("limit moments") {
    CMatrix x(2, 2);
    x << 0, 1, 1, 0;
    TwoPointKernel k({x}, 0.5 * CMatrix::Identity(2, 2));
    const std::vector<int> w{0, 0, 0, 0};
    CHECK(std::abs(limit_moment(CltInstance{k, w, 1.0, 1.0, {}}) - 3.0) <= 1e-14);
    CHECK(std::abs(limit_moment(CltInstance{k, w, 1.0, -1.0, {}}) - 1.0) <= 1e-14);
    const std::vector<int> w2{0, 0};
    CHECK(std::abs(limit_moment(CltInstance{k, w2, 2.5, 0.0, {}}) - 2.5) <= 1e-14);
}

TEST_CASE("O(1/n) convergence of the exact moments") {
    SplitMix64 rng(31);
    for (int trial = 0; trial < 5; ++trial) {
        const auto k = random_kernel(rng, 2, 2);
        CltInstance inst{k, {0, 1, 1, 0}, 1.0, 0.5 - 0.3 * trial, {}};
        const Complex lim = limit_moment(inst);
        const double e8 = std::abs(finite_n_moment_exact(inst, 8) - lim);
        const double e16 = std::abs(finite_n_moment_exact(inst, 16) - lim);
        const double e32 = std::abs(finite_n_moment_exact(inst, 32) - lim);
        CHECK(e8 / e16 >= 1.5);
        CHECK(e8 / e16 <= 3.0);
        CHECK(e16 / e32 >= 1.5);
        CHECK(e16 / e32 <= 3.0);
    }
}

TEST_CASE("coloured moments converge to the t-weighted limit") {
    SplitMix64 rng(37);
    for (int trial = 0; trial < 4; ++trial) {
        const auto k = random_kernel(rng, 2, 2);
        CltInstance inst{k, {0, 1, 0, 1}, 1.0, 0.0, {0.8, -0.6, 0.8, -0.6}};
        const Complex lim = limit_moment(inst);
        for (std::uint64_t n : {8u, 16u, 32u, 64u})
            CHECK(std::abs(finite_n_moment_exact(inst, n) - lim) <= 5.0 / static_cast<double>(n));
    }
}

TEST_CASE("Monte Carlo moments") {
    SplitMix64 rng(41);
    const auto k = random_kernel(rng, 2, 2);
    CltInstance inst{k, {0, 1, 0, 1}, 1.0, 0.5, {}};
    const auto mc = finite_n_moment_mc(inst, 4, 10000, 1234);
    const Complex exact = finite_n_moment_exact(inst, 4);
    CHECK(std::abs(mc.mean - exact) <= 4 * mc.std_error);
    const auto again = finite_n_moment_mc(inst, 4, 10000, 1234);
    CHECK(again.mean == mc.mean);
    CHECK(again.std_error == mc.std_error);
    const auto threaded = finite_n_moment_mc(inst, 4, 10000, 1234, 3);
    CHECK(threaded.mean == mc.mean);
    CHECK(threaded.std_error == mc.std_error);
    CltInstance coloured{k, {0, 1, 0, 1}, 1.0, 0.0, {0.1, 0.2, 0.1, 0.2}};
    CHECK_THROWS_AS(finite_n_moment_mc(coloured, 4, 10, 1), DomainError);
}

TEST_CASE("CCR moments match pair-partition enumeration") {
    for (double mu : {0.3, 0.5, 0.8})
        for (bool same : {true, false}) {
            auto k = ccr_kernel(mu);
            if (!same) {
                CMatrix t = k.table();
                t(0, 1) = t(1, 0) = 0;
                k = TwoPointKernel(t);
            }
            for (int r = 0; r <= 10; ++r)
                for (int s = 0; r + s <= 10; ++s) {
                    std::vector<int> w(static_cast<std::size_t>(r), 0);
                    w.insert(w.end(), static_cast<std::size_t>(s), 1);
                    const Complex e = limit_moment(CltInstance{k, w, 1.0, 1.0, {}});
                    CHECK(std::abs(ccr_moment(mu, r, s, same) - e) <= 1e-9 * std::max(1.0, std::abs(e)));
                }
        }
}

TEST_CASE("CCR characteristic function") {
    auto zero = ccr_charfn_series(0.4, 0.0, 0.0, true, 16);
    CHECK(std::abs(zero.series - 1.0) == 0.0);
    auto gz = ccr_charfn_series(0.4, 1.0, 0.0, true, 16);
    CHECK(std::abs(gz.series - std::exp(0.5)) <= gz.pair_tail_bound + 1e-14);
    auto half = ccr_charfn_series(0.5, 0.5, 0.5, true, 16);
    CHECK(std::abs(half.series - std::exp(0.25)) <= 1e-6);
    for (double mu : {0.3, 0.5, 0.8})
        for (double z : {0.0, 0.5, -0.5, 1.0, -1.0})
            for (double w : {0.0, 0.5, -0.5, 1.0, -1.0})
                for (bool same : {true, false}) {
                    const auto r = ccr_charfn_series(mu, z, w, same, 16);
                    CHECK(r.error <= 1e-6);
                    CHECK(r.error <= r.pair_tail_bound + 1e-12);
                    CHECK(r.pair_tail_bound <= r.growth_tail_bound);
                }
    CHECK_THROWS_AS(ccr_charfn_series(0.5, 0.1, 0.1, true, 25), CapError);
    CHECK_THROWS_AS(ccr_charfn_series(0.5, 3.0, 0.1, true, 8), DomainError);
}

TEST_CASE("CCR commutator") {
    CHECK(std::abs(ccr_commutator_check(0.5).from_moments) <= 1e-15);
    const auto c = ccr_commutator_check(0.75);
    CHECK(std::abs(c.from_moments - Complex(0, 1)) <= 1e-14);
    CHECK(c.residual <= 1e-14);
    CHECK_THROWS_AS(ccr_commutator_check(1.0), DomainError);
}
