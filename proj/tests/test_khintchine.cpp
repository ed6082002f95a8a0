#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "ncq/errors.hpp"
#include "ncq/khintchine.hpp"
#include "ncq/random.hpp"
#include "oracles.hpp"

using namespace ncq;
using namespace ncq::oracle;
using namespace ncq::khintchine;

namespace {

CMatrix scalar(Complex z) { return CMatrix::Constant(1, 1, z); }

std::vector<CMatrix> ginibre_list(int K, int m, SplitMix64 &rng) {
    std::vector<CMatrix> x;
    for (int k = 0; k < K; ++k)
        x.push_back(ginibre(m, m, rng));
    return x;
}

} // namespace

TEST_CASE("square function norm examples") {
    SplitMix64 rng(7);
    const CMatrix c = ginibre(3, 3, rng);
    CHECK(square_function_norm({c}, {1.0}, Side::column) ==
          doctest::Approx(linalg::nuclear_norm(c)).epsilon(1e-12));
    const CMatrix u = random_unitary(3, rng);
    CHECK(square_function_norm({u, u, u, u}, {1, 1, 1, 1}, Side::column) ==
          doctest::Approx(2.0 * 3).epsilon(1e-12));
    CHECK(square_function_norm({CMatrix::Zero(2, 2), CMatrix::Zero(2, 2)}, {1, 1}, Side::row) == 0);
    CHECK_THROWS_AS(square_function_norm({c}, {-1.0}, Side::row), DomainError);
}

TEST_CASE("block nuclear norm matches Hermitian square root") {
    SplitMix64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const auto c = ginibre_list(3, 3, rng);
        const std::vector<double> w{rng.uniform(), rng.uniform(), rng.uniform()};
        for (Side s : {Side::column, Side::row})
            CHECK(std::abs(square_function_norm(c, w, s) - square_function_eig(c, w, s)) < 1e-9);
    }
}

TEST_CASE("two-term infimum scalar examples") {
    auto solve1 = [](double lambda, double nu) {
        return two_term_infimum({{scalar(1)}, {lambda}, {nu}}).objective;
    };
    CHECK(solve1(1, 1) == doctest::Approx(1).epsilon(1e-7));
    CHECK(solve1(4, 1) == doctest::Approx(1).epsilon(1e-7));
    const auto r = two_term_infimum({{scalar(1), scalar(1)}, {1, 1}, {1, 1}});
    CHECK(r.converged);
    CHECK(r.objective == doctest::Approx(std::numbers::sqrt2).epsilon(1e-7));
    CHECK(r.lower_bound <= r.objective + 1e-12);
    CHECK(r.lower_bound > r.objective - 1e-5);
}

TEST_CASE("zero weight forces that side to vanish") {
    SplitMix64 rng(5);
    const auto x = ginibre_list(2, 2, rng);
    const auto r = two_term_infimum({x, {1, 1}, {1, 0}});
    CHECK(r.converged);
    CHECK(linalg::max_abs_entry(r.d[1]) == 0);
    CHECK(linalg::max_abs_entry(r.c[1] - x[1]) < 1e-12);
}

TEST_CASE("two-term infimum matches grid oracle on scalars") {
    SplitMix64 rng(19);
    for (int trial = 0; trial < 10; ++trial) {
        KhintchineInstance inst{{scalar(rng.uniform(-1, 1)), scalar(rng.uniform(-1, 1))},
                                {rng.uniform(0.1, 2), rng.uniform(0.1, 2)},
                                {rng.uniform(0.1, 2), rng.uniform(0.1, 2)}};
        const auto r = two_term_infimum(inst);
        REQUIRE(r.converged);
        CHECK(std::abs(r.objective - grid_oracle(inst)) < 1e-3);
    }
}

TEST_CASE("two-term solver soundness against random feasible splits") {
    SplitMix64 rng(23);
    for (int trial = 0; trial < 6; ++trial) {
        const int K = 1 + trial % 3, m = 1 + trial % 3;
        KhintchineInstance inst{ginibre_list(K, m, rng), {}, {}};
        for (int k = 0; k < K; ++k) {
            inst.lambda.push_back(rng.uniform(0.1, 1));
            inst.nu.push_back(rng.uniform(0.1, 1));
        }
        const auto r = two_term_infimum(inst);
        REQUIRE(r.converged);
        for (int k = 0; k < K; ++k)
            CHECK(linalg::max_abs_entry(r.c[static_cast<std::size_t>(k)] +
                                        r.d[static_cast<std::size_t>(k)] -
                                        inst.x[static_cast<std::size_t>(k)]) < 1e-8);
        CHECK(std::abs(split_value(inst, r.c) - r.objective) < 1e-7);
        CHECK(r.lower_bound <= r.objective + 1e-9);
        for (int s = 0; s < 50; ++s) {
            std::vector<CMatrix> c;
            const double t = rng.uniform();
            for (int k = 0; k < K; ++k)
                c.push_back(t * inst.x[static_cast<std::size_t>(k)] + 0.5 * ginibre(m, m, rng));
            CHECK(r.objective <= split_value(inst, c) + 1e-7);
        }
        // diagonal sanity: never below sum of scalar closed forms when m = 1, K = 1
        if (K == 1 && m == 1)
            CHECK(r.objective >= std::min(std::sqrt(inst.lambda[0]), std::sqrt(inst.nu[0])) *
                                         std::abs(inst.x[0](0, 0)) -
                                     1e-9);
    }
}

TEST_CASE("lhs car norm examples") {
    using quasifree::QuasiFreeSpec;
    CHECK(lhs_car_norm({scalar(1)}, QuasiFreeSpec{{0.5}}, Normalization::symmetric) ==
          doctest::Approx(0.5).epsilon(1e-12));
    for (double mu : {0.1, 0.3, 0.8})
        CHECK(lhs_car_norm({scalar(1)}, QuasiFreeSpec{{mu}}, Normalization::right) ==
              doctest::Approx(mu).epsilon(1e-12));
    CHECK(lhs_car_norm({CMatrix::Zero(2, 2), CMatrix::Zero(2, 2)}, QuasiFreeSpec{{0.3, 0.6}},
                       Normalization::symmetric) == 0);
    std::vector<CMatrix> big(9, scalar(1));
    CHECK_THROWS_AS(lhs_car_norm(big, QuasiFreeSpec{std::vector<double>(9, 0.5)},
                                 Normalization::symmetric),
                    CapError);
}

TEST_CASE("khintchine ratio scalar battery") {
    using quasifree::QuasiFreeSpec;
    const auto r = khintchine_ratio({scalar(1)}, QuasiFreeSpec{{0.5}}, Normalization::symmetric);
    CHECK(r.lhs == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(r.rhs == doctest::Approx(std::sqrt(0.5)).epsilon(1e-7));
    CHECK(r.ratio == doctest::Approx(std::sqrt(0.5)).epsilon(1e-7));
    for (int i = 1; i <= 9; ++i) {
        const double mu = 0.1 * i;
        for (auto norm : {Normalization::symmetric, Normalization::right}) {
            const auto q = khintchine_ratio({scalar(1)}, QuasiFreeSpec{{mu}}, norm);
            CHECK(q.ratio >= 0.99 / std::numbers::sqrt2);
            CHECK(q.ratio <= 1.01 * std::numbers::sqrt2);
        }
    }
}

TEST_CASE("khintchine ratio on random instances and absorption") {
    using quasifree::QuasiFreeSpec;
    SplitMix64 rng(31);
    split::Options tight;
    tight.tolerance = 1e-11;
    for (int trial = 0; trial < 4; ++trial) {
        const QuasiFreeSpec spec{{rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9)}};
        auto x = ginibre_list(3, 2, rng);
        const auto r = khintchine_ratio(x, spec, Normalization::symmetric, tight);
        CHECK(r.within_budget);
        const CMatrix u = random_unitary(2, rng), v = random_unitary(2, rng);
        for (auto &xk : x)
            xk = u * xk * v;
        const auto r2 = khintchine_ratio(x, spec, Normalization::symmetric, tight);
        CHECK(std::abs(r.lhs - r2.lhs) < 1e-9);
        CHECK(std::abs(r.ratio - r2.ratio) < 1e-9);
    }
}

TEST_CASE("three-term norm examples") {
    SplitMix64 rng(3);
    const CMatrix x = ginibre(3, 3, rng);
    const RVector trivial = RVector::Ones(1);
    const auto r = k_norm_three_term(x, 1, 1.0, trivial, 3);
    CHECK(r.converged);
    CHECK(r.objective == doctest::Approx(linalg::nuclear_norm(x)).epsilon(1e-7));
    CHECK(k_norm_three_term(CMatrix::Zero(2, 2), 2, 0.5, trivial, 2).objective == 0);
    const auto s = k_norm_three_term(scalar(Complex(0.6, -0.8)), 4, 1.0, trivial, 1);
    CHECK(s.objective == doctest::Approx(2.0).epsilon(1e-7));
    CHECK(linalg::max_abs_entry(s.x1 + s.x2 + s.x3 - scalar(Complex(0.6, -0.8))) < 1e-8);
    CHECK_THROWS_AS(k_norm_three_term(x, 1, 1.0, RVector::Ones(2), 3), DomainError);
}

TEST_CASE("three-term terms match partial-trace square functions") {
    SplitMix64 rng(41);
    const RVector rho = (RVector(2) << 0.3, 0.7).finished();
    const CMatrix x = ginibre(4, 4, rng);
    const auto r = k_norm_three_term(x, 2, 0.5, rho, 2);
    REQUIRE(r.converged);
    // E = id (x) tr(diag(rho) .) on M_2 (x) M_2
    auto E = [&](const CMatrix &z) {
        CMatrix out = CMatrix::Zero(2, 2);
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
                for (int i = 0; i < 2; ++i)
                    out(a, b) += rho(i) * z(a * 2 + i, b * 2 + i);
        return out;
    };
    CMatrix dinv = CMatrix::Zero(4, 4);
    for (int a = 0; a < 2; ++a)
        for (int i = 0; i < 2; ++i)
            dinv(a * 2 + i, a * 2 + i) = 1.0 / rho(i);
    // x_2 = y_2 D and x_3 = D y_3 with D = 1 (x) diag(rho)
    const CMatrix y2 = r.x2 * dinv, y3 = dinv * r.x3;
    const double s = std::sqrt(2 * 0.5);
    CHECK(std::abs(r.term_values[0] - 2 * linalg::nuclear_norm(r.x1)) < 1e-10);
    CHECK(std::abs(r.term_values[1] - s * linalg::psd_sqrt(E(y2.adjoint() * y2)).trace().real()) < 1e-9);
    CHECK(std::abs(r.term_values[2] - s * linalg::psd_sqrt(E(y3 * y3.adjoint())).trace().real()) < 1e-9);
}
