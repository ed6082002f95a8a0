#include <doctest.h>

#include <cmath>
#include <vector>

#include "ncq/errors.hpp"
#include "ncq/linalg.hpp"
#include "ncq/random.hpp"

using namespace ncq;
using namespace ncq::linalg;

TEST_CASE("kron of identities and basis bookkeeping") {
    CHECK(kron(CMatrix::Identity(2, 2), CMatrix::Identity(2, 2))
              .isApprox(CMatrix::Identity(4, 4)));
    const CMatrix e12 = basis_matrix(2, 2, 0, 1);
    const CMatrix k = kron(e12, e12);
    CHECK(k(0, 3) == Complex(1));
    CHECK(k.cwiseAbs().sum() == doctest::Approx(1.0));
}

TEST_CASE("kron mixed product rule") {
    SplitMix64 rng(11);
    for (int t = 0; t < 10; ++t) {
        const CMatrix a = ginibre(2, 2, rng), b = ginibre(2, 2, rng);
        const CMatrix c = ginibre(2, 2, rng), d = ginibre(2, 2, rng);
        const CMatrix lhs = kron(a, b) * kron(c, d);
        // Oracle: index formula applied to the products directly.
        const CMatrix ac = a * c, bd = b * d;
        double err = 0;
        for (int i1 = 0; i1 < 2; ++i1)
            for (int i2 = 0; i2 < 2; ++i2)
                for (int j1 = 0; j1 < 2; ++j1)
                    for (int j2 = 0; j2 < 2; ++j2)
                        err = std::max(err, std::abs(lhs(2 * i1 + i2, 2 * j1 + j2) -
                                                     ac(i1, j1) * bd(i2, j2)));
        CHECK(err <= 1e-12);
    }
}

TEST_CASE("kron respects the dimension cap") {
    const auto old = dimension_cap();
    set_dimension_cap(8);
    CHECK_THROWS_AS(kron(CMatrix::Identity(4, 4), CMatrix::Identity(4, 4)), CapError);
    set_dimension_cap(old);
}

TEST_CASE("singular values of simple matrices") {
    auto s = svd_values(CMatrix::Identity(5, 5));
    REQUIRE(s.values.size() == 5);
    CHECK(s.nuclear() == doctest::Approx(5.0).epsilon(1e-12));
    CVector u(3), v(2);
    u << 2, 0, 0;
    v << 0, 3;
    const CMatrix r1 = u * v.adjoint();
    s = svd_values(r1);
    CHECK(s.values[0] == doctest::Approx(6.0).epsilon(1e-12));
    CHECK(std::abs(s.values[1]) <= 1e-12);
    CHECK(svd_values(CMatrix(0, 0)).values.empty());
}

TEST_CASE("Frobenius identity and sorting") {
    SplitMix64 rng(3);
    for (int t = 0; t < 20; ++t) {
        const CMatrix a = ginibre(3, 3, rng);
        const auto s = svd_values(a);
        for (std::size_t i = 1; i < s.values.size(); ++i)
            CHECK(s.values[i - 1] >= s.values[i]);
        CHECK(std::abs(s.frobenius_squared() - a.squaredNorm()) <= 1e-10);
    }
    // Large enough to take the divide-and-conquer path.
    const CMatrix big = ginibre(70, 60, rng);
    CHECK(std::abs(svd_values(big).frobenius_squared() - big.squaredNorm()) <=
          1e-9 * big.squaredNorm());
}

TEST_CASE("nuclear norm is unitarily invariant and subadditive") {
    SplitMix64 rng(5);
    for (int t = 0; t < 20; ++t) {
        const CMatrix a = ginibre(4, 4, rng), b = ginibre(4, 4, rng);
        const CMatrix u = random_unitary(4, rng), v = random_unitary(4, rng);
        CHECK(std::abs(nuclear_norm(u * a * v) - nuclear_norm(a)) <= 1e-10);
        CHECK(nuclear_norm(a + b) <= nuclear_norm(a) + nuclear_norm(b) + 1e-12);
    }
}

TEST_CASE("square-function norm equals nuclear norm of the block column") {
    SplitMix64 rng(8);
    for (int t = 0; t < 10; ++t) {
        std::vector<CMatrix> c;
        CMatrix gram = CMatrix::Zero(3, 3);
        for (int k = 0; k < 4; ++k) {
            c.push_back(ginibre(3, 3, rng));
            gram += c.back().adjoint() * c.back();
        }
        // Oracle: trace of the PSD square root via Hermitian eigenvalues.
        const auto eig = eigh(gram);
        double tr = 0;
        for (Eigen::Index i = 0; i < eig.values.size(); ++i)
            tr += std::sqrt(std::max(0.0, eig.values(i)));
        CHECK(std::abs(nuclear_norm(block_column(c)) - tr) <= 1e-9);
    }
}

TEST_CASE("matrix exponential") {
    CHECK(expm(CMatrix::Zero(2, 2)).isApprox(CMatrix::Identity(2, 2)));
    CMatrix d = CMatrix::Zero(2, 2);
    d(0, 0) = 1;
    d(1, 1) = 2;
    const CMatrix e = expm(d);
    CHECK(std::abs(e(0, 0) - std::exp(1.0)) <= 1e-12);
    CHECK(std::abs(e(1, 1) - std::exp(2.0)) <= 1e-12 * std::exp(2.0));
    SplitMix64 rng(9);
    for (int t = 0; t < 10; ++t) {
        const CMatrix g = ginibre(4, 4, rng);
        const CMatrix h = 0.5 * (g + g.adjoint());
        const CMatrix prod = expm(h) * expm(-h);
        CHECK(max_abs_entry(prod - CMatrix::Identity(4, 4)) <= 1e-10);
    }
    CHECK_THROWS_AS(expm(CMatrix::Identity(2, 2) * 1000.0), NumericError);
    CHECK_THROWS_AS(expm(CMatrix::Zero(2, 3)), DomainError);
}

TEST_CASE("soft threshold matches an SVD reconstruction") {
    SplitMix64 rng(4);
    for (auto [r, c] : {std::pair{5, 3}, std::pair{3, 5}, std::pair{4, 4}}) {
        const CMatrix a = ginibre(r, c, rng);
        const double tau = 0.8;
        Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
        RVector s = (svd.singularValues().array() - tau).max(0.0);
        const CMatrix ref = svd.matrixU() * s.cast<Complex>().asDiagonal() *
                            svd.matrixV().adjoint();
        CHECK(max_abs_entry(soft_threshold(a, tau) - ref) <= 1e-10);
    }
}

TEST_CASE("psd square root and powers") {
    SplitMix64 rng(6);
    const CMatrix g = ginibre(3, 3, rng);
    const CMatrix p = g * g.adjoint() + CMatrix::Identity(3, 3);
    const CMatrix r = psd_sqrt(p);
    CHECK(max_abs_entry(r * r - p) <= 1e-10);
    CHECK(max_abs_entry(pd_power(p, 0.5) - r) <= 1e-10);
    CHECK(max_abs_entry(pd_power(p, -1.0) * p - CMatrix::Identity(3, 3)) <= 1e-10);
    CHECK_THROWS_AS(pd_power(CMatrix::Zero(2, 2), 0.5), DomainError);
}
