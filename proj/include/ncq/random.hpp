#pragma once

// Seeded random sources. SplitMix64 is counter based: stream i of a run with
// seed s starts from derive_seed(s, i), so samples can be generated in any
// order or on any thread and still reproduce a serial run.
//
// Uniform and normal variates are produced from raw bits here rather than by
// std:: distributions, whose output is implementation defined.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

#include "ncq/linalg.hpp"

namespace ncq {

class SplitMix64 {
  public:
    using result_type = std::uint64_t;

    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() {
        return std::numeric_limits<result_type>::max();
    }

    result_type operator()() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Uniform on (lo, hi).
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * open_uniform();
    }

    /// Standard normal via Box-Muller (one variate per call).
    double normal() {
        const double u1 = open_uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * std::numbers::pi * u2);
    }

    /// Rademacher sign.
    int sign() { return ((*this)() >> 63) ? -1 : 1; }

  private:
    double open_uniform() {
        double u;
        do {
            u = uniform();
        } while (u == 0.0);
        return u;
    }

    std::uint64_t state_;
};

/// Seed of stream `index` under run seed `seed`.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    SplitMix64 mix(seed ^ (0x632be59bd9b4e019ULL * (index + 1)));
    mix();
    return mix() ^ index;
}

/// Matrix with i.i.d. standard complex Gaussian entries (E|z|^2 = 1).
inline CMatrix ginibre(Eigen::Index rows, Eigen::Index cols, SplitMix64 &rng) {
    CMatrix g(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) {
            const double re = rng.normal();
            const double im = rng.normal();
            g(i, j) = Complex(re, im) * (1.0 / std::numbers::sqrt2);
        }
    return g;
}

/// Haar-distributed unitary (QR of a Ginibre matrix with phase fix).
inline CMatrix random_unitary(Eigen::Index n, SplitMix64 &rng) {
    const CMatrix g = ginibre(n, n, rng);
    Eigen::HouseholderQR<CMatrix> qr(g);
    CMatrix q = qr.householderQ() * CMatrix::Identity(n, n);
    const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index k = 0; k < n; ++k) {
        const Complex d = r(k, k);
        const double a = std::abs(d);
        if (a > 0)
            q.col(k) *= d / a;
    }
    return q;
}

/// Random matrix with operator norm exactly `norm`.
inline CMatrix random_contraction(Eigen::Index n, SplitMix64 &rng,
                                  double norm = 1.0) {
    const CMatrix g = ginibre(n, n, rng);
    const double s = linalg::operator_norm(g);
    return s > 0 ? CMatrix(g * (norm / s)) : g;
}

} // namespace ncq
