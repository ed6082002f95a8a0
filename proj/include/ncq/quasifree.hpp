#pragma once

// CAR matrices in the Jordan-Wigner picture, quasi-free densities, two-point
// kernels and the pair-partition (Wick) moment evaluator.

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "ncq/linalg.hpp"
#include "ncq/partitions.hpp"

namespace ncq::quasifree {

inline constexpr int kMaxCarModes = 12;
inline constexpr int kMaxWickPoints = 12;

struct QuasiFreeSpec {
    std::vector<double> mu;

    /// Throws DomainError unless K >= 1 and every mu_k is in (0,1).
    void validate() const;
    int modes() const { return static_cast<int>(mu.size()); }
};

/// a_k = Z^{(k-1)} (x) e12 (x) I^{(K-k)}, 1 <= k <= K.
CMatrix car_generator(int k, int K);
std::vector<CMatrix> car_generators(int K);

/// Largest entrywise deviation from the CAR relations among a_1..a_K.
double car_relation_residual(int K);

/// D_mu = (x)_k diag(1 - mu_k, mu_k).
CMatrix quasifree_density(const QuasiFreeSpec &spec);
/// Diagonal of D_mu, avoiding the dense 2^K x 2^K matrix.
RVector quasifree_density_diagonal(const QuasiFreeSpec &spec);

/// D^s x D^{-s}.
CMatrix modular_conjugate(const QuasiFreeSpec &spec, const CMatrix &x, double s);

/// One letter of a CAR word: a_k, or a_k* when `star` is set.
struct CarLetter {
    int k = 1;
    bool star = false;
    bool operator==(const CarLetter &) const = default;
};

/// tr(D_mu w) for a word over {a_k, a_k*}, evaluated densely.
Complex car_dense_trace(const QuasiFreeSpec &spec, std::span<const CarLetter> word);

/// Closed form of tr(D a_{i_r}*...a_{i_1}* a_{j_1}...a_{j_s}) for strictly
/// increasing i and j: delta_{r,s} prod delta_{i_l,j_l} mu_{i_l}.
Complex car_moment_formula(const QuasiFreeSpec &spec, std::span<const int> i,
                           std::span<const int> j);

/// The word a_{i_r}*...a_{i_1}* a_{j_1}...a_{j_s}.
std::vector<CarLetter> car_moment_word(std::span<const int> i, std::span<const int> j);

/// delta_{r,s} det[<g_i, h_j>] with <g,h> = sum_k conj(g_k) h_k mu_k.
Complex car_determinant(const QuasiFreeSpec &spec, std::span<const CVector> g,
                        std::span<const CVector> h);

/// Table of pair values psi(x_i x_j) over a finite symbol list, optionally
/// realized as matrices with a weight `density` so that psi(x) = tr(density x)
/// extends to longer products.
class TwoPointKernel {
  public:
    explicit TwoPointKernel(CMatrix table);
    TwoPointKernel(std::vector<CMatrix> symbols, CMatrix density);

    int size() const { return static_cast<int>(table_.rows()); }
    Complex pair(int i, int j) const { return table_(i, j); }
    const CMatrix &table() const { return table_; }

    bool realized() const { return !symbols_.empty(); }
    const std::vector<CMatrix> &symbols() const { return symbols_; }
    const CMatrix &density() const { return density_; }

    /// psi(x_{w_1} ... x_{w_l}); needs a realization when l > 2.
    Complex product(std::span<const int> word) const;
    /// max(||x||, psi(x*x)^{1/2}, psi(xx*)^{1/2}); needs a realization.
    double length(int i) const;

    /// Returns a kernel with every value scaled by c (realization included).
    TwoPointKernel scaled(double c) const;

  private:
    CMatrix table_;
    std::vector<CMatrix> symbols_;
    CMatrix density_;
};

/// Symbols a_1..a_K, a_1*..a_K* realized block-diagonally in l_inf^K(M_2)
/// with weight sum_k (1-mu_k) x_11 + mu_k x_22, so that
/// psi(a_j* a_k) = delta mu_k and psi(a_j a_k*) = delta (1 - mu_k).
/// With `normalized` the weight is divided by K and becomes a state.
TwoPointKernel car_kernel(const QuasiFreeSpec &spec, bool normalized = false);
/// Symbol index of a_k (or a_k*) in car_kernel.
int car_symbol(CarLetter letter, int K);

using BetaFn = std::function<Complex(const partitions::PairPartition &)>;

/// sum over pair partitions of beta(sigma) prod_{a<b paired} psi(x_a x_b).
Complex wick_moment(const TwoPointKernel &kernel, std::span<const int> word,
                    const BetaFn &beta);
/// Same with beta = q^{crossings}; runs without materializing partitions.
Complex wick_moment(const TwoPointKernel &kernel, std::span<const int> word, double q);

struct GrowthCheck {
    double moment_abs = 0;
    double bound = 0;
    double margin = 0; // bound - moment_abs
    bool ok = false;
};

/// |wick_moment| <= m^{m/2} prod |x_i|. `lengths` may be empty, in which case
/// they are computed from the kernel realization.
GrowthCheck growth_bound_check(const TwoPointKernel &kernel, std::span<const int> word,
                               double q, std::span<const double> lengths = {});

/// Smallest c on the grid 0.1, 0.2, ..., 100 with m_k <= c^{k+1} k^k for all
/// supplied k = 1, 2, ...; nullopt if none. Odd-k moments are compared by
/// absolute value; a negative even moment is rejected.
std::optional<double> moment_growth_certificate(std::span<const double> moments);
/// Same test with log|m_k| supplied directly (use -inf for m_k = 0).
std::optional<double> moment_growth_certificate_log(std::span<const double> log_abs_moments);

} // namespace ncq::quasifree
