#pragma once

// Speicher's random-sign model and the combinatorial central limit moments,
// plus the CCR (q = 1) characteristic function.

#include <cstdint>
#include <span>
#include <vector>

#include "ncq/linalg.hpp"
#include "ncq/quasifree.hpp"

namespace ncq::climit {

inline constexpr int kMaxDenseSites = 10;
inline constexpr int kMaxMomentPoints = 10;
inline constexpr int kMaxLimitPoints = 12;
inline constexpr int kMaxCcrOrder = 24;

/// Symmetric +-1 commutation signs s_ij on sites 1..n (diagonal unused).
class SignMatrix {
  public:
    explicit SignMatrix(int n);
    int sites() const { return n_; }
    int get(int i, int j) const;
    void set(int i, int j, int s);

  private:
    int n_;
    std::vector<std::int8_t> s_;
};

/// v_j = (x)_{i<j} diag(1, s_ij) (x) X (x) I, so v_i v_j = s_ij v_j v_i.
std::vector<CMatrix> speicher_generators(int n, const SignMatrix &signs);

/// Generator labels 1..n.
using CliffordWord = std::vector<int>;

/// Per unordered generator pair {a,b}: parity of the number of swaps needed
/// to sort the word. `vanishes` is set when some generator has odd
/// multiplicity, in which case the trace is 0.
struct WordReduction {
    bool vanishes = false;
    std::vector<std::pair<int, int>> odd_pairs; // a < b
};
WordReduction reduce_word(std::span<const int> word);

/// 2^{-n} tr(v_{k_1} ... v_{k_m}) in {0, +-1}, evaluated symbolically.
int word_trace(std::span<const int> word, const SignMatrix &signs);

/// Expectation of word_trace over i.i.d. signs with mean q.
double word_sign_expectation(std::span<const int> word, double q);

/// x_1 ... x_m as symbol indices of `kernel`, scaled by T. With `colours`
/// empty every site pair uses sign mean q; otherwise colours[l] is the sign
/// mean attached to letter l.
struct CltInstance {
    quasifree::TwoPointKernel kernel;
    std::vector<int> word;
    double T = 1.0;
    double q = 0.0;
    std::vector<double> colours;

    int size() const { return static_cast<int>(word.size()); }
    bool mixed() const { return !colours.empty(); }
    void validate() const;
};

/// E tau_n (x) psi^{(x)n} (u_{n,T}(x_1) ... u_{n,T}(x_m)), exactly.
Complex finite_n_moment_exact(const CltInstance &inst, std::uint64_t n);

struct McEstimate {
    Complex mean;
    double std_error = 0; // of the mean, from the sample covariance trace
    int samples = 0;
};

/// Monte Carlo over the random signs. Sample i uses the stream
/// derive_seed(seed, i), so the result does not depend on `jobs`.
McEstimate finite_n_moment_mc(const CltInstance &inst, int n, int samples,
                              std::uint64_t seed, int jobs = 1);

/// Pair-partition limit: T^{m/2} sum_sigma beta(sigma) psi_sigma with
/// beta = q^{crossings}, or t_mixed for coloured instances.
Complex limit_moment(const CltInstance &inst);

/// Symbols X (index 0) and Y (index 1) on C^2 with weight diag(1-mu, mu):
/// psi(XX) = psi(YY) = 1, psi(XY) = i(2mu-1), psi(YX) = -i(2mu-1).
quasifree::TwoPointKernel ccr_kernel(double mu);

/// phi_1(X^r Y^s) in the q = 1 limit; `same_index` false drops the X-Y pairing.
Complex ccr_moment(double mu, int r, int s, bool same_index);

struct CcrSeries {
    Complex series;
    Complex closed_form;
    double error = 0;             // |series - closed_form|
    double growth_tail_bound = 0; // tail bound from |phi(w)| <= m^{m/2}
    double pair_tail_bound = 0;   // tail bound from |phi(w)| <= (m-1)!!
};

/// sum_{r,s <= order} z^r w^s / (r! s!) phi_1(X^r Y^s), next to
/// exp(i z w (2mu-1) delta) exp((z^2 + w^2)/2).
CcrSeries ccr_charfn_series(double mu, Complex z, Complex w, bool same_index, int order);

struct CcrCommutator {
    Complex from_moments; // phi_1(XY) - phi_1(YX)
    Complex from_kernel;  // psi(XY) - psi(YX) on the 2x2 realization
    Complex expected;     // 2i(2mu - 1)
    double residual = 0;
};
CcrCommutator ccr_commutator_check(double mu);

} // namespace ncq::climit
