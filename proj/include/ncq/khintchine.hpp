#pragma once

// Two sides of the quasi-free Khintchine inequality: the L_1 norm of
// sum_k W_k (x) x_k and the weighted two-term square-function infimum, plus
// the three-term K_{n,eps} norm on a tensor model.

#include <vector>

#include "ncq/linalg.hpp"
#include "ncq/quasifree.hpp"
#include "ncq/split_solver.hpp"

namespace ncq::khintchine {

inline constexpr int kMaxLhsModes = 8;

enum class Side { column, row };
enum class Normalization { symmetric, right };

struct KhintchineInstance {
    std::vector<CMatrix> x;
    std::vector<double> lambda, nu;

    int K() const { return static_cast<int>(x.size()); }
    /// Throws unless K >= 1, all x_k share a shape, and weights are
    /// nonnegative with one pair per coefficient.
    void validate() const;
};

struct DecompositionResult {
    std::vector<CMatrix> c, d; // two-term split, c_k + d_k = x_k
    CMatrix x1, x2, x3;        // three-term split
    std::vector<double> term_values;
    double objective = 0;
    double lower_bound = 0;
    double primal_residual = 0;
    double dual_residual = 0;
    int iterations = 0;
    bool converged = false;
};

/// tr((sum w_k c_k* c_k)^{1/2}) (column) or tr((sum w_k c_k c_k*)^{1/2}) (row),
/// via the nuclear norm of the weighted block column / row.
double square_function_norm(const std::vector<CMatrix> &blocks,
                            const std::vector<double> &weights, Side side);

/// inf over c_k + d_k = x_k of the lambda-column plus nu-row square
/// functions. A zero weight forces that side of the split to vanish.
DecompositionResult two_term_infimum(const KhintchineInstance &inst,
                                     const split::Options &opt = {});

/// ||sum_k W_k (x) x_k||_1 with W_k = D^{1/2} a_k D^{1/2} (symmetric) or
/// W_k = a_k D (right).
double lhs_car_norm(const std::vector<CMatrix> &x, const quasifree::QuasiFreeSpec &spec,
                    Normalization norm);

/// (lambda, nu) = (1 - mu, mu) for symmetric, (mu, mu^2/(1-mu)) for right.
KhintchineInstance car_instance(const std::vector<CMatrix> &x,
                                const quasifree::QuasiFreeSpec &spec, Normalization norm);

struct RatioReport {
    double lhs = 0;
    double rhs = 0;
    double ratio = 0;
    double rhs_lower_bound = 0;
    int iterations = 0;
    bool within_budget = false; // ratio in [1/budget, budget]
};

inline constexpr double kRatioBudget = 200.0;

/// Throws NumericError if the solver does not converge.
RatioReport khintchine_ratio(const std::vector<CMatrix> &x,
                             const quasifree::QuasiFreeSpec &spec, Normalization norm,
                             const split::Options &opt = {});

/// n ||x_1||_1 + sqrt(n eps) ||E(x_2* x_2)^{1/2}||_1 + sqrt(n eps) ||E(x_3 x_3*)^{1/2}||_1
/// minimized over x = x_1 + x_2 + x_3, for an L_1 element x of M_{dM} (x) M_{dN}
/// with E = id (x) tr(diag(state) .). Index order is (M index) * dN + (N index).
DecompositionResult k_norm_three_term(const CMatrix &x, int n, double eps,
                                      const RVector &state, Eigen::Index dM,
                                      const split::Options &opt = {});

} // namespace ncq::khintchine
