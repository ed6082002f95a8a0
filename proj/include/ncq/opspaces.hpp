#pragma once

// Operator-space norms at a fixed matrix level: OH, the quotients Q(lambda, nu)
// of R + C, the R_p weight sequences and the truncation budget for R_p^n.

#include <vector>

#include "ncq/khintchine.hpp"
#include "ncq/linalg.hpp"
#include "ncq/quasifree.hpp"

namespace ncq::opspaces {

struct OhInstance {
    std::vector<CMatrix> x;
};

/// ||sum_k x_k (x) conj(x_k)||^{1/2}, conj entrywise in the standard basis.
double oh_norm(const OhInstance &inst);

/// Norm of sum f_k (x) x_k in Q(lambda, nu) (x)^ L_1.
khintchine::DecompositionResult quotient_norm(const khintchine::KhintchineInstance &inst,
                                              const split::Options &opt = {});

/// ||sum_k sqrt(lambda_k + nu_k) D^{1/2} a_k D^{1/2} (x) x_k||_1 with
/// mu_k = nu_k / (lambda_k + nu_k): the CAR model of Q(lambda, nu).
double quotient_car_norm(const khintchine::KhintchineInstance &inst);

struct RpSpec {
    double p = 2;
    int j_min = -4, j_max = 4;

    double conjugate() const { return p / (p - 1); }
    /// Throws DomainError unless p > 1, p finite and j_min <= j_max.
    void validate() const;
};

/// sigma_j = |j|^{-p'} (j >= 1), 1/2 (j = 0), 1 - |j|^{-p} (j <= -1).
double rp_sigma(double p, int j);

struct RpWeight {
    int j = 0;
    double sigma = 0;
    double column = 0;      // 1 - sigma_j
    double row = 0;         // sigma_j
    double coefficient = 0; // (1+|j|)^{-p/2} for j < 0, (1+|j|)^{-p'/2} for j >= 0
    double exact_ratio = 0; // [(1-s)/s]^{1/2} for j < 0, [s/(1-s)]^{1/2} for j >= 0; may be inf
};

std::vector<RpWeight> rp_weights(const RpSpec &spec);

/// Two-term R_p norm of sum g_k (x) x_k over the finite j window: x_k is split
/// separately for every j with weights (1 - sigma_j, sigma_j).
khintchine::DecompositionResult rp_norm(const std::vector<CMatrix> &x, const RpSpec &spec,
                                        const split::Options &opt = {});

struct TruncationBudget {
    double c_p = 0;          // 2 max(p, p')
    int j_cap = 0;           // ceil(c_p log n / log lambda)
    long index_size = 0;     // n (2 j_cap + 1), the realized index set
    double size_bound = 0;   // 2 c_p n log n / log lambda
    double log2_budget = 0;  // eps n log2 n
    bool bound_ok = false;   // 2^{size_bound} <= n^{eps n}
    bool index_ok = false;   // 2^{index_size} <= n^{eps n}
    double min_log_lambda = 0; // smallest log lambda giving bound_ok
};

/// Requires p > 1, n >= 2, lambda > 1, eps > 0.
TruncationBudget truncation_range(double p, int n, double lambda, double eps);

struct FourTermResult {
    double lhs = 0;               // ||sum b_ij a_i D_mu (x) a_j D_nu||_1
    khintchine::DecompositionResult split; // x1..x3 unused; term_values has four entries
};

/// Both sides of the two-state tensor comparison for scalar coefficients b
/// (rows indexed by the mu modes, columns by the nu modes). The four terms are
/// the weighted l2 norm, two weighted S_1 norms and the second weighted l2 norm.
FourTermResult four_term_tensor(const CMatrix &b, const std::vector<double> &mu,
                                const std::vector<double> &nu, const split::Options &opt = {});

} // namespace ncq::opspaces
