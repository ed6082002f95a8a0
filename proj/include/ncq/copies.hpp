#pragma once

// Independent copies in the tensor-product model: M = M_dM (x) M_dN sits in
// N = M_dM (x) M_dN^{(x)n} through alpha_i (leg i), and E : N -> M_dM is the
// partial trace against the base state on every copy leg. M_dM carries its
// standard trace.

#include <vector>

#include "ncq/khintchine.hpp"
#include "ncq/linalg.hpp"

namespace ncq::khintchine {

inline constexpr int kMaxCopies = 6;

class CopiesModel {
public:
    /// y acts on M_dM (x) M_dN with index a * dN + j; rho is the diagonal of the
    /// faithful base state on M_dN. Throws DomainError on bad shapes or
    /// ||y|| > 1, CapError if n > kMaxCopies or the full dimension exceeds
    /// the cap.
    CopiesModel(int n, Eigen::Index dM, RVector rho, CMatrix y);

    int n() const { return n_; }
    Eigen::Index dM() const { return dM_; }
    Eigen::Index dN() const { return rho_.size(); }
    Eigen::Index full_dim() const { return full_; }
    const RVector &rho() const { return rho_; }
    const CMatrix &y() const { return y_; }
    const CMatrix &a() const { return a_; } // sqrt(1 - y y*)
    const CMatrix &b() const { return b_; } // sqrt(1 - y* y)

    /// alpha_i(z) for z on M_dM (x) M_dN, i in 1..n.
    CMatrix alpha(int i, const CMatrix &z) const;
    /// E on the full algebra and on a single copy M_dM (x) M_dN.
    CMatrix expectation(const CMatrix &f) const;
    CMatrix expectation_base(const CMatrix &z) const;
    /// 1 (x) rho^{(x)n} as a diagonal, and 1 (x) rho for one copy.
    RVector density() const;
    RVector density_base() const;
    /// A_i = alpha_1(a) ... alpha_{i-1}(a), B_i = alpha_{i-1}(b) ... alpha_1(b).
    CMatrix A(int i) const;
    CMatrix B(int i) const;

private:
    int n_;
    Eigen::Index dM_;
    RVector rho_;
    CMatrix y_, a_, b_;
    Eigen::Index full_;
};

/// First n Majorana generators of a Clifford algebra on ceil(n/2) qubits:
/// pairwise anticommuting self-adjoint unitaries.
std::vector<CMatrix> clifford_unitaries(int n);

/// Mean over all sign vectors of (1/dim v) ||sum_i eps_i v_i (x) alpha_i(x) D_n||_1,
/// with v_i the Clifford unitaries. The normalized trace on the Clifford factor
/// makes this the Rademacher average in L_1(N (x) N_tau).
double copies_lhs_exact(const CopiesModel &model, const CMatrix &x);

/// Two-term column/row infimum for the blocks alpha_i(x) D_n (weights 1). The
/// unitaries v_i drop out of this form.
DecompositionResult copies_two_term(const CopiesModel &model, const CMatrix &x,
                                    const split::Options &opt = {});

/// K_{n,1} norm of the L_1 element x (1 (x) rho).
DecompositionResult copies_three_term(const CopiesModel &model, const CMatrix &x,
                                      const split::Options &opt = {});

struct UpdownNorms {
    double rows = 0; // ||sum (A_i Y_i B_i)(A_i Y_i B_i)*||
    double cols = 0; // ||sum (A_i Y_i B_i)*(A_i Y_i B_i)||
};

UpdownNorms updown_certificate(const CopiesModel &model);

struct RechnenReport {
    double identity_error = 0; // max over i of the four factorization residuals
    double one_minus_Ea = 0, one_minus_Eb = 0;
    double power_sum_a = 0, power_sum_b = 0;
    double square_sum_a = 0, square_sum_b = 0;
    double bound_ii = 0, bound_iii = 0, bound_iv = 0;
    bool identities_ok = false;
    bool ii_ok = false, iii_ok = false, iv_ok = false;

    bool ok() const { return identities_ok && ii_ok && iii_ok && iv_ok; }
};

inline constexpr double kRechnenIdentityTol = 1e-12;

/// Requires eps < 1/e and ||E(y*y)||, ||E(y y*)|| <= eps/n; violations throw
/// DomainError before any bound is evaluated.
RechnenReport rechnen_check(const CopiesModel &model, double eps);

} // namespace ncq::khintchine
