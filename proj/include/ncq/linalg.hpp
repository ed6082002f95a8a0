#pragma once

// Dense complex matrix kernel shared by every other module.
//
// Matrices are plain Eigen values: every routine takes const references and
// returns a fresh result, so all functions here are reentrant.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace ncq {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

namespace linalg {

/// Largest admissible row or column count of any matrix built by this
/// library (Kronecker products, realized tensor models).
std::size_t dimension_cap();
void set_dimension_cap(std::size_t cap);

/// Throws CapError if a rows x cols result would exceed the cap.
void check_dimension(std::size_t rows, std::size_t cols, const char *what);

/// Singular values in nonincreasing order.
struct SingularSpectrum {
    std::vector<double> values;

    double nuclear() const;
    double largest() const;
    double frobenius_squared() const;
};

CMatrix kron(const CMatrix &a, const CMatrix &b);
/// Left-to-right Kronecker product of a list of factors.
CMatrix kron_all(std::span<const CMatrix> factors);

SingularSpectrum svd_values(const CMatrix &a);

double nuclear_norm(const CMatrix &a);
double operator_norm(const CMatrix &a);

/// Matrix exponential (scaling and squaring). Inputs with
/// ‖a‖₁ above `expm_magnitude_cap()` are rejected before they overflow.
CMatrix expm(const CMatrix &a);
double expm_magnitude_cap();

struct HermitianEigen {
    RVector values;  // ascending
    CMatrix vectors; // columns
};
HermitianEigen eigh(const CMatrix &a);

/// Square root of a positive semidefinite matrix; tiny negative
/// eigenvalues from roundoff are clipped to zero.
CMatrix psd_sqrt(const CMatrix &a);

/// Arbitrary real power of a positive definite matrix.
CMatrix pd_power(const CMatrix &a, double s);

/// Singular-value soft thresholding: U max(S - tau, 0) V*.
CMatrix soft_threshold(const CMatrix &a, double tau);

/// Stack blocks vertically / horizontally.
CMatrix block_column(std::span<const CMatrix> blocks);
CMatrix block_row(std::span<const CMatrix> blocks);

CMatrix basis_matrix(Eigen::Index rows, Eigen::Index cols, Eigen::Index i,
                     Eigen::Index j);

bool all_finite(const CMatrix &a);
double max_abs_entry(const CMatrix &a);

} // namespace linalg
} // namespace ncq
