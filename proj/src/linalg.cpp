#include "ncq/linalg.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "ncq/errors.hpp"

namespace ncq::linalg {

namespace {
std::atomic<std::size_t> g_dimension_cap{std::size_t{1} << 14};

// Jacobi is the most accurate Eigen SVD; above this size the
// divide-and-conquer variant is markedly faster.
constexpr Eigen::Index kJacobiLimit = 48;
} // namespace

std::size_t dimension_cap() { return g_dimension_cap.load(); }

void set_dimension_cap(std::size_t cap) {
    if (cap == 0)
        throw DomainError("dimension cap must be positive");
    g_dimension_cap.store(cap);
}

void check_dimension(std::size_t rows, std::size_t cols, const char *what) {
    const auto cap = dimension_cap();
    if (rows > cap || cols > cap)
        throw CapError(std::string(what) + ": dimension " +
                       std::to_string(std::max(rows, cols)) +
                       " exceeds cap " + std::to_string(cap));
}

double SingularSpectrum::nuclear() const {
    return std::accumulate(values.begin(), values.end(), 0.0);
}

double SingularSpectrum::largest() const {
    return values.empty() ? 0.0 : values.front();
}

double SingularSpectrum::frobenius_squared() const {
    double s = 0;
    for (double v : values)
        s += v * v;
    return s;
}

CMatrix kron(const CMatrix &a, const CMatrix &b) {
    // Guard against overflow of the product before allocating.
    const auto rows = static_cast<std::size_t>(a.rows());
    const auto cols = static_cast<std::size_t>(a.cols());
    const auto cap = dimension_cap();
    if ((b.rows() > 0 && rows > cap / static_cast<std::size_t>(b.rows())) ||
        (b.cols() > 0 && cols > cap / static_cast<std::size_t>(b.cols())))
        throw CapError("kron: result dimension exceeds cap " +
                       std::to_string(cap));
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) =
                a(i, j) * b;
    return out;
}

CMatrix kron_all(std::span<const CMatrix> factors) {
    if (factors.empty())
        return CMatrix::Identity(1, 1);
    CMatrix out = factors.front();
    for (std::size_t i = 1; i < factors.size(); ++i)
        out = kron(out, factors[i]);
    return out;
}

SingularSpectrum svd_values(const CMatrix &a) {
    SingularSpectrum spec;
    if (a.size() == 0)
        return spec;
    if (!all_finite(a))
        throw NumericError("svd_values: non-finite input");
    RVector s;
    if (std::min(a.rows(), a.cols()) <= kJacobiLimit) {
        Eigen::JacobiSVD<CMatrix> svd(a);
        if (svd.info() != Eigen::Success)
            throw NumericError("svd_values: Jacobi SVD did not converge");
        s = svd.singularValues();
    } else {
        Eigen::BDCSVD<CMatrix> svd(a);
        if (svd.info() != Eigen::Success)
            throw NumericError("svd_values: BDC SVD did not converge");
        s = svd.singularValues();
    }
    spec.values.assign(s.data(), s.data() + s.size());
    std::sort(spec.values.begin(), spec.values.end(), std::greater<>());
    for (double v : spec.values)
        if (!std::isfinite(v))
            throw NumericError("svd_values: non-finite singular value");
    return spec;
}

double nuclear_norm(const CMatrix &a) { return svd_values(a).nuclear(); }

double operator_norm(const CMatrix &a) { return svd_values(a).largest(); }

double expm_magnitude_cap() { return 700.0; }

CMatrix expm(const CMatrix &a) {
    if (a.rows() != a.cols())
        throw DomainError("expm: matrix must be square");
    if (!all_finite(a))
        throw NumericError("expm: non-finite input");
    const double one_norm = a.cwiseAbs().colwise().sum().maxCoeff();
    if (one_norm > expm_magnitude_cap())
        throw NumericError("expm: input norm " + std::to_string(one_norm) +
                           " exceeds magnitude cap");
    CMatrix out = a.exp();
    if (!all_finite(out))
        throw NumericError("expm: overflow");
    return out;
}

HermitianEigen eigh(const CMatrix &a) {
    if (a.rows() != a.cols())
        throw DomainError("eigh: matrix must be square");
    const CMatrix h = 0.5 * (a + a.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
    if (es.info() != Eigen::Success)
        throw NumericError("eigh: eigensolver did not converge");
    return {es.eigenvalues(), es.eigenvectors()};
}

CMatrix psd_sqrt(const CMatrix &a) {
    auto [vals, vecs] = eigh(a);
    RVector r = vals.cwiseMax(0.0).cwiseSqrt();
    return vecs * r.asDiagonal() * vecs.adjoint();
}

CMatrix pd_power(const CMatrix &a, double s) {
    auto [vals, vecs] = eigh(a);
    if (vals.size() > 0 && vals.minCoeff() <= 0)
        throw DomainError("pd_power: matrix is not positive definite");
    RVector r = vals.array().pow(s).matrix();
    return vecs * r.asDiagonal() * vecs.adjoint();
}

CMatrix soft_threshold(const CMatrix &a, double tau) {
    // Work with the Gram matrix of the short side: M = U S V*, so
    // SVT(M) = M V diag(max(s - tau, 0) / s) V*.
    const bool tall = a.rows() >= a.cols();
    const CMatrix gram = tall ? CMatrix(a.adjoint() * a)
                              : CMatrix(a * a.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(gram);
    if (es.info() != Eigen::Success)
        throw NumericError("soft_threshold: eigensolver did not converge");
    const RVector lam = es.eigenvalues().cwiseMax(0.0);
    RVector f(lam.size());
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
        const double s = std::sqrt(lam(i));
        f(i) = s > tau ? (s - tau) / s : 0.0;
    }
    const CMatrix &v = es.eigenvectors();
    const CMatrix proj = v * f.asDiagonal() * v.adjoint();
    return tall ? CMatrix(a * proj) : CMatrix(proj * a);
}

CMatrix block_column(std::span<const CMatrix> blocks) {
    if (blocks.empty())
        return CMatrix(0, 0);
    const auto cols = blocks.front().cols();
    Eigen::Index rows = 0;
    for (const auto &b : blocks) {
        if (b.cols() != cols)
            throw DomainError("block_column: inconsistent column counts");
        rows += b.rows();
    }
    CMatrix out(rows, cols);
    Eigen::Index r = 0;
    for (const auto &b : blocks) {
        out.middleRows(r, b.rows()) = b;
        r += b.rows();
    }
    return out;
}

CMatrix block_row(std::span<const CMatrix> blocks) {
    if (blocks.empty())
        return CMatrix(0, 0);
    const auto rows = blocks.front().rows();
    Eigen::Index cols = 0;
    for (const auto &b : blocks) {
        if (b.rows() != rows)
            throw DomainError("block_row: inconsistent row counts");
        cols += b.cols();
    }
    CMatrix out(rows, cols);
    Eigen::Index c = 0;
    for (const auto &b : blocks) {
        out.middleCols(c, b.cols()) = b;
        c += b.cols();
    }
    return out;
}

CMatrix basis_matrix(Eigen::Index rows, Eigen::Index cols, Eigen::Index i,
                     Eigen::Index j) {
    CMatrix e = CMatrix::Zero(rows, cols);
    e(i, j) = 1.0;
    return e;
}

bool all_finite(const CMatrix &a) {
    for (Eigen::Index k = 0; k < a.size(); ++k) {
        const auto &z = a.data()[k];
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
            return false;
    }
    return true;
}

double max_abs_entry(const CMatrix &a) {
    return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

} // namespace ncq::linalg
