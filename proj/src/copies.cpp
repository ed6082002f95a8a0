#include "ncq/copies.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "ncq/errors.hpp"

namespace ncq::khintchine {

namespace {

constexpr double kContractionSlack = 1e-12;

CMatrix identity(Eigen::Index d) { return CMatrix::Identity(d, d); }

} // namespace

CopiesModel::CopiesModel(int n, Eigen::Index dM, RVector rho, CMatrix y)
    : n_(n), dM_(dM), rho_(std::move(rho)), y_(std::move(y)) {
    if (n < 1)
        throw DomainError("copies model needs n >= 1");
    if (n > kMaxCopies)
        throw CapError("copies model: n = " + std::to_string(n) + " exceeds cap " +
                       std::to_string(kMaxCopies));
    const Eigen::Index dN = rho_.size();
    if (dM < 1 || dN < 1)
        throw DomainError("copies model dimensions must be positive");
    for (Eigen::Index j = 0; j < dN; ++j)
        if (!(rho_(j) > 0))
            throw DomainError("copies model state must be faithful");
    if (std::abs(rho_.sum() - 1) > 1e-12)
        throw DomainError("copies model state must have unit trace");
    if (y_.rows() != dM * dN || y_.cols() != dM * dN)
        throw DomainError("copies model: y must be (dM dN) x (dM dN)");
    if (!linalg::all_finite(y_))
        throw DomainError("copies model: y is not finite");
    if (linalg::operator_norm(y_) > 1 + kContractionSlack)
        throw DomainError("copies model: y must be a contraction");
    std::size_t full = static_cast<std::size_t>(dM);
    for (int i = 0; i < n; ++i) {
        full *= static_cast<std::size_t>(dN);
        linalg::check_dimension(full, full, "copies model");
    }
    full_ = static_cast<Eigen::Index>(full);
    const auto d = dM * dN;
    a_ = linalg::psd_sqrt(identity(d) - y_ * y_.adjoint());
    b_ = linalg::psd_sqrt(identity(d) - y_.adjoint() * y_);
}

CMatrix CopiesModel::alpha(int i, const CMatrix &z) const {
    if (i < 1 || i > n_)
        throw DomainError("alpha: leg " + std::to_string(i) + " out of range");
    const Eigen::Index dN = this->dN();
    if (z.rows() != dM_ * dN || z.cols() != dM_ * dN)
        throw DomainError("alpha: argument must act on one copy");
    // full index = a * dN^n + J, leg i is digit (n - i) of J in base dN
    Eigen::Index stride = 1;
    for (int k = i; k < n_; ++k)
        stride *= dN;
    const Eigen::Index legs = full_ / dM_;
    CMatrix out = CMatrix::Zero(full_, full_);
    for (Eigen::Index J = 0; J < legs; ++J) {
        const Eigen::Index j = (J / stride) % dN;
        const Eigen::Index rest = J - j * stride;
        for (Eigen::Index a = 0; a < dM_; ++a)
            for (Eigen::Index b = 0; b < dM_; ++b)
                for (Eigen::Index jp = 0; jp < dN; ++jp) {
                    const Complex v = z(a * dN + j, b * dN + jp);
                    if (v != Complex(0))
                        out(a * legs + J, b * legs + rest + jp * stride) = v;
                }
    }
    return out;
}

RVector CopiesModel::density() const {
    const Eigen::Index dN = this->dN();
    const Eigen::Index legs = full_ / dM_;
    RVector w(legs);
    for (Eigen::Index J = 0; J < legs; ++J) {
        double p = 1;
        Eigen::Index r = J;
        for (int k = 0; k < n_; ++k) {
            p *= rho_(r % dN);
            r /= dN;
        }
        w(J) = p;
    }
    RVector out(full_);
    for (Eigen::Index a = 0; a < dM_; ++a)
        out.segment(a * legs, legs) = w;
    return out;
}

RVector CopiesModel::density_base() const {
    RVector out(dM_ * dN());
    for (Eigen::Index a = 0; a < dM_; ++a)
        out.segment(a * dN(), dN()) = rho_;
    return out;
}

CMatrix CopiesModel::expectation(const CMatrix &f) const {
    if (f.rows() != full_ || f.cols() != full_)
        throw DomainError("expectation: argument must act on the full algebra");
    const Eigen::Index legs = full_ / dM_;
    const RVector w = density().head(legs);
    CMatrix out = CMatrix::Zero(dM_, dM_);
    for (Eigen::Index a = 0; a < dM_; ++a)
        for (Eigen::Index b = 0; b < dM_; ++b)
            for (Eigen::Index J = 0; J < legs; ++J)
                out(a, b) += w(J) * f(a * legs + J, b * legs + J);
    return out;
}

CMatrix CopiesModel::expectation_base(const CMatrix &z) const {
    const Eigen::Index dN = this->dN();
    if (z.rows() != dM_ * dN || z.cols() != dM_ * dN)
        throw DomainError("expectation_base: argument must act on one copy");
    CMatrix out = CMatrix::Zero(dM_, dM_);
    for (Eigen::Index a = 0; a < dM_; ++a)
        for (Eigen::Index b = 0; b < dM_; ++b)
            for (Eigen::Index j = 0; j < dN; ++j)
                out(a, b) += rho_(j) * z(a * dN + j, b * dN + j);
    return out;
}

CMatrix CopiesModel::A(int i) const {
    if (i < 1 || i > n_)
        throw DomainError("A_i: index out of range");
    CMatrix p = identity(full_);
    for (int k = 1; k < i; ++k)
        p = p * alpha(k, a_);
    return p;
}

CMatrix CopiesModel::B(int i) const {
    if (i < 1 || i > n_)
        throw DomainError("B_i: index out of range");
    CMatrix p = identity(full_);
    for (int k = 1; k < i; ++k)
        p = alpha(k, b_) * p;
    return p;
}

std::vector<CMatrix> clifford_unitaries(int n) {
    if (n < 1)
        throw DomainError("clifford_unitaries: n must be positive");
    const int q = (n + 1) / 2;
    CMatrix I = identity(2), X(2, 2), Y(2, 2), Z(2, 2);
    X << 0, 1, 1, 0;
    Y << 0, Complex(0, -1), Complex(0, 1), 0;
    Z << 1, 0, 0, -1;
    std::vector<CMatrix> out;
    for (int k = 0; k < q && static_cast<int>(out.size()) < n; ++k)
        for (const CMatrix *mid : {&X, &Y}) {
            if (static_cast<int>(out.size()) == n)
                break;
            std::vector<CMatrix> f;
            for (int l = 0; l < q; ++l)
                f.push_back(l < k ? Z : (l == k ? *mid : I));
            out.push_back(linalg::kron_all(f));
        }
    return out;
}

double copies_lhs_exact(const CopiesModel &model, const CMatrix &x) {
    const int n = model.n();
    const auto v = clifford_unitaries(n);
    const Eigen::Index dv = v.front().rows();
    linalg::check_dimension(static_cast<std::size_t>(dv * model.full_dim()),
                            static_cast<std::size_t>(dv * model.full_dim()), "copies_lhs_exact");
    const CVector dn = model.density().cast<Complex>();
    const auto D = dn.asDiagonal();
    std::vector<CMatrix> terms;
    for (int i = 1; i <= n; ++i)
        terms.push_back(linalg::kron(v[static_cast<std::size_t>(i - 1)], model.alpha(i, x) * D));
    // eps and -eps give the same norm, so fix eps_1 = +1.
    double total = 0;
    const unsigned count = 1u << (n - 1);
    for (unsigned mask = 0; mask < count; ++mask) {
        CMatrix s = terms[0];
        for (int i = 2; i <= n; ++i) {
            const bool neg = (mask >> (i - 2)) & 1u;
            if (neg)
                s -= terms[static_cast<std::size_t>(i - 1)];
            else
                s += terms[static_cast<std::size_t>(i - 1)];
        }
        total += linalg::nuclear_norm(s);
    }
    return total / count / static_cast<double>(dv);
}

DecompositionResult copies_two_term(const CopiesModel &model, const CMatrix &x,
                                    const split::Options &opt) {
    const CVector dn = model.density().cast<Complex>();
    const auto D = dn.asDiagonal();
    KhintchineInstance inst;
    for (int i = 1; i <= model.n(); ++i) {
        inst.x.push_back(model.alpha(i, x) * D);
        inst.lambda.push_back(1.0);
        inst.nu.push_back(1.0);
    }
    return two_term_infimum(inst, opt);
}

DecompositionResult copies_three_term(const CopiesModel &model, const CMatrix &x,
                                      const split::Options &opt) {
    if (x.rows() != model.dM() * model.dN() || x.cols() != x.rows())
        throw DomainError("copies_three_term: x must act on one copy");
    const CMatrix l1 = x * model.density_base().cast<Complex>().asDiagonal();
    return k_norm_three_term(l1, model.n(), 1.0, model.rho(), model.dM(), opt);
}

UpdownNorms updown_certificate(const CopiesModel &model) {
    const Eigen::Index d = model.full_dim();
    CMatrix rows = CMatrix::Zero(d, d), cols = CMatrix::Zero(d, d);
    for (int i = 1; i <= model.n(); ++i) {
        const CMatrix t = model.A(i) * model.alpha(i, model.y()) * model.B(i);
        rows += t * t.adjoint();
        cols += t.adjoint() * t;
    }
    return {linalg::operator_norm(rows), linalg::operator_norm(cols)};
}

RechnenReport rechnen_check(const CopiesModel &model, double eps) {
    const int n = model.n();
    if (!(eps > 0) || !(eps < std::exp(-1.0)))
        throw DomainError("rechnen_check: need 0 < eps < 1/e");
    const CMatrix &y = model.y();
    const double cap = eps / n;
    const double ey = linalg::operator_norm(model.expectation_base(y.adjoint() * y));
    const double eyy = linalg::operator_norm(model.expectation_base(y * y.adjoint()));
    if (ey > cap * (1 + 1e-12) || eyy > cap * (1 + 1e-12))
        throw DomainError("rechnen_check: hypothesis ||E(y*y)||, ||E(yy*)|| <= eps/n fails (" +
                          std::to_string(ey) + ", " + std::to_string(eyy) + " vs " +
                          std::to_string(cap) + ")");

    const Eigen::Index dM = model.dM(), d = model.full_dim();
    const CMatrix Ea = model.expectation_base(model.a());
    const CMatrix Eb = model.expectation_base(model.b());
    const CMatrix one = identity(dM);
    RechnenReport rep;

    // i) all four orderings, for i = 1..n
    CMatrix up_a = identity(d), down_a = identity(d), up_b = identity(d), down_b = identity(d);
    CMatrix pa = one, pb = one;
    for (int i = 1; i <= n; ++i) {
        const CMatrix ai = model.alpha(i, model.a()), bi = model.alpha(i, model.b());
        up_a = up_a * ai;
        down_a = ai * down_a;
        up_b = up_b * bi;
        down_b = bi * down_b;
        pa = pa * Ea;
        pb = pb * Eb;
        for (const auto &[f, p] : {std::pair{&up_a, &pa}, std::pair{&down_a, &pa},
                                   std::pair{&up_b, &pb}, std::pair{&down_b, &pb}})
            rep.identity_error =
                std::max(rep.identity_error, linalg::max_abs_entry(model.expectation(*f) - *p));
    }
    rep.identities_ok = rep.identity_error <= kRechnenIdentityTol;

    rep.one_minus_Ea = linalg::operator_norm(one - Ea);
    rep.one_minus_Eb = linalg::operator_norm(one - Eb);
    rep.bound_ii = cap;
    rep.ii_ok = rep.one_minus_Ea <= cap * (1 + 1e-12) && rep.one_minus_Eb <= cap * (1 + 1e-12);

    CMatrix sa = CMatrix::Zero(dM, dM), sb = CMatrix::Zero(dM, dM);
    CMatrix qa = one, qb = one; // E(a)^{i-1}
    CMatrix ta = CMatrix::Zero(dM, dM), tb = CMatrix::Zero(dM, dM);
    const CMatrix I = identity(d);
    for (int i = 1; i <= n; ++i) {
        sa += one - qa;
        sb += one - qb;
        qa = qa * Ea;
        qb = qb * Eb;
        const CMatrix ua = I - model.A(i), ub = I - model.B(i);
        ta += model.expectation(ua * ua.adjoint());
        tb += model.expectation(ub.adjoint() * ub);
    }
    const double e = std::numbers::e;
    rep.power_sum_a = linalg::operator_norm(sa);
    rep.power_sum_b = linalg::operator_norm(sb);
    rep.bound_iii = e * eps * n;
    rep.iii_ok = rep.power_sum_a <= rep.bound_iii && rep.power_sum_b <= rep.bound_iii;
    rep.square_sum_a = linalg::operator_norm(ta);
    rep.square_sum_b = linalg::operator_norm(tb);
    rep.bound_iv = 2 * e * eps * n;
    rep.iv_ok = rep.square_sum_a <= rep.bound_iv && rep.square_sum_b <= rep.bound_iv;
    return rep;
}

} // namespace ncq::khintchine
