#include "ncq/split_solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ncq/errors.hpp"

namespace ncq::split {

void Problem::validate() const {
    const auto n = target.size();
    if (terms.empty())
        throw DomainError("split problem needs at least one term");
    if (!linalg::all_finite(CMatrix(target)))
        throw DomainError("split target has non-finite entries");
    for (std::size_t t = 0; t < terms.size(); ++t) {
        const auto &term = terms[t];
        if (static_cast<Eigen::Index>(term.row.size()) != n ||
            static_cast<Eigen::Index>(term.col.size()) != n ||
            static_cast<Eigen::Index>(term.weight.size()) != n)
            throw DomainError("split term " + std::to_string(t) + " has wrong length");
        std::vector<char> used(static_cast<std::size_t>(term.rows * term.cols), 0);
        for (Eigen::Index e = 0; e < n; ++e) {
            const auto w = term.weight[static_cast<std::size_t>(e)];
            if (!(w >= 0) || !std::isfinite(w))
                throw DomainError("split weights must be finite and nonnegative");
            if (w == 0)
                continue;
            const auto r = term.row[static_cast<std::size_t>(e)];
            const auto c = term.col[static_cast<std::size_t>(e)];
            if (r < 0 || c < 0 || r >= term.rows || c >= term.cols)
                throw DomainError("split term position out of range");
            if (used[static_cast<std::size_t>(r + c * term.rows)]++)
                throw DomainError("split term " + std::to_string(t) + " is not injective");
        }
    }
    for (Eigen::Index e = 0; e < n; ++e) {
        bool any = false;
        for (const auto &term : terms)
            any = any || term.weight[static_cast<std::size_t>(e)] > 0;
        if (!any && target(e) != Complex(0))
            throw DomainError("split problem infeasible: entry " + std::to_string(e) +
                              " is pinned to zero in every term");
    }
}

CMatrix apply(const Term &t, const CVector &v) {
    CMatrix out = CMatrix::Zero(t.rows, t.cols);
    for (Eigen::Index e = 0; e < v.size(); ++e) {
        const double w = t.weight[static_cast<std::size_t>(e)];
        if (w > 0)
            out(t.row[static_cast<std::size_t>(e)], t.col[static_cast<std::size_t>(e)]) = w * v(e);
    }
    return out;
}

namespace {

// ||L* M||_2^2 restricted to active entries.
double adjoint_norm2(const Term &t, const CMatrix &m) {
    double s = 0;
    for (std::size_t e = 0; e < t.weight.size(); ++e) {
        const double w = t.weight[e];
        if (w > 0)
            s += w * w * std::norm(m(t.row[e], t.col[e]));
    }
    return s;
}

} // namespace

Result solve(const Problem &p, const Options &opt) {
    p.validate();
    const auto n = p.target.size();
    const std::size_t T = p.terms.size();
    Result res;
    res.parts.assign(T, CVector::Zero(n));
    res.norms.assign(T, 0.0);

    const double scale = p.target.norm();
    if (scale == 0) {
        res.converged = true;
        return res;
    }
    const CVector X = p.target / scale;

    std::vector<double> inv_sum(static_cast<std::size_t>(n), 0.0);
    for (const auto &term : p.terms)
        for (Eigen::Index e = 0; e < n; ++e) {
            const double w = term.weight[static_cast<std::size_t>(e)];
            if (w > 0)
                inv_sum[static_cast<std::size_t>(e)] += 1.0 / (w * w);
        }

    std::vector<CMatrix> Z, U, P, Zprev;
    for (const auto &term : p.terms) {
        Z.push_back(CMatrix::Zero(term.rows, term.cols));
        U.push_back(CMatrix::Zero(term.rows, term.cols));
    }
    P = Z;
    std::vector<CVector> &x = res.parts;
    double rho = opt.rho;

    for (int it = 1; it <= opt.max_iterations; ++it) {
        // x-update: per entry, least squares on the affine constraint.
        for (Eigen::Index e = 0; e < n; ++e) {
            const auto ue = static_cast<std::size_t>(e);
            if (inv_sum[ue] == 0)
                continue;
            Complex ysum = 0;
            for (std::size_t t = 0; t < T; ++t) {
                const auto &term = p.terms[t];
                const double w = term.weight[ue];
                if (w == 0)
                    continue;
                const auto r = term.row[ue], c = term.col[ue];
                const Complex y = (Z[t](r, c) - U[t](r, c)) / w;
                x[t](e) = y;
                ysum += y;
            }
            const Complex lambda = (X(e) - ysum) / inv_sum[ue];
            for (std::size_t t = 0; t < T; ++t) {
                const double w = p.terms[t].weight[ue];
                if (w > 0)
                    x[t](e) += lambda / (w * w);
            }
        }
        Zprev = Z;
        double r2 = 0, s2 = 0;
        for (std::size_t t = 0; t < T; ++t) {
            P[t] = split::apply(p.terms[t], x[t]);
            Z[t] = linalg::soft_threshold(P[t] + U[t], 1.0 / rho);
            U[t] += P[t] - Z[t];
            r2 += (P[t] - Z[t]).squaredNorm();
            s2 += adjoint_norm2(p.terms[t], Z[t] - Zprev[t]);
        }
        res.primal_residual = std::sqrt(r2);
        res.dual_residual = rho * std::sqrt(s2);
        res.iterations = it;
        if (res.primal_residual < opt.tolerance && res.dual_residual < opt.tolerance) {
            res.converged = true;
            break;
        }
        if (it % 10 == 0) {
            if (res.primal_residual > opt.adapt_ratio * res.dual_residual) {
                rho *= 2;
                for (auto &u : U)
                    u /= 2;
            } else if (res.dual_residual > opt.adapt_ratio * res.primal_residual) {
                rho /= 2;
                for (auto &u : U)
                    u *= 2;
            }
        }
    }

    // Dual certificate: Lambda(e) averages rho w_t U_t over active terms;
    // W_t = Lambda / w_t satisfies L_t* W_t = Lambda, so
    // Re<Lambda, X> / max_t ||W_t|| bounds the optimum from below.
    CVector lambda = CVector::Zero(n);
    for (Eigen::Index e = 0; e < n; ++e) {
        const auto ue = static_cast<std::size_t>(e);
        int active = 0;
        for (std::size_t t = 0; t < T; ++t) {
            const auto &term = p.terms[t];
            const double w = term.weight[ue];
            if (w > 0) {
                lambda(e) += rho * w * U[t](term.row[ue], term.col[ue]);
                ++active;
            }
        }
        if (active)
            lambda(e) /= static_cast<double>(active);
    }
    double wmax = 0;
    for (const auto &term : p.terms) {
        CMatrix W = CMatrix::Zero(term.rows, term.cols);
        for (Eigen::Index e = 0; e < n; ++e) {
            const double w = term.weight[static_cast<std::size_t>(e)];
            if (w > 0)
                W(term.row[static_cast<std::size_t>(e)], term.col[static_cast<std::size_t>(e)]) = lambda(e) / w;
        }
        wmax = std::max(wmax, linalg::operator_norm(W));
    }
    const double pairing = lambda.dot(X).real();
    res.lower_bound = wmax > 0 ? std::max(0.0, pairing / wmax) * scale : 0.0;

    res.objective = 0;
    for (std::size_t t = 0; t < T; ++t) {
        x[t] *= scale;
        res.norms[t] = linalg::nuclear_norm(split::apply(p.terms[t], x[t]));
        res.objective += res.norms[t];
    }
    res.primal_residual *= scale;
    res.dual_residual *= scale;
    return res;
}

} // namespace ncq::split
