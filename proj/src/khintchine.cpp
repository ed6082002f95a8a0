#include "ncq/khintchine.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ncq/errors.hpp"

namespace ncq::khintchine {

void KhintchineInstance::validate() const {
    if (x.empty())
        throw DomainError("Khintchine instance needs at least one coefficient");
    if (lambda.size() != x.size() || nu.size() != x.size())
        throw DomainError("need one (lambda, nu) pair per coefficient");
    const auto r = x.front().rows(), c = x.front().cols();
    if (r == 0 || c == 0)
        throw DomainError("coefficients must be nonempty");
    for (std::size_t k = 0; k < x.size(); ++k) {
        if (x[k].rows() != r || x[k].cols() != c)
            throw DomainError("coefficient " + std::to_string(k) + " has a different shape");
        if (!linalg::all_finite(x[k]))
            throw DomainError("coefficient " + std::to_string(k) + " is not finite");
        if (!(lambda[k] >= 0) || !(nu[k] >= 0) || !std::isfinite(lambda[k]) ||
            !std::isfinite(nu[k]))
            throw DomainError("weights must be finite and nonnegative");
    }
}

double square_function_norm(const std::vector<CMatrix> &blocks,
                            const std::vector<double> &weights, Side side) {
    if (blocks.size() != weights.size())
        throw DomainError("square_function_norm: one weight per block");
    if (blocks.empty())
        return 0.0;
    std::vector<CMatrix> scaled;
    for (std::size_t k = 0; k < blocks.size(); ++k) {
        if (weights[k] < 0)
            throw DomainError("square_function_norm: negative weight");
        scaled.push_back(std::sqrt(weights[k]) * blocks[k]);
    }
    return linalg::nuclear_norm(side == Side::column ? linalg::block_column(scaled)
                                                     : linalg::block_row(scaled));
}

namespace {

DecompositionResult from_split(const split::Result &r) {
    DecompositionResult out;
    out.term_values = r.norms;
    out.objective = r.objective;
    out.lower_bound = r.lower_bound;
    out.primal_residual = r.primal_residual;
    out.dual_residual = r.dual_residual;
    out.iterations = r.iterations;
    out.converged = r.converged;
    return out;
}

} // namespace

DecompositionResult two_term_infimum(const KhintchineInstance &inst, const split::Options &opt) {
    inst.validate();
    const auto K = static_cast<Eigen::Index>(inst.K());
    const auto R = inst.x.front().rows(), C = inst.x.front().cols();
    const Eigen::Index per = R * C;
    split::Problem p;
    p.target.resize(K * per);
    split::Term col{K * R, C, {}, {}, {}}, row{R, K * C, {}, {}, {}};
    for (Eigen::Index k = 0; k < K; ++k) {
        const double sl = std::sqrt(inst.lambda[static_cast<std::size_t>(k)]);
        const double sn = std::sqrt(inst.nu[static_cast<std::size_t>(k)]);
        for (Eigen::Index j = 0; j < C; ++j)
            for (Eigen::Index i = 0; i < R; ++i) {
                const Eigen::Index e = k * per + j * R + i;
                p.target(e) = inst.x[static_cast<std::size_t>(k)](i, j);
                col.row.push_back(k * R + i);
                col.col.push_back(j);
                col.weight.push_back(sl);
                row.row.push_back(i);
                row.col.push_back(k * C + j);
                row.weight.push_back(sn);
            }
    }
    p.terms = {std::move(col), std::move(row)};
    const auto r = split::solve(p, opt);
    auto out = from_split(r);
    for (Eigen::Index k = 0; k < K; ++k) {
        CMatrix c(R, C), d(R, C);
        for (Eigen::Index j = 0; j < C; ++j)
            for (Eigen::Index i = 0; i < R; ++i) {
                const Eigen::Index e = k * per + j * R + i;
                c(i, j) = r.parts[0](e);
                d(i, j) = r.parts[1](e);
            }
        out.c.push_back(c);
        out.d.push_back(d);
    }
    return out;
}

double lhs_car_norm(const std::vector<CMatrix> &x, const quasifree::QuasiFreeSpec &spec,
                    Normalization norm) {
    spec.validate();
    const int K = spec.modes();
    if (static_cast<int>(x.size()) != K)
        throw DomainError("lhs_car_norm: need one coefficient per mode");
    if (K > kMaxLhsModes)
        throw CapError("lhs_car_norm: K = " + std::to_string(K) + " exceeds cap " +
                       std::to_string(kMaxLhsModes));
    const auto R = x.front().rows(), C = x.front().cols();
    const std::size_t dim = std::size_t{1} << K;
    linalg::check_dimension(dim * static_cast<std::size_t>(R), dim * static_cast<std::size_t>(C),
                            "lhs_car_norm");
    const RVector d = quasifree::quasifree_density_diagonal(spec);
    const RVector dh = d.cwiseSqrt();
    CMatrix sum = CMatrix::Zero(static_cast<Eigen::Index>(dim) * R, static_cast<Eigen::Index>(dim) * C);
    for (int k = 1; k <= K; ++k) {
        const auto &xk = x[static_cast<std::size_t>(k - 1)];
        if (xk.rows() != R || xk.cols() != C)
            throw DomainError("lhs_car_norm: coefficient shapes differ");
        const CMatrix a = quasifree::car_generator(k, K);
        CMatrix w;
        if (norm == Normalization::symmetric)
            w = dh.cast<Complex>().asDiagonal() * a * dh.cast<Complex>().asDiagonal();
        else
            w = a * d.cast<Complex>().asDiagonal();
        sum += linalg::kron(w, xk);
    }
    return linalg::nuclear_norm(sum);
}

KhintchineInstance car_instance(const std::vector<CMatrix> &x,
                                const quasifree::QuasiFreeSpec &spec, Normalization norm) {
    spec.validate();
    if (static_cast<int>(x.size()) != spec.modes())
        throw DomainError("car_instance: need one coefficient per mode");
    KhintchineInstance inst{x, {}, {}};
    for (double mu : spec.mu) {
        if (norm == Normalization::symmetric) {
            inst.lambda.push_back(1 - mu);
            inst.nu.push_back(mu);
        } else {
            inst.lambda.push_back(mu);
            inst.nu.push_back(mu * mu / (1 - mu));
        }
    }
    return inst;
}

RatioReport khintchine_ratio(const std::vector<CMatrix> &x,
                             const quasifree::QuasiFreeSpec &spec, Normalization norm,
                             const split::Options &opt) {
    RatioReport rep;
    rep.lhs = lhs_car_norm(x, spec, norm);
    const auto dec = two_term_infimum(car_instance(x, spec, norm), opt);
    if (!dec.converged)
        throw NumericError("two-term solver did not converge after " +
                           std::to_string(dec.iterations) + " iterations (primal " +
                           std::to_string(dec.primal_residual) + ", dual " +
                           std::to_string(dec.dual_residual) + ")");
    rep.rhs = dec.objective;
    rep.rhs_lower_bound = dec.lower_bound;
    rep.iterations = dec.iterations;
    if (rep.rhs == 0)
        rep.ratio = rep.lhs == 0 ? 1.0 : INFINITY;
    else
        rep.ratio = rep.lhs / rep.rhs;
    rep.within_budget = rep.ratio >= 1.0 / kRatioBudget && rep.ratio <= kRatioBudget;
    return rep;
}

DecompositionResult k_norm_three_term(const CMatrix &x, int n, double eps,
                                      const RVector &state, Eigen::Index dM,
                                      const split::Options &opt) {
    if (n < 1)
        throw DomainError("k_norm_three_term: n must be positive");
    if (!(eps > 0))
        throw DomainError("k_norm_three_term: eps must be positive");
    const Eigen::Index dN = state.size();
    if (dN < 1 || dM < 1 || x.rows() != dM * dN || x.cols() != dM * dN)
        throw DomainError("k_norm_three_term: x must be (dM dN) x (dM dN)");
    for (Eigen::Index i = 0; i < dN; ++i)
        if (!(state(i) > 0))
            throw DomainError("k_norm_three_term: state must be faithful");
    const Eigen::Index d = dM * dN;
    const double s = std::sqrt(n * eps);
    split::Problem p;
    p.target.resize(d * d);
    split::Term t1{d, d, {}, {}, {}};
    split::Term col{dN * dN * dM, dM, {}, {}, {}};
    split::Term row{dM, dN * dN * dM, {}, {}, {}};
    for (Eigen::Index c = 0; c < d; ++c)
        for (Eigen::Index r = 0; r < d; ++r) {
            const Eigen::Index e = c * d + r;
            p.target(e) = x(r, c);
            t1.row.push_back(r);
            t1.col.push_back(c);
            t1.weight.push_back(static_cast<double>(n));
            const Eigen::Index a = r / dN, i = r % dN, b = c / dN, j = c % dN;
            const Eigen::Index blk = i * dN + j;
            col.row.push_back(blk * dM + a);
            col.col.push_back(b);
            col.weight.push_back(s / std::sqrt(state(j)));
            row.row.push_back(a);
            row.col.push_back(blk * dM + b);
            row.weight.push_back(s / std::sqrt(state(i)));
        }
    p.terms = {std::move(t1), std::move(col), std::move(row)};
    const auto r = split::solve(p, opt);
    auto out = from_split(r);
    auto unpack = [&](const CVector &v) {
        CMatrix m(d, d);
        for (Eigen::Index c = 0; c < d; ++c)
            for (Eigen::Index rr = 0; rr < d; ++rr)
                m(rr, c) = v(c * d + rr);
        return m;
    };
    out.x1 = unpack(r.parts[0]);
    out.x2 = unpack(r.parts[1]);
    out.x3 = unpack(r.parts[2]);
    return out;
}

} // namespace ncq::khintchine
