#include "ncq/opspaces.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ncq/errors.hpp"

namespace ncq::opspaces {

double oh_norm(const OhInstance &inst) {
    if (inst.x.empty())
        return 0.0;
    const auto r = inst.x.front().rows(), c = inst.x.front().cols();
    linalg::check_dimension(static_cast<std::size_t>(r * r), static_cast<std::size_t>(c * c),
                            "oh_norm");
    CMatrix s = CMatrix::Zero(r * r, c * c);
    for (const auto &x : inst.x) {
        if (x.rows() != r || x.cols() != c)
            throw DomainError("oh_norm: coefficients must share a shape");
        s += linalg::kron(x, x.conjugate());
    }
    return std::sqrt(linalg::operator_norm(s));
}

khintchine::DecompositionResult quotient_norm(const khintchine::KhintchineInstance &inst,
                                              const split::Options &opt) {
    return khintchine::two_term_infimum(inst, opt);
}

double quotient_car_norm(const khintchine::KhintchineInstance &inst) {
    inst.validate();
    quasifree::QuasiFreeSpec spec;
    std::vector<CMatrix> scaled;
    for (int k = 0; k < inst.K(); ++k) {
        const auto uk = static_cast<std::size_t>(k);
        const double s = inst.lambda[uk] + inst.nu[uk];
        if (!(s > 0))
            throw DomainError("quotient_car_norm: lambda_k + nu_k must be positive");
        spec.mu.push_back(inst.nu[uk] / s);
        scaled.push_back(std::sqrt(s) * inst.x[uk]);
    }
    return khintchine::lhs_car_norm(scaled, spec, khintchine::Normalization::symmetric);
}

void RpSpec::validate() const {
    if (!(p > 1) || !std::isfinite(p))
        throw DomainError("R_p spec: need 1 < p < infinity, got " + std::to_string(p));
    if (j_min > j_max)
        throw DomainError("R_p spec: empty j range");
}

double rp_sigma(double p, int j) {
    if (!(p > 1) || !std::isfinite(p))
        throw DomainError("rp_sigma: need 1 < p < infinity");
    const double pc = p / (p - 1);
    const double a = std::abs(static_cast<double>(j));
    if (j >= 1)
        return std::pow(a, -pc);
    if (j == 0)
        return 0.5;
    return 1.0 - std::pow(a, -p);
}

std::vector<RpWeight> rp_weights(const RpSpec &spec) {
    spec.validate();
    const double p = spec.p, pc = spec.conjugate();
    std::vector<RpWeight> out;
    for (int j = spec.j_min; j <= spec.j_max; ++j) {
        RpWeight w;
        w.j = j;
        w.sigma = rp_sigma(p, j);
        w.column = 1.0 - w.sigma;
        w.row = w.sigma;
        const double a = 1.0 + std::abs(static_cast<double>(j));
        w.coefficient = j < 0 ? std::pow(a, -p / 2) : std::pow(a, -pc / 2);
        const double num = j < 0 ? w.column : w.sigma;
        const double den = j < 0 ? w.sigma : w.column;
        w.exact_ratio = den == 0 ? std::numeric_limits<double>::infinity() : std::sqrt(num / den);
        out.push_back(w);
    }
    return out;
}

khintchine::DecompositionResult rp_norm(const std::vector<CMatrix> &x, const RpSpec &spec,
                                        const split::Options &opt) {
    const auto weights = rp_weights(spec);
    khintchine::KhintchineInstance inst;
    for (const auto &xk : x)
        for (const auto &w : weights) {
            inst.x.push_back(xk);
            inst.lambda.push_back(w.column);
            inst.nu.push_back(w.row);
        }
    return khintchine::two_term_infimum(inst, opt);
}

TruncationBudget truncation_range(double p, int n, double lambda, double eps) {
    if (!(p > 1) || !std::isfinite(p))
        throw DomainError("truncation_range: need 1 < p < infinity");
    if (n < 2)
        throw DomainError("truncation_range: need n >= 2");
    if (!(lambda > 1) || !std::isfinite(lambda))
        throw DomainError("truncation_range: need lambda > 1");
    if (!(eps > 0))
        throw DomainError("truncation_range: need eps > 0");
    TruncationBudget b;
    const double pc = p / (p - 1);
    const double ln = std::log(static_cast<double>(n)), ll = std::log(lambda);
    b.c_p = 2 * std::max(p, pc);
    b.j_cap = static_cast<int>(std::ceil(b.c_p * ln / ll));
    b.index_size = static_cast<long>(n) * (2L * b.j_cap + 1);
    b.size_bound = 2 * b.c_p * n * ln / ll;
    b.log2_budget = eps * n * ln / std::log(2.0);
    b.bound_ok = b.size_bound <= b.log2_budget;
    b.index_ok = static_cast<double>(b.index_size) <= b.log2_budget;
    b.min_log_lambda = 2 * b.c_p * std::log(2.0) / eps;
    return b;
}

FourTermResult four_term_tensor(const CMatrix &b, const std::vector<double> &mu,
                                const std::vector<double> &nu, const split::Options &opt) {
    const auto I = static_cast<int>(mu.size()), J = static_cast<int>(nu.size());
    if (b.rows() != I || b.cols() != J)
        throw DomainError("four_term_tensor: b must be |mu| x |nu|");
    if (I + J > khintchine::kMaxLhsModes)
        throw CapError("four_term_tensor: total modes " + std::to_string(I + J) +
                       " exceed cap " + std::to_string(khintchine::kMaxLhsModes));
    const quasifree::QuasiFreeSpec smu{mu}, snu{nu};
    smu.validate();
    snu.validate();
    FourTermResult out;

    const CVector dmu = quasifree::quasifree_density_diagonal(smu).cast<Complex>();
    const CVector dnu = quasifree::quasifree_density_diagonal(snu).cast<Complex>();
    const auto dimL = Eigen::Index{1} << (I + J);
    CMatrix lhs = CMatrix::Zero(dimL, dimL);
    for (int i = 1; i <= I; ++i) {
        const CMatrix ai = quasifree::car_generator(i, I) * dmu.asDiagonal();
        for (int j = 1; j <= J; ++j) {
            const Complex bij = b(i - 1, j - 1);
            if (bij == Complex(0))
                continue;
            lhs += bij * linalg::kron(ai, quasifree::car_generator(j, J) * dnu.asDiagonal());
        }
    }
    out.lhs = linalg::nuclear_norm(lhs);

    split::Problem p;
    p.target.resize(I * J);
    split::Term f{I * J, 1, {}, {}, {}}, g{I, J, {}, {}, {}}, h{I, J, {}, {}, {}},
        k{I * J, 1, {}, {}, {}};
    for (int j = 0; j < J; ++j)
        for (int i = 0; i < I; ++i) {
            const Eigen::Index e = j * I + i;
            const double m = mu[static_cast<std::size_t>(i)], v = nu[static_cast<std::size_t>(j)];
            p.target(e) = b(i, j);
            f.row.push_back(e);
            f.col.push_back(0);
            f.weight.push_back(std::sqrt(m * v));
            g.row.push_back(i);
            g.col.push_back(j);
            g.weight.push_back(std::sqrt(m) * v / std::sqrt(1 - v));
            h.row.push_back(i);
            h.col.push_back(j);
            h.weight.push_back(m * std::sqrt(v) / std::sqrt(1 - m));
            k.row.push_back(e);
            k.col.push_back(0);
            k.weight.push_back(m * v / std::sqrt((1 - m) * (1 - v)));
        }
    p.terms = {std::move(f), std::move(g), std::move(h), std::move(k)};
    const auto r = split::solve(p, opt);
    auto &d = out.split;
    d.term_values = r.norms;
    d.objective = r.objective;
    d.lower_bound = r.lower_bound;
    d.primal_residual = r.primal_residual;
    d.dual_residual = r.dual_residual;
    d.iterations = r.iterations;
    d.converged = r.converged;
    return out;
}

} // namespace ncq::opspaces
