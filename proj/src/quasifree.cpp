#include "ncq/quasifree.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/SparseCore>

#include "ncq/errors.hpp"

namespace ncq::quasifree {

namespace {

using SparseC = Eigen::SparseMatrix<Complex>;

void check_modes(int K) {
    if (K < 1)
        throw DomainError("CAR mode count must be positive");
    if (K > kMaxCarModes)
        throw CapError("CAR mode count " + std::to_string(K) + " exceeds cap " +
                       std::to_string(kMaxCarModes));
    const std::size_t dim = std::size_t{1} << K;
    linalg::check_dimension(dim, dim, "CAR realization");
}

// a_k as a sparse matrix: row r has a single entry at column r | bit, where
// leg k is the bit of weight 2^(K-k) (leg 1 is the most significant).
SparseC car_sparse(int k, int K) {
    const int dim = 1 << K;
    const int bit = 1 << (K - k);
    SparseC a(dim, dim);
    std::vector<Eigen::Triplet<Complex>> trip;
    trip.reserve(static_cast<std::size_t>(dim / 2));
    for (int r = 0; r < dim; ++r) {
        if (r & bit)
            continue;
        // Z on legs 1..k-1 gives (-1)^{number of set bits above leg k}.
        const int above = r >> (K - k + 1);
        const double sign = (std::popcount(static_cast<unsigned>(above)) % 2) ? -1.0 : 1.0;
        trip.emplace_back(r, r | bit, sign);
    }
    a.setFromTriplets(trip.begin(), trip.end());
    return a;
}

double sparse_max_abs(const SparseC &s) {
    double m = 0;
    for (int k = 0; k < s.outerSize(); ++k)
        for (SparseC::InnerIterator it(s, k); it; ++it)
            m = std::max(m, std::abs(it.value()));
    return m;
}

} // namespace

void QuasiFreeSpec::validate() const {
    if (mu.empty())
        throw DomainError("quasi-free spec needs at least one mode");
    for (std::size_t k = 0; k < mu.size(); ++k)
        if (!(mu[k] > 0.0 && mu[k] < 1.0))
            throw DomainError("mu[" + std::to_string(k) + "] = " +
                              std::to_string(mu[k]) + " is outside (0,1)");
}

CMatrix car_generator(int k, int K) {
    check_modes(K);
    if (k < 1 || k > K)
        throw DomainError("car_generator: index out of range");
    return CMatrix(car_sparse(k, K));
}

std::vector<CMatrix> car_generators(int K) {
    std::vector<CMatrix> out;
    for (int k = 1; k <= K; ++k)
        out.push_back(car_generator(k, K));
    return out;
}

double car_relation_residual(int K) {
    check_modes(K);
    const int dim = 1 << K;
    std::vector<SparseC> a, ad;
    for (int k = 1; k <= K; ++k) {
        a.push_back(car_sparse(k, K));
        ad.push_back(SparseC(a.back().adjoint()));
    }
    SparseC id(dim, dim);
    id.setIdentity();
    double res = 0;
    for (int k = 0; k < K; ++k)
        for (int j = 0; j < K; ++j) {
            const auto uk = static_cast<std::size_t>(k);
            const auto uj = static_cast<std::size_t>(j);
            SparseC anti = a[uk] * a[uj] + a[uj] * a[uk];
            res = std::max(res, sparse_max_abs(anti));
            SparseC mixed = a[uk] * ad[uj] + ad[uj] * a[uk];
            if (k == j)
                mixed -= id;
            res = std::max(res, sparse_max_abs(mixed));
        }
    return res;
}

RVector quasifree_density_diagonal(const QuasiFreeSpec &spec) {
    spec.validate();
    const int K = spec.modes();
    check_modes(K);
    const int dim = 1 << K;
    RVector d(dim);
    for (int r = 0; r < dim; ++r) {
        double v = 1;
        for (int k = 1; k <= K; ++k) {
            const bool occupied = (r >> (K - k)) & 1;
            const double mu = spec.mu[static_cast<std::size_t>(k - 1)];
            v *= occupied ? mu : 1.0 - mu;
        }
        d(r) = v;
    }
    return d;
}

CMatrix quasifree_density(const QuasiFreeSpec &spec) {
    return quasifree_density_diagonal(spec).cast<Complex>().asDiagonal();
}

CMatrix modular_conjugate(const QuasiFreeSpec &spec, const CMatrix &x, double s) {
    const RVector d = quasifree_density_diagonal(spec);
    if (x.rows() != d.size() || x.cols() != d.size())
        throw DomainError("modular_conjugate: dimension mismatch");
    const RVector left = d.array().pow(s);
    const RVector right = d.array().pow(-s);
    return left.cast<Complex>().asDiagonal() * x * right.cast<Complex>().asDiagonal();
}

Complex car_dense_trace(const QuasiFreeSpec &spec, std::span<const CarLetter> word) {
    const RVector d = quasifree_density_diagonal(spec);
    const int K = spec.modes();
    const int dim = 1 << K;
    SparseC w(dim, dim);
    w.setIdentity();
    for (const auto &l : word) {
        if (l.k < 1 || l.k > K)
            throw DomainError("car_dense_trace: letter index out of range");
        SparseC a = car_sparse(l.k, K);
        if (l.star)
            a = SparseC(a.adjoint());
        w = SparseC(w * a);
    }
    Complex tr = 0;
    for (int r = 0; r < dim; ++r)
        tr += d(r) * w.coeff(r, r);
    return tr;
}

std::vector<CarLetter> car_moment_word(std::span<const int> i, std::span<const int> j) {
    std::vector<CarLetter> w;
    for (auto it = i.rbegin(); it != i.rend(); ++it)
        w.push_back({*it, true});
    for (int k : j)
        w.push_back({k, false});
    return w;
}

Complex car_moment_formula(const QuasiFreeSpec &spec, std::span<const int> i,
                           std::span<const int> j) {
    spec.validate();
    auto increasing = [&](std::span<const int> s) {
        for (std::size_t l = 0; l < s.size(); ++l) {
            if (s[l] < 1 || s[l] > spec.modes())
                return false;
            if (l > 0 && s[l] <= s[l - 1])
                return false;
        }
        return true;
    };
    if (!increasing(i) || !increasing(j))
        throw DomainError("car_moment_formula: index lists must be strictly increasing");
    if (i.size() != j.size())
        return 0.0;
    double v = 1;
    for (std::size_t l = 0; l < i.size(); ++l) {
        if (i[l] != j[l])
            return 0.0;
        v *= spec.mu[static_cast<std::size_t>(i[l] - 1)];
    }
    return v;
}

Complex car_determinant(const QuasiFreeSpec &spec, std::span<const CVector> g,
                        std::span<const CVector> h) {
    spec.validate();
    if (g.size() != h.size())
        return 0.0;
    const auto r = static_cast<Eigen::Index>(g.size());
    if (r == 0)
        return 1.0;
    const auto K = static_cast<Eigen::Index>(spec.modes());
    CMatrix gram(r, r);
    for (Eigen::Index a = 0; a < r; ++a)
        for (Eigen::Index b = 0; b < r; ++b) {
            const auto &ga = g[static_cast<std::size_t>(a)];
            const auto &hb = h[static_cast<std::size_t>(b)];
            if (ga.size() != K || hb.size() != K)
                throw DomainError("car_determinant: vector length must equal K");
            Complex s = 0;
            for (Eigen::Index k = 0; k < K; ++k)
                s += std::conj(ga(k)) * hb(k) * spec.mu[static_cast<std::size_t>(k)];
            gram(a, b) = s;
        }
    return gram.determinant();
}

TwoPointKernel::TwoPointKernel(CMatrix table) : table_(std::move(table)) {
    if (table_.rows() != table_.cols())
        throw DomainError("two-point table must be square");
    if (!linalg::all_finite(table_))
        throw DomainError("two-point table has non-finite entries");
}

TwoPointKernel::TwoPointKernel(std::vector<CMatrix> symbols, CMatrix density)
    : symbols_(std::move(symbols)), density_(std::move(density)) {
    if (symbols_.empty())
        throw DomainError("realized kernel needs at least one symbol");
    const auto d = density_.rows();
    if (density_.cols() != d)
        throw DomainError("kernel density must be square");
    for (const auto &s : symbols_)
        if (s.rows() != d || s.cols() != d)
            throw DomainError("kernel symbol dimension mismatch");
    const auto n = static_cast<Eigen::Index>(symbols_.size());
    table_.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            table_(i, j) = (density_ * symbols_[static_cast<std::size_t>(i)] *
                            symbols_[static_cast<std::size_t>(j)])
                               .trace();
}

Complex TwoPointKernel::product(std::span<const int> word) const {
    for (int w : word)
        if (w < 0 || w >= size())
            throw DomainError("kernel word has an unknown symbol");
    if (word.size() == 2)
        return table_(word[0], word[1]);
    if (!realized())
        throw DomainError("kernel has no realization for products of length " +
                          std::to_string(word.size()));
    CMatrix acc = density_;
    for (int w : word)
        acc = acc * symbols_[static_cast<std::size_t>(w)];
    return acc.trace();
}

double TwoPointKernel::length(int i) const {
    if (!realized())
        throw DomainError("kernel length needs a realization");
    const auto &x = symbols_.at(static_cast<std::size_t>(i));
    const double op = linalg::operator_norm(x);
    const double l = std::sqrt(std::abs((density_ * x.adjoint() * x).trace()));
    const double r = std::sqrt(std::abs((density_ * x * x.adjoint()).trace()));
    return std::max({op, l, r});
}

TwoPointKernel TwoPointKernel::scaled(double c) const {
    if (realized())
        return TwoPointKernel(symbols_, CMatrix(c * density_));
    return TwoPointKernel(CMatrix(c * table_));
}

TwoPointKernel car_kernel(const QuasiFreeSpec &spec, bool normalized) {
    spec.validate();
    const int K = spec.modes();
    const Eigen::Index dim = 2 * K;
    std::vector<CMatrix> symbols(static_cast<std::size_t>(2 * K), CMatrix::Zero(dim, dim));
    CMatrix density = CMatrix::Zero(dim, dim);
    const double scale = normalized ? 1.0 / K : 1.0;
    for (int k = 0; k < K; ++k) {
        const Eigen::Index o = 2 * k;
        symbols[static_cast<std::size_t>(k)](o, o + 1) = 1.0;
        symbols[static_cast<std::size_t>(K + k)](o + 1, o) = 1.0;
        const double mu = spec.mu[static_cast<std::size_t>(k)];
        density(o, o) = scale * (1.0 - mu);
        density(o + 1, o + 1) = scale * mu;
    }
    return TwoPointKernel(std::move(symbols), std::move(density));
}

int car_symbol(CarLetter letter, int K) {
    if (letter.k < 1 || letter.k > K)
        throw DomainError("car_symbol: index out of range");
    return letter.star ? K + letter.k - 1 : letter.k - 1;
}

namespace {

void check_word(const TwoPointKernel &kernel, std::span<const int> word) {
    if (static_cast<int>(word.size()) > kMaxWickPoints)
        throw CapError("wick_moment: word longer than " + std::to_string(kMaxWickPoints));
    for (int w : word)
        if (w < 0 || w >= kernel.size())
            throw DomainError("wick_moment: kernel missing symbol " + std::to_string(w));
}

struct WickSearch {
    const CMatrix &table;
    std::span<const int> word;
    double q;
    int m;
    Complex total = 0;

    // `paired` marks used points, `right` marks right endpoints of pairs
    // opened so far. Pairing the smallest free point a with b crosses exactly
    // the earlier pairs whose right endpoint lies strictly between a and b.
    void run(std::uint32_t paired, std::uint32_t right, Complex weight) {
        if (paired == (std::uint32_t{1} << m) - 1) {
            total += weight;
            return;
        }
        const int a = std::countr_one(paired);
        for (int b = a + 1; b < m; ++b) {
            if (paired & (std::uint32_t{1} << b))
                continue;
            const Complex v = table(word[static_cast<std::size_t>(a)],
                                    word[static_cast<std::size_t>(b)]);
            if (v == Complex(0))
                continue;
            const std::uint32_t between = ((std::uint32_t{1} << b) - 1) & ~((std::uint32_t{1} << (a + 1)) - 1);
            const int cross = std::popcount(right & between);
            double qw = 1;
            if (cross > 0) {
                if (q == 0.0)
                    continue;
                qw = std::pow(q, cross);
            }
            run(paired | (std::uint32_t{1} << a) | (std::uint32_t{1} << b),
                right | (std::uint32_t{1} << b), weight * v * qw);
        }
    }
};

} // namespace

Complex wick_moment(const TwoPointKernel &kernel, std::span<const int> word,
                    const BetaFn &beta) {
    check_word(kernel, word);
    const int m = static_cast<int>(word.size());
    if (m % 2 != 0)
        return 0.0;
    Complex total = 0;
    partitions::for_each_pair_partition(m, [&](const partitions::PairPartition &sigma) {
        Complex prod = 1;
        for (auto [a, b] : sigma.blocks()) {
            prod *= kernel.pair(word[static_cast<std::size_t>(a - 1)],
                                word[static_cast<std::size_t>(b - 1)]);
            if (prod == Complex(0))
                return;
        }
        total += beta(sigma) * prod;
    });
    return total;
}

Complex wick_moment(const TwoPointKernel &kernel, std::span<const int> word, double q) {
    check_word(kernel, word);
    const int m = static_cast<int>(word.size());
    if (m % 2 != 0)
        return 0.0;
    if (m == 0)
        return 1.0;
    WickSearch s{kernel.table(), word, q, m};
    s.run(0, 0, 1.0);
    return s.total;
}

GrowthCheck growth_bound_check(const TwoPointKernel &kernel, std::span<const int> word,
                               double q, std::span<const double> lengths) {
    const int m = static_cast<int>(word.size());
    std::vector<double> len;
    if (lengths.empty()) {
        for (int w : word)
            len.push_back(kernel.length(w));
    } else {
        if (lengths.size() != word.size())
            throw DomainError("growth_bound_check: one length per letter required");
        len.assign(lengths.begin(), lengths.end());
    }
    GrowthCheck g;
    g.moment_abs = std::abs(wick_moment(kernel, word, q));
    double bound = std::pow(static_cast<double>(m), 0.5 * m);
    for (double l : len)
        bound *= l;
    g.bound = bound;
    g.margin = bound - g.moment_abs;
    // Relative slack for roundoff in the moment itself.
    g.ok = g.moment_abs <= bound * (1 + 1e-12) + 1e-14;
    return g;
}

std::optional<double> moment_growth_certificate_log(std::span<const double> log_abs_moments) {
    if (log_abs_moments.empty())
        throw DomainError("moment_growth_certificate: empty moment list");
    for (double v : log_abs_moments)
        if (std::isnan(v) || v == std::numeric_limits<double>::infinity())
            throw DomainError("moment_growth_certificate: non-finite moment");
    for (int step = 1; step <= 1000; ++step) {
        const double c = 0.1 * step;
        const double lc = std::log(c);
        bool ok = true;
        for (std::size_t i = 0; i < log_abs_moments.size() && ok; ++i) {
            const double k = static_cast<double>(i + 1);
            const double rhs = (k + 1) * lc + k * std::log(k);
            // Tolerance covers rounding in log evaluation only.
            ok = log_abs_moments[i] <= rhs + 1e-12 * std::max(1.0, std::abs(rhs));
        }
        if (ok)
            return c;
    }
    return std::nullopt;
}

std::optional<double> moment_growth_certificate(std::span<const double> moments) {
    std::vector<double> logs;
    logs.reserve(moments.size());
    for (std::size_t i = 0; i < moments.size(); ++i) {
        const double v = moments[i];
        if (!std::isfinite(v))
            throw DomainError("moment_growth_certificate: non-finite moment");
        if ((i + 1) % 2 == 0 && v < 0)
            throw DomainError("moment_growth_certificate: negative even moment m_" +
                              std::to_string(i + 1));
        logs.push_back(v == 0 ? -std::numeric_limits<double>::infinity()
                              : std::log(std::abs(v)));
    }
    return moment_growth_certificate_log(logs);
}

} // namespace ncq::quasifree
