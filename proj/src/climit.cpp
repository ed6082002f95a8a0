#include "ncq/climit.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numeric>
#include <string>
#include <thread>

#include "ncq/errors.hpp"
#include "ncq/partitions.hpp"
#include "ncq/random.hpp"

namespace ncq::climit {

using partitions::Partition;

SignMatrix::SignMatrix(int n) : n_(n), s_(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 1) {
    if (n < 1)
        throw DomainError("SignMatrix: site count must be positive");
}

int SignMatrix::get(int i, int j) const {
    if (i < 1 || j < 1 || i > n_ || j > n_)
        throw DomainError("SignMatrix: site out of range");
    return s_[static_cast<std::size_t>((i - 1) * n_ + (j - 1))];
}

void SignMatrix::set(int i, int j, int s) {
    if (i < 1 || j < 1 || i > n_ || j > n_ || i == j)
        throw DomainError("SignMatrix: invalid site pair");
    if (s != 1 && s != -1)
        throw DomainError("SignMatrix: signs must be +-1");
    s_[static_cast<std::size_t>((i - 1) * n_ + (j - 1))] = static_cast<std::int8_t>(s);
    s_[static_cast<std::size_t>((j - 1) * n_ + (i - 1))] = static_cast<std::int8_t>(s);
}

std::vector<CMatrix> speicher_generators(int n, const SignMatrix &signs) {
    if (n < 1 || n != signs.sites())
        throw DomainError("speicher_generators: site count mismatch");
    if (n > kMaxDenseSites)
        throw CapError("speicher_generators: n = " + std::to_string(n) +
                       " exceeds dense cap " + std::to_string(kMaxDenseSites));
    const std::size_t dim = std::size_t{1} << n;
    linalg::check_dimension(dim, dim, "speicher_generators");
    CMatrix x(2, 2);
    x << 0, 1, 1, 0;
    std::vector<CMatrix> out;
    for (int j = 1; j <= n; ++j) {
        std::vector<CMatrix> legs;
        for (int i = 1; i < j; ++i) {
            CMatrix d = CMatrix::Identity(2, 2);
            d(1, 1) = static_cast<double>(signs.get(i, j));
            legs.push_back(d);
        }
        legs.push_back(x);
        for (int i = j + 1; i <= n; ++i)
            legs.push_back(CMatrix::Identity(2, 2));
        out.push_back(linalg::kron_all(legs));
    }
    return out;
}

WordReduction reduce_word(std::span<const int> word) {
    WordReduction r;
    std::map<int, int> count;
    for (int k : word) {
        if (k < 1)
            throw DomainError("reduce_word: generator labels start at 1");
        ++count[k];
    }
    for (auto [k, c] : count)
        if (c % 2) {
            r.vanishes = true;
            return r;
        }
    // Bubble-sorting the word swaps each unordered pair once per inversion;
    // with even multiplicities the parity does not depend on the target order.
    std::map<std::pair<int, int>, int> parity;
    for (std::size_t i = 0; i < word.size(); ++i)
        for (std::size_t j = i + 1; j < word.size(); ++j)
            if (word[i] > word[j])
                parity[{word[j], word[i]}] ^= 1;
    for (auto [p, v] : parity)
        if (v)
            r.odd_pairs.push_back(p);
    return r;
}

int word_trace(std::span<const int> word, const SignMatrix &signs) {
    const auto r = reduce_word(word);
    if (r.vanishes)
        return 0;
    int s = 1;
    for (auto [a, b] : r.odd_pairs)
        s *= signs.get(a, b);
    return s;
}

double word_sign_expectation(std::span<const int> word, double q) {
    const auto r = reduce_word(word);
    if (r.vanishes)
        return 0.0;
    return r.odd_pairs.empty() ? 1.0 : std::pow(q, static_cast<double>(r.odd_pairs.size()));
}

void CltInstance::validate() const {
    if (word.size() > static_cast<std::size_t>(kMaxLimitPoints))
        throw CapError("CLT word longer than " + std::to_string(kMaxLimitPoints));
    for (int w : word)
        if (w < 0 || w >= kernel.size())
            throw DomainError("CLT word uses an unknown symbol");
    if (!(T > 0) || !std::isfinite(T))
        throw DomainError("CLT scale T must be positive");
    if (!(q >= -1.0 && q <= 1.0))
        throw DomainError("sign mean q must lie in [-1,1]");
    if (!colours.empty()) {
        if (colours.size() != word.size())
            throw DomainError("need one colour per letter");
        for (double c : colours)
            if (!(c >= -1.0 && c <= 1.0))
                throw DomainError("colours must lie in [-1,1]");
    }
}

namespace {

bool all_blocks_even(const Partition &p) {
    return std::all_of(p.blocks.begin(), p.blocks.end(),
                       [](const auto &b) { return b.size() % 2 == 0; });
}

Complex block_product(const CltInstance &inst, const Partition &p) {
    Complex v = 1;
    for (const auto &b : p.blocks) {
        std::vector<int> w;
        for (int i : b)
            w.push_back(inst.word[static_cast<std::size_t>(i - 1)]);
        v *= inst.kernel.product(w);
        if (v == Complex(0))
            break;
    }
    return v;
}

double falling(std::uint64_t n, int p) {
    double f = 1;
    for (int i = 0; i < p; ++i) {
        if (n < static_cast<std::uint64_t>(i + 1))
            return 0.0;
        f *= static_cast<double>(n - static_cast<std::uint64_t>(i));
    }
    return f;
}

// E_t (-1)^{sum_l c_l [t > q_l]} for t uniform on [-1,1].
double site_expectation(std::span<const double> q, std::span<const int> c) {
    std::vector<double> cuts{-1.0, 1.0};
    for (double v : q)
        cuts.push_back(std::clamp(v, -1.0, 1.0));
    std::sort(cuts.begin(), cuts.end());
    double e = 0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        const double len = cuts[k + 1] - cuts[k];
        if (len <= 0)
            continue;
        const double mid = 0.5 * (cuts[k] + cuts[k + 1]);
        int par = 0;
        for (std::size_t l = 0; l < q.size(); ++l)
            if (mid > q[l])
                par ^= c[l] & 1;
        e += (par ? -0.5 : 0.5) * len;
    }
    return e;
}

// Complete homogeneous symmetric polynomial of degree `deg` in `vars`.
double complete_homogeneous(std::span<const double> vars, std::uint64_t deg) {
    std::vector<double> h(static_cast<std::size_t>(deg) + 1, 0.0);
    h[0] = 1.0;
    for (double x : vars)
        for (std::size_t j = 1; j < h.size(); ++j)
            h[j] += x * h[j - 1];
    return h.back();
}

// Sign expectation of the coloured model summed over all placements of the
// blocks of `p` on distinct sites 1..n.
//
// Each generator v_j^{(c)} is X on leg j and Z^{b} on every leg i < j with
// b = [t_ij > c]; the trace factorizes over legs. On a leg carrying X's, a Z
// placed before w later X's contributes (-1)^{b w}, and the leftover Z-power
// must be even, which gives the average of two parity expectations.
double coloured_sign_sum(const Partition &p, std::span<const double> colour, std::uint64_t n) {
    const int nb = static_cast<int>(p.blocks.size());
    if (n < static_cast<std::uint64_t>(nb))
        return 0.0;
    const int m = static_cast<int>(colour.size());
    const auto label = p.labels();
    std::vector<int> order(static_cast<std::size_t>(nb));
    std::iota(order.begin(), order.end(), 0);
    std::vector<int> rank(static_cast<std::size_t>(nb));
    double total = 0;
    do {
        for (int r = 0; r < nb; ++r)
            rank[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])] = r;
        double legs = 1;
        for (int r = 0; r < nb && legs != 0; ++r) {
            const int blk = order[static_cast<std::size_t>(r)];
            // w_l: X's of this leg after letter l.
            std::vector<int> after(static_cast<std::size_t>(m), 0);
            int seen = 0;
            for (int l = m - 1; l >= 0; --l) {
                after[static_cast<std::size_t>(l)] = seen;
                if (label[static_cast<std::size_t>(l)] == blk)
                    ++seen;
            }
            double e1 = 1, e2 = 1;
            for (int r2 = r + 1; r2 < nb; ++r2) {
                const int up = order[static_cast<std::size_t>(r2)];
                std::vector<double> q;
                std::vector<int> c1, c2;
                for (int l = 0; l < m; ++l)
                    if (label[static_cast<std::size_t>(l)] == up) {
                        q.push_back(colour[static_cast<std::size_t>(l)]);
                        c1.push_back(after[static_cast<std::size_t>(l)]);
                        c2.push_back(after[static_cast<std::size_t>(l)] + 1);
                    }
                e1 *= site_expectation(q, c1);
                e2 *= site_expectation(q, c2);
            }
            legs *= 0.5 * (e1 + e2);
        }
        if (legs == 0)
            continue;
        // Legs strictly below the site of rank r see Z's from ranks >= r only.
        std::vector<double> gaps(static_cast<std::size_t>(nb) + 1, 1.0);
        for (int r = 0; r < nb; ++r) {
            double e = 1;
            for (int r2 = r; r2 < nb; ++r2) {
                const int up = order[static_cast<std::size_t>(r2)];
                std::vector<double> q;
                std::vector<int> c;
                for (int l = 0; l < m; ++l)
                    if (label[static_cast<std::size_t>(l)] == up) {
                        q.push_back(colour[static_cast<std::size_t>(l)]);
                        c.push_back(1);
                    }
                e *= site_expectation(q, c);
            }
            gaps[static_cast<std::size_t>(r)] = 0.5 * (1 + e);
        }
        total += legs * complete_homogeneous(gaps, n - static_cast<std::uint64_t>(nb));
    } while (std::next_permutation(order.begin(), order.end()));
    return total;
}

void check_moment_size(const CltInstance &inst) {
    inst.validate();
    if (inst.size() > kMaxMomentPoints)
        throw CapError("finite-n moments support at most " +
                       std::to_string(kMaxMomentPoints) + " letters");
}

} // namespace

Complex finite_n_moment_exact(const CltInstance &inst, std::uint64_t n) {
    check_moment_size(inst);
    if (n < 1)
        throw DomainError("finite_n_moment_exact: n must be positive");
    const int m = inst.size();
    if (m % 2)
        return 0.0;
    Complex total = 0;
    partitions::for_each_partition(m, [&](const Partition &p) {
        if (!all_blocks_even(p))
            return;
        double weight;
        if (inst.mixed()) {
            weight = coloured_sign_sum(p, inst.colours, n);
        } else {
            std::vector<int> rep;
            for (int l : p.labels())
                rep.push_back(l + 1);
            weight = word_sign_expectation(rep, inst.q) *
                     falling(n, static_cast<int>(p.blocks.size()));
        }
        if (weight == 0)
            return;
        total += weight * block_product(inst, p);
    });
    return total * std::pow(inst.T / static_cast<double>(n), 0.5 * m);
}

McEstimate finite_n_moment_mc(const CltInstance &inst, int n, int samples,
                              std::uint64_t seed, int jobs) {
    check_moment_size(inst);
    if (inst.mixed())
        throw DomainError("finite_n_moment_mc supports a single sign mean q");
    if (n < 1)
        throw DomainError("finite_n_moment_mc: n must be positive");
    if (n > kMaxDenseSites)
        throw CapError("finite_n_moment_mc: n = " + std::to_string(n) +
                       " exceeds cap " + std::to_string(kMaxDenseSites));
    if (samples < 2)
        throw DomainError("finite_n_moment_mc: need at least 2 samples");
    jobs = std::max(1, jobs);
    const int m = inst.size();

    // Site pair (a,b), a<b, as a bit index.
    auto pair_bit = [n](int a, int b) {
        return (a - 1) * n - (a - 1) * a / 2 + (b - a - 1);
    };
    const int npairs = n * (n - 1) / 2;

    // For fixed signs the sampled quantity is exactly
    //   (T/n)^{m/2} sum over site tuples of prod_{odd pairs} s_ab psi_pi,
    // so collect the coefficient of each odd-pair mask once.
    std::map<std::uint64_t, Complex> by_mask;
    if (m % 2 == 0) {
        const double scale = std::pow(inst.T / static_cast<double>(n), 0.5 * m);
        partitions::for_each_partition(m, [&](const Partition &p) {
            if (!all_blocks_even(p))
                return;
            const int nb = static_cast<int>(p.blocks.size());
            if (nb > n)
                return;
            std::vector<int> rep;
            for (int l : p.labels())
                rep.push_back(l + 1);
            const auto red = reduce_word(rep);
            const Complex coef = scale * block_product(inst, p);
            if (coef == Complex(0))
                return;
            // Injective block -> site assignments.
            std::vector<int> site(static_cast<std::size_t>(nb), 0);
            std::vector<bool> used(static_cast<std::size_t>(n) + 1, false);
            auto rec = [&](auto &&self, int b) -> void {
                if (b == nb) {
                    std::uint64_t mask = 0;
                    for (auto [x, y] : red.odd_pairs) {
                        int a = site[static_cast<std::size_t>(x - 1)];
                        int c = site[static_cast<std::size_t>(y - 1)];
                        if (a > c)
                            std::swap(a, c);
                        mask ^= std::uint64_t{1} << pair_bit(a, c);
                    }
                    by_mask[mask] += coef;
                    return;
                }
                for (int s = 1; s <= n; ++s) {
                    if (used[static_cast<std::size_t>(s)])
                        continue;
                    used[static_cast<std::size_t>(s)] = true;
                    site[static_cast<std::size_t>(b)] = s;
                    self(self, b + 1);
                    used[static_cast<std::size_t>(s)] = false;
                }
            };
            rec(rec, 0);
        });
    }
    std::vector<std::pair<std::uint64_t, Complex>> terms(by_mask.begin(), by_mask.end());

    const double p_neg = 0.5 * (1.0 - inst.q);
    std::vector<Complex> values(static_cast<std::size_t>(samples));
    auto work = [&](int begin, int end) {
        for (int i = begin; i < end; ++i) {
            SplitMix64 rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
            std::uint64_t neg = 0;
            for (int b = 0; b < npairs; ++b)
                if (rng.uniform() < p_neg)
                    neg |= std::uint64_t{1} << b;
            Complex v = 0;
            for (const auto &[mask, coef] : terms)
                v += (std::popcount(mask & neg) % 2) ? -coef : coef;
            values[static_cast<std::size_t>(i)] = v;
        }
    };
    if (jobs == 1) {
        work(0, samples);
    } else {
        std::vector<std::thread> pool;
        const int chunk = (samples + jobs - 1) / jobs;
        for (int j = 0; j < jobs; ++j) {
            const int b = j * chunk, e = std::min(samples, b + chunk);
            if (b < e)
                pool.emplace_back(work, b, e);
        }
        for (auto &t : pool)
            t.join();
    }

    McEstimate est;
    est.samples = samples;
    Complex sum = 0;
    for (const auto &v : values)
        sum += v;
    est.mean = sum / static_cast<double>(samples);
    double ss = 0;
    for (const auto &v : values)
        ss += std::norm(v - est.mean);
    est.std_error = std::sqrt(ss / (samples - 1) / samples);
    return est;
}

Complex limit_moment(const CltInstance &inst) {
    inst.validate();
    const int m = inst.size();
    if (m % 2)
        return 0.0;
    const double scale = std::pow(inst.T, 0.5 * m);
    if (!inst.mixed())
        return scale * quasifree::wick_moment(inst.kernel, inst.word, inst.q);
    const std::vector<double> colours = inst.colours;
    return scale * quasifree::wick_moment(
                       inst.kernel, inst.word,
                       [&colours](const partitions::PairPartition &s) {
                           const auto t = partitions::t_mixed(s, colours);
                           return Complex(t ? *t : 0.0);
                       });
}

quasifree::TwoPointKernel ccr_kernel(double mu) {
    if (!(mu > 0 && mu < 1))
        throw DomainError("mu must lie in (0,1)");
    CMatrix x(2, 2), y(2, 2), d = CMatrix::Zero(2, 2);
    x << 0, 1, 1, 0;
    y << 0, Complex(0, 1), Complex(0, -1), 0;
    d(0, 0) = 1 - mu;
    d(1, 1) = mu;
    return quasifree::TwoPointKernel({x, y}, d);
}

namespace {

// f(r,s) = phi_1(X^r Y^s): pair the first X with another X or with a Y.
std::vector<std::vector<Complex>> ccr_table(double mu, int rmax, int smax, bool same) {
    const Complex c = same ? Complex(0, 2 * mu - 1) : Complex(0);
    std::vector<std::vector<Complex>> f(static_cast<std::size_t>(rmax) + 1,
                                        std::vector<Complex>(static_cast<std::size_t>(smax) + 1));
    for (int s = 0; s <= smax; ++s)
        f[0][static_cast<std::size_t>(s)] =
            s % 2 ? 0.0 : static_cast<double>(partitions::double_factorial(s - 1));
    for (int r = 1; r <= rmax; ++r)
        for (int s = 0; s <= smax; ++s) {
            Complex v = 0;
            if (r >= 2)
                v += static_cast<double>(r - 1) * f[static_cast<std::size_t>(r - 2)][static_cast<std::size_t>(s)];
            if (s >= 1)
                v += static_cast<double>(s) * c * f[static_cast<std::size_t>(r - 1)][static_cast<std::size_t>(s - 1)];
            f[static_cast<std::size_t>(r)][static_cast<std::size_t>(s)] = v;
        }
    return f;
}

double log_abs_or_neg_inf(Complex z) {
    const double a = std::abs(z);
    return a == 0 ? -INFINITY : std::log(a);
}

} // namespace

Complex ccr_moment(double mu, int r, int s, bool same_index) {
    if (!(mu > 0 && mu < 1))
        throw DomainError("mu must lie in (0,1)");
    if (r < 0 || s < 0 || r > 2 * kMaxCcrOrder || s > 2 * kMaxCcrOrder)
        throw DomainError("ccr_moment: exponent out of range");
    return ccr_table(mu, r, s, same_index)[static_cast<std::size_t>(r)][static_cast<std::size_t>(s)];
}

CcrSeries ccr_charfn_series(double mu, Complex z, Complex w, bool same_index, int order) {
    if (!(mu > 0 && mu < 1))
        throw DomainError("mu must lie in (0,1)");
    if (order < 0 || order > kMaxCcrOrder)
        throw CapError("ccr_charfn_series: order must be in [0," +
                       std::to_string(kMaxCcrOrder) + "]");
    if (std::abs(z) > 2 || std::abs(w) > 2)
        throw DomainError("ccr_charfn_series: |z|, |w| must be at most 2");
    const auto f = ccr_table(mu, order, order, same_index);
    CcrSeries out;
    Complex zr = 1;
    double rf = 1;
    for (int r = 0; r <= order; ++r) {
        Complex ws = 1;
        double sf = 1;
        for (int s = 0; s <= order; ++s) {
            out.series += zr * ws / (rf * sf) * f[static_cast<std::size_t>(r)][static_cast<std::size_t>(s)];
            ws *= w;
            sf *= s + 1;
        }
        zr *= z;
        rf *= r + 1;
    }
    const double delta = same_index ? 1.0 : 0.0;
    out.closed_form = std::exp(Complex(0, 1) * z * w * (2 * mu - 1) * delta) *
                      std::exp((z * z + w * w) / 2.0);
    out.error = std::abs(out.series - out.closed_form);

    // Tails over (r,s) with max(r,s) > order, summed far enough that the
    // remaining terms are below double resolution.
    const double lz = log_abs_or_neg_inf(z), lw = log_abs_or_neg_inf(w);
    constexpr int kTail = 400;
    double growth = 0, pair = 0;
    for (int r = 0; r <= kTail; ++r)
        for (int s = 0; s <= kTail; ++s) {
            if (r <= order && s <= order)
                continue;
            const int m = r + s;
            if (m % 2)
                continue;
            if ((r > 0 && lz == -INFINITY) || (s > 0 && lw == -INFINITY))
                continue;
            const double base = (r ? r * lz : 0.0) + (s ? s * lw : 0.0) -
                                std::lgamma(r + 1.0) - std::lgamma(s + 1.0);
            growth += std::exp(base + 0.5 * m * std::log(static_cast<double>(m)));
            // (m-1)!! = m! / (2^{m/2} (m/2)!)
            pair += std::exp(base + std::lgamma(m + 1.0) - 0.5 * m * std::log(2.0) -
                             std::lgamma(0.5 * m + 1.0));
        }
    out.growth_tail_bound = growth;
    out.pair_tail_bound = pair;
    return out;
}

CcrCommutator ccr_commutator_check(double mu) {
    const auto k = ccr_kernel(mu);
    CcrCommutator c;
    const std::vector<int> xy{0, 1}, yx{1, 0};
    CltInstance a{k, xy, 1.0, 1.0, {}};
    CltInstance b{k, yx, 1.0, 1.0, {}};
    c.from_moments = limit_moment(a) - limit_moment(b);
    c.from_kernel = k.pair(0, 1) - k.pair(1, 0);
    c.expected = Complex(0, 2 * (2 * mu - 1));
    c.residual = std::max(std::abs(c.from_moments - c.expected),
                          std::abs(c.from_kernel - c.expected));
    return c;
}

} // namespace ncq::climit
