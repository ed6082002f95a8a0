#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <regex>
#include <stdexcept>

#include "ncq/climit.hpp"
#include "ncq/copies.hpp"
#include "ncq/khintchine.hpp"
#include "ncq/opspaces.hpp"
#include "ncq/quasifree.hpp"
#include "ncq/random.hpp"
#include "schema.hpp"

namespace ncq::cli {

namespace detail {

namespace {

using quasifree::CarLetter;
using quasifree::QuasiFreeSpec;

constexpr double kCarRelationTol = 1e-13;
constexpr double kMomentTol = 1e-10;
constexpr double kDeterminantTol = 1e-9;
constexpr double kWickTol = 1e-10;
constexpr double kRateLo = 1.5, kRateHi = 3.0;
constexpr double kRateFloor = 1e-13; // both errors below this: nothing left to shrink
constexpr double kColouredConstant = 5.0;
constexpr double kMcSigmas = 4.0;
constexpr double kCommutatorTol = 1e-12;
constexpr double kScalarSlack = 0.01;
constexpr double kChainSlack = 1e-6;
constexpr double kCopiesConstant = 40.0;
constexpr double kUpdownTol = 1e-10;
constexpr double kOhTol = 1e-10;
constexpr long kWickWordCap = 2'000'000;

Json cjson(Complex z) { return Json::array({z.real(), z.imag()}); }

Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

std::vector<double> linspace(double a, double b, long n) {
    std::vector<double> v;
    for (long i = 0; i < n; ++i)
        v.push_back(n == 1 ? 0.5 * (a + b) : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
    return v;
}

Record make(const std::string &kind, std::size_t index) {
    Record r;
    r.kind = kind;
    r.id = kind + "-" + std::to_string(index);
    return r;
}

template <class F> void guarded(Record &r, F &&f) {
    try {
        f();
    } catch (const std::exception &e) {
        r.pass = false;
        r.error = e.what();
    }
}

std::uint64_t seed_of(const RunConfig &cfg) { return cfg.seed.value_or(0); }

// Sub-section `key` of s, validated by f and stored normalized in s.out.
template <class F> Json nested(Section &s, const std::string &key, F &&f) {
    Section sub(s.object(key), s.path(key), s.issues());
    f(sub);
    sub.finish();
    s.out[key] = sub.out;
    return sub.out;
}

std::vector<double> mu_list(const Json &j) { return j.get<std::vector<double>>(); }

void check_length(Section &s, const std::string &key, std::size_t got, std::size_t want) {
    if (got != want)
        s.issue(key, "expected " + std::to_string(want) + " entries, got " + std::to_string(got));
}

// Kernels and words for the CLT commands.

void validate_kernel(Section &k) {
    const auto type = k.choice("type", "car", {"car", "ccr"});
    if (type == "car") {
        k.numbers("mu", {0.3, 0.7}, 0, 1, true, true, 1, quasifree::kMaxCarModes);
        k.boolean("normalized", false);
    } else {
        k.number("mu", 0.5, 0, 1, true, true);
    }
}

quasifree::TwoPointKernel build_kernel(const Json &k) {
    if (k.at("type") == "ccr")
        return climit::ccr_kernel(k.at("mu").get<double>());
    return quasifree::car_kernel(QuasiFreeSpec{mu_list(k.at("mu"))}, k.at("normalized").get<bool>());
}

int letter_symbol(const Json &k, const std::string &w) {
    if (k.at("type") == "ccr") {
        if (w == "X")
            return 0;
        if (w == "Y")
            return 1;
        return -1;
    }
    static const std::regex re("a([0-9]+)(\\*?)");
    std::smatch m;
    if (!std::regex_match(w, m, re))
        return -1;
    const int K = static_cast<int>(k.at("mu").size());
    const long idx = std::stol(m[1].str());
    if (idx < 1 || idx > K)
        return -1;
    return quasifree::car_symbol(CarLetter{static_cast<int>(idx), !m[2].str().empty()}, K);
}

std::vector<int> parse_word(Section &s, const Json &kernel, const std::vector<std::string> &word) {
    std::vector<int> out;
    for (std::size_t i = 0; i < word.size(); ++i) {
        const int sym = letter_symbol(kernel, word[i]);
        if (sym < 0)
            s.issue("word", "letter '" + word[i] + "' is not a symbol of the kernel");
        out.push_back(sym);
    }
    return out;
}

std::vector<std::string> default_word(const Json &kernel) {
    if (kernel.at("type") == "ccr")
        return {"X", "Y", "Y", "X"};
    if (kernel.at("mu").size() >= 2)
        return {"a1", "a2", "a1*", "a2*"};
    return {"a1", "a1*", "a1", "a1*"};
}

climit::CltInstance clt_instance(const Json &p, double q) {
    const Json &k = p.at("kernel");
    climit::CltInstance inst{build_kernel(k), {}, p.at("T").get<double>(), q, {}};
    for (const auto &w : p.at("word"))
        inst.word.push_back(letter_symbol(k, w.get<std::string>()));
    if (auto it = p.find("colours"); it != p.end())
        inst.colours = it->get<std::vector<double>>();
    return inst;
}

void validate_clt_common(Section &s) {
    const Json kernel = nested(s, "kernel", validate_kernel);
    const auto word = s.strings("word", default_word(kernel), 1, climit::kMaxMomentPoints);
    parse_word(s, kernel, word);
    s.number("T", 1.0, 0, 1e6, true, false);
}

split::Options solver_options(Section &s, long iterations = 50000) {
    split::Options o;
    o.tolerance = s.number("tolerance", 1e-8, 0, 1e-2, true, false);
    o.max_iterations = static_cast<int>(s.integer("max_iterations", iterations, 1, 10'000'000));
    return o;
}

split::Options solver_options(const Json &p) {
    split::Options o;
    o.tolerance = p.at("tolerance").get<double>();
    o.max_iterations = p.at("max_iterations").get<int>();
    return o;
}

void for_each_increasing(int len, int top, const std::function<void(const std::vector<int> &)> &f) {
    std::vector<int> t(static_cast<std::size_t>(len));
    std::function<void(int, int)> rec = [&](int pos, int start) {
        if (pos == len) {
            f(t);
            return;
        }
        for (int v = start; v <= top; ++v) {
            t[static_cast<std::size_t>(pos)] = v;
            rec(pos + 1, v + 1);
        }
    };
    rec(0, 1);
}

RVector random_state(Eigen::Index d, SplitMix64 &rng) {
    RVector r(d);
    for (Eigen::Index i = 0; i < d; ++i)
        r(i) = rng.uniform(0.2, 1.0);
    return r / r.sum();
}

// verify-car

Json verify_car_validate(Section &s) {
    const long K = s.integer("K", 4, 1, khintchine::kMaxLhsModes);
    const auto mu = s.numbers("mu", linspace(0.2, 0.8, K), 0, 1, true, true, 1,
                              static_cast<std::size_t>(khintchine::kMaxLhsModes));
    check_length(s, "mu", mu.size(), static_cast<std::size_t>(K));
    const long km = s.integer("moment_modes", std::min(K, 5L), 1, 5);
    if (km > K)
        s.issue("moment_modes", "cannot exceed K");
    s.integer("max_order", 3, 1, 3);
    s.integer("determinant_instances", 0, 0, 10000);
    const long kd = s.integer("determinant_modes", std::min(K, 3L), 1, 5);
    if (kd > K)
        s.issue("determinant_modes", "cannot exceed K");
    return s.out;
}

std::vector<Record> verify_car_run(const RunConfig &cfg) {
    const Json &p = cfg.params;
    const int K = p.at("K").get<int>();
    const auto mu = mu_list(p.at("mu"));
    std::vector<Record> out;

    Record rel = make("car-relations", 0);
    rel.inputs["K"] = K;
    guarded(rel, [&] {
        const double res = quasifree::car_relation_residual(K);
        rel.metric = res;
        rel.bound = kCarRelationTol;
        rel.pass = res <= kCarRelationTol;
    });
    out.push_back(std::move(rel));

    const int km = p.at("moment_modes").get<int>(), order = p.at("max_order").get<int>();
    const QuasiFreeSpec mspec{std::vector<double>(mu.begin(), mu.begin() + km)};
    for (int r = 1; r <= order; ++r)
        for (int s = 1; s <= order; ++s) {
            Record rec = make("moment-formula", out.size());
            rec.inputs["r"] = r;
            rec.inputs["s"] = s;
            rec.inputs["modes"] = km;
            guarded(rec, [&] {
                double err = 0;
                long count = 0;
                for_each_increasing(r, km, [&](const std::vector<int> &i) {
                    for_each_increasing(s, km, [&](const std::vector<int> &j) {
                        const auto word = quasifree::car_moment_word(i, j);
                        err = std::max(err, std::abs(quasifree::car_dense_trace(mspec, word) -
                                                     quasifree::car_moment_formula(mspec, i, j)));
                        ++count;
                    });
                });
                rec.inputs["tuples"] = count;
                rec.metric = err;
                rec.bound = kMomentTol;
                rec.pass = err <= kMomentTol;
            });
            out.push_back(std::move(rec));
        }

    const int nd = p.at("determinant_instances").get<int>();
    const int kd = p.at("determinant_modes").get<int>();
    const QuasiFreeSpec dspec{std::vector<double>(mu.begin(), mu.begin() + kd)};
    for (int t = 0; t < nd; ++t) {
        Record rec = make("determinant", static_cast<std::size_t>(t));
        const int r = 1 + t % 3;
        rec.inputs["instance"] = t;
        rec.inputs["order"] = r;
        rec.inputs["modes"] = kd;
        guarded(rec, [&] {
            SplitMix64 rng(derive_seed(seed_of(cfg), static_cast<std::uint64_t>(t)));
            std::vector<CVector> g, h;
            for (int i = 0; i < r; ++i) {
                g.push_back(CMatrix(ginibre(kd, 1, rng)).col(0));
                h.push_back(CMatrix(ginibre(kd, 1, rng)).col(0));
            }
            // tr(D b(g_r)* ... b(g_1)* b(h_1) ... b(h_r)) on the Fock space
            const auto gens = quasifree::car_generators(kd);
            const CMatrix D = quasifree::quasifree_density(dspec);
            CMatrix w = CMatrix::Identity(D.rows(), D.cols());
            for (int i = r - 1; i >= 0; --i) {
                CMatrix b = CMatrix::Zero(D.rows(), D.cols());
                for (int k = 0; k < kd; ++k)
                    b += g[static_cast<std::size_t>(i)](k) * gens[static_cast<std::size_t>(k)];
                w = w * b.adjoint();
            }
            for (int i = 0; i < r; ++i) {
                CMatrix b = CMatrix::Zero(D.rows(), D.cols());
                for (int k = 0; k < kd; ++k)
                    b += h[static_cast<std::size_t>(i)](k) * gens[static_cast<std::size_t>(k)];
                w = w * b;
            }
            const Complex dense = (D * w).trace();
            const Complex det = quasifree::car_determinant(dspec, g, h);
            rec.inputs["dense"] = cjson(dense);
            rec.inputs["determinant"] = cjson(det);
            rec.lhs = std::abs(dense);
            rec.rhs = std::abs(det);
            rec.metric = std::abs(dense - det);
            rec.bound = kDeterminantTol;
            rec.pass = *rec.metric <= kDeterminantTol;
        });
        out.push_back(std::move(rec));
    }
    return out;
}

// verify-wick

Json verify_wick_validate(Section &s) {
    const long K = s.integer("K", 3, 1, 4);
    const auto mu = s.numbers("mu", linspace(0.25, 0.75, K), 0, 1, true, true, 1, 4);
    check_length(s, "mu", mu.size(), static_cast<std::size_t>(K));
    const long len = s.integer("max_length", 6, 0, quasifree::kMaxWickPoints);
    if (std::pow(2.0 * static_cast<double>(K), static_cast<double>(len)) > kWickWordCap)
        s.issue("max_length", "(2K)^max_length exceeds " + std::to_string(kWickWordCap) + " words");
    return s.out;
}

std::vector<Record> verify_wick_run(const RunConfig &cfg) {
    const Json &p = cfg.params;
    const int K = p.at("K").get<int>(), maxlen = p.at("max_length").get<int>();
    const QuasiFreeSpec spec{mu_list(p.at("mu"))};
    std::vector<Record> out;
    for (int len = 0; len <= maxlen; len += 2) {
        Record rec = make("wick-trace", out.size());
        rec.inputs["length"] = len;
        rec.inputs["K"] = K;
        guarded(rec, [&] {
            const auto kernel = quasifree::car_kernel(spec);
            std::vector<int> word(static_cast<std::size_t>(len), 0);
            std::vector<CarLetter> letters(static_cast<std::size_t>(len));
            double err = 0;
            long count = 0;
            while (true) {
                for (std::size_t i = 0; i < word.size(); ++i)
                    letters[i] = CarLetter{1 + word[i] % K, word[i] >= K};
                err = std::max(err, std::abs(quasifree::wick_moment(kernel, word, -1.0) -
                                             quasifree::car_dense_trace(spec, letters)));
                ++count;
                std::size_t pos = 0;
                while (pos < word.size() && ++word[pos] == 2 * K)
                    word[pos++] = 0;
                if (pos == word.size())
                    break;
            }
            rec.inputs["words"] = count;
            rec.metric = err;
            rec.bound = kWickTol;
            rec.pass = err <= kWickTol;
        });
        out.push_back(std::move(rec));
    }
    return out;
}

// clt-exact

Json clt_exact_validate(Section &s) {
    validate_clt_common(s);
    s.number("q", 0.5, -1, 1);
    const auto colours = s.numbers("colours", {}, -1, 1, false, false, 0, climit::kMaxMomentPoints);
    if (!colours.empty())
        check_length(s, "colours", colours.size(), s.out["word"].size());
    s.integers("n", {8, 16, 32}, 1, 1'000'000, 1, 20);
    return s.out;
}

std::vector<Record> clt_exact_run(const RunConfig &cfg) {
    const Json &p = cfg.params;
    const auto inst = clt_instance(p, p.at("q").get<double>());
    const auto ns = p.at("n").get<std::vector<long>>();
    std::vector<Record> out;
    Complex lim;
    try {
        lim = climit::limit_moment(inst);
    } catch (const std::exception &e) {
        Record rec = make("limit", 0);
        rec.error = e.what();
        out.push_back(std::move(rec));
        return out;
    }
    std::vector<double> errs(ns.size(), std::nan(""));
    for (std::size_t i = 0; i < ns.size(); ++i) {
        Record rec = make("finite-n", i);
        rec.inputs["n"] = ns[i];
        rec.inputs["limit"] = cjson(lim);
        guarded(rec, [&] {
            const Complex m = climit::finite_n_moment_exact(inst, static_cast<std::uint64_t>(ns[i]));
            errs[i] = std::abs(m - lim);
            rec.inputs["moment"] = cjson(m);
            rec.lhs = m.real();
            rec.rhs = lim.real();
            rec.metric = errs[i];
            if (inst.mixed()) {
                rec.bound = kColouredConstant / static_cast<double>(ns[i]);
                rec.pass = errs[i] <= *rec.bound;
            } else {
                rec.pass = true;
            }
        });
        out.push_back(std::move(rec));
    }
    if (inst.mixed())
        return out;
    for (std::size_t i = 0; i + 1 < ns.size(); ++i) {
        if (ns[i + 1] != 2 * ns[i] || ns[i] < 8)
            continue;
        Record rec = make("rate", i);
        rec.inputs["n"] = ns[i];
        rec.inputs["lower"] = kRateLo;
        rec.inputs["error_n"] = finite_or_null(errs[i]);
        rec.inputs["error_2n"] = finite_or_null(errs[i + 1]);
        if (std::isnan(errs[i]) || std::isnan(errs[i + 1])) {
            rec.error = "missing finite-n value";
        } else if (errs[i] < kRateFloor && errs[i + 1] < kRateFloor) {
            rec.pass = true;
        } else {
            const double f = errs[i] / errs[i + 1];
            rec.metric = f;
            rec.bound = kRateHi;
            rec.pass = f >= kRateLo && f <= kRateHi;
        }
        out.push_back(std::move(rec));
    }
    return out;
}

// clt-mc

Json clt_mc_validate(Section &s) {
    validate_clt_common(s);
    s.numbers("q", {-1, 0, 0.5, 1}, -1, 1, false, false, 1, 16);
    s.integer("n", 6, 1, climit::kMaxDenseSites);
    s.integer("samples", 10000, 2, 10'000'000);
    return s.out;
}

std::vector<Record> clt_mc_run(const RunConfig &cfg) {
    const Json &p = cfg.params;
    const auto qs = p.at("q").get<std::vector<double>>();
    const int n = p.at("n").get<int>(), samples = p.at("samples").get<int>();
    std::vector<Record> out;
    for (std::size_t i = 0; i < qs.size(); ++i) {
        Record rec = make("monte-carlo", i);
        rec.inputs["q"] = qs[i];
        rec.inputs["n"] = n;
        rec.inputs["samples"] = samples;
        guarded(rec, [&] {
            const auto inst = clt_instance(p, qs[i]);
            const auto mc = climit::finite_n_moment_mc(
                inst, n, samples, derive_seed(seed_of(cfg), i), cfg.jobs);
            const Complex exact = climit::finite_n_moment_exact(inst, static_cast<std::uint64_t>(n));
            rec.inputs["mean"] = cjson(mc.mean);
            rec.inputs["exact"] = cjson(exact);
            rec.inputs["std_error"] = mc.std_error;
            rec.lhs = mc.mean.real();
            rec.rhs = exact.real();
            rec.metric = std::abs(mc.mean - exact);
            rec.bound = kMcSigmas * mc.std_error;
            // zero variance happens for q = +-1; allow rounding there
            rec.pass = *rec.metric <= *rec.bound + 1e-12;
        });
        out.push_back(std::move(rec));
    }
    return out;
}

// ccr-charfn

Json ccr_charfn_validate(Section &s) {
    s.numbers("mu", {0.3, 0.5, 0.8}, 0, 1, true, true, 1, 16);
    s.numbers("z", {0, 0.5, -0.5, 1, -1}, -2, 2, false, false, 1, 16);
    s.numbers("w", {0, 0.5, -0.5, 1, -1}, -2, 2, false, false, 1, 16);
    s.choice("same_index", "both", {"both", "same", "distinct"});
    s.integer("order", 16, 0, climit::kMaxCcrOrder);
    s.number("tolerance", 1e-6, 0, 1, true, false);
    return s.out;
}

std::vector<Record> ccr_charfn_run(const RunConfig &cfg) {
    const Json &p = cfg.params;
    const auto mus = p.at("mu").get<std::vector<double>>();
    const auto zs = p.at("z").get<std::vector<double>>();
    const auto ws = p.at("w").get<std::vector<double>>();
    const auto which = p.at("same_index").get<std::string>();
    const int order = p.at("order").get<int>();
    const double tol = p.at("tolerance").get<double>();
    std::vector<bool> deltas;
    if (which != "distinct")
        deltas.push_back(true);
    if (which != "same")
        deltas.push_back(false);
    std::vector<Record> out;
    std::size_t idx = 0;
    for (double mu : mus) {
        for (bool d : deltas)
            for (double z : zs)
                for (double w : ws) {
                    Record rec = make("charfn", idx++);
                    rec.inputs["mu"] = mu;
                    rec.inputs["z"] = z;
                    rec.inputs["w"] = w;
                    rec.inputs["same_index"] = d;
                    rec.inputs["order"] = order;
                    guarded(rec, [&] {
                        const auto r = climit::ccr_charfn_series(mu, z, w, d, order);
                        rec.inputs["series"] = cjson(r.series);
                        rec.inputs["closed_form"] = cjson(r.closed_form);
                        rec.inputs["pair_tail_bound"] = finite_or_null(r.pair_tail_bound);
                        rec.inputs["growth_tail_bound"] = finite_or_null(r.growth_tail_bound);
                        rec.lhs = std::abs(r.series);
                        rec.rhs = std::abs(r.closed_form);
                        rec.metric = r.error;
                        rec.bound = tol;
                        rec.pass = r.error <= tol;
                    });
                    out.push_back(std::move(rec));
                }
        Record rec = make("commutator", out.size());
        rec.inputs["mu"] = mu;
        guarded(rec, [&] {
            const auto c = climit::ccr_commutator_check(mu);
            rec.inputs["from_moments"] = cjson(c.from_moments);
            rec.inputs["from_kernel"] = cjson(c.from_kernel);
            rec.inputs["expected"] = cjson(c.expected);
            rec.metric = c.residual;
            rec.bound = kCommutatorTol;
            rec.pass = c.residual <= kCommutatorTol;
        });
        out.push_back(std::move(rec));
    }
    return out;
}

// kh-ratio

Json kh_ratio_validate(Section &s) {
    s.choice("normalization", "symmetric", {"symmetric", "right"});
    s.numbers("scalar_mu", linspace(0.1, 0.9, 9), 0, 1, true, true, 0, 99);
    s.integer("random_instances", 0, 0, 100000);
    s.integer("K_max", 4, 1, khintchine::kMaxLhsModes);
    s.integer("m_max", 3, 1, 4);
    const double lo = s.number("mu_min", 0.1, 0, 1, true, true);
    const double hi = s.number("mu_max", 0.9, 0, 1, true, true);
    if (lo > hi)
        s.issue("mu_min", "must not exceed mu_max");
    s.number("budget", khintchine::kRatioBudget, 1, 1e12);
    solver_options(s);
    return s.out;
}

Record ratio_record(Record rec, const std::vector<CMatrix> &x, const QuasiFreeSpec &spec,
                    khintchine::Normalization norm, const split::Options &opt, double lo,
                    double hi) {
    guarded(rec, [&] {
        const auto r = khintchine::khintchine_ratio(x, spec, norm, opt);
        rec.inputs["rhs_lower_bound"] = r.rhs_lower_bound;
        rec.inputs["iterations"] = r.iterations;
        rec.lhs = r.lhs;
        rec.rhs = r.rhs;
        rec.metric = r.ratio;
        rec.bound = hi;
        rec.pass = r.ratio >= lo && r.ratio <= hi;
    });
    return rec;
}

std::vector<Record> kh_ratio_run(const RunConfig &cfg) {
    const Json &p = cfg.params;
    const auto norm = p.at("normalization") == "right" ? khintchine::Normalization::right
                                                       : khintchine::Normalization::symmetric;
    const auto opt = solver_options(p);
    const auto scalar_mu = p.at("scalar_mu").get<std::vector<double>>();
    const int nr = p.at("random_instances").get<int>();
    const int kmax = p.at("K_max").get<int>(), mmax = p.at("m_max").get<int>();
    const double mlo = p.at("mu_min").get<double>(), mhi = p.at("mu_max").get<double>();
    const double budget = p.at("budget").get<double>();
    const double slo = 1 / std::numbers::sqrt2 - kScalarSlack, shi = std::numbers::sqrt2 + kScalarSlack;

    std::vector<Record> out(scalar_mu.size() + static_cast<std::size_t>(nr));
    const int total = static_cast<int>(out.size());
    parallel_for(total, cfg.jobs, [&](int t) {
        const auto ut = static_cast<std::size_t>(t);
        if (ut < scalar_mu.size()) {
            Record rec = make("scalar", ut);
            rec.inputs["mu"] = scalar_mu[ut];
            rec.inputs["lower"] = slo;
            out[ut] = ratio_record(std::move(rec), {CMatrix::Identity(1, 1)},
                                   QuasiFreeSpec{{scalar_mu[ut]}}, norm, opt, slo, shi);
            return;
        }
        const auto i = ut - scalar_mu.size();
        Record rec = make("random", i);
        SplitMix64 rng(derive_seed(seed_of(cfg), i));
        const int K = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(kmax));
        const int m = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(mmax));
        QuasiFreeSpec spec;
        std::vector<CMatrix> x;
        for (int k = 0; k < K; ++k) {
            spec.mu.push_back(mlo == mhi ? mlo : rng.uniform(mlo, mhi));
            x.push_back(ginibre(m, m, rng));
        }
        rec.inputs["K"] = K;
        rec.inputs["m"] = m;
        rec.inputs["mu"] = spec.mu;
        rec.inputs["lower"] = 1 / budget;
        out[ut] = ratio_record(std::move(rec), x, spec, norm, opt, 1 / budget, budget);
    });
    return out;
}

// kh-copies

Json kh_copies_validate(Section &s) {
    Json shapes = Json::array();
    if (const Json *arr = s.array("shapes")) {
        for (std::size_t i = 0; i < arr->size(); ++i) {
            Section sh(&(*arr)[i], s.path("shapes") + "[" + std::to_string(i) + "]", s.issues());
            sh.integer("n", 2, 1, khintchine::kMaxCopies);
            sh.integer("dM", 1, 1, 4);
            sh.integer("dN", 2, 1, 4);
            sh.integer("count", 1, 0, 1000);
            sh.finish();
            shapes.push_back(sh.out);
        }
    } else {
        for (auto [n, dM, dN, c] : {std::array{2, 1, 2, 7}, std::array{2, 2, 2, 7}, std::array{3, 1, 2, 6}})
            shapes.push_back(Json{{"n", n}, {"dM", dM}, {"dN", dN}, {"count", c}});
    }
    s.out["shapes"] = shapes;
    s.integer("updown_instances", 50, 0, 100000);
    s.integer("updown_n", 3, 1, khintchine::kMaxCopies);
    s.integer("updown_dM", 1, 1, 4);
    s.integer("updown_dN", 2, 1, 4);
    s.integer("rechnen_instances", 10, 0, 100000);
    s.integer("rechnen_n", 3, 1, khintchine::kMaxCopies);
    s.integer("rechnen_dM", 2, 1, 4);
    s.integer("rechnen_dN", 2, 1, 4);
    s.number("eps", 0.3, 0, 1 / std::numbers::e, true, true);
    solver_options(s, 400000);
    return s.out;
}

bool kh_copies_needs_seed(const Json &p) {
    for (const auto &sh : p.at("shapes"))
        if (sh.at("count").get<int>() > 0)
            return true;
    return p.at("updown_instances").get<int>() > 0 || p.at("rechnen_instances").get<int>() > 0;
}

std::vector<Record> kh_copies_run(const RunConfig &cfg) {
    const Json &p = cfg.params;
    const auto opt = solver_options(p);
    const std::uint64_t seed = seed_of(cfg);
    struct Job {
        int n;
        Eigen::Index dM, dN;
    };
    std::vector<Job> jobs;
    for (const auto &sh : p.at("shapes"))
        for (int c = 0; c < sh.at("count").get<int>(); ++c)
            jobs.push_back({sh.at("n").get<int>(), sh.at("dM").get<Eigen::Index>(),
                            sh.at("dN").get<Eigen::Index>()});

    std::vector<Record> chain(jobs.size());
    const std::uint64_t chain_seed = derive_seed(seed, 0);
    parallel_for(static_cast<int>(jobs.size()), cfg.jobs, [&](int t) {
        const auto ut = static_cast<std::size_t>(t);
        const Job &j = jobs[ut];
        Record rec = make("copies", ut);
        rec.inputs["n"] = j.n;
        rec.inputs["dM"] = j.dM;
        rec.inputs["dN"] = j.dN;
        guarded(rec, [&] {
            SplitMix64 rng(derive_seed(chain_seed, ut));
            const RVector rho = random_state(j.dN, rng);
            const Eigen::Index d = j.dM * j.dN;
            const khintchine::CopiesModel m(j.n, j.dM, rho, CMatrix::Zero(d, d));
            const CMatrix x = ginibre(d, d, rng);
            const double lhs = khintchine::copies_lhs_exact(m, x);
            const auto two = khintchine::copies_two_term(m, x, opt);
            const auto three = khintchine::copies_three_term(m, x, opt);
            rec.inputs["two_term"] = two.objective;
            rec.inputs["converged"] = two.converged && three.converged;
            rec.lhs = lhs;
            rec.rhs = three.objective;
            rec.metric = three.objective / two.objective;
            rec.bound = kCopiesConstant;
            rec.pass = two.converged && three.converged && lhs <= three.objective + kChainSlack &&
                       three.objective <= kCopiesConstant * two.objective;
            if (!(two.converged && three.converged))
                rec.error = "split solver did not converge";
        });
        chain[ut] = std::move(rec);
    });
    std::vector<Record> out = std::move(chain);

    const int nu = p.at("updown_instances").get<int>();
    const int un = p.at("updown_n").get<int>();
    const auto udM = p.at("updown_dM").get<Eigen::Index>(), udN = p.at("updown_dN").get<Eigen::Index>();
    const std::uint64_t updown_seed = derive_seed(seed, 1);
    for (int t = 0; t < nu; ++t) {
        Record rec = make("updown", static_cast<std::size_t>(t));
        rec.inputs["n"] = un;
        guarded(rec, [&] {
            SplitMix64 rng(derive_seed(updown_seed, static_cast<std::uint64_t>(t)));
            const RVector rho = random_state(udN, rng);
            const double norm = rng.uniform();
            const CMatrix y = random_contraction(udM * udN, rng, norm);
            const auto r = khintchine::updown_certificate(khintchine::CopiesModel(un, udM, rho, y));
            rec.inputs["y_norm"] = norm;
            rec.lhs = r.rows;
            rec.rhs = r.cols;
            rec.metric = std::max(r.rows, r.cols);
            rec.bound = 1 + kUpdownTol;
            rec.pass = *rec.metric <= *rec.bound;
        });
        out.push_back(std::move(rec));
    }

    const int nrc = p.at("rechnen_instances").get<int>();
    const int rn = p.at("rechnen_n").get<int>();
    const auto rdM = p.at("rechnen_dM").get<Eigen::Index>(), rdN = p.at("rechnen_dN").get<Eigen::Index>();
    const double eps = p.at("eps").get<double>();
    const std::uint64_t rechnen_seed = derive_seed(seed, 2);
    for (int t = 0; t < nrc; ++t) {
        Record rec = make("rechnen", static_cast<std::size_t>(t));
        rec.inputs["n"] = rn;
        rec.inputs["eps"] = eps;
        guarded(rec, [&] {
            SplitMix64 rng(derive_seed(rechnen_seed, static_cast<std::uint64_t>(t)));
            const RVector rho = random_state(rdN, rng);
            const Eigen::Index d = rdM * rdN;
            const khintchine::CopiesModel probe(rn, rdM, rho, CMatrix::Zero(d, d));
            CMatrix y = ginibre(d, d, rng);
            const double e = std::max(linalg::operator_norm(probe.expectation_base(y.adjoint() * y)),
                                      linalg::operator_norm(probe.expectation_base(y * y.adjoint())));
            const double scale = rng.uniform(0.2, 1.0);
            y *= std::sqrt(scale * eps / rn / e);
            const double yn = linalg::operator_norm(y);
            if (yn > 1)
                y /= yn;
            const auto r = khintchine::rechnen_check(khintchine::CopiesModel(rn, rdM, rho, y), eps);
            rec.inputs["one_minus_Ea"] = r.one_minus_Ea;
            rec.inputs["one_minus_Eb"] = r.one_minus_Eb;
            rec.inputs["power_sum_a"] = r.power_sum_a;
            rec.inputs["power_sum_b"] = r.power_sum_b;
            rec.inputs["square_sum_a"] = r.square_sum_a;
            rec.inputs["square_sum_b"] = r.square_sum_b;
            rec.inputs["bound_ii"] = r.bound_ii;
            rec.inputs["bound_iii"] = r.bound_iii;
            rec.inputs["bound_iv"] = r.bound_iv;
            rec.inputs["ii_ok"] = r.ii_ok;
            rec.inputs["iii_ok"] = r.iii_ok;
            rec.inputs["iv_ok"] = r.iv_ok;
            rec.metric = r.identity_error;
            rec.bound = khintchine::kRechnenIdentityTol;
            rec.pass = r.ok();
        });
        out.push_back(std::move(rec));
    }
    return out;
}

// oh-scan

Json oh_scan_validate(Section &s) {
    const long lo = s.integer("n_min", 1, 1, 16);
    const long hi = s.integer("n_max", 8, 1, 16);
    if (lo > hi)
        s.issue("n_min", "must not exceed n_max");
    return s.out;
}

std::vector<Record> oh_scan_run(const RunConfig &cfg) {
    const Json &p = cfg.params;
    std::vector<Record> out;
    for (int n = p.at("n_min").get<int>(); n <= p.at("n_max").get<int>(); ++n) {
        Record rec = make("oh", out.size());
        rec.inputs["n"] = n;
        guarded(rec, [&] {
            opspaces::OhInstance inst;
            for (int k = 0; k < n; ++k)
                inst.x.push_back(linalg::basis_matrix(n, n, k, 0));
            const double v = opspaces::oh_norm(inst);
            const double expect = std::pow(static_cast<double>(n), 0.25);
            rec.lhs = v;
            rec.rhs = expect;
            rec.metric = std::abs(v - expect);
            rec.bound = kOhTol;
            rec.pass = *rec.metric <= kOhTol;
        });
        out.push_back(std::move(rec));
    }
    return out;
}

// rp-weights

Json rp_weights_validate(Section &s) {
    s.number("p", 2, 1, 1e6, true, false);
    const long lo = s.integer("j_min", -4, -1000, 1000);
    const long hi = s.integer("j_max", 4, -1000, 1000);
    if (lo > hi)
        s.issue("j_min", "must not exceed j_max");
    s.integer("n", 16, 2, 1'000'000'000);
    s.number("eps", 1, 0, 1e3, true, false);
    const double lambda = s.number("lambda", 0, 0, 1e300);
    if (lambda != 0 && !(lambda > 1))
        s.issue("lambda", "must be 0 (automatic) or greater than 1");
    return s.out;
}

std::vector<Record> rp_weights_run(const RunConfig &cfg) {
    const Json &p = cfg.params;
    opspaces::RpSpec spec;
    spec.p = p.at("p").get<double>();
    spec.j_min = p.at("j_min").get<int>();
    spec.j_max = p.at("j_max").get<int>();
    std::vector<Record> out;
    try {
        for (const auto &w : opspaces::rp_weights(spec)) {
            Record rec = make("sigma", out.size());
            rec.inputs["p"] = spec.p;
            rec.inputs["j"] = w.j;
            rec.inputs["column"] = w.column;
            rec.inputs["row"] = w.row;
            rec.inputs["coefficient"] = w.coefficient;
            rec.inputs["exact_ratio"] = finite_or_null(w.exact_ratio);
            rec.lhs = w.sigma;
            rec.metric = w.sigma;
            rec.bound = 1;
            rec.pass = w.sigma >= 0 && w.sigma <= 1 && (w.j != 0 || w.sigma == 0.5);
            out.push_back(std::move(rec));
        }
    } catch (const std::exception &e) {
        Record rec = make("sigma", out.size());
        rec.error = e.what();
        out.push_back(std::move(rec));
    }

    Record rec = make("truncation", 0);
    guarded(rec, [&] {
        const int n = p.at("n").get<int>();
        const double eps = p.at("eps").get<double>();
        double lambda = p.at("lambda").get<double>();
        if (lambda == 0)
            lambda = std::exp(1.01 * opspaces::truncation_range(spec.p, n, 2.0, eps).min_log_lambda);
        const auto b = opspaces::truncation_range(spec.p, n, lambda, eps);
        rec.inputs["n"] = n;
        rec.inputs["eps"] = eps;
        rec.inputs["lambda"] = lambda;
        rec.inputs["c_p"] = b.c_p;
        rec.inputs["j_cap"] = b.j_cap;
        rec.inputs["index_size"] = b.index_size;
        rec.inputs["index_ok"] = b.index_ok;
        rec.inputs["min_log_lambda"] = b.min_log_lambda;
        rec.lhs = b.size_bound;
        rec.rhs = b.log2_budget;
        rec.metric = b.size_bound;
        rec.bound = b.log2_budget;
        rec.pass = b.bound_ok;
    });
    out.push_back(std::move(rec));
    return out;
}

// growth-cert

Json growth_cert_validate(Section &s) {
    const auto source = s.choice("source", "q-gaussian", {"q-gaussian", "explicit"});
    s.number("q", 0, -1, 1);
    s.integer("k_max", 12, 1, quasifree::kMaxWickPoints);
    const auto m = s.numbers("moments", {}, -1e300, 1e300, false, false, 0, 400);
    if (source == "explicit" && m.empty())
        s.issue("moments", "required when source is explicit");
    s.choice("expect", "exists", {"exists", "fails"});
    return s.out;
}

std::vector<Record> growth_cert_run(const RunConfig &cfg) {
    const Json &p = cfg.params;
    std::vector<Record> out;
    std::vector<double> moments;
    if (p.at("source") == "explicit") {
        moments = p.at("moments").get<std::vector<double>>();
    } else {
        const double q = p.at("q").get<double>();
        const quasifree::TwoPointKernel kernel(CMatrix::Identity(1, 1));
        const std::vector<double> lengths_all(quasifree::kMaxWickPoints, 1.0);
        for (int k = 1; k <= p.at("k_max").get<int>(); ++k) {
            Record rec = make("growth", out.size());
            rec.inputs["k"] = k;
            rec.inputs["q"] = q;
            guarded(rec, [&] {
                const std::vector<int> word(static_cast<std::size_t>(k), 0);
                const std::span<const double> lengths(lengths_all.data(), static_cast<std::size_t>(k));
                const auto g = quasifree::growth_bound_check(kernel, word, q, lengths);
                moments.push_back(quasifree::wick_moment(kernel, word, q).real());
                rec.lhs = g.moment_abs;
                rec.rhs = g.bound;
                rec.metric = g.moment_abs;
                rec.bound = g.bound;
                rec.pass = g.ok;
            });
            out.push_back(std::move(rec));
        }
    }
    Record rec = make("certificate", 0);
    const bool want = p.at("expect") == "exists";
    rec.inputs["moments"] = moments.size();
    rec.inputs["expect"] = p.at("expect");
    guarded(rec, [&] {
        const auto c = quasifree::moment_growth_certificate(moments);
        rec.inputs["found"] = c.has_value();
        if (c)
            rec.metric = *c;
        rec.pass = c.has_value() == want;
    });
    out.push_back(std::move(rec));
    return out;
}

bool never(const Json &) { return false; }
bool always(const Json &) { return true; }

} // namespace

const std::vector<Command> &commands() {
    static const std::vector<Command> list{
        {"verify-car", verify_car_validate,
         [](const Json &p) { return p.at("determinant_instances").get<int>() > 0; }, verify_car_run},
        {"verify-wick", verify_wick_validate, never, verify_wick_run},
        {"clt-exact", clt_exact_validate, never, clt_exact_run},
        {"clt-mc", clt_mc_validate, always, clt_mc_run},
        {"ccr-charfn", ccr_charfn_validate, never, ccr_charfn_run},
        {"kh-ratio", kh_ratio_validate,
         [](const Json &p) { return p.at("random_instances").get<int>() > 0; }, kh_ratio_run},
        {"kh-copies", kh_copies_validate, kh_copies_needs_seed, kh_copies_run},
        {"oh-scan", oh_scan_validate, never, oh_scan_run},
        {"rp-weights", rp_weights_validate, never, rp_weights_run},
        {"growth-cert", growth_cert_validate, never, growth_cert_run},
    };
    return list;
}

} // namespace detail

Report run_command(const RunConfig &cfg) {
    const detail::Command *cmd = detail::find_command(cfg.command);
    if (!cmd)
        throw DomainError("unknown command '" + cfg.command + "'");
    struct CapGuard {
        std::size_t saved = linalg::dimension_cap();
        ~CapGuard() { linalg::set_dimension_cap(saved); }
    } guard;
    if (cfg.dimension_cap > 0)
        linalg::set_dimension_cap(cfg.dimension_cap);

    Report r;
    r.command = cfg.command;
    r.config = cfg.echo();
    const auto t0 = std::chrono::steady_clock::now();
    try {
        r.records = cmd->run(cfg);
    } catch (const std::exception &e) {
        Record rec;
        rec.id = "command-0";
        rec.kind = "command";
        rec.error = e.what();
        r.records.push_back(std::move(rec));
    }
    r.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

} // namespace ncq::cli
