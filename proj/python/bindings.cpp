#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ncq/cli.hpp"
#include "ncq/climit.hpp"
#include "ncq/errors.hpp"
#include "ncq/khintchine.hpp"
#include "ncq/opspaces.hpp"
#include "ncq/quasifree.hpp"

namespace py = pybind11;
using namespace ncq;

namespace {

using Letters = std::vector<std::pair<int, bool>>;

std::vector<quasifree::CarLetter> letters(const Letters &w) {
    std::vector<quasifree::CarLetter> out;
    for (auto [k, star] : w)
        out.push_back({k, star});
    return out;
}

khintchine::Normalization normalization(const std::string &s) {
    if (s == "symmetric")
        return khintchine::Normalization::symmetric;
    if (s == "right")
        return khintchine::Normalization::right;
    throw DomainError("normalization must be 'symmetric' or 'right'");
}

split::Options options(double tolerance, int max_iterations) {
    split::Options o;
    o.tolerance = tolerance;
    o.max_iterations = max_iterations;
    return o;
}

py::dict decomposition(const khintchine::DecompositionResult &r) {
    py::dict d;
    d["objective"] = r.objective;
    d["lower_bound"] = r.lower_bound;
    d["term_values"] = r.term_values;
    d["iterations"] = r.iterations;
    d["converged"] = r.converged;
    d["c"] = r.c;
    d["d"] = r.d;
    return d;
}

climit::CltInstance car_clt(const std::vector<double> &mu, const Letters &word, double T,
                            double q, const std::vector<double> &colours) {
    const int K = static_cast<int>(mu.size());
    climit::CltInstance inst{quasifree::car_kernel({mu}), {}, T, q, colours};
    for (const auto &l : letters(word))
        inst.word.push_back(quasifree::car_symbol(l, K));
    return inst;
}

py::object run_json(const std::string &config_text, std::optional<std::uint64_t> seed,
                    std::optional<int> jobs) {
    cli::Overrides o;
    o.seed = seed;
    o.jobs = jobs;
    const auto cfg = cli::load_config_text(config_text, o);
    cli::Report r;
    {
        py::gil_scoped_release release;
        r = cli::run_command(cfg);
    }
    return py::module_::import("json").attr("loads")(cli::report_json(r).dump());
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Quasi-free CAR/CCR moments, central limits and Khintchine-type norms";
    m.attr("__version__") = cli::kVersion;

    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<CapError>(m, "CapError", PyExc_ValueError);
    py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
    py::register_exception<cli::ConfigError>(m, "ConfigError", PyExc_ValueError);

    m.def("car_relation_residual", &quasifree::car_relation_residual, py::arg("K"));
    m.def("car_generator", &quasifree::car_generator, py::arg("k"), py::arg("K"));
    m.def(
        "quasifree_density",
        [](const std::vector<double> &mu) { return quasifree::quasifree_density({mu}); },
        py::arg("mu"));
    m.def(
        "car_dense_trace",
        [](const std::vector<double> &mu, const Letters &word) {
            return quasifree::car_dense_trace({mu}, letters(word));
        },
        py::arg("mu"), py::arg("word"), "Word as a list of (k, star) pairs, k starting at 1.");
    m.def(
        "car_moment_formula",
        [](const std::vector<double> &mu, const std::vector<int> &i, const std::vector<int> &j) {
            return quasifree::car_moment_formula({mu}, i, j);
        },
        py::arg("mu"), py::arg("i"), py::arg("j"));
    m.def(
        "car_wick_moment",
        [](const std::vector<double> &mu, const Letters &word, double q) {
            const int K = static_cast<int>(mu.size());
            std::vector<int> sym;
            for (const auto &l : letters(word))
                sym.push_back(quasifree::car_symbol(l, K));
            return quasifree::wick_moment(quasifree::car_kernel({mu}), sym, q);
        },
        py::arg("mu"), py::arg("word"), py::arg("q"));
    m.def(
        "moment_growth_certificate",
        [](const std::vector<double> &m) { return quasifree::moment_growth_certificate(m); },
        py::arg("moments"));

    m.def(
        "clt_finite_moment",
        [](const std::vector<double> &mu, const Letters &word, std::uint64_t n, double q, double T,
           const std::vector<double> &colours) {
            return climit::finite_n_moment_exact(car_clt(mu, word, T, q, colours), n);
        },
        py::arg("mu"), py::arg("word"), py::arg("n"), py::arg("q") = 0.0, py::arg("T") = 1.0,
        py::arg("colours") = std::vector<double>{});
    m.def(
        "clt_limit_moment",
        [](const std::vector<double> &mu, const Letters &word, double q, double T,
           const std::vector<double> &colours) {
            return climit::limit_moment(car_clt(mu, word, T, q, colours));
        },
        py::arg("mu"), py::arg("word"), py::arg("q") = 0.0, py::arg("T") = 1.0,
        py::arg("colours") = std::vector<double>{});
    m.def(
        "ccr_charfn_series",
        [](double mu, Complex z, Complex w, bool same_index, int order) {
            const auto r = climit::ccr_charfn_series(mu, z, w, same_index, order);
            return py::make_tuple(r.series, r.closed_form, r.error);
        },
        py::arg("mu"), py::arg("z"), py::arg("w"), py::arg("same_index") = true,
        py::arg("order") = 16, "Returns (series, closed_form, error).");

    m.def(
        "lhs_car_norm",
        [](const std::vector<CMatrix> &x, const std::vector<double> &mu, const std::string &norm) {
            return khintchine::lhs_car_norm(x, {mu}, normalization(norm));
        },
        py::arg("x"), py::arg("mu"), py::arg("normalization") = "symmetric");
    m.def(
        "two_term_infimum",
        [](const std::vector<CMatrix> &x, const std::vector<double> &lambda,
           const std::vector<double> &nu, double tolerance, int max_iterations) {
            return decomposition(
                khintchine::two_term_infimum({x, lambda, nu}, options(tolerance, max_iterations)));
        },
        py::arg("x"), py::arg("lam"), py::arg("nu"), py::arg("tolerance") = 1e-8,
        py::arg("max_iterations") = 50000);
    m.def(
        "khintchine_ratio",
        [](const std::vector<CMatrix> &x, const std::vector<double> &mu, const std::string &norm,
           double tolerance, int max_iterations) {
            const auto r = khintchine::khintchine_ratio(x, {mu}, normalization(norm),
                                                        options(tolerance, max_iterations));
            py::dict d;
            d["lhs"] = r.lhs;
            d["rhs"] = r.rhs;
            d["ratio"] = r.ratio;
            d["rhs_lower_bound"] = r.rhs_lower_bound;
            d["iterations"] = r.iterations;
            d["within_budget"] = r.within_budget;
            return d;
        },
        py::arg("x"), py::arg("mu"), py::arg("normalization") = "symmetric",
        py::arg("tolerance") = 1e-8, py::arg("max_iterations") = 50000);

    m.def(
        "oh_norm", [](const std::vector<CMatrix> &x) { return opspaces::oh_norm({x}); },
        py::arg("x"));
    m.def("rp_sigma", &opspaces::rp_sigma, py::arg("p"), py::arg("j"));
    m.def(
        "truncation_range",
        [](double p, int n, double lambda, double eps) {
            const auto b = opspaces::truncation_range(p, n, lambda, eps);
            py::dict d;
            d["c_p"] = b.c_p;
            d["j_cap"] = b.j_cap;
            d["index_size"] = b.index_size;
            d["size_bound"] = b.size_bound;
            d["log2_budget"] = b.log2_budget;
            d["bound_ok"] = b.bound_ok;
            d["index_ok"] = b.index_ok;
            d["min_log_lambda"] = b.min_log_lambda;
            return d;
        },
        py::arg("p"), py::arg("n"), py::arg("lam"), py::arg("eps") = 1.0);

    m.def("commands", &cli::command_names);
    m.def("run_json", &run_json, py::arg("config"), py::arg("seed") = py::none(),
          py::arg("jobs") = py::none(), "Run a JSON config text; returns the report as a dict.");
}
