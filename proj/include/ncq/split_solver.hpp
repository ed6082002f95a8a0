#pragma once

// Generic nuclear-norm splitting problem
//
//   minimize  sum_t ||L_t x_t||_1   subject to  sum_t x_t = X
//
// where X is a list of complex entries and each L_t scatters entry e, scaled
// by w_t(e), into one position of an output matrix. A zero weight pins that
// entry of x_t to zero. Solved by ADMM with singular-value soft thresholding.

#include <vector>

#include "ncq/linalg.hpp"

namespace ncq::split {

struct Term {
    Eigen::Index rows = 0, cols = 0;
    std::vector<Eigen::Index> row, col; // output position of each entry
    std::vector<double> weight;         // >= 0
};

struct Problem {
    CVector target;
    std::vector<Term> terms;

    void validate() const;
};

struct Options {
    double tolerance = 1e-8;
    int max_iterations = 50000;
    double rho = 1.0;
    double adapt_ratio = 10.0;
};

struct Result {
    std::vector<CVector> parts;  // x_t, summing to the target
    std::vector<double> norms;   // ||L_t x_t||_1
    double objective = 0;
    double lower_bound = 0;      // from the scaled dual variables
    double primal_residual = 0;
    double dual_residual = 0;
    int iterations = 0;
    bool converged = false;
};

/// Output matrix L_t v.
CMatrix apply(const Term &t, const CVector &v);

Result solve(const Problem &p, const Options &opt = {});

} // namespace ncq::split
