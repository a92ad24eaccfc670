#pragma once

#include <vector>

#include <Eigen/Dense>

#include "jelk/data.hpp"
#include "jelk/jel.hpp"
#include "jelk/stats.hpp"

namespace jelk {

struct PermutationConfig {
    int num_permutations = 199;
    RngStream rng{0, 0};
};

// Permutation test on the statistic n * s_hat: group labels are reshuffled
// over the fixed pooled distance matrix, so only index sets change. p-value
// uses the add-one estimator (1 + #{permuted >= observed}) / (B + 1).
TestResult permutation_energy_test(const PooledData& pooled, const DistanceMatrix& dm,
                                   PermutationConfig cfg, double alpha);
TestResult permutation_energy_test(const PooledData& pooled, PermutationConfig cfg,
                                   double alpha);

// Kruskal-Wallis H with midranks and the standard tie-correction divisor,
// chi-square(K-1) calibrated. All-tied input yields statistic 0, p = 1.
TestResult kruskal_wallis(const Eigen::VectorXd& values, const std::vector<int>& labels,
                          double alpha);

// K-sample Anderson-Darling, discrete/midrank variant, with the asymptotic
// p-value interpolated across the published critical-value table. The
// reported statistic is the variance-normalized version.
TestResult anderson_darling_ksample(const Eigen::VectorXd& values,
                                    const std::vector<int>& labels, double alpha);

// Univariate reduction for rank tests on d > 1 data: the Euclidean norm of
// each observation. For d = 1 callers should pass the raw coordinate.
Eigen::VectorXd norm_reduction(const Eigen::MatrixXd& points);

}  // namespace jelk
