#pragma once

#include <Eigen/Dense>

#include "jelk/data.hpp"

namespace jelk {

// Point estimates behind the test: U-statistics of the distance kernel for
// the pooled sample and each group, the between/within gap s_hat, and the
// Gini correlation rho_hat = s_hat / u_pooled.
struct GiniStats {
    double u_pooled = 0.0;
    Eigen::VectorXd u_group;
    double s_hat = 0.0;
    double rho_hat = 0.0;
};

// Mean pairwise distance: total / C(n,2). Unbiased for E||X1 - X2||.
double u_statistic(const DistanceMatrix& dm);

// U-statistic of the block of dm rows/columns [offset, offset + size).
double u_statistic_block(const DistanceMatrix& dm, int offset, int size);

// Group U-statistics are read off the pooled matrix by index restriction, so
// the kernel is evaluated once per pair overall.
GiniStats gini_statistic(const PooledData& pooled, const DistanceMatrix& dm);

// Two-sample energy distance estimate:
//   2 * mean cross distance - within-x U - within-y U.
// Can be negative in finite samples.
double energy_distance(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y);

}  // namespace jelk
