#pragma once

#include <Eigen/Dense>

#include "jelk/errors.hpp"

namespace jelk {

// Matrices behind the chi-square limit of the log-likelihood ratio: the
// covariance Sigma0 of the constraint vector, the quadratic-form weight A,
// and the diagonal scaling W0. All are (K+1)x(K+1) for K groups.
struct WilksMatrices {
    Eigen::MatrixXd sigma0;
    Eigen::MatrixXd a_mat;
    Eigen::MatrixXd w0;
};

struct WilksVerification {
    Eigen::VectorXd eigenvalues;  // of sigma0 * a_mat, ascending
    double trace = 0.0;
    bool identity_ok = false;  // A^T W0 A == A entrywise within 1e-10
};

// alpha: group fractions, positive, summing to 1 within 1e-12.
WilksMatrices build_wilks_matrices(const Eigen::VectorXd& alpha);

// Checks the degrees-of-freedom algebra: eigenvalues of Sigma0*A should be
// {0, 0, 1 x (K-1)} and the trace K-1 for any valid alpha.
WilksVerification verify_wilks(const Eigen::VectorXd& alpha);

// (K+2)x(K+2) Jacobian of the estimating equations at the null solution with
// variance estimates plugged in; diagnostic only (should be nonsingular).
Eigen::MatrixXd build_jacobian(const Eigen::VectorXd& alpha, double sigma_sq,
                               const Eigen::VectorXd& group_sigma_sq);

}  // namespace jelk
