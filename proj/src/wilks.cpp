#include "jelk/wilks.hpp"

#include <cmath>

namespace jelk {

namespace {

void check_alpha(const Eigen::VectorXd& alpha) {
    if (alpha.size() < 2)
        throw ValidationError("wilks: need at least 2 group fractions");
    if ((alpha.array() <= 0.0).any())
        throw ValidationError("wilks: group fractions must be positive");
    if (std::abs(alpha.sum() - 1.0) > 1e-12)
        throw ValidationError("wilks: group fractions must sum to 1");
}

}  // namespace

WilksMatrices build_wilks_matrices(const Eigen::VectorXd& alpha) {
    check_alpha(alpha);
    const int k = static_cast<int>(alpha.size());
    WilksMatrices m;
    m.sigma0 = Eigen::MatrixXd::Zero(k + 1, k + 1);
    m.sigma0(0, 0) = 1.0;
    for (int i = 0; i < k; ++i) {
        m.sigma0(0, i + 1) = alpha(i);
        m.sigma0(i + 1, 0) = alpha(i);
        m.sigma0(i + 1, i + 1) = alpha(i);
    }
    m.a_mat = Eigen::MatrixXd::Constant(k + 1, k + 1, -0.5);
    m.a_mat(0, 0) = 0.5;
    for (int i = 0; i < k; ++i)
        m.a_mat(i + 1, i + 1) = 1.0 / alpha(i) - 0.5;
    m.w0 = Eigen::MatrixXd::Zero(k + 1, k + 1);
    m.w0(0, 0) = 1.0;
    for (int i = 0; i < k; ++i)
        m.w0(i + 1, i + 1) = alpha(i);
    return m;
}

WilksVerification verify_wilks(const Eigen::VectorXd& alpha) {
    WilksMatrices m = build_wilks_matrices(alpha);
    // Sigma0 is PSD but always singular (the all-but-first row sums equal the
    // first), so go through its PSD square root: S^{1/2} A S^{1/2} is
    // symmetric and shares the spectrum of Sigma0 * A.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.sigma0);
    Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    Eigen::MatrixXd half =
        es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> prod(half * m.a_mat * half);

    WilksVerification v;
    v.eigenvalues = prod.eigenvalues();
    v.trace = (m.sigma0 * m.a_mat).trace();
    Eigen::MatrixXd resid = m.a_mat.transpose() * m.w0 * m.a_mat - m.a_mat;
    v.identity_ok = resid.cwiseAbs().maxCoeff() <= 1e-10;
    return v;
}

Eigen::MatrixXd build_jacobian(const Eigen::VectorXd& alpha, double sigma_sq,
                               const Eigen::VectorXd& group_sigma_sq) {
    check_alpha(alpha);
    const int k = static_cast<int>(alpha.size());
    if (static_cast<int>(group_sigma_sq.size()) != k)
        throw ValidationError("wilks: need one variance per group");
    if (!(sigma_sq > 0.0) || (group_sigma_sq.array() <= 0.0).any())
        throw ValidationError("wilks: variances must be positive");
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(k + 2, k + 2);
    b(0, 0) = sigma_sq;
    b(0, k + 1) = 1.0;
    for (int i = 0; i < k; ++i) {
        b(i + 1, i + 1) = alpha(i) * group_sigma_sq(i);
        b(i + 1, k + 1) = alpha(i);
    }
    b(k + 1, 0) = 1.0;
    for (int i = 0; i < k; ++i)
        b(k + 1, i + 1) = alpha(i);
    return b;
}

}  // namespace jelk
