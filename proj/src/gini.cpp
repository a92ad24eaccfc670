#include "jelk/gini.hpp"

#include <stdexcept>

namespace jelk {

double u_statistic(const DistanceMatrix& dm) {
    const auto n = dm.values.rows();
    if (n < 2)
        throw std::domain_error("u_statistic: need at least 2 points");
    return dm.total / (0.5 * static_cast<double>(n) * static_cast<double>(n - 1));
}

double u_statistic_block(const DistanceMatrix& dm, int offset, int size) {
    if (size < 2)
        throw std::domain_error("u_statistic_block: need at least 2 points");
    double t = dm.values.block(offset, offset, size, size).sum() * 0.5;
    return t / (0.5 * static_cast<double>(size) * static_cast<double>(size - 1));
}

GiniStats gini_statistic(const PooledData& pooled, const DistanceMatrix& dm) {
    GiniStats out;
    out.u_pooled = u_statistic(dm);
    out.u_group.resize(pooled.k);
    for (int g = 0; g < pooled.k; ++g)
        out.u_group(g) =
            u_statistic_block(dm, pooled.group_offset[g], pooled.group_size[g]);
    // s_hat = U_n - sum alpha_k U_{n_k}; valid since the weights sum to 1.
    out.s_hat = out.u_pooled - pooled.alpha_hat.dot(out.u_group);
    // Degenerate all-identical data has u_pooled = 0; independence holds
    // trivially there, so report correlation 0.
    out.rho_hat = out.u_pooled > 0.0 ? out.s_hat / out.u_pooled : 0.0;
    return out;
}

double energy_distance(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
    const auto n1 = x.rows();
    const auto n2 = y.rows();
    if (n1 < 2 || n2 < 2)
        throw std::domain_error("energy_distance: each sample needs at least 2 points");
    if (x.cols() != y.cols())
        throw ValidationError("energy_distance: dimension mismatch");
    double cross = 0.0;
    for (Eigen::Index i = 0; i < n1; ++i)
        for (Eigen::Index j = 0; j < n2; ++j)
            cross += (x.row(i) - y.row(j)).norm();
    double within_x = 0.0;
    for (Eigen::Index i = 0; i < n1; ++i)
        for (Eigen::Index j = i + 1; j < n1; ++j)
            within_x += (x.row(i) - x.row(j)).norm();
    double within_y = 0.0;
    for (Eigen::Index i = 0; i < n2; ++i)
        for (Eigen::Index j = i + 1; j < n2; ++j)
            within_y += (y.row(i) - y.row(j)).norm();
    const double u_cross = cross / (static_cast<double>(n1) * static_cast<double>(n2));
    const double u_x = within_x / (0.5 * static_cast<double>(n1) * static_cast<double>(n1 - 1));
    const double u_y = within_y / (0.5 * static_cast<double>(n2) * static_cast<double>(n2 - 1));
    return 2.0 * u_cross - u_x - u_y;
}

}  // namespace jelk
