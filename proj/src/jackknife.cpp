#include "jelk/jackknife.hpp"

#include <numeric>
#include <stdexcept>

#include "jelk/gini.hpp"

namespace jelk {

namespace {

Eigen::VectorXd pseudo_from_aggregates(const Eigen::VectorXd& row, double total, int m) {
    const double pairs = 0.5 * static_cast<double>(m) * static_cast<double>(m - 1);
    const double loo_pairs = 0.5 * static_cast<double>(m - 1) * static_cast<double>(m - 2);
    const double u = total / pairs;
    Eigen::VectorXd v(m);
    for (int i = 0; i < m; ++i) {
        const double u_loo = (total - row(i)) / loo_pairs;
        v(i) = m * u - (m - 1) * u_loo;
    }
    return v;
}

}  // namespace

Eigen::VectorXd pseudo_values(const DistanceMatrix& dm) {
    const int m = static_cast<int>(dm.values.rows());
    if (m < 3)
        throw std::domain_error("pseudo_values: need at least 3 points");
    return pseudo_from_aggregates(dm.row_sums, dm.total, m);
}

Eigen::VectorXd pseudo_values(const DistanceMatrix& dm, const std::vector<int>& idx) {
    const int m = static_cast<int>(idx.size());
    if (m < 3)
        throw std::domain_error("pseudo_values: need at least 3 points");
    Eigen::VectorXd row(m);
    for (int a = 0; a < m; ++a) {
        double s = 0.0;
        for (int b = 0; b < m; ++b)
            s += dm.values(idx[a], idx[b]);
        row(a) = s;
    }
    return pseudo_from_aggregates(row, row.sum() * 0.5, m);
}

PseudoValues all_pseudo_values(const PooledData& pooled, const DistanceMatrix& dm) {
    PseudoValues pv;
    pv.pooled = pseudo_values(dm);
    pv.u_pooled = u_statistic(dm);
    pv.groups.resize(pooled.k);
    pv.u_group.resize(pooled.k);
    for (int g = 0; g < pooled.k; ++g) {
        const int off = pooled.group_offset[g];
        const int nk = pooled.group_size[g];
        if (nk < 3)
            throw std::domain_error("all_pseudo_values: group " + std::to_string(g + 1) +
                                    " has fewer than 3 points");
        // Group blocks are contiguous in the pooled matrix, so the within-
        // group row sums come straight from the block.
        Eigen::VectorXd row =
            dm.values.block(off, off, nk, nk).rowwise().sum();
        pv.groups[g] = pseudo_from_aggregates(row, row.sum() * 0.5, nk);
        pv.u_group(g) = u_statistic_block(dm, off, nk);
    }
    return pv;
}

}  // namespace jelk
