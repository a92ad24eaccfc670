#pragma once

#include <vector>

#include <Eigen/Dense>

#include "jelk/data.hpp"

namespace jelk {

// Jackknife pseudo-values of the pooled and per-group U-statistics. The
// solver works entirely on these; raw points are never touched again.
struct PseudoValues {
    Eigen::VectorXd pooled;               // V_i, length n
    std::vector<Eigen::VectorXd> groups;  // V^k_l, length n_k each
    double u_pooled = 0.0;
    Eigen::VectorXd u_group;
};

// Pseudo-values over the full matrix: V_i = m U - (m-1) U^(-i), with the
// leave-one-out value U^(-i) = (T - r_i) / C(m-1,2) read off the cached row
// sums, O(m) total after aggregates. Requires m >= 3.
Eigen::VectorXd pseudo_values(const DistanceMatrix& dm);

// Same over the sub-sample given by an index set into dm.
Eigen::VectorXd pseudo_values(const DistanceMatrix& dm, const std::vector<int>& idx);

// Pooled pseudo-values (cross-group pairs included) plus each group's own.
PseudoValues all_pseudo_values(const PooledData& pooled, const DistanceMatrix& dm);

}  // namespace jelk
