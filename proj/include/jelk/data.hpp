#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "jelk/errors.hpp"

namespace jelk {

// One labeled group of observations, points in rows.
struct Sample {
    std::string label;
    Eigen::MatrixXd points;  // n_k x d
};

// The K samples concatenated in group order. Group k occupies the contiguous
// pooled row range [group_offset[k], group_offset[k] + group_size[k]).
struct PooledData {
    std::vector<Sample> samples;
    Eigen::MatrixXd points;      // n x d
    int n = 0;
    int dim = 0;
    int k = 0;
    Eigen::VectorXd alpha_hat;   // n_k / n, last entry as complement so sum is exactly 1
    std::vector<int> group_of;        // pooled row -> group index
    std::vector<int> group_offset;    // group -> first pooled row
    std::vector<int> group_size;      // group -> n_k
};

// Symmetric Euclidean distance matrix with its cached aggregates.
struct DistanceMatrix {
    Eigen::MatrixXd values;    // n x n, zero diagonal
    Eigen::VectorXd row_sums;  // r_i = sum_j values(i,j)
    double total = 0.0;        // sum over unordered pairs, accumulated directly
};

// Validates and concatenates K >= 2 samples of shared dimension; every group
// needs at least 3 points (leave-one-out U-statistics are undefined below).
PooledData build_pooled(std::vector<Sample> samples);

DistanceMatrix pairwise_distances(const Eigen::MatrixXd& points);

}  // namespace jelk
