#include "jelk/data.hpp"

#include <cmath>

namespace jelk {

PooledData build_pooled(std::vector<Sample> samples) {
    const int k = static_cast<int>(samples.size());
    if (k < 2)
        throw ValidationError("build_pooled: need at least 2 groups, got " +
                              std::to_string(k));
    const int dim = static_cast<int>(samples[0].points.cols());
    int n = 0;
    for (int g = 0; g < k; ++g) {
        const auto& s = samples[g];
        std::string name = s.label.empty() ? ("#" + std::to_string(g + 1)) : s.label;
        if (static_cast<int>(s.points.cols()) != dim)
            throw ValidationError("build_pooled: group " + name + " has dimension " +
                                  std::to_string(s.points.cols()) + ", expected " +
                                  std::to_string(dim));
        if (s.points.rows() < 3)
            throw ValidationError("build_pooled: group " + name + " has " +
                                  std::to_string(s.points.rows()) +
                                  " points, need at least 3");
        if (!s.points.allFinite())
            throw ValidationError("build_pooled: group " + name +
                                  " contains non-finite coordinates");
        n += static_cast<int>(s.points.rows());
    }

    PooledData out;
    out.samples = std::move(samples);
    out.n = n;
    out.dim = dim;
    out.k = k;
    out.points.resize(n, dim);
    out.alpha_hat.resize(k);
    out.group_of.resize(n);
    out.group_offset.resize(k);
    out.group_size.resize(k);

    int off = 0;
    for (int g = 0; g < k; ++g) {
        const int nk = static_cast<int>(out.samples[g].points.rows());
        out.points.middleRows(off, nk) = out.samples[g].points;
        out.group_offset[g] = off;
        out.group_size[g] = nk;
        for (int i = 0; i < nk; ++i)
            out.group_of[off + i] = g;
        out.alpha_hat(g) = static_cast<double>(nk) / n;
        off += nk;
    }
    // Last weight as complement so the weights sum to exactly 1.
    out.alpha_hat(k - 1) = 1.0;
    for (int g = 0; g < k - 1; ++g)
        out.alpha_hat(k - 1) -= out.alpha_hat(g);
    return out;
}

DistanceMatrix pairwise_distances(const Eigen::MatrixXd& points) {
    const int n = static_cast<int>(points.rows());
    if (n < 2)
        throw std::domain_error("pairwise_distances: need at least 2 points");
    DistanceMatrix dm;
    dm.values.setZero(n, n);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            double d = (points.row(i) - points.row(j)).norm();
            dm.values(i, j) = d;
            dm.values(j, i) = d;
            total += d;
        }
    }
    dm.total = total;
    dm.row_sums = dm.values.rowwise().sum();
    return dm;
}

}  // namespace jelk
