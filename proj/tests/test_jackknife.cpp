#include <cmath>
#include <vector>

#include "doctest.h"
#include "jelk/data.hpp"
#include "jelk/gini.hpp"
#include "jelk/jackknife.hpp"
#include "jelk/stats.hpp"

using namespace jelk;

namespace {

Eigen::MatrixXd col(const std::vector<double>& xs) {
    Eigen::MatrixXd m(static_cast<int>(xs.size()), 1);
    for (size_t i = 0; i < xs.size(); ++i)
        m(static_cast<int>(i), 0) = xs[i];
    return m;
}

// O(m^3) reference: recompute every leave-one-out U-statistic from scratch.
Eigen::VectorXd naive_pseudo(const Eigen::MatrixXd& pts) {
    const int m = static_cast<int>(pts.rows());
    auto u_of = [&](const std::vector<int>& idx) {
        double t = 0.0;
        for (size_t a = 0; a < idx.size(); ++a)
            for (size_t b = a + 1; b < idx.size(); ++b)
                t += (pts.row(idx[a]) - pts.row(idx[b])).norm();
        double c = 0.5 * idx.size() * (idx.size() - 1.0);
        return t / c;
    };
    std::vector<int> all(m);
    for (int i = 0; i < m; ++i)
        all[i] = i;
    const double u = u_of(all);
    Eigen::VectorXd v(m);
    for (int i = 0; i < m; ++i) {
        std::vector<int> rest;
        for (int j = 0; j < m; ++j)
            if (j != i)
                rest.push_back(j);
        v(i) = m * u - (m - 1) * u_of(rest);
    }
    return v;
}

}  // namespace

TEST_CASE("pseudo-values hand example {0,1,3}") {
    Eigen::VectorXd v = pseudo_values(pairwise_distances(col({0, 1, 3})));
    REQUIRE(v.size() == 3);
    CHECK(std::abs(v(0) - 2.0) <= 1e-12);
    CHECK(std::abs(v(1) - 0.0) <= 1e-12);
    CHECK(std::abs(v(2) - 4.0) <= 1e-12);
}

TEST_CASE("pseudo-value mean equals the u-statistic") {
    RngStream rng(31, 0);
    for (int trial = 0; trial < 20; ++trial) {
        int m = 3 + static_cast<int>(rng.next_u64() % 20);
        Eigen::MatrixXd pts(m, 2);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < 2; ++j)
                pts(i, j) = rng.normal();
        DistanceMatrix dm = pairwise_distances(pts);
        Eigen::VectorXd v = pseudo_values(dm);
        double u = u_statistic(dm);
        CHECK(std::abs(v.mean() - u) <= 1e-10 * std::max(1.0, std::abs(u)));
    }
}

TEST_CASE("small samples are rejected") {
    CHECK_THROWS_AS(pseudo_values(pairwise_distances(col({0, 2}))), std::domain_error);
    DistanceMatrix dm = pairwise_distances(col({0, 1, 3, 6}));
    CHECK_THROWS_AS(pseudo_values(dm, std::vector<int>{0, 2}), std::domain_error);
}

TEST_CASE("row-sum shortcut equals naive recomputation") {
    RngStream rng(37, 0);
    for (int trial = 0; trial < 40; ++trial) {
        int m = 3 + static_cast<int>(rng.next_u64() % 28);
        int d = 1 + static_cast<int>(rng.next_u64() % 3);
        Eigen::MatrixXd pts(m, d);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < d; ++j)
                pts(i, j) = rng.normal() * 3.0;
        Eigen::VectorXd fast = pseudo_values(pairwise_distances(pts));
        Eigen::VectorXd slow = naive_pseudo(pts);
        CHECK((fast - slow).cwiseAbs().maxCoeff() <= 1e-10);
    }
}

TEST_CASE("subset pseudo-values match a directly built sub-matrix") {
    RngStream rng(41, 0);
    Eigen::MatrixXd pts(25, 2);
    for (int i = 0; i < 25; ++i)
        for (int j = 0; j < 2; ++j)
            pts(i, j) = rng.normal();
    DistanceMatrix dm = pairwise_distances(pts);
    std::vector<int> idx = {2, 3, 7, 11, 12, 19, 24};
    Eigen::MatrixXd sub(static_cast<int>(idx.size()), 2);
    for (size_t i = 0; i < idx.size(); ++i)
        sub.row(static_cast<int>(i)) = pts.row(idx[i]);
    Eigen::VectorXd a = pseudo_values(dm, idx);
    Eigen::VectorXd b = pseudo_values(pairwise_distances(sub));
    CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("all_pseudo_values ties the pooled and group views together") {
    std::vector<Sample> samples(2);
    samples[0].label = "a";
    samples[0].points = col({0, 1, 3});
    samples[1].label = "b";
    samples[1].points = col({0, 2, 5});
    PooledData pooled = build_pooled(samples);
    DistanceMatrix dm = pairwise_distances(pooled.points);
    PseudoValues pv = all_pseudo_values(pooled, dm);

    REQUIRE(pv.pooled.size() == 6);
    REQUIRE(pv.groups.size() == 2);
    // pooled {0,1,3,0,2,5}: pair sum 35 over 15 pairs
    CHECK(pv.u_pooled == doctest::Approx(35.0 / 15.0).epsilon(1e-14));
    CHECK(std::abs(pv.pooled.mean() - 35.0 / 15.0) <= 1e-10);
    // group 1 is the hand example
    CHECK(std::abs(pv.groups[0](0) - 2.0) <= 1e-12);
    CHECK(std::abs(pv.groups[0](1) - 0.0) <= 1e-12);
    CHECK(std::abs(pv.groups[0](2) - 4.0) <= 1e-12);
    for (int k = 0; k < 2; ++k)
        CHECK(std::abs(pv.groups[k].mean() - pv.u_group(k)) <= 1e-10);
}

TEST_CASE("group below 3 points fails") {
    PooledData pooled;
    pooled.n = 5;
    pooled.dim = 1;
    pooled.k = 2;
    pooled.points = col({0, 1, 3, 0, 2});
    pooled.group_offset = {0, 3};
    pooled.group_size = {3, 2};
    pooled.group_of = {0, 0, 0, 1, 1};
    pooled.alpha_hat = Eigen::VectorXd(2);
    pooled.alpha_hat << 0.6, 0.4;
    DistanceMatrix dm = pairwise_distances(pooled.points);
    CHECK_THROWS_AS(all_pseudo_values(pooled, dm), std::domain_error);
}

TEST_CASE("constant data yields constant pseudo-values") {
    std::vector<Sample> samples(2);
    samples[0].label = "a";
    samples[0].points = col({4, 4, 4});
    samples[1].label = "b";
    samples[1].points = col({4, 4, 4});
    PooledData pooled = build_pooled(samples);
    PseudoValues pv = all_pseudo_values(pooled, pairwise_distances(pooled.points));
    CHECK(pv.pooled.maxCoeff() == pv.pooled.minCoeff());
}

TEST_CASE("pseudo-value dispersion approaches the projection variance") {
    // For one N(0,1) sample the pseudo-value variance tends to 4 * 0.16275158
    // (the variance of x -> E|x - X'|, computed by a high-precision oracle).
    RngStream rng(43, 0);
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(1);
    Eigen::MatrixXd pts = sample_mvnormal(mean, 1.0, 2000, rng);
    Eigen::VectorXd v = pseudo_values(pairwise_distances(pts));
    const double theta0 = 2.0 / std::sqrt(M_PI);  // E|X - X'| for N(0,1)
    double s = (v.array() - theta0).square().mean();
    CHECK(s == doctest::Approx(0.651006317767).epsilon(0.10));
}
