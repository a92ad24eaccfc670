#include <cmath>

#include "doctest.h"
#include "jelk/stats.hpp"
#include "jelk/wilks.hpp"

using namespace jelk;

namespace {

Eigen::VectorXd alpha2(double a) {
    Eigen::VectorXd v(2);
    v << a, 1.0 - a;
    return v;
}

void check_spectrum(const WilksVerification& v, int k) {
    REQUIRE(v.eigenvalues.size() == k + 1);
    CHECK(std::abs(v.eigenvalues(0)) <= 1e-10);
    CHECK(std::abs(v.eigenvalues(1)) <= 1e-10);
    for (int i = 2; i <= k; ++i)
        CHECK(std::abs(v.eigenvalues(i) - 1.0) <= 1e-10);
    CHECK(std::abs(v.trace - (k - 1)) <= 1e-10);
    CHECK(v.identity_ok);
}

}  // namespace

TEST_CASE("wilks matrices for two balanced groups") {
    WilksMatrices m = build_wilks_matrices(alpha2(0.5));
    REQUIRE(m.sigma0.rows() == 3);

    Eigen::MatrixXd sigma0(3, 3);
    sigma0 << 1.0, 0.5, 0.5, 0.5, 0.5, 0.0, 0.5, 0.0, 0.5;
    CHECK((m.sigma0 - sigma0).cwiseAbs().maxCoeff() <= 1e-15);

    Eigen::MatrixXd a(3, 3);
    a << 0.5, -0.5, -0.5, -0.5, 1.5, -0.5, -0.5, -0.5, 1.5;
    CHECK((m.a_mat - a).cwiseAbs().maxCoeff() <= 1e-15);

    CHECK(m.w0(0, 0) == 1.0);
    CHECK(m.w0(1, 1) == 0.5);
    CHECK(m.w0(2, 2) == 0.5);
    CHECK(m.w0(0, 1) == 0.0);
}

TEST_CASE("spectrum of Sigma0*A counts the degrees of freedom") {
    check_spectrum(verify_wilks(alpha2(0.5)), 2);
    check_spectrum(verify_wilks(alpha2(0.4)), 2);

    Eigen::VectorXd equal3 = Eigen::VectorXd::Constant(3, 1.0 / 3.0);
    WilksVerification v3 = verify_wilks(equal3);
    check_spectrum(v3, 3);
    CHECK(std::abs(v3.trace - 2.0) <= 1e-10);

    WilksMatrices m3 = build_wilks_matrices(equal3);
    CHECK(m3.w0(0, 0) == 1.0);
    for (int i = 1; i <= 3; ++i)
        CHECK(m3.w0(i, i) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("spectrum holds across random group fractions") {
    RngStream rng(311, 0);
    for (int trial = 0; trial < 25; ++trial) {
        int k = 2 + static_cast<int>(rng.next_u64() % 5);  // 2..6
        Eigen::VectorXd alpha(k);
        double s = 0.0;
        for (int i = 0; i < k; ++i) {
            alpha(i) = rng.exponential(1.0);
            s += alpha(i);
        }
        alpha /= s;
        alpha(k - 1) = 1.0 - alpha.head(k - 1).sum();  // exact complement
        check_spectrum(verify_wilks(alpha), k);
    }
}

TEST_CASE("wilks input validation") {
    Eigen::VectorXd bad_sum(2);
    bad_sum << 0.5, 0.6;
    CHECK_THROWS_AS(build_wilks_matrices(bad_sum), ValidationError);

    Eigen::VectorXd nonpos(2);
    nonpos << 1.2, -0.2;
    CHECK_THROWS_AS(build_wilks_matrices(nonpos), ValidationError);

    Eigen::VectorXd single(1);
    single << 1.0;
    CHECK_THROWS_AS(build_wilks_matrices(single), ValidationError);
}

TEST_CASE("estimating-equation jacobian layout") {
    Eigen::VectorXd alpha = alpha2(0.5);
    Eigen::VectorXd gvar(2);
    gvar << 1.0, 4.0;
    Eigen::MatrixXd b = build_jacobian(alpha, 2.0, gvar);
    REQUIRE(b.rows() == 4);
    CHECK(b(0, 0) == 2.0);
    CHECK(b(0, 3) == 1.0);
    CHECK(b(1, 1) == 0.5);
    CHECK(b(2, 2) == 2.0);
    CHECK(b(1, 3) == 0.5);
    CHECK(b(3, 0) == 1.0);
    CHECK(b(3, 1) == 0.5);
    CHECK(b(3, 3) == 0.0);
    CHECK(b(1, 2) == 0.0);

    CHECK(Eigen::FullPivLU<Eigen::MatrixXd>(b).isInvertible());
}

TEST_CASE("jacobian stays nonsingular for random inputs") {
    RngStream rng(313, 0);
    for (int trial = 0; trial < 20; ++trial) {
        int k = 2 + static_cast<int>(rng.next_u64() % 4);
        Eigen::VectorXd alpha(k);
        double s = 0.0;
        for (int i = 0; i < k; ++i) {
            alpha(i) = rng.exponential(1.0);
            s += alpha(i);
        }
        alpha /= s;
        alpha(k - 1) = 1.0 - alpha.head(k - 1).sum();
        Eigen::VectorXd gvar(k);
        for (int i = 0; i < k; ++i)
            gvar(i) = 0.1 + 3.0 * rng.uniform();
        Eigen::MatrixXd b = build_jacobian(alpha, 0.1 + 3.0 * rng.uniform(), gvar);
        CHECK(Eigen::FullPivLU<Eigen::MatrixXd>(b).isInvertible());
    }
}

TEST_CASE("jacobian input validation") {
    Eigen::VectorXd alpha = alpha2(0.5);
    Eigen::VectorXd wrong(3);
    wrong << 1, 1, 1;
    CHECK_THROWS_AS(build_jacobian(alpha, 1.0, wrong), ValidationError);
    Eigen::VectorXd neg(2);
    neg << 1.0, -1.0;
    CHECK_THROWS_AS(build_jacobian(alpha, 1.0, neg), ValidationError);
    Eigen::VectorXd ok(2);
    ok << 1.0, 1.0;
    CHECK_THROWS_AS(build_jacobian(alpha, 0.0, ok), ValidationError);
}
