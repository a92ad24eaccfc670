#pragma once

#include <cstdint>

#include <Eigen/Dense>

namespace jelk {

// Survival function P(X > x) for a chi-square variable with df degrees of
// freedom, via the regularized incomplete gamma function. Absolute error
// below 1e-10 over the useful range.
double chi_square_sf(double x, int df);

// Inverse of the CDF: returns x with P(X <= x) = p.
double chi_square_quantile(double p, int df);

// Deterministic counter-seeded generator. Each (seed, stream) pair yields an
// independent, reproducible sequence, so Monte Carlo replication r can use
// RngStream(base_seed, r) and be independent of scheduling. Copies diverge
// from the copy point; cheap value type.
class RngStream {
  public:
    RngStream(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t next_u64();
    double uniform();                  // strictly inside (0,1)
    double normal();                   // standard normal, Box-Muller
    double exponential(double rate);   // mean 1/rate
    double chi_square(int df);         // sum of df squared normals

  private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// n draws from N(mean, scale * I). `scale` multiplies the identity
// covariance, i.e. each coordinate has variance `scale`.
Eigen::MatrixXd sample_mvnormal(const Eigen::VectorXd& mean, double scale, int n,
                                RngStream& rng);

// n draws of sqrt(scale) * Z / sqrt(W/df), Z standard d-normal, W chi-square
// with df degrees of freedom shared across coordinates of one observation.
// Requires df >= 3 (finite variance).
Eigen::MatrixXd sample_mvt(int df, double scale, int dim, int n, RngStream& rng);

// n draws with independent exponential(rate) coordinates; mean 1/rate each.
Eigen::MatrixXd sample_mvexp(double rate, int dim, int n, RngStream& rng);

}  // namespace jelk
