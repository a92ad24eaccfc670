#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "jelk/data.hpp"
#include "jelk/jackknife.hpp"

namespace jelk {

struct SolverConfig {
    double inner_tol = 1e-12;      // absolute target for the lambda equations
    double outer_tol = 1e-10;      // residual certificate for all K+2 equations
    int max_iter = 200;            // per root search
    double bracket_margin = 1e-9;  // relative inset from the feasibility endpoints
};

// Solution of the K+2 Lagrange equations: the common mean theta, the pooled
// multiplier, one multiplier per group, and the log-likelihood ratio.
struct JelSolution {
    double theta = 0.0;
    double lambda_pooled = 0.0;
    Eigen::VectorXd lambda_group;
    double neg2logR = 0.0;
    Eigen::VectorXd residuals;  // the K+2 equation left-hand sides at the solution
    bool converged = false;
    int iterations = 0;         // outer function evaluations
};

struct TestResult {
    double statistic = 0.0;
    int df = 0;
    double p_value = 1.0;
    double alpha = 0.05;
    bool reject = false;
};

// Unique root of sum_i (v_i - theta) / (1 + lambda (v_i - theta)) = 0 in the
// open interval (-1/(max v - theta), 1/(theta - min v)). The objective is
// strictly decreasing there, so a safeguarded Newton iteration with a
// maintained bracket always converges. Requires min v < theta < max v.
double inner_lambda(const Eigen::VectorXd& v, double theta, const SolverConfig& cfg = {});

// Nested solve: for each candidate theta the lambdas come from inner_lambda,
// and the remaining equation in theta is bracketed by a sign-change scan over
// the feasibility interval. With several sign changes the root with the
// smallest -2 log R wins (the likelihood problem is a maximization).
JelSolution solve_system(const PseudoValues& pv, const Eigen::VectorXd& alpha_hat,
                         const SolverConfig& cfg = {});

// 2 sum_k sum_l log(1 + lambda_k (V^k_l - theta)) + 2 sum_i log(1 + lambda (V_i - theta)).
double neg2_log_likelihood(const PseudoValues& pv, const JelSolution& sol);

// The maximizing probability weights: p_i = (1/n) / (1 + lambda (V_i - theta))
// and p_kl = (1/n_k) / (1 + lambda_k (V^k_l - theta)).
std::pair<Eigen::VectorXd, std::vector<Eigen::VectorXd>> weights(const PseudoValues& pv,
                                                                 const JelSolution& sol);

// Full pipeline: distances, pseudo-values, solve, chi-square(K-1) p-value.
TestResult jel_test(const PooledData& pooled, double alpha, const SolverConfig& cfg = {});

// Same but reusing an existing pooled distance matrix.
TestResult jel_test(const PooledData& pooled, const DistanceMatrix& dm, double alpha,
                    const SolverConfig& cfg = {});

}  // namespace jelk
