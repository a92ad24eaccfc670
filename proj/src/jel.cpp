#include "jelk/jel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "jelk/gini.hpp"
#include "jelk/stats.hpp"

namespace jelk {

namespace {

// Compensated summation; the residual certificate asks for 1e-10 absolutes
// on sums of a thousand terms, which naive accumulation does not guarantee.
struct Kahan {
    double s = 0.0, c = 0.0;
    void add(double x) {
        double y = x - c;
        double t = s + y;
        c = (t - s) - y;
        s = t;
    }
    double value() const { return s; }
};

// sum_i (v_i - theta) / (1 + lam (v_i - theta))
double lambda_objective(const Eigen::VectorXd& v, double theta, double lam) {
    Kahan acc;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        double d = v(i) - theta;
        acc.add(d / (1.0 + lam * d));
    }
    return acc.value();
}

double lambda_objective_deriv(const Eigen::VectorXd& v, double theta, double lam) {
    Kahan acc;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        double d = v(i) - theta;
        double den = 1.0 + lam * d;
        acc.add(-d * d / (den * den));
    }
    return acc.value();
}

// sum_i 1 / (1 + lam (v_i - theta)); equals the sample size at an exact root.
double weight_denominator_sum(const Eigen::VectorXd& v, double theta, double lam) {
    Kahan acc;
    for (Eigen::Index i = 0; i < v.size(); ++i)
        acc.add(1.0 / (1.0 + lam * (v(i) - theta)));
    return acc.value();
}

double log_ratio_term(const Eigen::VectorXd& v, double theta, double lam) {
    Kahan acc;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        double a = lam * (v(i) - theta);
        if (a <= -1.0)
            throw SolverError("log-likelihood feasibility violated (solver bug)");
        acc.add(std::log1p(a));
    }
    return 2.0 * acc.value();
}

struct InnerState {
    double lambda_pooled = 0.0;
    Eigen::VectorXd lambda_group;
    double g = 0.0;  // third-equation left-hand side
};

// Solve the pooled and group lambda equations at this theta and evaluate the
// remaining equation of the system,
//   G(theta) = -lam * sum 1/(1+lam(V_i-theta)) - sum_k lam_k * sum_l 1/(...).
InnerState eval_third_equation(const PseudoValues& pv, double theta,
                               const SolverConfig& cfg) {
    InnerState st;
    st.lambda_group.resize(static_cast<Eigen::Index>(pv.groups.size()));
    st.lambda_pooled = inner_lambda(pv.pooled, theta, cfg);
    Kahan g;
    g.add(-st.lambda_pooled * weight_denominator_sum(pv.pooled, theta, st.lambda_pooled));
    for (size_t k = 0; k < pv.groups.size(); ++k) {
        double lk = inner_lambda(pv.groups[k], theta, cfg);
        st.lambda_group(static_cast<Eigen::Index>(k)) = lk;
        g.add(-lk * weight_denominator_sum(pv.groups[k], theta, lk));
    }
    st.g = g.value();
    return st;
}

double profile_value(const PseudoValues& pv, double theta, const InnerState& st) {
    double val = log_ratio_term(pv.pooled, theta, st.lambda_pooled);
    for (size_t k = 0; k < pv.groups.size(); ++k)
        val += log_ratio_term(pv.groups[k], theta,
                              st.lambda_group(static_cast<Eigen::Index>(k)));
    return val;
}

}  // namespace

double inner_lambda(const Eigen::VectorXd& v, double theta, const SolverConfig& cfg) {
    const double vmin = v.minCoeff();
    const double vmax = v.maxCoeff();
    if (!(vmin < theta && theta < vmax))
        throw std::domain_error("inner_lambda: theta=" + std::to_string(theta) +
                                " outside the open pseudo-value range (" +
                                std::to_string(vmin) + ", " + std::to_string(vmax) + ")");
    // Open feasibility interval for lambda; the objective falls from +inf at
    // the left pole to -inf at the right pole.
    double lo = -1.0 / (vmax - theta);
    double hi = 1.0 / (theta - vmin);
    double x = 0.0;
    double best_x = 0.0;
    double best_f = std::numeric_limits<double>::infinity();
    const int m = static_cast<int>(v.size());
    for (int it = 0; it < cfg.max_iter; ++it) {
        double fx = lambda_objective(v, theta, x);
        if (std::fabs(fx) < best_f) {
            best_f = std::fabs(fx);
            best_x = x;
        }
        if (std::fabs(fx) <= cfg.inner_tol)
            return x;
        if (fx > 0.0)
            lo = x;
        else
            hi = x;
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() *
                           (std::fabs(lo) + std::fabs(hi) + 1e-300))
            break;
        double fpx = lambda_objective_deriv(v, theta, x);
        double step = fx / fpx;  // fpx < 0, so this moves in the right direction
        double cand = x - step;
        if (!std::isfinite(cand) || cand <= lo || cand >= hi)
            cand = 0.5 * (lo + hi);
        x = cand;
    }
    // The bracket collapsed (or the iteration cap hit) before reaching the
    // tight target; accept if within the size-scaled tolerance.
    if (best_f <= cfg.inner_tol * std::max(1, m))
        return best_x;
    throw SolverError("inner_lambda: no convergence, |objective|=" +
                      std::to_string(best_f) + " at theta=" + std::to_string(theta));
}

JelSolution solve_system(const PseudoValues& pv, const Eigen::VectorXd& alpha_hat,
                         const SolverConfig& cfg) {
    const int K = static_cast<int>(pv.groups.size());
    if (K < 1)
        throw ValidationError("solve_system: no groups");
    if (alpha_hat.size() != K)
        throw ValidationError("solve_system: alpha_hat size mismatch");

    // theta must stay strictly inside every pseudo-value range at once.
    double lo = pv.pooled.minCoeff();
    double hi = pv.pooled.maxCoeff();
    for (const auto& g : pv.groups) {
        lo = std::max(lo, g.minCoeff());
        hi = std::min(hi, g.maxCoeff());
    }
    if (!(lo < hi))
        throw ValidationError(
            "solve_system: degenerate data, empty feasibility interval for theta "
            "(a group's pseudo-values may all be equal)");
    const double width = hi - lo;
    const double a = lo + cfg.bracket_margin * width;
    const double b = hi - cfg.bracket_margin * width;

    int evals = 0;
    auto eval = [&](double theta) {
        ++evals;
        return eval_third_equation(pv, theta, cfg);
    };

    // Scan for sign changes of G; it runs from -inf to +inf across the
    // interval, so a coarse grid nearly always brackets the root. Retry
    // finer before giving up.
    struct Candidate {
        double theta;
        InnerState st;
    };
    std::vector<Candidate> roots;
    for (int npoints : {64, 512}) {
        std::vector<double> thetas(npoints);
        std::vector<InnerState> states(npoints);
        for (int j = 0; j < npoints; ++j) {
            thetas[j] = a + (b - a) * j / (npoints - 1);
            states[j] = eval(thetas[j]);
        }
        for (int j = 0; j + 1 < npoints; ++j) {
            if (states[j].g == 0.0) {
                roots.push_back({thetas[j], states[j]});
                continue;
            }
            if (states[j].g * states[j + 1].g < 0.0) {
                // Bisect the bracket down to machine width.
                double tl = thetas[j], tr = thetas[j + 1];
                double gl = states[j].g;
                InnerState sm = states[j];
                double tm = tl;
                for (int it = 0; it < cfg.max_iter; ++it) {
                    tm = 0.5 * (tl + tr);
                    if (tm <= tl || tm >= tr)
                        break;  // interval no longer representable
                    sm = eval(tm);
                    if (sm.g == 0.0)
                        break;
                    if ((gl > 0.0) == (sm.g > 0.0)) {
                        tl = tm;
                        gl = sm.g;
                    } else {
                        tr = tm;
                    }
                }
                roots.push_back({tm, sm});
            }
        }
        if (!roots.empty())
            break;
    }

    JelSolution sol;
    sol.lambda_group.resize(K);
    if (!roots.empty()) {
        // Likelihood maximization: among the stationary points keep the one
        // with the smallest -2 log R.
        double best = std::numeric_limits<double>::infinity();
        for (const auto& c : roots) {
            double val = profile_value(pv, c.theta, c.st);
            if (val < best) {
                best = val;
                sol.theta = c.theta;
                sol.lambda_pooled = c.st.lambda_pooled;
                sol.lambda_group = c.st.lambda_group;
                sol.neg2logR = std::max(0.0, val);
            }
        }
    } else {
        // No sign change even on the fine grid: fall back to the point with
        // the smallest |G| and accept it only if it certifies as a root.
        double best = std::numeric_limits<double>::infinity();
        double best_theta = a;
        InnerState best_st;
        const int npoints = 2048;
        for (int j = 0; j < npoints; ++j) {
            double th = a + (b - a) * j / (npoints - 1);
            InnerState st = eval(th);
            if (std::fabs(st.g) < best) {
                best = std::fabs(st.g);
                best_theta = th;
                best_st = st;
            }
        }
        if (best > cfg.outer_tol)
            throw SolverError("solve_system: no sign change of the theta equation; "
                              "min |G| = " + std::to_string(best) + " at theta = " +
                              std::to_string(best_theta));
        sol.theta = best_theta;
        sol.lambda_pooled = best_st.lambda_pooled;
        sol.lambda_group = best_st.lambda_group;
        sol.neg2logR = std::max(0.0, profile_value(pv, best_theta, best_st));
    }
    sol.iterations = evals;

    // Residual certificate: the literal K+2 equation left-hand sides.
    sol.residuals.resize(K + 2);
    sol.residuals(0) = lambda_objective(pv.pooled, sol.theta, sol.lambda_pooled);
    Kahan g;
    g.add(-sol.lambda_pooled *
          weight_denominator_sum(pv.pooled, sol.theta, sol.lambda_pooled));
    for (int k = 0; k < K; ++k) {
        sol.residuals(k + 1) =
            lambda_objective(pv.groups[k], sol.theta, sol.lambda_group(k));
        g.add(-sol.lambda_group(k) *
              weight_denominator_sum(pv.groups[k], sol.theta, sol.lambda_group(k)));
    }
    sol.residuals(K + 1) = g.value();
    sol.converged = sol.residuals.cwiseAbs().maxCoeff() <= cfg.outer_tol;
    return sol;
}

double neg2_log_likelihood(const PseudoValues& pv, const JelSolution& sol) {
    double val = log_ratio_term(pv.pooled, sol.theta, sol.lambda_pooled);
    for (size_t k = 0; k < pv.groups.size(); ++k)
        val += log_ratio_term(pv.groups[k], sol.theta,
                              sol.lambda_group(static_cast<Eigen::Index>(k)));
    return std::max(0.0, val);
}

std::pair<Eigen::VectorXd, std::vector<Eigen::VectorXd>> weights(const PseudoValues& pv,
                                                                 const JelSolution& sol) {
    const double n = static_cast<double>(pv.pooled.size());
    Eigen::VectorXd p(pv.pooled.size());
    for (Eigen::Index i = 0; i < pv.pooled.size(); ++i) {
        double den = 1.0 + sol.lambda_pooled * (pv.pooled(i) - sol.theta);
        if (den <= 0.0)
            throw SolverError("weights: infeasible solution");
        p(i) = 1.0 / (n * den);
    }
    std::vector<Eigen::VectorXd> pk(pv.groups.size());
    for (size_t k = 0; k < pv.groups.size(); ++k) {
        const auto& v = pv.groups[k];
        const double nk = static_cast<double>(v.size());
        pk[k].resize(v.size());
        for (Eigen::Index l = 0; l < v.size(); ++l) {
            double den = 1.0 + sol.lambda_group(static_cast<Eigen::Index>(k)) *
                                   (v(l) - sol.theta);
            if (den <= 0.0)
                throw SolverError("weights: infeasible solution");
            pk[k](l) = 1.0 / (nk * den);
        }
    }
    return {std::move(p), std::move(pk)};
}

TestResult jel_test(const PooledData& pooled, const DistanceMatrix& dm, double alpha,
                    const SolverConfig& cfg) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw ValidationError("jel_test: alpha must be in (0,1)");
    PseudoValues pv = all_pseudo_values(pooled, dm);
    JelSolution sol = solve_system(pv, pooled.alpha_hat, cfg);
    if (!sol.converged)
        throw SolverError("jel_test: solver residuals exceed tolerance (max |r| = " +
                          std::to_string(sol.residuals.cwiseAbs().maxCoeff()) + ")");
    TestResult res;
    res.statistic = sol.neg2logR;
    res.df = pooled.k - 1;
    res.p_value = chi_square_sf(res.statistic, res.df);
    res.alpha = alpha;
    // A statistic exactly at the critical value counts as non-rejection.
    res.reject = res.p_value < alpha;
    return res;
}

TestResult jel_test(const PooledData& pooled, double alpha, const SolverConfig& cfg) {
    DistanceMatrix dm = pairwise_distances(pooled.points);
    return jel_test(pooled, dm, alpha, cfg);
}

}  // namespace jelk
