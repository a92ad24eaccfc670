#include "jelk/stats.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace jelk {

namespace {

// Regularized lower incomplete gamma P(a,x) by its power series,
// P(a,x) = x^a e^-x / Gamma(a) * sum_n x^n / (a(a+1)...(a+n)).
// Converges quickly for x < a + 1.
double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int i = 0; i < 500; ++i) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * 1e-16)
            break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Regularized upper incomplete gamma Q(a,x) by the Lentz continued fraction
// Q(a,x) = e^-x x^a / Gamma(a) * 1/(x+1-a- 1(1-a)/(x+3-a- 2(2-a)/...)).
// Converges quickly for x > a + 1.
double gamma_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < 1e-16)
            break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

std::uint64_t splitmix64(std::uint64_t& s) {
    s += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace

double chi_square_sf(double x, int df) {
    if (df < 1)
        throw std::domain_error("chi_square_sf: df must be >= 1");
    if (x < 0.0)
        throw std::domain_error("chi_square_sf: x must be >= 0");
    if (x == 0.0)
        return 1.0;
    const double a = 0.5 * df;
    const double xs = 0.5 * x;
    // Series below the mean (x < df), continued fraction above: both sides
    // are used in their fast-converging regime.
    if (x < static_cast<double>(df))
        return 1.0 - gamma_p_series(a, xs);
    return gamma_q_cf(a, xs);
}

double chi_square_quantile(double p, int df) {
    if (df < 1)
        throw std::domain_error("chi_square_quantile: df must be >= 1");
    if (!(p > 0.0 && p < 1.0))
        throw std::domain_error("chi_square_quantile: p must be in (0,1)");
    const double q = 1.0 - p;  // target survival value
    double lo = 0.0;
    double hi = std::max(4.0 * df, 40.0);
    while (chi_square_sf(hi, df) > q)
        hi *= 2.0;
    // sf is strictly decreasing; bisect to well below the 1e-8 contract.
    for (int i = 0; i < 200 && hi - lo > 1e-12 * (1.0 + hi); ++i) {
        double mid = 0.5 * (lo + hi);
        if (chi_square_sf(mid, df) > q)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream) {
    // Hash seed and stream together so distinct pairs give unrelated states.
    std::uint64_t s = seed;
    std::uint64_t a = splitmix64(s);
    s = stream ^ 0xD1B54A32D192ED03ULL;
    std::uint64_t b = splitmix64(s);
    state_ = a ^ (b + 0x9E3779B97F4A7C15ULL + (a << 6) + (a >> 2));
}

std::uint64_t RngStream::next_u64() {
    return splitmix64(state_);
}

double RngStream::uniform() {
    // 53 random bits, offset by half an ulp so the result is never 0 or 1.
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
}

double RngStream::exponential(double rate) {
    if (rate <= 0.0)
        throw std::domain_error("exponential: rate must be positive");
    return -std::log(uniform()) / rate;
}

double RngStream::chi_square(int df) {
    if (df < 1)
        throw std::domain_error("chi_square: df must be >= 1");
    double s = 0.0;
    for (int i = 0; i < df; ++i) {
        double z = normal();
        s += z * z;
    }
    return s;
}

Eigen::MatrixXd sample_mvnormal(const Eigen::VectorXd& mean, double scale, int n,
                                RngStream& rng) {
    if (scale <= 0.0)
        throw std::domain_error("sample_mvnormal: scale must be positive");
    if (n < 1)
        throw std::domain_error("sample_mvnormal: n must be >= 1");
    const int d = static_cast<int>(mean.size());
    const double sd = std::sqrt(scale);
    Eigen::MatrixXd out(n, d);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j)
            out(i, j) = mean(j) + sd * rng.normal();
    return out;
}

Eigen::MatrixXd sample_mvt(int df, double scale, int dim, int n, RngStream& rng) {
    if (df < 3)
        throw std::domain_error("sample_mvt: df must be >= 3 (finite variance)");
    if (scale <= 0.0)
        throw std::domain_error("sample_mvt: scale must be positive");
    if (dim < 1 || n < 1)
        throw std::domain_error("sample_mvt: dim and n must be >= 1");
    const double sd = std::sqrt(scale);
    Eigen::MatrixXd out(n, dim);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < dim; ++j)
            out(i, j) = rng.normal();
        double w = rng.chi_square(df);
        out.row(i) *= sd / std::sqrt(w / static_cast<double>(df));
    }
    return out;
}

Eigen::MatrixXd sample_mvexp(double rate, int dim, int n, RngStream& rng) {
    if (rate <= 0.0)
        throw std::domain_error("sample_mvexp: rate must be positive");
    if (dim < 1 || n < 1)
        throw std::domain_error("sample_mvexp: dim and n must be >= 1");
    Eigen::MatrixXd out(n, dim);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < dim; ++j)
            out(i, j) = rng.exponential(rate);
    return out;
}

}  // namespace jelk
