#include "besmp/math.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace besmp {

namespace {
constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kLogSqrt2Pi = 0.91893853320467274;  // log(sqrt(2*pi))
}  // namespace

double norm_pdf(double z) { return std::exp(-0.5 * z * z - kLogSqrt2Pi); }

double log_norm_pdf(double z) { return -0.5 * z * z - kLogSqrt2Pi; }

double norm_cdf(double z) { return 0.5 * std::erfc(-z / kSqrt2); }

double log_norm_cdf(double z) {
    if (z > -20.0) {
        // erfc has plenty of headroom here (erfc(14.2) ~ 1e-89).
        return std::log(0.5 * std::erfc(-z / kSqrt2));
    }
    // Asymptotic expansion of Phi(z) = phi(z)/|z| * (1 - 1/z^2 + 3/z^4 - ...).
    const double zi2 = 1.0 / (z * z);
    const double series = 1.0 + zi2 * (-1.0 + zi2 * (3.0 + zi2 * (-15.0 + zi2 * 105.0)));
    return -0.5 * z * z - kLogSqrt2Pi - std::log(-z) + std::log(series);
}

double log_norm_interval(double lo, double hi) {
    if (!(lo < hi)) throw std::invalid_argument("log_norm_interval: requires lo < hi");
    if (std::isinf(lo) && std::isinf(hi)) return 0.0;
    if (std::isinf(lo)) return log_norm_cdf(hi);
    if (std::isinf(hi)) return log_norm_cdf(-lo);
    // Phi(hi) - Phi(lo) = Phi(-lo) - Phi(-hi); pick the tail where both CDF
    // values are small so the log-space subtraction keeps precision.
    double la, lb;
    if (lo + hi <= 0.0) {
        la = log_norm_cdf(lo);
        lb = log_norm_cdf(hi);
    } else {
        la = log_norm_cdf(-hi);
        lb = log_norm_cdf(-lo);
    }
    const double d = la - lb;  // <= 0
    if (d >= 0.0) return -std::numeric_limits<double>::infinity();
    return lb + std::log1p(-std::exp(d));
}

double binary_entropy_phi(double z) {
    const double lp = log_norm_cdf(z);
    const double lq = log_norm_cdf(-z);
    const double p = std::exp(lp);
    const double q = std::exp(lq);
    double h = 0.0;
    if (p > 0.0) h -= p * lp;
    if (q > 0.0) h -= q * lq;
    return h;
}

namespace {

// Golub-Welsch: nodes are eigenvalues of the Jacobi matrix of the orthogonal
// polynomial recurrence; weights come from the first eigenvector components.
QuadRule golub_welsch(const Eigen::VectorXd& offdiag, double weight_total) {
    const int n = static_cast<int>(offdiag.size()) + 1;
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, offdiag);
    QuadRule rule;
    rule.nodes = solver.eigenvalues();
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        const double v0 = solver.eigenvectors()(0, i);
        rule.weights(i) = weight_total * v0 * v0;
    }
    return rule;
}

QuadRule make_gauss_hermite(int n) {
    Eigen::VectorXd offdiag(n - 1);
    for (int k = 1; k < n; ++k) offdiag(k - 1) = std::sqrt(0.5 * k);
    return golub_welsch(offdiag, std::sqrt(M_PI));
}

QuadRule make_gauss_legendre(int n) {
    Eigen::VectorXd offdiag(n - 1);
    for (int k = 1; k < n; ++k) offdiag(k - 1) = k / std::sqrt(4.0 * k * k - 1.0);
    return golub_welsch(offdiag, 2.0);
}

const QuadRule& cached_rule(int n, std::map<int, QuadRule>& cache, std::mutex& mutex,
                            QuadRule (*make)(int)) {
    if (n < 1) throw std::invalid_argument("quadrature rule needs at least one node");
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, make(n)).first;
    return it->second;
}

}  // namespace

const QuadRule& gauss_hermite(int n) {
    static std::map<int, QuadRule> cache;
    static std::mutex mutex;
    return cached_rule(n, cache, mutex, &make_gauss_hermite);
}

const QuadRule& gauss_legendre(int n) {
    static std::map<int, QuadRule> cache;
    static std::mutex mutex;
    return cached_rule(n, cache, mutex, &make_gauss_legendre);
}

}  // namespace besmp
