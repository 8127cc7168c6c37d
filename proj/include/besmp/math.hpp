#ifndef BESMP_MATH_HPP
#define BESMP_MATH_HPP

#include <Eigen/Core>

namespace besmp {

// Probabilities are clamped to [kProbFloor, 1] before any log, so tail
// statistics of magnitude ~40 stay finite throughout.
inline constexpr double kProbFloor = 1e-300;
inline constexpr double kLogProbFloor = -690.77552789821368;  // log(1e-300)

double norm_pdf(double z);
double log_norm_pdf(double z);
double norm_cdf(double z);

// log Phi(z), exact into the far lower tail (asymptotic series below z = -20).
double log_norm_cdf(double z);

// log P(lo < Z <= hi) for a standard Gaussian; lo/hi may be +-infinity.
// Evaluated from whichever tail keeps the difference well conditioned.
double log_norm_interval(double lo, double hi);

// -p log p - (1-p) log(1-p) for p = Phi(z), computed in log space.
double binary_entropy_phi(double z);

struct QuadRule {
    Eigen::VectorXd nodes;
    Eigen::VectorXd weights;
};

// Gauss-Hermite rule for weight exp(-t^2) on (-inf, inf). Cached by n.
const QuadRule& gauss_hermite(int n);

// Gauss-Legendre rule on [-1, 1]. Cached by n.
const QuadRule& gauss_legendre(int n);

}  // namespace besmp

#endif
