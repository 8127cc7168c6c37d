#ifndef BESMP_GP_HPP
#define BESMP_GP_HPP

#include <cstdint>
#include <optional>

#include <Eigen/Core>

namespace besmp {

// Squared-exponential ARD kernel hyperparameters.
struct KernelParams {
    Eigen::VectorXd lengthscales;  // one per input dimension, > 0
    double signal_variance = 1.0;  // > 0
    double noise_variance = 0.0;   // >= 0

    int dim() const { return static_cast<int>(lengthscales.size()); }
    void validate() const;

    static KernelParams isotropic(int dim, double lengthscale, double signal_variance,
                                  double noise_variance);
};

double kernel(const Eigen::VectorXd& x1, const Eigen::VectorXd& x2, const KernelParams& params);

// Gram matrix of the rows of X (noise-free).
Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& X, const KernelParams& params);

// Cross-covariance between the rows of A and the rows of B.
Eigen::MatrixXd kernel_cross(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                             const KernelParams& params);

// Ordered input queries and their noisy observations.
struct Dataset {
    Eigen::MatrixXd inputs;        // n x d, one query per row
    Eigen::VectorXd observations;  // n

    Dataset() = default;
    explicit Dataset(int dim) : inputs(0, dim), observations(0) {}
    Dataset(Eigen::MatrixXd x, Eigen::VectorXd y);

    int size() const { return static_cast<int>(observations.size()); }
    int dim() const { return static_cast<int>(inputs.cols()); }
    void append(const Eigen::VectorXd& x, double y);
};

struct PosteriorMoments {
    double mean = 0.0;
    double variance = 0.0;              // sigma_x^2, clamped at 0
    double observation_variance = 0.0;  // sigma_x^2 + sigma_n^2

    double noise_variance() const { return observation_variance - variance; }
};

// Exact GP regression posterior. Immutable after construction; safe for
// concurrent queries. Refitting or new data means constructing a new instance.
class GpPosterior {
public:
    GpPosterior(KernelParams params, Dataset data);

    PosteriorMoments posterior(const Eigen::VectorXd& x) const;

    // Means and variances at many query points at once.
    void posterior_batch(const Eigen::MatrixXd& X, Eigen::VectorXd& mean,
                         Eigen::VectorXd& variance) const;

    double log_marginal_likelihood() const { return log_marginal_likelihood_; }

    const KernelParams& params() const { return params_; }
    const Dataset& data() const { return data_; }
    const Eigen::MatrixXd& chol() const { return chol_; }
    const Eigen::VectorXd& alpha() const { return alpha_; }
    double jitter() const { return jitter_; }

private:
    KernelParams params_;
    Dataset data_;
    Eigen::MatrixXd chol_;   // lower factor of K_DD + sigma_n^2 I (+ jitter)
    Eigen::VectorXd alpha_;  // (K_DD + sigma_n^2 I)^{-1} y
    double jitter_ = 0.0;
    double log_marginal_likelihood_ = 0.0;
};

// p(f(x) | y_{D u {x}}) from p(f(x) | y_D) and the new observation y_x at the
// same x: mean (sigma_x^2 y + sigma_n^2 mu)/sigma_+^2, variance
// sigma_x^2 sigma_n^2 / sigma_+^2.
PosteriorMoments incremental_conditional(const PosteriorMoments& moments, double y_x);

struct MleBounds {
    double lengthscale_min = 1e-2;
    double lengthscale_max = 1e2;
    double signal_variance_min = 1e-2;
    double signal_variance_max = 1e2;
    double noise_variance_min = 1e-8;
    double noise_variance_max = 1.0;
};

struct MleOptions {
    MleBounds bounds;
    int restarts = 10;
    int max_steps = 150;
    std::optional<KernelParams> init;       // used as the first start when given
    std::optional<double> fixed_noise;      // pin sigma_n^2 instead of fitting it
};

// Multi-start projected gradient ascent on the log marginal likelihood over
// log-hyperparameters. Returns the best hyperparameters found.
KernelParams fit_mle(const Dataset& data, const MleOptions& opts, std::uint64_t rng_seed);

double log_marginal_likelihood(const Dataset& data, const KernelParams& params);

// Gradient w.r.t. (log l_1, ..., log l_d, log sigma_s^2, log sigma_n^2).
Eigen::VectorXd log_marginal_likelihood_gradient(const Dataset& data, const KernelParams& params);

}  // namespace besmp

#endif
