#include "besmp/gp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Cholesky>

#include "besmp/errors.hpp"
#include "besmp/rng.hpp"

namespace besmp {

namespace {
constexpr double kLog2Pi = 1.8378770664093453;
}

void KernelParams::validate() const {
    if (lengthscales.size() == 0) throw std::invalid_argument("KernelParams: empty lengthscales");
    if (!(lengthscales.array() > 0.0).all())
        throw std::invalid_argument("KernelParams: lengthscales must be > 0");
    if (!(signal_variance > 0.0))
        throw std::invalid_argument("KernelParams: signal_variance must be > 0");
    if (!(noise_variance >= 0.0))
        throw std::invalid_argument("KernelParams: noise_variance must be >= 0");
}

KernelParams KernelParams::isotropic(int dim, double lengthscale, double signal_variance,
                                     double noise_variance) {
    KernelParams p;
    p.lengthscales = Eigen::VectorXd::Constant(dim, lengthscale);
    p.signal_variance = signal_variance;
    p.noise_variance = noise_variance;
    return p;
}

double kernel(const Eigen::VectorXd& x1, const Eigen::VectorXd& x2, const KernelParams& params) {
    if (x1.size() != params.lengthscales.size() || x2.size() != params.lengthscales.size())
        throw std::invalid_argument("kernel: input dimension does not match lengthscales");
    const double sq = ((x1 - x2).array() / params.lengthscales.array()).square().sum();
    return params.signal_variance * std::exp(-0.5 * sq);
}

Eigen::MatrixXd kernel_cross(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                             const KernelParams& params) {
    if (A.cols() != params.lengthscales.size() || B.cols() != params.lengthscales.size())
        throw std::invalid_argument("kernel_cross: input dimension does not match lengthscales");
    const Eigen::ArrayXd inv_l = params.lengthscales.array().inverse();
    const Eigen::MatrixXd As = A * inv_l.matrix().asDiagonal();
    const Eigen::MatrixXd Bs = B * inv_l.matrix().asDiagonal();
    const Eigen::VectorXd a2 = As.rowwise().squaredNorm();
    const Eigen::VectorXd b2 = Bs.rowwise().squaredNorm();
    Eigen::MatrixXd d2 = -2.0 * As * Bs.transpose();
    d2.colwise() += a2;
    d2.rowwise() += b2.transpose();
    return params.signal_variance * (-0.5 * d2.array().max(0.0)).exp().matrix();
}

Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& X, const KernelParams& params) {
    Eigen::MatrixXd K = kernel_cross(X, X, params);
    // Exact diagonal and symmetry regardless of rounding in the expansion.
    const int n = static_cast<int>(X.rows());
    for (int i = 0; i < n; ++i) {
        K(i, i) = params.signal_variance;
        for (int j = 0; j < i; ++j) K(i, j) = K(j, i) = 0.5 * (K(i, j) + K(j, i));
    }
    return K;
}

Dataset::Dataset(Eigen::MatrixXd x, Eigen::VectorXd y)
    : inputs(std::move(x)), observations(std::move(y)) {
    if (inputs.rows() != observations.size())
        throw std::invalid_argument("Dataset: inputs and observations must have equal length");
}

void Dataset::append(const Eigen::VectorXd& x, double y) {
    if (inputs.cols() != 0 && x.size() != inputs.cols())
        throw std::invalid_argument("Dataset::append: dimension mismatch");
    if (inputs.cols() == 0) inputs.resize(0, x.size());
    inputs.conservativeResize(inputs.rows() + 1, Eigen::NoChange);
    inputs.row(inputs.rows() - 1) = x.transpose();
    observations.conservativeResize(observations.size() + 1);
    observations(observations.size() - 1) = y;
}

namespace {

// Factorize K + sigma_n^2 I with escalating jitter. Returns the jitter used.
double factorize(const Eigen::MatrixXd& K, double noise_variance, double signal_variance,
                 Eigen::MatrixXd& chol_out) {
    double jitter = 1e-10 * signal_variance;
    const double jitter_cap = 1e-4 * signal_variance;
    while (true) {
        Eigen::MatrixXd A = K;
        A.diagonal().array() += noise_variance + jitter;
        Eigen::LLT<Eigen::MatrixXd> llt(A);
        if (llt.info() == Eigen::Success) {
            chol_out = llt.matrixL();
            return jitter;
        }
        if (jitter > jitter_cap)
            throw FitFailureError("GP factorization failed even with maximal jitter");
        jitter *= 2.0;
    }
}

}  // namespace

GpPosterior::GpPosterior(KernelParams params, Dataset data)
    : params_(std::move(params)), data_(std::move(data)) {
    params_.validate();
    if (data_.size() > 0 && data_.dim() != params_.dim())
        throw std::invalid_argument("GpPosterior: data dimension does not match kernel");
    const int n = data_.size();
    if (n == 0) {
        chol_.resize(0, 0);
        alpha_.resize(0);
        log_marginal_likelihood_ = 0.0;
        return;
    }
    const Eigen::MatrixXd K = kernel_matrix(data_.inputs, params_);
    jitter_ = factorize(K, params_.noise_variance, params_.signal_variance, chol_);
    alpha_ = chol_.triangularView<Eigen::Lower>().solve(data_.observations);
    const double quad = alpha_.squaredNorm();
    const double logdet = 2.0 * chol_.diagonal().array().log().sum();
    alpha_ = chol_.transpose().triangularView<Eigen::Upper>().solve(alpha_);
    log_marginal_likelihood_ = -0.5 * quad - 0.5 * logdet - 0.5 * n * kLog2Pi;
}

PosteriorMoments GpPosterior::posterior(const Eigen::VectorXd& x) const {
    PosteriorMoments m;
    const double kxx = params_.signal_variance;
    if (data_.size() == 0) {
        m.mean = 0.0;
        m.variance = kxx;
        m.observation_variance = kxx + params_.noise_variance;
        return m;
    }
    const Eigen::VectorXd kx =
        kernel_cross(x.transpose(), data_.inputs, params_).transpose();
    const Eigen::VectorXd v = chol_.triangularView<Eigen::Lower>().solve(kx);
    m.mean = kx.dot(alpha_);
    m.variance = std::max(kxx - v.squaredNorm(), 0.0);
    m.observation_variance = m.variance + params_.noise_variance;
    return m;
}

void GpPosterior::posterior_batch(const Eigen::MatrixXd& X, Eigen::VectorXd& mean,
                                  Eigen::VectorXd& variance) const {
    const int q = static_cast<int>(X.rows());
    if (data_.size() == 0) {
        mean = Eigen::VectorXd::Zero(q);
        variance = Eigen::VectorXd::Constant(q, params_.signal_variance);
        return;
    }
    const Eigen::MatrixXd Kdx = kernel_cross(data_.inputs, X, params_);  // n x q
    const Eigen::MatrixXd V = chol_.triangularView<Eigen::Lower>().solve(Kdx);
    mean = Kdx.transpose() * alpha_;
    variance = (params_.signal_variance - V.colwise().squaredNorm().transpose().array())
                   .max(0.0)
                   .matrix();
}

PosteriorMoments incremental_conditional(const PosteriorMoments& moments, double y_x) {
    const double sx2 = moments.variance;
    const double sn2 = moments.observation_variance - moments.variance;
    const double sp2 = sx2 + sn2;
    if (sp2 <= 0.0)
        throw DegeneratePosteriorError("incremental_conditional: sigma_+^2 is zero");
    PosteriorMoments out;
    out.mean = (sx2 * y_x + sn2 * moments.mean) / sp2;
    out.variance = std::max(sx2 * sn2 / sp2, 0.0);
    out.observation_variance = out.variance + sn2;
    return out;
}

namespace {

// Distances squared in one dimension, scaled by 1/l_i^2; used by the
// lengthscale gradients.
Eigen::MatrixXd scaled_sq_diff(const Eigen::MatrixXd& X, int dim, double lengthscale) {
    const Eigen::VectorXd c = X.col(dim);
    const int n = static_cast<int>(X.rows());
    Eigen::MatrixXd D(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double d = (c(i) - c(j)) / lengthscale;
            D(i, j) = d * d;
        }
    return D;
}

struct LmlEval {
    double value = -std::numeric_limits<double>::infinity();
    Eigen::VectorXd gradient;  // over (log l_1..d, log s2, log n2)
};

LmlEval eval_lml(const Dataset& data, const KernelParams& params, bool with_gradient) {
    LmlEval out;
    const int n = data.size();
    const int d = params.dim();
    const Eigen::MatrixXd Kf = kernel_matrix(data.inputs, params);
    Eigen::MatrixXd L;
    try {
        factorize(Kf, params.noise_variance, params.signal_variance, L);
    } catch (const FitFailureError&) {
        return out;
    }
    Eigen::VectorXd alpha = L.triangularView<Eigen::Lower>().solve(data.observations);
    const double quad = alpha.squaredNorm();
    const double logdet = 2.0 * L.diagonal().array().log().sum();
    alpha = L.transpose().triangularView<Eigen::Upper>().solve(alpha);
    out.value = -0.5 * quad - 0.5 * logdet - 0.5 * n * kLog2Pi;
    if (!std::isfinite(out.value)) {
        out.value = -std::numeric_limits<double>::infinity();
        return out;
    }
    if (!with_gradient) return out;

    // d/dtheta = 0.5 tr((alpha alpha^T - K^{-1}) dK/dtheta)
    Eigen::MatrixXd Kinv = Eigen::MatrixXd::Identity(n, n);
    L.triangularView<Eigen::Lower>().solveInPlace(Kinv);
    L.transpose().triangularView<Eigen::Upper>().solveInPlace(Kinv);
    const Eigen::MatrixXd W = alpha * alpha.transpose() - Kinv;

    out.gradient.resize(d + 2);
    for (int i = 0; i < d; ++i) {
        const Eigen::MatrixXd dK = Kf.cwiseProduct(scaled_sq_diff(data.inputs, i, params.lengthscales(i)));
        out.gradient(i) = 0.5 * W.cwiseProduct(dK).sum();
    }
    out.gradient(d) = 0.5 * W.cwiseProduct(Kf).sum();
    out.gradient(d + 1) = 0.5 * params.noise_variance * W.trace();
    return out;
}

}  // namespace

double log_marginal_likelihood(const Dataset& data, const KernelParams& params) {
    return eval_lml(data, params, false).value;
}

Eigen::VectorXd log_marginal_likelihood_gradient(const Dataset& data, const KernelParams& params) {
    LmlEval e = eval_lml(data, params, true);
    if (!std::isfinite(e.value))
        throw FitFailureError("log_marginal_likelihood_gradient: likelihood not finite");
    return e.gradient;
}

namespace {

KernelParams theta_to_params(const Eigen::VectorXd& theta, int d, std::optional<double> fixed_noise) {
    KernelParams p;
    p.lengthscales = theta.head(d).array().exp().matrix();
    p.signal_variance = std::exp(theta(d));
    p.noise_variance = fixed_noise ? *fixed_noise : std::exp(theta(d + 1));
    return p;
}

}  // namespace

KernelParams fit_mle(const Dataset& data, const MleOptions& opts, std::uint64_t rng_seed) {
    if (data.size() < 2) throw std::invalid_argument("fit_mle: needs at least 2 observations");
    if (opts.restarts < 1) throw std::invalid_argument("fit_mle: restarts must be >= 1");
    const int d = data.dim();

    const MleBounds& b = opts.bounds;
    Eigen::VectorXd lo(d + 2), hi(d + 2);
    lo.head(d).setConstant(std::log(b.lengthscale_min));
    hi.head(d).setConstant(std::log(b.lengthscale_max));
    lo(d) = std::log(b.signal_variance_min);
    hi(d) = std::log(b.signal_variance_max);
    lo(d + 1) = std::log(b.noise_variance_min);
    hi(d + 1) = std::log(b.noise_variance_max);

    auto clamp = [&](Eigen::VectorXd t) {
        return t.cwiseMax(lo).cwiseMin(hi).eval();
    };
    auto evaluate = [&](const Eigen::VectorXd& t, bool grad) {
        return eval_lml(data, theta_to_params(t, d, opts.fixed_noise), grad);
    };

    Rng rng(rng_seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto random_start = [&] {
        Eigen::VectorXd t(d + 2);
        for (int i = 0; i < d + 2; ++i) t(i) = lo(i) + unit(rng) * (hi(i) - lo(i));
        return t;
    };

    double best_value = -std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_theta;
    bool any_finite = false;

    for (int s = 0; s < opts.restarts; ++s) {
        Eigen::VectorXd theta;
        if (s == 0 && opts.init) {
            const KernelParams& ip = *opts.init;
            theta.resize(d + 2);
            theta.head(d) = ip.lengthscales.array().log().matrix();
            theta(d) = std::log(ip.signal_variance);
            theta(d + 1) = std::log(std::max(ip.noise_variance, b.noise_variance_min));
            theta = clamp(theta);
        } else {
            theta = random_start();
        }

        LmlEval cur = evaluate(theta, true);
        if (!std::isfinite(cur.value)) continue;
        any_finite = true;

        double step = 0.1;
        for (int it = 0; it < opts.max_steps; ++it) {
            Eigen::VectorXd g = cur.gradient.head(d + 2);
            if (opts.fixed_noise) g(d + 1) = 0.0;
            const double gmax = g.cwiseAbs().maxCoeff();
            if (!(gmax > 1e-10)) break;
            const Eigen::VectorXd cand = clamp(theta + (step / gmax) * g);
            LmlEval ce = evaluate(cand, false);
            if (ce.value > cur.value) {
                theta = cand;
                cur = evaluate(theta, true);
                step = std::min(step * 1.5, 1.0);
            } else {
                step *= 0.5;
                if (step < 1e-7) break;
            }
        }
        if (cur.value > best_value) {
            best_value = cur.value;
            best_theta = theta;
        }
    }
    if (!any_finite) throw FitFailureError("fit_mle: likelihood not finite at any start");
    return theta_to_params(best_theta, d, opts.fixed_noise);
}

}  // namespace besmp
