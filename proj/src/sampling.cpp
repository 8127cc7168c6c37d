#include "besmp/sampling.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Cholesky>

#include "besmp/errors.hpp"

namespace besmp {

double RffSample::value(const Eigen::VectorXd& x) const {
    return scale * ((frequencies * x + phases).array().cos() * weights.array()).sum();
}

Eigen::VectorXd RffSample::gradient(const Eigen::VectorXd& x) const {
    const Eigen::ArrayXd s = (frequencies * x + phases).array().sin() * weights.array();
    return -scale * (frequencies.transpose() * s.matrix());
}

Eigen::VectorXd RffSample::value_batch(const Eigen::MatrixXd& X) const {
    Eigen::MatrixXd phase = X * frequencies.transpose();  // N x m
    phase.rowwise() += phases.transpose();
    return scale * (phase.array().cos().matrix() * weights);
}

namespace {

Eigen::MatrixXd feature_matrix(const RffSample& s, const Eigen::MatrixXd& X) {
    Eigen::MatrixXd phase = X * s.frequencies.transpose();
    phase.rowwise() += s.phases.transpose();
    return s.scale * phase.array().cos().matrix();
}

}  // namespace

RffSample draw_posterior_sample(const GpPosterior& gp, int n_features, Rng& rng) {
    if (n_features < 1) throw std::invalid_argument("draw_posterior_sample: n_features must be >= 1");
    const KernelParams& p = gp.params();
    const int d = p.dim();
    const int m = n_features;

    RffSample s;
    s.scale = std::sqrt(2.0 * p.signal_variance / m);
    s.frequencies.resize(m, d);
    s.phases.resize(m);
    s.weights.resize(m);

    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> uphase(0.0, 2.0 * M_PI);
    // Spectral density of the SE kernel: Gaussian with std 1/l_i per dimension.
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < d; ++i) s.frequencies(j, i) = gauss(rng) / p.lengthscales(i);
    for (int j = 0; j < m; ++j) s.phases(j) = uphase(rng);
    Eigen::VectorXd zeta(m);
    for (int j = 0; j < m; ++j) zeta(j) = gauss(rng);

    if (gp.data().size() == 0) {
        s.weights = zeta;
        return s;
    }

    // Weight posterior of y = Phi w + eps with prior w ~ N(0, I):
    // A = I + Phi^T Phi / sigma_n^2, mean = A^{-1} Phi^T y / sigma_n^2, cov = A^{-1}.
    const Eigen::MatrixXd Phi = feature_matrix(s, gp.data().inputs);
    const double sn2 = std::max(p.noise_variance, 1e-10 * p.signal_variance);
    Eigen::MatrixXd A = Phi.transpose() * Phi / sn2;
    A.diagonal().array() += 1.0;
    const Eigen::VectorXd rhs = Phi.transpose() * gp.data().observations / sn2;

    double jitter = 0.0;
    for (int attempt = 0; attempt < 24; ++attempt) {
        Eigen::MatrixXd Aj = A;
        Aj.diagonal().array() += jitter;
        Eigen::LLT<Eigen::MatrixXd> llt(Aj);
        if (llt.info() == Eigen::Success) {
            const Eigen::MatrixXd L = llt.matrixL();
            Eigen::VectorXd mean = L.triangularView<Eigen::Lower>().solve(rhs);
            mean = L.transpose().triangularView<Eigen::Upper>().solve(mean);
            // w = mean + L^{-T} zeta has covariance A^{-1}.
            s.weights = mean + L.transpose().triangularView<Eigen::Upper>().solve(zeta);
            return s;
        }
        jitter = (jitter == 0.0) ? 1e-10 : jitter * 2.0;
        if (jitter > 1e-2) break;
    }
    throw FitFailureError("draw_posterior_sample: singular feature Gram matrix");
}

void ThresholdSet::validate() const {
    if (values.empty()) throw std::invalid_argument("ThresholdSet: empty");
    for (const Eigen::VectorXd& v : values) {
        if (kind == ThresholdKind::Stacked) {
            if (v.size() < 2) throw std::invalid_argument("ThresholdSet: stacked vectors need k >= 2");
            for (int i = 0; i + 1 < v.size(); ++i)
                if (!(v(i) < v(i + 1)))
                    throw std::invalid_argument("ThresholdSet: stacked vectors must strictly ascend");
        } else if (v.size() != 1) {
            throw std::invalid_argument("ThresholdSet: scalar kinds need size-1 entries");
        }
    }
}

ThresholdSet ThresholdSet::max_values(std::vector<double> v) {
    ThresholdSet set;
    set.kind = ThresholdKind::MaxValue;
    set.values.reserve(v.size());
    for (double f : v) set.values.push_back(Eigen::VectorXd::Constant(1, f));
    set.validate();
    return set;
}

ThresholdSet sample_max_values(const GpPosterior& gp, const Box& domain, int n_samples,
                               int n_features, Rng& rng, const OptimizerConfig& inner_opt) {
    if (n_samples < 1) throw std::invalid_argument("sample_max_values: n_samples must be >= 1");
    ThresholdSet set;
    set.kind = ThresholdKind::MaxValue;
    set.values.reserve(static_cast<std::size_t>(n_samples));
    for (int i = 0; i < n_samples; ++i) {
        const RffSample sample = draw_posterior_sample(gp, n_features, rng);
        OptimizerConfig cfg = inner_opt;
        cfg.rng_seed = rng();
        auto fn = [&sample](const Eigen::VectorXd& x) { return sample.value(x); };
        auto grad = [&sample](const Eigen::VectorXd& x) { return sample.gradient(x); };
        const MaximizeResult r = maximize_acquisition(fn, domain, cfg, grad);
        set.values.push_back(Eigen::VectorXd::Constant(1, r.value));
    }
    return set;
}

ThresholdSet shift_thresholds(const ThresholdSet& fstar, double alpha) {
    if (fstar.kind != ThresholdKind::MaxValue)
        throw std::invalid_argument("shift_thresholds: expects a max-value set");
    if (!(alpha >= 0.0)) throw std::invalid_argument("shift_thresholds: alpha must be >= 0");
    ThresholdSet out;
    out.kind = ThresholdKind::Shifted;
    out.values.reserve(fstar.values.size());
    for (const Eigen::VectorXd& v : fstar.values)
        out.values.push_back(Eigen::VectorXd::Constant(1, v(0) - alpha));
    return out;
}

ThresholdSet stack_thresholds(const ThresholdSet& fstar, double alpha) {
    if (fstar.kind != ThresholdKind::MaxValue)
        throw std::invalid_argument("stack_thresholds: expects a max-value set");
    if (!(alpha > 0.0))
        throw DegenerateVectorError(
            "stack_thresholds: alpha must be > 0 (use the plain averaged criterion for alpha = 0)");
    ThresholdSet out;
    out.kind = ThresholdKind::Stacked;
    out.values.reserve(fstar.values.size());
    for (const Eigen::VectorXd& v : fstar.values) {
        Eigen::VectorXd b(2);
        b << v(0) - alpha, v(0);
        out.values.push_back(b);
    }
    return out;
}

}  // namespace besmp
