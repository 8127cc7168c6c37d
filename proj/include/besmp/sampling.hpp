#ifndef BESMP_SAMPLING_HPP
#define BESMP_SAMPLING_HPP

#include <vector>

#include <Eigen/Core>

#include "besmp/box.hpp"
#include "besmp/gp.hpp"
#include "besmp/optimize.hpp"
#include "besmp/rng.hpp"

namespace besmp {

// A differentiable approximate posterior function sample,
// f(x) = scale * sum_j weights_j * cos(frequencies_j . x + phases_j).
struct RffSample {
    Eigen::MatrixXd frequencies;  // m x d
    Eigen::VectorXd phases;       // m, in [0, 2pi)
    Eigen::VectorXd weights;      // m
    double scale = 0.0;           // sqrt(2 sigma_s^2 / m)

    int n_features() const { return static_cast<int>(weights.size()); }
    double value(const Eigen::VectorXd& x) const;
    Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;
    Eigen::VectorXd value_batch(const Eigen::MatrixXd& X) const;
};

// Frequencies follow the kernel's spectral density, weights the Bayesian
// linear-model posterior given the data (the prior N(0, I) when data is empty).
RffSample draw_posterior_sample(const GpPosterior& gp, int n_features, Rng& rng);

enum class ThresholdKind { MaxValue, Shifted, Stacked };

// A finite set of threshold scalars or ascending threshold vectors, treated
// downstream as a discrete uniform random variable.
struct ThresholdSet {
    ThresholdKind kind = ThresholdKind::MaxValue;
    std::vector<Eigen::VectorXd> values;  // size-1 vectors unless Stacked

    int size() const { return static_cast<int>(values.size()); }
    double scalar(int i) const { return values[static_cast<std::size_t>(i)](0); }
    const Eigen::VectorXd& vec(int i) const { return values[static_cast<std::size_t>(i)]; }
    void validate() const;

    static ThresholdSet max_values(std::vector<double> v);
};

inline OptimizerConfig default_sample_optimizer() {
    OptimizerConfig cfg;
    cfg.n_random_candidates = 50;
    cfg.n_ascent_starts = 50;
    cfg.ascent_steps = 100;
    cfg.step_size = 0.05;
    return cfg;
}

// One max-value estimate per posterior sample: multi-start gradient ascent on
// each drawn function over the domain.
ThresholdSet sample_max_values(const GpPosterior& gp, const Box& domain, int n_samples,
                               int n_features, Rng& rng,
                               const OptimizerConfig& inner_opt = default_sample_optimizer());

// F_alpha = { f* - alpha : f* in F* }.
ThresholdSet shift_thresholds(const ThresholdSet& fstar, double alpha);

// B = { (f* - alpha, f*) : f* in F* }; requires alpha > 0 so vectors ascend.
ThresholdSet stack_thresholds(const ThresholdSet& fstar, double alpha);

}  // namespace besmp

#endif
