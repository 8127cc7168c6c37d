#include "besmp/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "besmp/math.hpp"
#include "besmp/rng.hpp"

namespace besmp {

EvalGrid EvalGrid::sample(const BenchmarkFn& fn, int size, std::uint64_t seed) {
    if (size < 1) throw std::invalid_argument("EvalGrid: size must be >= 1");
    EvalGrid grid;
    grid.points.resize(size, fn.dim);
    Rng rng(seed);
    for (int i = 0; i < size; ++i) grid.points.row(i) = fn.domain.sample(rng).transpose();
    grid.truth = fn.evaluate_batch(grid.points);
    grid.true_max = fn.known_max ? *fn.known_max : grid.truth.maxCoeff();
    return grid;
}

namespace {

// Probability mass the posterior puts on the correct side of the threshold:
// Phi(c * h) with c = -1 on the superlevel side and +1 below.
double true_side_prob(double mean, double variance, double threshold, double truth) {
    const int c = (truth >= threshold) ? -1 : 1;
    if (variance <= 0.0) {
        const bool predicted_sub = mean < threshold;
        return (c == 1) == predicted_sub ? 1.0 : 0.0;
    }
    const double h = (threshold - mean) / std::sqrt(variance);
    return norm_cdf(c * h);
}

}  // namespace

double lse_log_loss(const GpPosterior& gp, const EvalGrid& grid, double f_threshold) {
    Eigen::VectorXd mean, variance;
    gp.posterior_batch(grid.points, mean, variance);
    double acc = 0.0;
    for (int i = 0; i < grid.size(); ++i) {
        const double p = true_side_prob(mean(i), variance(i), f_threshold, grid.truth(i));
        acc -= std::log(std::max(p, kProbFloor));
    }
    return acc / grid.size();
}

double implicit_log_loss(const GpPosterior& gp, const EvalGrid& grid, const ThresholdSet& fstar,
                         double alpha) {
    if (fstar.values.empty()) throw std::invalid_argument("implicit_log_loss: empty threshold set");
    if (fstar.kind != ThresholdKind::MaxValue)
        throw std::invalid_argument("implicit_log_loss: expects max-value samples");
    const double true_threshold = grid.true_max - alpha;
    Eigen::VectorXd mean, variance;
    gp.posterior_batch(grid.points, mean, variance);
    double acc = 0.0;
    for (int i = 0; i < grid.size(); ++i) {
        const int c = (grid.truth(i) >= true_threshold) ? -1 : 1;
        double p = 0.0;
        for (int s = 0; s < fstar.size(); ++s) {
            const double estimate = fstar.scalar(s) - alpha;
            if (variance(i) <= 0.0) {
                const bool predicted_sub = mean(i) < estimate;
                p += ((c == 1) == predicted_sub) ? 1.0 : 0.0;
            } else {
                const double h = (estimate - mean(i)) / std::sqrt(variance(i));
                p += norm_cdf(c * h);
            }
        }
        p /= fstar.size();
        acc -= std::log(std::max(p, kProbFloor));
    }
    return acc / grid.size();
}

double simple_regret(const BenchmarkFn& fn, const Dataset& data) {
    if (!fn.known_max) throw std::invalid_argument("simple_regret: benchmark lacks known_max");
    if (data.size() == 0) return std::numeric_limits<double>::infinity();
    const Eigen::VectorXd values = fn.evaluate_batch(data.inputs);
    return *fn.known_max - values.maxCoeff();
}

}  // namespace besmp
