#ifndef BESMP_METRICS_HPP
#define BESMP_METRICS_HPP

#include <cstdint>

#include <Eigen/Core>

#include "besmp/bench.hpp"
#include "besmp/gp.hpp"
#include "besmp/sampling.hpp"

namespace besmp {

// Uniformly sampled evaluation inputs with their ground-truth values, fixed
// for the lifetime of an experiment repetition.
struct EvalGrid {
    Eigen::MatrixXd points;  // size x d
    Eigen::VectorXd truth;   // f at each point
    double true_max = 0.0;   // ground-truth maximum of f over the domain

    int size() const { return static_cast<int>(truth.size()); }

    static EvalGrid sample(const BenchmarkFn& fn, int size, std::uint64_t seed);
};

// Negative mean log probability assigned to the ground-truth side of the
// threshold over the grid.
double lse_log_loss(const GpPosterior& gp, const EvalGrid& grid, double f_threshold);

// Log loss with the unknown threshold marginalized over the max-value samples;
// ground-truth labels use the true max minus alpha.
double implicit_log_loss(const GpPosterior& gp, const EvalGrid& grid, const ThresholdSet& fstar,
                         double alpha);

// True max of f minus the best true value among queried inputs (noiseless
// re-evaluation). Empty dataset yields +infinity as the undefined sentinel.
double simple_regret(const BenchmarkFn& fn, const Dataset& data);

}  // namespace besmp

#endif
