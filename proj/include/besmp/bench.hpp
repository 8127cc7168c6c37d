#ifndef BESMP_BENCH_HPP
#define BESMP_BENCH_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "besmp/box.hpp"
#include "besmp/rng.hpp"

namespace besmp {

// A deterministic, pure benchmark objective on a bounded box.
struct BenchmarkFn {
    std::string name;
    int dim = 0;
    Box domain;
    std::function<double(const Eigen::VectorXd&)> evaluator;
    std::function<Eigen::VectorXd(const Eigen::MatrixXd&)> batch_evaluator;  // optional
    std::optional<double> known_max;
    std::optional<Eigen::VectorXd> known_max_location;

    double operator()(const Eigen::VectorXd& x) const { return evaluator(x); }
    Eigen::VectorXd evaluate_batch(const Eigen::MatrixXd& X) const;
};

// Closed-form function on its standard domain, optionally negated; no
// normalization and no ground-truth max attached. Names: branin,
// michalewicz2, hartmann3, goldstein, phosphorus-proxy, and
// gp_sample(l=<lengthscale>,seed=<seed>).
BenchmarkFn raw_benchmark(const std::string& name, bool negate);

// Standard benchmark, negated when requested, normalized to zero mean and
// unit standard deviation over a probe lattice, with the ground-truth maximum
// located by dense grid search plus local refinement. Cached per (name,
// negate).
BenchmarkFn make_benchmark(const std::string& name, bool negate);

// Subtract the probe-grid mean and divide by the probe-grid standard
// deviation. Errors on zero variance.
BenchmarkFn normalize(const BenchmarkFn& fn, const Eigen::MatrixXd& probe_grid);

// f(x) + eps with eps ~ N(0, noise_variance); exact when noise_variance = 0.
double observe(const BenchmarkFn& fn, const Eigen::VectorXd& x, double noise_variance, Rng& rng);

// Uniform inclusive lattice over the box with approximately `approx_points`
// points.
Eigen::MatrixXd lattice_grid(const Box& box, int approx_points);

std::vector<std::string> benchmark_names();

}  // namespace besmp

#endif
