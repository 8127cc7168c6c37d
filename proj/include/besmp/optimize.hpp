#ifndef BESMP_OPTIMIZE_HPP
#define BESMP_OPTIMIZE_HPP

#include <cstdint>
#include <functional>

#include <Eigen/Core>

#include "besmp/box.hpp"

namespace besmp {

struct OptimizerConfig {
    int n_random_candidates = 2000;
    int n_ascent_starts = 10;
    int ascent_steps = 100;
    double step_size = 0.05;  // fraction of the box width
    std::uint64_t rng_seed = 0;
};

struct MaximizeResult {
    Eigen::VectorXd x;
    double value = 0.0;
};

using ObjectiveFn = std::function<double(const Eigen::VectorXd&)>;
using GradientFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// Projected gradient ascent from x0 with adaptive step halving. Gradients come
// from `grad` when given, otherwise central finite differences
// (h = 1e-5 * box width). Every iterate is clipped to the box.
MaximizeResult ascend_from(const ObjectiveFn& f, const Box& domain, const Eigen::VectorXd& x0,
                           int steps, double step_size, const GradientFn& grad = nullptr);

// Best point among uniform random candidates plus ascent refinements of the
// top candidates. Ties break toward the earliest evaluation, so results are
// deterministic given the seed.
MaximizeResult maximize_acquisition(const ObjectiveFn& f, const Box& domain,
                                    const OptimizerConfig& cfg, const GradientFn& grad = nullptr);

}  // namespace besmp

#endif
