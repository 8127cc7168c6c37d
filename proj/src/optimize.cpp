#include "besmp/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "besmp/errors.hpp"

namespace besmp {

namespace {

Eigen::VectorXd finite_difference_gradient(const ObjectiveFn& f, const Box& domain,
                                           const Eigen::VectorXd& x) {
    const int d = domain.dim();
    Eigen::VectorXd g(d);
    const Eigen::VectorXd h = 1e-5 * domain.width();
    Eigen::VectorXd xp = x, xm = x;
    for (int i = 0; i < d; ++i) {
        xp(i) = x(i) + h(i);
        xm(i) = x(i) - h(i);
        g(i) = (f(xp) - f(xm)) / (2.0 * h(i));
        xp(i) = x(i);
        xm(i) = x(i);
    }
    return g;
}

}  // namespace

MaximizeResult ascend_from(const ObjectiveFn& f, const Box& domain, const Eigen::VectorXd& x0,
                           int steps, double step_size, const GradientFn& grad) {
    MaximizeResult best{domain.clip(x0), f(domain.clip(x0))};
    const Eigen::VectorXd width = domain.width();
    double step = step_size;
    for (int it = 0; it < steps; ++it) {
        Eigen::VectorXd g =
            grad ? grad(best.x) : finite_difference_gradient(f, domain, best.x);
        if (!g.allFinite()) break;
        const double gnorm = g.norm();
        if (gnorm < 1e-14) break;
        const Eigen::VectorXd cand =
            domain.clip(best.x + (step / gnorm) * width.cwiseProduct(g));
        const double fc = f(cand);
        if (std::isfinite(fc) && fc > best.value) {
            best.x = cand;
            best.value = fc;
            step = std::min(step * 1.5, 0.25);
        } else {
            step *= 0.5;
            if (step < 1e-9) break;
        }
    }
    return best;
}

MaximizeResult maximize_acquisition(const ObjectiveFn& f, const Box& domain,
                                    const OptimizerConfig& cfg, const GradientFn& grad) {
    if (cfg.n_random_candidates < 1 || cfg.n_ascent_starts < 1 || cfg.ascent_steps < 1)
        throw std::invalid_argument("maximize_acquisition: counts must be >= 1");

    Rng rng(cfg.rng_seed);
    std::vector<Eigen::VectorXd> candidates(cfg.n_random_candidates);
    std::vector<double> values(cfg.n_random_candidates);
    MaximizeResult best;
    bool found = false;
    for (int i = 0; i < cfg.n_random_candidates; ++i) {
        candidates[i] = domain.sample(rng);
        values[i] = f(candidates[i]);
        if (std::isfinite(values[i]) && (!found || values[i] > best.value)) {
            best = {candidates[i], values[i]};
            found = true;
        }
    }
    if (!found)
        throw OptimizerFailureError("maximize_acquisition: criterion non-finite at all candidates");

    // Refine the top candidates; order by value, ties by lowest index.
    std::vector<int> order(candidates.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return values[a] > values[b]; });
    const int n_starts = std::min<int>(cfg.n_ascent_starts, static_cast<int>(order.size()));
    for (int s = 0; s < n_starts; ++s) {
        if (!std::isfinite(values[order[s]])) continue;
        MaximizeResult r = ascend_from(f, domain, candidates[order[s]], cfg.ascent_steps,
                                       cfg.step_size, grad);
        if (std::isfinite(r.value) && r.value > best.value) best = r;
    }
    return best;
}

}  // namespace besmp
