#include <doctest.h>

#include <cmath>

#include "besmp/math.hpp"
#include "besmp/metrics.hpp"
#include "besmp/rng.hpp"

using namespace besmp;

namespace {

constexpr double kLog2 = 0.69314718055994531;

// Toy benchmark: f(x) = sin(2 pi x) on [0, 1], known max 1.
BenchmarkFn sine_benchmark() {
    BenchmarkFn fn;
    fn.name = "sine";
    fn.dim = 1;
    fn.domain = Box::unit(1);
    fn.evaluator = [](const Eigen::VectorXd& x) { return std::sin(2.0 * M_PI * x(0)); };
    fn.known_max = 1.0;
    fn.known_max_location = Eigen::VectorXd::Constant(1, 0.25);
    return fn;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("eval grid is reproducible and carries the truth") {
    const BenchmarkFn fn = sine_benchmark();
    const EvalGrid a = EvalGrid::sample(fn, 200, 7);
    const EvalGrid b = EvalGrid::sample(fn, 200, 7);
    CHECK(a.points == b.points);
    CHECK(a.truth == b.truth);
    CHECK(a.true_max == 1.0);
    for (int i = 0; i < 5; ++i)
        CHECK(a.truth(i) == doctest::Approx(fn(a.points.row(i).transpose())));
}

TEST_CASE("prior-only posterior at the boundary threshold is a coin flip") {
    const BenchmarkFn fn = sine_benchmark();
    const EvalGrid grid = EvalGrid::sample(fn, 500, 3);
    GpPosterior prior(KernelParams::isotropic(1, 0.3, 1.0, 0.01), Dataset(1));
    CHECK(lse_log_loss(prior, grid, 0.0) == doctest::Approx(kLog2).epsilon(1e-12));
}

TEST_CASE("an accurate posterior drives the log loss toward zero") {
    const BenchmarkFn fn = sine_benchmark();
    const EvalGrid grid = EvalGrid::sample(fn, 300, 5);
    Rng rng(2);
    Dataset data(1);
    for (int i = 0; i < 60; ++i) {
        const Eigen::VectorXd x = fn.domain.sample(rng);
        data.append(x, fn(x));
    }
    GpPosterior gp(KernelParams::isotropic(1, 0.15, 0.7, 1e-8), data);
    CHECK(lse_log_loss(gp, grid, 0.0) < 0.01);
}

TEST_CASE("lse log loss matches a naive per-point oracle") {
    const BenchmarkFn fn = sine_benchmark();
    const EvalGrid grid = EvalGrid::sample(fn, 100, 9);
    Rng rng(4);
    Dataset data(1);
    for (int i = 0; i < 8; ++i) {
        const Eigen::VectorXd x = fn.domain.sample(rng);
        data.append(x, fn(x) + 0.01);
    }
    GpPosterior gp(KernelParams::isotropic(1, 0.2, 1.0, 0.05), data);
    const double threshold = 0.3;

    double acc = 0.0;
    for (int i = 0; i < grid.size(); ++i) {
        const PosteriorMoments m = gp.posterior(grid.points.row(i).transpose());
        const double h = (threshold - m.mean) / std::sqrt(m.variance);
        const double c = (grid.truth(i) >= threshold) ? -1.0 : 1.0;
        acc -= std::log(std::max(0.5 * std::erfc(-c * h / std::sqrt(2.0)), 1e-300));
    }
    CHECK(lse_log_loss(gp, grid, threshold) == doctest::Approx(acc / grid.size()).epsilon(1e-12));
}

TEST_CASE("log losses are invariant under grid permutation") {
    const BenchmarkFn fn = sine_benchmark();
    EvalGrid grid = EvalGrid::sample(fn, 64, 11);
    GpPosterior prior(KernelParams::isotropic(1, 0.3, 1.0, 0.01), Dataset(1));
    const double before = lse_log_loss(prior, grid, 0.2);
    // Reverse the rows.
    grid.points = grid.points.colwise().reverse().eval();
    grid.truth = grid.truth.reverse().eval();
    CHECK(lse_log_loss(prior, grid, 0.2) == doctest::Approx(before).epsilon(1e-12));
}

TEST_CASE("implicit log loss collapses to the known-threshold loss") {
    const BenchmarkFn fn = sine_benchmark();
    const EvalGrid grid = EvalGrid::sample(fn, 150, 13);
    Rng rng(6);
    Dataset data(1);
    for (int i = 0; i < 10; ++i) {
        const Eigen::VectorXd x = fn.domain.sample(rng);
        data.append(x, fn(x));
    }
    GpPosterior gp(KernelParams::isotropic(1, 0.2, 1.0, 0.01), data);
    const double alpha = 0.2;
    // A singleton estimate equal to the true max reduces to plain LSE at
    // threshold max - alpha.
    const ThresholdSet exact = ThresholdSet::max_values({grid.true_max});
    CHECK(implicit_log_loss(gp, grid, exact, alpha) ==
          doctest::Approx(lse_log_loss(gp, grid, grid.true_max - alpha)).epsilon(1e-12));
}

TEST_CASE("implicit log loss with coin-flip averages is log 2") {
    const BenchmarkFn fn = sine_benchmark();
    const EvalGrid grid = EvalGrid::sample(fn, 80, 15);
    GpPosterior prior(KernelParams::isotropic(1, 0.3, 1.0, 0.01), Dataset(1));
    // With a zero-mean unit-variance posterior, estimates symmetric about the
    // posterior mean average to probability 0.5 at every point.
    const double alpha = 0.2;
    const ThresholdSet sym = ThresholdSet::max_values({alpha + 0.7, alpha - 0.7});
    CHECK(implicit_log_loss(prior, grid, sym, alpha) == doctest::Approx(kLog2).epsilon(1e-12));
}

TEST_CASE("implicit log loss matches a naive double-loop oracle") {
    const BenchmarkFn fn = sine_benchmark();
    const EvalGrid grid = EvalGrid::sample(fn, 90, 17);
    Rng rng(8);
    Dataset data(1);
    for (int i = 0; i < 12; ++i) {
        const Eigen::VectorXd x = fn.domain.sample(rng);
        data.append(x, fn(x) + 0.02);
    }
    GpPosterior gp(KernelParams::isotropic(1, 0.25, 1.0, 0.02), data);
    const double alpha = 0.3;
    const ThresholdSet fstar = ThresholdSet::max_values({0.9, 1.05, 1.2});

    double acc = 0.0;
    for (int i = 0; i < grid.size(); ++i) {
        const PosteriorMoments m = gp.posterior(grid.points.row(i).transpose());
        const double c = (grid.truth(i) >= grid.true_max - alpha) ? -1.0 : 1.0;
        double p = 0.0;
        for (int s = 0; s < fstar.size(); ++s) {
            const double h = (fstar.scalar(s) - alpha - m.mean) / std::sqrt(m.variance);
            p += 0.5 * std::erfc(-c * h / std::sqrt(2.0));
        }
        acc -= std::log(std::max(p / fstar.size(), 1e-300));
    }
    CHECK(implicit_log_loss(gp, grid, fstar, alpha) ==
          doctest::Approx(acc / grid.size()).epsilon(1e-12));
}

TEST_CASE("simple regret") {
    const BenchmarkFn fn = sine_benchmark();
    Dataset data(1);
    CHECK(std::isinf(simple_regret(fn, data)));

    data.append(Eigen::VectorXd::Constant(1, 0.0), 5.0);  // noisy y is ignored
    CHECK(simple_regret(fn, data) == doctest::Approx(1.0 - 0.0));

    data.append(Eigen::VectorXd::Constant(1, 1.0 / 12.0), 0.0);
    CHECK(simple_regret(fn, data) == doctest::Approx(1.0 - 0.5).epsilon(1e-9));

    const double before = simple_regret(fn, data);
    data.append(Eigen::VectorXd::Constant(1, 0.9), 0.0);
    CHECK(simple_regret(fn, data) <= before);

    data.append(Eigen::VectorXd::Constant(1, 0.25), -3.0);
    CHECK(simple_regret(fn, data) == doctest::Approx(0.0).epsilon(1e-6));
}

}
