#include <doctest.h>

#include <cmath>

#include "besmp/errors.hpp"
#include "besmp/sampling.hpp"
#include "oracles.hpp"

using namespace besmp;

TEST_SUITE("sampling") {

TEST_CASE("prior samples reproduce the kernel covariance empirically") {
    KernelParams p = KernelParams::isotropic(1, 0.5, 1.0, 0.0);
    GpPosterior prior(p, Dataset(1));
    const Eigen::VectorXd a = Eigen::VectorXd::Constant(1, 0.2);
    const Eigen::VectorXd b = Eigen::VectorXd::Constant(1, 0.55);

    Rng rng(2024);
    const int n_draws = 500;
    Eigen::VectorXd va(n_draws), vb(n_draws);
    for (int i = 0; i < n_draws; ++i) {
        const RffSample s = draw_posterior_sample(prior, 2000, rng);
        va(i) = s.value(a);
        vb(i) = s.value(b);
    }
    const double cov = ((va.array() - va.mean()) * (vb.array() - vb.mean())).mean();
    CHECK(std::abs(cov - kernel(a, b, p)) < 0.05);
    const double var_a = (va.array() - va.mean()).square().mean();
    CHECK(std::abs(var_a - 1.0) < 0.05);
}

TEST_CASE("posterior samples concentrate on near-noiseless observations") {
    KernelParams p = KernelParams::isotropic(1, 0.4, 1.0, 1e-6);
    Dataset data(1);
    data.append(Eigen::VectorXd::Constant(1, 0.2), 0.4);
    data.append(Eigen::VectorXd::Constant(1, 0.5), -0.3);
    data.append(Eigen::VectorXd::Constant(1, 0.85), 0.1);
    GpPosterior gp(p, data);

    Eigen::VectorXd sx(data.size());
    for (int i = 0; i < data.size(); ++i)
        sx(i) = std::sqrt(gp.posterior(data.inputs.row(i).transpose()).variance);

    Rng rng(7);
    const int n_draws = 500;
    int hits = 0;
    for (int d = 0; d < n_draws; ++d) {
        const RffSample s = draw_posterior_sample(gp, 2000, rng);
        bool ok = true;
        for (int i = 0; i < data.size(); ++i)
            ok = ok && std::abs(s.value(data.inputs.row(i).transpose()) - data.observations(i)) <=
                           3.0 * sx(i);
        hits += ok;
    }
    CHECK(hits >= static_cast<int>(0.99 * n_draws));
}

TEST_CASE("single-feature sample is one bounded cosine") {
    GpPosterior prior(KernelParams::isotropic(1, 0.5, 2.0, 0.0), Dataset(1));
    Rng rng(3);
    const RffSample s = draw_posterior_sample(prior, 1, rng);
    const double bound = std::abs(s.scale * s.weights(0));
    for (double x = 0.0; x <= 1.0; x += 0.01)
        CHECK(std::abs(s.value(Eigen::VectorXd::Constant(1, x))) <= bound + 1e-12);
}

TEST_CASE("analytic sample gradient matches finite differences") {
    KernelParams p = KernelParams::isotropic(2, 0.3, 1.0, 0.01);
    Rng data_rng(11);
    Dataset data(2);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < 6; ++i) {
        Eigen::VectorXd x(2);
        x << unit(data_rng), unit(data_rng);
        data.append(x, unit(data_rng) - 0.5);
    }
    GpPosterior gp(p, data);
    Rng rng(13);
    const RffSample s = draw_posterior_sample(gp, 300, rng);

    Eigen::VectorXd x(2);
    x << 0.3, 0.7;
    const Eigen::VectorXd analytic = s.gradient(x);
    const Eigen::VectorXd numeric = oracles::finite_difference(
        [&s](const Eigen::VectorXd& v) { return s.value(v); }, x, 1e-6);
    for (int i = 0; i < 2; ++i) {
        const double scale = std::max(std::abs(numeric(i)), 1e-3);
        CHECK(std::abs(analytic(i) - numeric(i)) / scale < 1e-5);
    }
}

TEST_CASE("sampling is bit-reproducible given the seed") {
    GpPosterior prior(KernelParams::isotropic(2, 0.25, 1.0, 0.0), Dataset(2));
    Rng r1(42), r2(42);
    const RffSample a = draw_posterior_sample(prior, 64, r1);
    const RffSample b = draw_posterior_sample(prior, 64, r2);
    CHECK(a.frequencies == b.frequencies);
    CHECK(a.phases == b.phases);
    CHECK(a.weights == b.weights);

    Rng r3(42), r4(42);
    const ThresholdSet f1 = sample_max_values(prior, Box::unit(2), 3, 64, r3);
    const ThresholdSet f2 = sample_max_values(prior, Box::unit(2), 3, 64, r4);
    for (int i = 0; i < f1.size(); ++i) CHECK(f1.scalar(i) == f2.scalar(i));
}

TEST_CASE("sample_max_values dominates observed values") {
    KernelParams p = KernelParams::isotropic(1, 0.3, 1.0, 0.0);
    Dataset data(1);
    data.append(Eigen::VectorXd::Constant(1, 0.4), 5.0);
    GpPosterior gp(p, data);
    Rng rng(19);
    const ThresholdSet fstar = sample_max_values(gp, Box::unit(1), 5, 800, rng);
    CHECK(fstar.size() == 5);
    CHECK(fstar.kind == ThresholdKind::MaxValue);
    for (int i = 0; i < fstar.size(); ++i) CHECK(fstar.scalar(i) >= 5.0 - 0.3);
}

TEST_CASE("near-constant samples have a small max spread") {
    GpPosterior prior(KernelParams::isotropic(1, 1e6, 1.0, 0.0), Dataset(1));
    Rng rng(24);
    const ThresholdSet fstar = sample_max_values(prior, Box::unit(1), 5, 200, rng);
    double lo = fstar.scalar(0), hi = fstar.scalar(0);
    for (int i = 1; i < fstar.size(); ++i) {
        lo = std::min(lo, fstar.scalar(i));
        hi = std::max(hi, fstar.scalar(i));
    }
    CHECK(hi - lo < 3.0);
}

TEST_CASE("shift_thresholds") {
    const ThresholdSet fstar = ThresholdSet::max_values({1.0, 2.0});
    const ThresholdSet zero = shift_thresholds(fstar, 0.0);
    CHECK(zero.scalar(0) == 1.0);
    CHECK(zero.scalar(1) == 2.0);
    CHECK(zero.kind == ThresholdKind::Shifted);

    const ThresholdSet shifted = shift_thresholds(fstar, 0.2);
    CHECK(shifted.scalar(0) == doctest::Approx(0.8));
    CHECK(shifted.scalar(1) == doctest::Approx(1.8));

    CHECK_THROWS_AS(shift_thresholds(fstar, -0.1), std::invalid_argument);
    CHECK_THROWS_AS(shift_thresholds(shifted, 0.1), std::invalid_argument);
}

TEST_CASE("stack_thresholds") {
    const ThresholdSet fstar = ThresholdSet::max_values({1.0, 0.4});
    const ThresholdSet stacked = stack_thresholds(fstar, 0.2);
    CHECK(stacked.kind == ThresholdKind::Stacked);
    CHECK(stacked.size() == fstar.size());
    CHECK(stacked.vec(0)(0) == doctest::Approx(0.8));
    CHECK(stacked.vec(0)(1) == doctest::Approx(1.0));
    for (int i = 0; i < stacked.size(); ++i) CHECK(stacked.vec(i)(0) < stacked.vec(i)(1));

    CHECK_THROWS_AS(stack_thresholds(fstar, 0.0), DegenerateVectorError);
}

}
