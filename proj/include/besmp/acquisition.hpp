#ifndef BESMP_ACQUISITION_HPP
#define BESMP_ACQUISITION_HPP

#include <functional>
#include <optional>
#include <string>

#include <Eigen/Core>

#include "besmp/gp.hpp"
#include "besmp/sampling.hpp"

namespace besmp {

// Probability that the label of x relative to `threshold` is `label`, where
// label +1 means f(x) < threshold (sublevel) and -1 means f(x) >= threshold.
// Zero posterior variance degenerates to an exact 0/1 indicator.
double class_prob(const PosteriorMoments& m, double threshold, int label);

// Same label probability after additionally conditioning on an observation y
// at x, via the incremental posterior update. Requires positive posterior and
// noise variance.
double class_prob_given_y(const PosteriorMoments& m, double threshold, double y, int label);

// Integrand of the label-information criterion at a fixed observation value y
// (for reparameterized evaluation y = mu + sigma_+ * eps).
double bes_integrand(const PosteriorMoments& m, double threshold, double y);

// Expected reduction in label entropy from observing y at x. Deterministic
// Gauss-Hermite evaluation by default; reduces to the prior binary entropy
// when the noise variance is zero.
double bes(const PosteriorMoments& m, double threshold, int quadrature_nodes = 64);

// Prior binary entropy of the label (the noiseless special case of bes).
double em(const PosteriorMoments& m, double threshold);

// 1.96 sigma_x - |mu_x - threshold|.
double straddle(const PosteriorMoments& m, double threshold);

// bes averaged over a set of sampled maximum values.
double bes_mp(const PosteriorMoments& m, const ThresholdSet& fstar, int quadrature_nodes = 64);

// bes averaged over tolerance-shifted maximum-value samples.
double bes_mp_implicit(const PosteriorMoments& m, const ThresholdSet& falpha,
                       int quadrature_nodes = 64);

// Multi-threshold generalization: information gain on the (k+1)-class label
// induced by the strictly ascending threshold vector b.
double bes_k(const PosteriorMoments& m, const Eigen::VectorXd& b, int quadrature_nodes = 64);

// bes_k averaged over a set of stacked threshold vectors.
double bes2_mp(const PosteriorMoments& m, const ThresholdSet& b_set, int quadrature_nodes = 64);

double ucb(const PosteriorMoments& m, double beta);

double ei(const PosteriorMoments& m, double incumbent);

// Max-value entropy search baseline (upper-tail truncated Gaussian form),
// averaged over the max-value samples.
double mes(const PosteriorMoments& m, const ThresholdSet& fstar);

// Convenience overloads that query the posterior at x first.
double bes(const GpPosterior& gp, const Eigen::VectorXd& x, double threshold,
           int quadrature_nodes = 64);
double em(const GpPosterior& gp, const Eigen::VectorXd& x, double threshold);
double straddle(const GpPosterior& gp, const Eigen::VectorXd& x, double threshold);
double bes_mp(const GpPosterior& gp, const Eigen::VectorXd& x, const ThresholdSet& fstar,
              int quadrature_nodes = 64);
double bes_mp_implicit(const GpPosterior& gp, const Eigen::VectorXd& x,
                       const ThresholdSet& falpha, int quadrature_nodes = 64);
double bes_k(const GpPosterior& gp, const Eigen::VectorXd& x, const Eigen::VectorXd& b,
             int quadrature_nodes = 64);
double bes2_mp(const GpPosterior& gp, const Eigen::VectorXd& x, const ThresholdSet& b_set,
               int quadrature_nodes = 64);
double ucb(const GpPosterior& gp, const Eigen::VectorXd& x, double beta);
double ei(const GpPosterior& gp, const Eigen::VectorXd& x, double incumbent);
double mes(const GpPosterior& gp, const Eigen::VectorXd& x, const ThresholdSet& fstar);

enum class Criterion { Bes, Em, Straddle, BesMp, BesMpImplicit, Bes2Mp, BesK, Ucb, Ei, Mes };

std::string to_string(Criterion c);
Criterion criterion_from_string(const std::string& name);

// Tagged choice of criterion plus its parameters.
struct AcquisitionSpec {
    Criterion criterion = Criterion::Bes;
    std::optional<double> threshold;         // Bes / Em / Straddle
    std::optional<ThresholdSet> thresholds;  // BesMp / BesMpImplicit / Bes2Mp / BesK / Mes
    double beta = 2.0;                       // Ucb
    std::optional<double> alpha;             // implicit-LSE tolerance
    std::optional<double> incumbent;         // Ei
    int quadrature_nodes = 64;

    void validate() const;
};

double evaluate_acquisition(const AcquisitionSpec& spec, const PosteriorMoments& m);

// Criterion as a pure function over candidate inputs. The posterior must
// outlive the returned callable.
std::function<double(const Eigen::VectorXd&)> make_acquisition(const AcquisitionSpec& spec,
                                                               const GpPosterior& gp);

}  // namespace besmp

#endif
