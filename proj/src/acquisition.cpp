#include "besmp/acquisition.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "besmp/errors.hpp"
#include "besmp/math.hpp"

namespace besmp {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kInvSqrtPi = 0.56418958354775628;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Observing y shifts the label statistic from h to g = g(y, threshold); both
// live on the same standardized scale. Under y ~ N(mu, sigma_+^2) the
// statistic g is itself Gaussian with mean h * sigma_+/sigma_n and standard
// deviation sigma_x/sigma_n, which is all the criteria below need.
struct LabelStats {
    double h = 0.0;    // (threshold - mu) / sigma_x
    double g_mean = 0.0;
    double g_sd = 0.0;
};

LabelStats label_stats(double mu, double sx2, double sn2, double threshold) {
    const double sx = std::sqrt(sx2);
    const double sp = std::sqrt(sx2 + sn2);
    const double sn = std::sqrt(sn2);
    LabelStats s;
    s.h = (threshold - mu) / sx;
    s.g_mean = s.h * sp / sn;
    s.g_sd = sx / sn;
    return s;
}

void check_label(int label) {
    if (label != 1 && label != -1)
        throw std::invalid_argument("class label must be +1 or -1");
}

double clamped(double log_prob) { return std::max(log_prob, kLogProbFloor); }

// KL divergence between the y-conditioned and prior label distributions,
// Bernoulli(Phi(g)) vs Bernoulli(Phi(h)), with 0 log 0 = 0.
double label_kl(double g, double lh_pos, double lh_neg) {
    const double lg_pos = clamped(log_norm_cdf(g));
    const double lg_neg = clamped(log_norm_cdf(-g));
    const double p_pos = std::exp(lg_pos);
    const double p_neg = std::exp(lg_neg);
    double acc = 0.0;
    if (p_pos > 0.0) acc += p_pos * (lg_pos - lh_pos);
    if (p_neg > 0.0) acc += p_neg * (lg_neg - lh_neg);
    return acc;
}

// E[H2(Phi(u))] for u ~ N(m, s^2). The entropy factor vanishes outside
// |u| <= 40, so a Gauss-Legendre rule over the overlap of the two supports
// resolves the integrand at every noise scale.
double expected_binary_entropy(double m, double s, int n_nodes) {
    const double lo = std::max(-40.0, m - 9.0 * s);
    const double hi = std::min(40.0, m + 9.0 * s);
    if (!(lo < hi)) return 0.0;
    const QuadRule& gl = gauss_legendre(n_nodes);
    const double half = 0.5 * (hi - lo);
    const double mid = 0.5 * (hi + lo);
    double acc = 0.0;
    for (int i = 0; i < gl.nodes.size(); ++i) {
        const double u = mid + half * gl.nodes(i);
        acc += gl.weights(i) * binary_entropy_phi(u) * norm_pdf((u - m) / s) / s;
    }
    return acc * half;
}

// Steepness of the g-transition relative to the Gauss-Hermite node spacing;
// above this the KL-form quadrature under-resolves the layer and the
// entropy-difference form takes over.
constexpr double kSteepSwitch = 3.0;
// Beyond this the observation pins the label and the criterion is the prior
// entropy to within ~1e-8.
constexpr double kNoiselessSwitch = 1e4;

}  // namespace

double class_prob(const PosteriorMoments& m, double threshold, int label) {
    check_label(label);
    if (m.variance <= 0.0) {
        const double p_sub = (m.mean < threshold) ? 1.0 : 0.0;
        return (label == 1) ? p_sub : 1.0 - p_sub;
    }
    const double h = (threshold - m.mean) / std::sqrt(m.variance);
    return norm_cdf(label * h);
}

double class_prob_given_y(const PosteriorMoments& m, double threshold, double y, int label) {
    check_label(label);
    if (m.variance <= 0.0)
        throw std::invalid_argument("class_prob_given_y: requires positive posterior variance");
    const double sn2 = m.noise_variance();
    if (sn2 <= 0.0)
        throw DegenerateNoiseError("class_prob_given_y: noiseless case has no g statistic");
    const double sx = std::sqrt(m.variance);
    const double sn = std::sqrt(sn2);
    const double sp = std::sqrt(m.observation_variance);
    const double g = (m.observation_variance * threshold - sn2 * m.mean - m.variance * y) /
                     (sx * sn * sp);
    return norm_cdf(label * g);
}

double em(const PosteriorMoments& m, double threshold) {
    if (m.variance <= 0.0) return 0.0;
    return binary_entropy_phi((threshold - m.mean) / std::sqrt(m.variance));
}

double bes_integrand(const PosteriorMoments& m, double threshold, double y) {
    if (m.variance <= 0.0) return 0.0;
    const double sn2 = m.noise_variance();
    if (sn2 <= 0.0)
        throw DegenerateNoiseError("bes_integrand: undefined for noiseless observations");
    const LabelStats s = label_stats(m.mean, m.variance, sn2, threshold);
    const double g = s.g_mean - (y - m.mean) * std::sqrt(m.variance) /
                                    (std::sqrt(sn2) * std::sqrt(m.observation_variance));
    const double lh_pos = clamped(log_norm_cdf(s.h));
    const double lh_neg = clamped(log_norm_cdf(-s.h));
    return label_kl(g, lh_pos, lh_neg);
}

double bes(const PosteriorMoments& m, double threshold, int quadrature_nodes) {
    if (m.variance <= 0.0) return 0.0;
    const double sn2 = m.noise_variance();
    if (sn2 <= 0.0) return em(m, threshold);
    const LabelStats s = label_stats(m.mean, m.variance, sn2, threshold);
    if (s.g_sd > kNoiselessSwitch) return em(m, threshold);
    if (s.g_sd > kSteepSwitch) {
        const double t =
            expected_binary_entropy(s.g_mean, s.g_sd, std::max(2 * quadrature_nodes, 96));
        return std::max(binary_entropy_phi(s.h) - t, 0.0);
    }
    const double lh_pos = clamped(log_norm_cdf(s.h));
    const double lh_neg = clamped(log_norm_cdf(-s.h));
    const QuadRule& gh = gauss_hermite(quadrature_nodes);
    double acc = 0.0;
    for (int i = 0; i < gh.nodes.size(); ++i) {
        const double g = s.g_mean + kSqrt2 * s.g_sd * gh.nodes(i);
        acc += gh.weights(i) * label_kl(g, lh_pos, lh_neg);
    }
    return acc * kInvSqrtPi;
}

double straddle(const PosteriorMoments& m, double threshold) {
    return 1.96 * std::sqrt(std::max(m.variance, 0.0)) - std::abs(m.mean - threshold);
}

namespace {

void require_kind(const ThresholdSet& set, ThresholdKind kind, const char* who) {
    if (set.values.empty()) throw std::invalid_argument(std::string(who) + ": empty threshold set");
    if (set.kind != kind) throw std::invalid_argument(std::string(who) + ": wrong threshold kind");
}

// log P(lo < Z <= hi) tolerating empty or sentinel-infinite intervals.
double log_interval_or_empty(double lo, double hi) {
    if (!(lo < hi)) return -kInf;
    return log_norm_interval(lo, hi);
}

double prior_class_entropy(const Eigen::VectorXd& h_edges) {
    const int k1 = static_cast<int>(h_edges.size()) - 1;
    double acc = 0.0;
    for (int i = 0; i < k1; ++i) {
        const double lp = log_interval_or_empty(h_edges(i), h_edges(i + 1));
        const double p = std::exp(lp);
        if (p > 0.0) acc -= p * lp;
    }
    return acc;
}

}  // namespace

double bes_k(const PosteriorMoments& m, const Eigen::VectorXd& b, int quadrature_nodes) {
    const int k = static_cast<int>(b.size());
    if (k < 1) throw std::invalid_argument("bes_k: empty threshold vector");
    for (int i = 0; i + 1 < k; ++i)
        if (!(b(i) < b(i + 1)))
            throw std::invalid_argument("bes_k: thresholds must be strictly ascending");
    if (m.variance <= 0.0) return 0.0;
    const double sx = std::sqrt(m.variance);
    const double sn2 = m.noise_variance();

    // Standardized class edges, with b_0 = -inf and b_{k+1} = +inf.
    Eigen::VectorXd h_edges(k + 2), g_edges(k + 2);
    h_edges(0) = -kInf;
    h_edges(k + 1) = kInf;
    for (int j = 0; j < k; ++j) h_edges(j + 1) = (b(j) - m.mean) / sx;

    if (sn2 <= 0.0) return prior_class_entropy(h_edges);
    const double ratio = std::sqrt(m.observation_variance) / std::sqrt(sn2);
    const double g_sd = sx / std::sqrt(sn2);
    if (g_sd > kNoiselessSwitch) return prior_class_entropy(h_edges);

    Eigen::VectorXd lp(k + 1);
    for (int i = 0; i <= k; ++i)
        lp(i) = clamped(log_interval_or_empty(h_edges(i), h_edges(i + 1)));

    g_edges(0) = -kInf;
    g_edges(k + 1) = kInf;
    for (int j = 0; j < k; ++j) g_edges(j + 1) = h_edges(j + 1) * ratio;

    if (g_sd > kSteepSwitch) {
        // Entropy difference: H(prior classes) - E[H(classes | y)]. The
        // conditional entropy concentrates around each class transition.
        const double spread = g_edges(k) - g_edges(1);
        double expected = 0.0;
        if (k == 1 || spread > 80.0) {
            // Transitions are isolated binary entropy bumps.
            for (int j = 1; j <= k; ++j)
                expected +=
                    expected_binary_entropy(g_edges(j), g_sd, std::max(2 * quadrature_nodes, 96));
        } else {
            const double lo = std::max(-(g_edges(k)) - 40.0, -9.0 * g_sd);
            const double hi = std::min(-(g_edges(1)) + 40.0, 9.0 * g_sd);
            if (lo < hi) {
                const QuadRule& gl = gauss_legendre(std::max(4 * quadrature_nodes, 256));
                const double half = 0.5 * (hi - lo);
                const double mid = 0.5 * (hi + lo);
                for (int i = 0; i < gl.nodes.size(); ++i) {
                    const double w = mid + half * gl.nodes(i);
                    double hcond = 0.0;
                    for (int c = 0; c <= k; ++c) {
                        const double lq = log_interval_or_empty(
                            std::isinf(g_edges(c)) ? g_edges(c) : g_edges(c) + w,
                            std::isinf(g_edges(c + 1)) ? g_edges(c + 1) : g_edges(c + 1) + w);
                        const double q = std::exp(lq);
                        if (q > 0.0) hcond -= q * lq;
                    }
                    expected += gl.weights(i) * hcond * norm_pdf(w / g_sd) / g_sd;
                }
                expected *= half;
            }
        }
        return std::max(prior_class_entropy(h_edges) - expected, 0.0);
    }

    const QuadRule& gh = gauss_hermite(quadrature_nodes);
    double acc = 0.0;
    for (int i = 0; i < gh.nodes.size(); ++i) {
        const double w = -kSqrt2 * g_sd * gh.nodes(i);
        double kl = 0.0;
        for (int c = 0; c <= k; ++c) {
            const double lq = log_interval_or_empty(
                std::isinf(g_edges(c)) ? g_edges(c) : g_edges(c) + w,
                std::isinf(g_edges(c + 1)) ? g_edges(c + 1) : g_edges(c + 1) + w);
            const double q = std::exp(lq);
            if (q > 0.0) kl += q * (std::max(lq, kLogProbFloor) - lp(c));
        }
        acc += gh.weights(i) * kl;
    }
    return acc * kInvSqrtPi;
}

double bes_mp(const PosteriorMoments& m, const ThresholdSet& fstar, int quadrature_nodes) {
    require_kind(fstar, ThresholdKind::MaxValue, "bes_mp");
    double acc = 0.0;
    for (int i = 0; i < fstar.size(); ++i) acc += bes(m, fstar.scalar(i), quadrature_nodes);
    return acc / fstar.size();
}

double bes_mp_implicit(const PosteriorMoments& m, const ThresholdSet& falpha,
                       int quadrature_nodes) {
    require_kind(falpha, ThresholdKind::Shifted, "bes_mp_implicit");
    double acc = 0.0;
    for (int i = 0; i < falpha.size(); ++i) acc += bes(m, falpha.scalar(i), quadrature_nodes);
    return acc / falpha.size();
}

double bes2_mp(const PosteriorMoments& m, const ThresholdSet& b_set, int quadrature_nodes) {
    require_kind(b_set, ThresholdKind::Stacked, "bes2_mp");
    double acc = 0.0;
    for (int i = 0; i < b_set.size(); ++i) acc += bes_k(m, b_set.vec(i), quadrature_nodes);
    return acc / b_set.size();
}

double ucb(const PosteriorMoments& m, double beta) {
    if (!(beta > 0.0)) throw std::invalid_argument("ucb: beta must be > 0");
    return m.mean + beta * std::sqrt(std::max(m.variance, 0.0));
}

double ei(const PosteriorMoments& m, double incumbent) {
    const double sx = std::sqrt(std::max(m.variance, 0.0));
    if (sx <= 0.0) return std::max(m.mean - incumbent, 0.0);
    const double z = (m.mean - incumbent) / sx;
    return sx * (z * norm_cdf(z) + norm_pdf(z));
}

double mes(const PosteriorMoments& m, const ThresholdSet& fstar) {
    require_kind(fstar, ThresholdKind::MaxValue, "mes");
    if (m.variance <= 0.0) return 0.0;
    const double sx = std::sqrt(m.variance);
    double acc = 0.0;
    for (int i = 0; i < fstar.size(); ++i) {
        const double z = (fstar.scalar(i) - m.mean) / sx;
        const double lcdf = log_norm_cdf(z);
        const double hazard = std::exp(log_norm_pdf(z) - lcdf);
        acc += std::max(0.5 * z * hazard - lcdf, 0.0);
    }
    return acc / fstar.size();
}

double bes(const GpPosterior& gp, const Eigen::VectorXd& x, double threshold,
           int quadrature_nodes) {
    return bes(gp.posterior(x), threshold, quadrature_nodes);
}
double em(const GpPosterior& gp, const Eigen::VectorXd& x, double threshold) {
    return em(gp.posterior(x), threshold);
}
double straddle(const GpPosterior& gp, const Eigen::VectorXd& x, double threshold) {
    return straddle(gp.posterior(x), threshold);
}
double bes_mp(const GpPosterior& gp, const Eigen::VectorXd& x, const ThresholdSet& fstar,
              int quadrature_nodes) {
    return bes_mp(gp.posterior(x), fstar, quadrature_nodes);
}
double bes_mp_implicit(const GpPosterior& gp, const Eigen::VectorXd& x,
                       const ThresholdSet& falpha, int quadrature_nodes) {
    return bes_mp_implicit(gp.posterior(x), falpha, quadrature_nodes);
}
double bes_k(const GpPosterior& gp, const Eigen::VectorXd& x, const Eigen::VectorXd& b,
             int quadrature_nodes) {
    return bes_k(gp.posterior(x), b, quadrature_nodes);
}
double bes2_mp(const GpPosterior& gp, const Eigen::VectorXd& x, const ThresholdSet& b_set,
               int quadrature_nodes) {
    return bes2_mp(gp.posterior(x), b_set, quadrature_nodes);
}
double ucb(const GpPosterior& gp, const Eigen::VectorXd& x, double beta) {
    return ucb(gp.posterior(x), beta);
}
double ei(const GpPosterior& gp, const Eigen::VectorXd& x, double incumbent) {
    return ei(gp.posterior(x), incumbent);
}
double mes(const GpPosterior& gp, const Eigen::VectorXd& x, const ThresholdSet& fstar) {
    return mes(gp.posterior(x), fstar);
}

std::string to_string(Criterion c) {
    switch (c) {
        case Criterion::Bes: return "BES";
        case Criterion::Em: return "EM";
        case Criterion::Straddle: return "STRDL";
        case Criterion::BesMp: return "BES_MP";
        case Criterion::BesMpImplicit: return "BES_MP_IMPLICIT";
        case Criterion::Bes2Mp: return "BES2_MP";
        case Criterion::BesK: return "BESK";
        case Criterion::Ucb: return "UCB";
        case Criterion::Ei: return "EI";
        case Criterion::Mes: return "MES";
    }
    throw std::logic_error("to_string: unknown criterion");
}

Criterion criterion_from_string(const std::string& name) {
    if (name == "BES") return Criterion::Bes;
    if (name == "EM") return Criterion::Em;
    if (name == "STRDL") return Criterion::Straddle;
    if (name == "BES_MP") return Criterion::BesMp;
    if (name == "BES_MP_IMPLICIT") return Criterion::BesMpImplicit;
    if (name == "BES2_MP") return Criterion::Bes2Mp;
    if (name == "BESK") return Criterion::BesK;
    if (name == "UCB") return Criterion::Ucb;
    if (name == "EI") return Criterion::Ei;
    if (name == "MES") return Criterion::Mes;
    throw std::invalid_argument("unknown criterion: " + name);
}

void AcquisitionSpec::validate() const {
    if (quadrature_nodes < 1)
        throw std::invalid_argument("AcquisitionSpec: quadrature_nodes must be >= 1");
    auto need_thresholds = [&](ThresholdKind kind) {
        if (!thresholds) throw std::invalid_argument("AcquisitionSpec: threshold set required");
        thresholds->validate();
        if (thresholds->kind != kind)
            throw std::invalid_argument("AcquisitionSpec: wrong threshold-set kind");
    };
    switch (criterion) {
        case Criterion::Bes:
        case Criterion::Em:
        case Criterion::Straddle:
            if (!threshold)
                throw std::invalid_argument("AcquisitionSpec: scalar threshold required");
            break;
        case Criterion::BesMp:
        case Criterion::Mes:
            need_thresholds(ThresholdKind::MaxValue);
            break;
        case Criterion::BesMpImplicit:
            need_thresholds(ThresholdKind::Shifted);
            break;
        case Criterion::Bes2Mp:
            need_thresholds(ThresholdKind::Stacked);
            for (const Eigen::VectorXd& v : thresholds->values)
                if (v.size() != 2)
                    throw std::invalid_argument("AcquisitionSpec: stacked vectors must have k = 2");
            break;
        case Criterion::BesK:
            need_thresholds(ThresholdKind::Stacked);
            break;
        case Criterion::Ucb:
            if (!(beta > 0.0)) throw std::invalid_argument("AcquisitionSpec: beta must be > 0");
            break;
        case Criterion::Ei:
            if (!incumbent) throw std::invalid_argument("AcquisitionSpec: incumbent required");
            break;
    }
}

double evaluate_acquisition(const AcquisitionSpec& spec, const PosteriorMoments& m) {
    switch (spec.criterion) {
        case Criterion::Bes: return bes(m, *spec.threshold, spec.quadrature_nodes);
        case Criterion::Em: return em(m, *spec.threshold);
        case Criterion::Straddle: return straddle(m, *spec.threshold);
        case Criterion::BesMp: return bes_mp(m, *spec.thresholds, spec.quadrature_nodes);
        case Criterion::BesMpImplicit:
            return bes_mp_implicit(m, *spec.thresholds, spec.quadrature_nodes);
        case Criterion::Bes2Mp: return bes2_mp(m, *spec.thresholds, spec.quadrature_nodes);
        case Criterion::BesK: {
            double acc = 0.0;
            for (int i = 0; i < spec.thresholds->size(); ++i)
                acc += bes_k(m, spec.thresholds->vec(i), spec.quadrature_nodes);
            return acc / spec.thresholds->size();
        }
        case Criterion::Ucb: return ucb(m, spec.beta);
        case Criterion::Ei: return ei(m, *spec.incumbent);
        case Criterion::Mes: return mes(m, *spec.thresholds);
    }
    throw std::logic_error("evaluate_acquisition: unknown criterion");
}

std::function<double(const Eigen::VectorXd&)> make_acquisition(const AcquisitionSpec& spec,
                                                               const GpPosterior& gp) {
    spec.validate();
    return [spec, &gp](const Eigen::VectorXd& x) {
        return evaluate_acquisition(spec, gp.posterior(x));
    };
}

}  // namespace besmp
