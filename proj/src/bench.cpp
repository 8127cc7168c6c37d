#include "besmp/bench.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

#include "besmp/optimize.hpp"
#include "besmp/sampling.hpp"

namespace besmp {

Eigen::VectorXd BenchmarkFn::evaluate_batch(const Eigen::MatrixXd& X) const {
    const Eigen::Index n = X.rows();
    Eigen::VectorXd out(n);
    if (batch_evaluator) {
        // Chunked so feature expansions of large grids stay within memory.
        constexpr Eigen::Index kChunk = 32768;
        for (Eigen::Index start = 0; start < n; start += kChunk) {
            const Eigen::Index len = std::min(kChunk, n - start);
            out.segment(start, len) = batch_evaluator(X.middleRows(start, len));
        }
        return out;
    }
    for (Eigen::Index i = 0; i < n; ++i) out(i) = evaluator(X.row(i).transpose());
    return out;
}

Eigen::MatrixXd lattice_grid(const Box& box, int approx_points) {
    const int d = box.dim();
    const int per_dim = std::max(2, static_cast<int>(std::round(std::pow(
                                        static_cast<double>(approx_points), 1.0 / d))));
    long total = 1;
    for (int i = 0; i < d; ++i) total *= per_dim;
    Eigen::MatrixXd grid(total, d);
    for (long idx = 0; idx < total; ++idx) {
        long rem = idx;
        for (int i = 0; i < d; ++i) {
            const long j = rem % per_dim;
            rem /= per_dim;
            grid(idx, i) = box.lower(i) + (box.upper(i) - box.lower(i)) *
                                              static_cast<double>(j) / (per_dim - 1);
        }
    }
    return grid;
}

namespace {

double branin(const Eigen::VectorXd& x) {
    const double a = 1.0;
    const double b = 5.1 / (4.0 * M_PI * M_PI);
    const double c = 5.0 / M_PI;
    const double r = 6.0;
    const double s = 10.0;
    const double t = 1.0 / (8.0 * M_PI);
    const double u = x(1) - b * x(0) * x(0) + c * x(0) - r;
    return a * u * u + s * (1.0 - t) * std::cos(x(0)) + s;
}

double michalewicz2(const Eigen::VectorXd& x) {
    const double m = 10.0;
    double acc = 0.0;
    for (int i = 0; i < 2; ++i) {
        const double s = std::sin((i + 1) * x(i) * x(i) / M_PI);
        acc -= std::sin(x(i)) * std::pow(s, 2.0 * m);
    }
    return acc;
}

double hartmann3(const Eigen::VectorXd& x) {
    static const double alpha[4] = {1.0, 1.2, 3.0, 3.2};
    static const double A[4][3] = {
        {3.0, 10.0, 30.0}, {0.1, 10.0, 35.0}, {3.0, 10.0, 30.0}, {0.1, 10.0, 35.0}};
    static const double P[4][3] = {{0.3689, 0.1170, 0.2673},
                                   {0.4699, 0.4387, 0.7470},
                                   {0.1091, 0.8732, 0.5547},
                                   {0.0381, 0.5743, 0.8828}};
    double acc = 0.0;
    for (int i = 0; i < 4; ++i) {
        double inner = 0.0;
        for (int j = 0; j < 3; ++j) {
            const double d = x(j) - P[i][j];
            inner += A[i][j] * d * d;
        }
        acc -= alpha[i] * std::exp(-inner);
    }
    return acc;
}

double goldstein(const Eigen::VectorXd& x) {
    const double a = x(0), b = x(1);
    const double t1 = 1.0 + (a + b + 1.0) * (a + b + 1.0) *
                                (19.0 - 14.0 * a + 3.0 * a * a - 14.0 * b + 6.0 * a * b +
                                 3.0 * b * b);
    const double t2 = 30.0 + (2.0 * a - 3.0 * b) * (2.0 * a - 3.0 * b) *
                                 (18.0 - 32.0 * a + 12.0 * a * a + 48.0 * b - 36.0 * a * b +
                                  27.0 * b * b);
    return t1 * t2;
}

Box standard_domain(const std::string& base) {
    Eigen::VectorXd lo, hi;
    if (base == "branin") {
        lo.resize(2); hi.resize(2);
        lo << -5.0, 0.0;
        hi << 10.0, 15.0;
    } else if (base == "michalewicz2") {
        lo = Eigen::VectorXd::Zero(2);
        hi = Eigen::VectorXd::Constant(2, M_PI);
    } else if (base == "hartmann3") {
        lo = Eigen::VectorXd::Zero(3);
        hi = Eigen::VectorXd::Ones(3);
    } else if (base == "goldstein") {
        lo = Eigen::VectorXd::Constant(2, -2.0);
        hi = Eigen::VectorXd::Constant(2, 2.0);
    } else {
        throw std::invalid_argument("unknown benchmark: " + base);
    }
    return Box(lo, hi);
}

struct GpSampleParams {
    double lengthscale = 0.0;
    std::uint64_t seed = 0;
};

// Accepts gp_sample(l=0.125,seed=7), whitespace tolerated.
std::optional<GpSampleParams> parse_gp_sample(const std::string& name) {
    std::string s;
    for (char c : name)
        if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
    const std::string prefix = "gp_sample(";
    if (s.rfind(prefix, 0) != 0 || s.back() != ')') return std::nullopt;
    const std::string args = s.substr(prefix.size(), s.size() - prefix.size() - 1);
    GpSampleParams p;
    bool have_l = false, have_seed = false;
    std::size_t pos = 0;
    while (pos < args.size()) {
        std::size_t next = args.find(',', pos);
        if (next == std::string::npos) next = args.size();
        const std::string kv = args.substr(pos, next - pos);
        const std::size_t eq = kv.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("bad gp_sample spec: " + name);
        const std::string key = kv.substr(0, eq);
        const std::string value = kv.substr(eq + 1);
        if (key == "l") {
            p.lengthscale = std::stod(value);
            have_l = true;
        } else if (key == "seed") {
            p.seed = std::stoull(value);
            have_seed = true;
        } else {
            throw std::invalid_argument("bad gp_sample key '" + key + "' in: " + name);
        }
        pos = next + 1;
    }
    if (!have_l || !have_seed || !(p.lengthscale > 0.0))
        throw std::invalid_argument("gp_sample needs l > 0 and seed: " + name);
    return p;
}

// A fixed random function drawn from the smooth-kernel prior over the unit
// square; deterministic given (l, seed).
BenchmarkFn gp_sample_benchmark(const std::string& display_name, const GpSampleParams& p) {
    constexpr int kFeatures = 256;
    const Box domain = Box::unit(2);
    KernelParams kp = KernelParams::isotropic(2, p.lengthscale, 1.0, 0.0);
    GpPosterior prior(kp, Dataset(2));
    Rng rng(p.seed);
    auto sample = std::make_shared<RffSample>(draw_posterior_sample(prior, kFeatures, rng));

    BenchmarkFn fn;
    fn.name = display_name;
    fn.dim = 2;
    fn.domain = domain;
    fn.evaluator = [sample](const Eigen::VectorXd& x) { return sample->value(x); };
    fn.batch_evaluator = [sample](const Eigen::MatrixXd& X) { return sample->value_batch(X); };
    return fn;
}

BenchmarkFn negated(BenchmarkFn fn) {
    auto eval = fn.evaluator;
    fn.evaluator = [eval](const Eigen::VectorXd& x) { return -eval(x); };
    if (fn.batch_evaluator) {
        auto batch = fn.batch_evaluator;
        fn.batch_evaluator = [batch](const Eigen::MatrixXd& X) {
            return (-batch(X).array()).matrix().eval();
        };
    }
    if (fn.known_max) fn.known_max = std::nullopt;
    fn.known_max_location = std::nullopt;
    return fn;
}

}  // namespace

BenchmarkFn raw_benchmark(const std::string& name, bool negate) {
    BenchmarkFn fn;
    if (auto gp = parse_gp_sample(name)) {
        fn = gp_sample_benchmark(name, *gp);
    } else if (name == "phosphorus-proxy") {
        // Stand-in spatial field: a fixed GP draw over the unit square.
        GpSampleParams p;
        p.lengthscale = 0.2;
        p.seed = 8101;
        fn = gp_sample_benchmark(name, p);
    } else {
        fn.name = name;
        fn.domain = standard_domain(name);
        fn.dim = fn.domain.dim();
        if (name == "branin") fn.evaluator = branin;
        else if (name == "michalewicz2") fn.evaluator = michalewicz2;
        else if (name == "hartmann3") fn.evaluator = hartmann3;
        else fn.evaluator = goldstein;
    }
    return negate ? negated(fn) : fn;
}

BenchmarkFn normalize(const BenchmarkFn& fn, const Eigen::MatrixXd& probe_grid) {
    if (probe_grid.cols() != fn.dim)
        throw std::invalid_argument("normalize: probe grid dimension mismatch");
    const Eigen::VectorXd values = fn.evaluate_batch(probe_grid);
    const double mean = values.mean();
    const double sd = std::sqrt((values.array() - mean).square().mean());
    if (!(sd > 1e-12)) throw std::invalid_argument("normalize: zero variance on probe grid");

    BenchmarkFn out = fn;
    auto eval = fn.evaluator;
    out.evaluator = [eval, mean, sd](const Eigen::VectorXd& x) { return (eval(x) - mean) / sd; };
    if (fn.batch_evaluator) {
        auto batch = fn.batch_evaluator;
        out.batch_evaluator = [batch, mean, sd](const Eigen::MatrixXd& X) {
            return ((batch(X).array() - mean) / sd).matrix().eval();
        };
    }
    if (fn.known_max) out.known_max = (*fn.known_max - mean) / sd;
    return out;
}

namespace {

// Ground-truth maximum: dense grid scan plus ascent refinement of the top
// grid points.
void attach_known_max(BenchmarkFn& fn) {
    const int grid_points = (fn.dim <= 2) ? 1000000 : 100000 * fn.dim;
    const Eigen::MatrixXd grid = lattice_grid(fn.domain, grid_points);
    const Eigen::VectorXd values = fn.evaluate_batch(grid);

    std::vector<int> top;
    for (int rep = 0; rep < 5; ++rep) {
        int best = -1;
        double best_v = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < values.size(); ++i) {
            bool used = false;
            for (int t : top) used = used || (t == i);
            if (!used && values(i) > best_v) {
                best_v = values(i);
                best = i;
            }
        }
        top.push_back(best);
    }

    double best_value = values.maxCoeff();
    Eigen::VectorXd best_x;
    for (int i = 0; i < static_cast<int>(grid.rows()); ++i)
        if (values(i) == best_value) {
            best_x = grid.row(i).transpose();
            break;
        }
    for (int t : top) {
        const MaximizeResult r = ascend_from(fn.evaluator, fn.domain, grid.row(t).transpose(),
                                             300, 0.02);
        if (r.value > best_value) {
            best_value = r.value;
            best_x = r.x;
        }
    }
    fn.known_max = best_value;
    fn.known_max_location = best_x;
}

}  // namespace

BenchmarkFn make_benchmark(const std::string& name, bool negate) {
    static std::map<std::string, BenchmarkFn> cache;
    static std::mutex mutex;
    const std::string key = name + (negate ? "|neg" : "|pos");
    {
        std::lock_guard<std::mutex> lock(mutex);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
    }
    BenchmarkFn fn = raw_benchmark(name, negate);
    const Eigen::MatrixXd probe = lattice_grid(fn.domain, 100000);
    fn = normalize(fn, probe);
    attach_known_max(fn);
    std::lock_guard<std::mutex> lock(mutex);
    return cache.emplace(key, std::move(fn)).first->second;
}

double observe(const BenchmarkFn& fn, const Eigen::VectorXd& x, double noise_variance, Rng& rng) {
    if (!(noise_variance >= 0.0)) throw std::invalid_argument("observe: negative noise variance");
    const double f = fn.evaluator(x);
    if (noise_variance == 0.0) return f;
    std::normal_distribution<double> gauss(0.0, std::sqrt(noise_variance));
    return f + gauss(rng);
}

std::vector<std::string> benchmark_names() {
    return {"branin", "michalewicz2", "hartmann3", "goldstein", "phosphorus-proxy"};
}

}  // namespace besmp
