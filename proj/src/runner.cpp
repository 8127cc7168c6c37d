#include "besmp/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "besmp/bench.hpp"
#include "besmp/math.hpp"
#include "besmp/metrics.hpp"
#include "besmp/rng.hpp"
#include "besmp/sampling.hpp"

namespace besmp {

namespace {

enum SeedRole : std::uint64_t {
    kRolePrior = 1,
    kRoleObserve = 2,
    kRoleGrid = 3,
    kRoleMle = 4,
    kRoleThresholds = 5,
    kRoleAcquisition = 6,
    kRoleMetric = 7,
};

}  // namespace

std::string to_string(ProblemType p) {
    switch (p) {
        case ProblemType::Lse: return "lse";
        case ProblemType::Bo: return "bo";
        case ProblemType::ImplicitLse: return "implicit_lse";
    }
    throw std::logic_error("to_string: unknown problem type");
}

ProblemType problem_from_string(const std::string& name) {
    if (name == "lse") return ProblemType::Lse;
    if (name == "bo") return ProblemType::Bo;
    if (name == "implicit_lse") return ProblemType::ImplicitLse;
    throw std::invalid_argument("unknown problem type: " + name);
}

void ExperimentConfig::validate() const {
    if (iterations < 1) throw std::invalid_argument("config: iterations must be >= 1");
    if (repetitions < 1) throw std::invalid_argument("config: repetitions must be >= 1");
    if (n_prior_observations < 2)
        throw std::invalid_argument("config: n_prior_observations must be >= 2 (MLE needs data)");
    if (refit_every < 1) throw std::invalid_argument("config: refit_every must be >= 1");
    if (!(noise_variance >= 0.0)) throw std::invalid_argument("config: negative noise variance");
    if (n_max_value_samples < 1 || rff_features < 1 || eval_grid_size < 1 || mle_restarts < 1 ||
        acq_candidates < 1 || acq_starts < 1 || acq_steps < 1)
        throw std::invalid_argument("config: counts must be >= 1");

    switch (problem) {
        case ProblemType::Lse: {
            const bool ok = criterion == Criterion::Bes || criterion == Criterion::Em ||
                            criterion == Criterion::Straddle || criterion == Criterion::BesK;
            if (!ok) throw std::invalid_argument("config: criterion not valid for lse");
            if (criterion == Criterion::BesK) {
                if (besk_thresholds.size() < 2)
                    throw std::invalid_argument("config: BESK needs besk_thresholds (k >= 2)");
                for (std::size_t i = 0; i + 1 < besk_thresholds.size(); ++i)
                    if (!(besk_thresholds[i] < besk_thresholds[i + 1]))
                        throw std::invalid_argument("config: besk_thresholds must ascend");
            }
            break;
        }
        case ProblemType::Bo: {
            const bool ok = criterion == Criterion::BesMp || criterion == Criterion::Ucb ||
                            criterion == Criterion::Ei || criterion == Criterion::Mes;
            if (!ok) throw std::invalid_argument("config: criterion not valid for bo");
            break;
        }
        case ProblemType::ImplicitLse: {
            const bool ok =
                criterion == Criterion::BesMpImplicit || criterion == Criterion::Bes2Mp;
            if (!ok) throw std::invalid_argument("config: criterion not valid for implicit_lse");
            if (!(alpha >= 0.0)) throw std::invalid_argument("config: alpha must be >= 0");
            if (criterion == Criterion::Bes2Mp && !(alpha > 0.0))
                throw std::invalid_argument("config: BES2_MP needs alpha > 0");
            break;
        }
    }
}

namespace {

MleBounds bounds_for(const Box& domain) {
    // Observations are normalized to unit scale and lengthscales beyond the
    // domain width are degenerate, so the search box stays tight; wide-open
    // bounds let early small-data fits extrapolate confidently and wrongly.
    MleBounds b;
    const double wmin = domain.width().minCoeff();
    const double wmax = domain.width().maxCoeff();
    b.lengthscale_min = 2e-2 * wmin;
    b.lengthscale_max = wmax;
    b.signal_variance_min = 5e-2;
    b.signal_variance_max = 20.0;
    b.noise_variance_min = 1e-8;
    b.noise_variance_max = 1.0;
    return b;
}

std::vector<IterationRecord> run_repetition(const ExperimentConfig& cfg, const BenchmarkFn& fn,
                                            int rep) {
    using clock = std::chrono::steady_clock;
    const std::uint64_t master = cfg.master_seed;
    std::vector<IterationRecord> records;
    records.reserve(static_cast<std::size_t>(cfg.iterations));

    EvalGrid grid;
    if (cfg.problem != ProblemType::Bo)
        grid = EvalGrid::sample(fn, cfg.eval_grid_size, derive_seed(master, rep, 0, kRoleGrid));

    Rng prior_rng(derive_seed(master, rep, 0, kRolePrior));
    Rng observe_rng(derive_seed(master, rep, 0, kRoleObserve));

    Dataset data(fn.dim);
    for (int i = 0; i < cfg.n_prior_observations; ++i) {
        const Eigen::VectorXd x = fn.domain.sample(prior_rng);
        data.append(x, observe(fn, x, cfg.noise_variance, observe_rng));
    }

    KernelParams params = KernelParams::isotropic(fn.dim, 0.2 * fn.domain.width().mean(), 1.0,
                                                  cfg.noise_variance);
    std::optional<KernelParams> warm;

    for (int it = 1; it <= cfg.iterations; ++it) {
        const auto t0 = clock::now();

        if ((it - 1) % cfg.refit_every == 0) {
            MleOptions mo;
            mo.bounds = bounds_for(fn.domain);
            mo.restarts = cfg.mle_restarts;
            mo.init = warm;
            if (!cfg.refit_noise) mo.fixed_noise = cfg.noise_variance;
            params = fit_mle(data, mo, derive_seed(master, rep, it, kRoleMle));
            warm = params;
        }
        GpPosterior gp(params, data);

        AcquisitionSpec spec;
        spec.criterion = cfg.criterion;
        spec.beta = cfg.beta;
        spec.quadrature_nodes = cfg.quadrature_nodes;
        switch (cfg.criterion) {
            case Criterion::Bes:
            case Criterion::Em:
            case Criterion::Straddle:
                spec.threshold = cfg.threshold;
                break;
            case Criterion::BesK: {
                ThresholdSet b;
                b.kind = ThresholdKind::Stacked;
                Eigen::VectorXd v(static_cast<int>(cfg.besk_thresholds.size()));
                for (int i = 0; i < v.size(); ++i) v(i) = cfg.besk_thresholds[static_cast<std::size_t>(i)];
                b.values.push_back(v);
                spec.thresholds = b;
                break;
            }
            case Criterion::Ei:
                spec.incumbent = data.observations.maxCoeff();
                break;
            case Criterion::Ucb:
                break;
            default: {
                Rng rff_rng(derive_seed(master, rep, it, kRoleThresholds));
                OptimizerConfig inner = default_sample_optimizer();
                const ThresholdSet fstar = sample_max_values(
                    gp, fn.domain, cfg.n_max_value_samples, cfg.rff_features, rff_rng, inner);
                if (cfg.criterion == Criterion::BesMpImplicit)
                    spec.thresholds = shift_thresholds(fstar, cfg.alpha);
                else if (cfg.criterion == Criterion::Bes2Mp)
                    spec.thresholds = stack_thresholds(fstar, cfg.alpha);
                else
                    spec.thresholds = fstar;
                if (cfg.problem == ProblemType::ImplicitLse) spec.alpha = cfg.alpha;
                break;
            }
        }

        OptimizerConfig ocfg;
        ocfg.n_random_candidates = cfg.acq_candidates;
        ocfg.n_ascent_starts = cfg.acq_starts;
        ocfg.ascent_steps = cfg.acq_steps;
        ocfg.rng_seed = derive_seed(master, rep, it, kRoleAcquisition);
        const MaximizeResult chosen = maximize_acquisition(make_acquisition(spec, gp), fn.domain, ocfg);

        const double y = observe(fn, chosen.x, cfg.noise_variance, observe_rng);
        data.append(chosen.x, y);

        GpPosterior updated(params, data);
        double metric = 0.0;
        switch (cfg.problem) {
            case ProblemType::Lse:
                metric = lse_log_loss(updated, grid, cfg.threshold);
                break;
            case ProblemType::Bo:
                metric = simple_regret(fn, data);
                break;
            case ProblemType::ImplicitLse: {
                // Marginalize over the current belief about the max: fresh
                // samples from the posterior that includes this observation.
                Rng metric_rng(derive_seed(master, rep, it, kRoleMetric));
                const ThresholdSet fstar =
                    sample_max_values(updated, fn.domain, cfg.n_max_value_samples,
                                      cfg.rff_features, metric_rng);
                metric = implicit_log_loss(updated, grid, fstar, cfg.alpha);
                break;
            }
        }

        IterationRecord rec;
        rec.repetition = rep;
        rec.iteration = it;
        rec.x = chosen.x;
        rec.y = y;
        rec.acquisition_value = chosen.value;
        rec.metric = metric;
        rec.elapsed_s = std::chrono::duration<double>(clock::now() - t0).count();
        records.push_back(std::move(rec));
    }
    return records;
}

}  // namespace

std::vector<IterationRecord> run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const BenchmarkFn fn = make_benchmark(cfg.benchmark, cfg.negate);

    const int n_threads = cfg.threads > 0
                              ? cfg.threads
                              : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    std::vector<std::vector<IterationRecord>> per_rep(static_cast<std::size_t>(cfg.repetitions));

    std::atomic<int> next{0};
    auto worker = [&]() {
        while (true) {
            const int rep = next.fetch_add(1);
            if (rep >= cfg.repetitions) return;
            try {
                per_rep[static_cast<std::size_t>(rep)] = run_repetition(cfg, fn, rep);
            } catch (const std::exception& e) {
                std::cerr << "repetition " << rep << " aborted: " << e.what() << "\n";
            }
        }
    };
    std::vector<std::thread> pool;
    const int n_workers = std::min(n_threads, cfg.repetitions);
    pool.reserve(static_cast<std::size_t>(n_workers));
    for (int t = 0; t < n_workers; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();

    std::vector<IterationRecord> records;
    for (const auto& chunk : per_rep)
        records.insert(records.end(), chunk.begin(), chunk.end());
    return records;
}

std::vector<SummaryRow> summarize(const std::vector<IterationRecord>& records) {
    if (records.empty()) return {};
    std::map<int, std::vector<double>> by_iteration;
    for (const IterationRecord& r : records) by_iteration[r.iteration].push_back(r.metric);
    std::vector<SummaryRow> rows;
    rows.reserve(by_iteration.size());
    for (const auto& [it, values] : by_iteration) {
        SummaryRow row;
        row.iteration = it;
        row.count = static_cast<int>(values.size());
        double mean = 0.0;
        for (double v : values) mean += v;
        mean /= static_cast<double>(values.size());
        double var = 0.0;
        for (double v : values) var += (v - mean) * (v - mean);
        var /= static_cast<double>(values.size());
        row.mean = mean;
        row.sd = std::sqrt(var);
        row.log10_mean = std::log10(mean);
        rows.push_back(row);
    }
    return rows;
}

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

bool parse_bool(const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw std::invalid_argument("config: bad boolean value '" + v + "'");
}

std::vector<double> parse_double_list(const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stod(trim(item)));
    return out;
}

}  // namespace

ExperimentConfig parse_config(std::istream& in) {
    ExperimentConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));

        if (key == "problem") cfg.problem = problem_from_string(value);
        else if (key == "threshold") cfg.threshold = std::stod(value);
        else if (key == "alpha") cfg.alpha = std::stod(value);
        else if (key == "benchmark") cfg.benchmark = value;
        else if (key == "negate") cfg.negate = parse_bool(value);
        else if (key == "noise_variance") cfg.noise_variance = std::stod(value);
        else if (key == "criterion") cfg.criterion = criterion_from_string(value);
        else if (key == "beta") cfg.beta = std::stod(value);
        else if (key == "quadrature_nodes") cfg.quadrature_nodes = std::stoi(value);
        else if (key == "besk_thresholds") cfg.besk_thresholds = parse_double_list(value);
        else if (key == "iterations") cfg.iterations = std::stoi(value);
        else if (key == "n_prior_observations") cfg.n_prior_observations = std::stoi(value);
        else if (key == "repetitions") cfg.repetitions = std::stoi(value);
        else if (key == "refit_every") cfg.refit_every = std::stoi(value);
        else if (key == "master_seed") cfg.master_seed = std::stoull(value);
        else if (key == "n_max_value_samples") cfg.n_max_value_samples = std::stoi(value);
        else if (key == "rff_features") cfg.rff_features = std::stoi(value);
        else if (key == "eval_grid_size") cfg.eval_grid_size = std::stoi(value);
        else if (key == "mle_restarts") cfg.mle_restarts = std::stoi(value);
        else if (key == "refit_noise") cfg.refit_noise = parse_bool(value);
        else if (key == "acq_candidates") cfg.acq_candidates = std::stoi(value);
        else if (key == "acq_starts") cfg.acq_starts = std::stoi(value);
        else if (key == "acq_steps") cfg.acq_steps = std::stoi(value);
        else if (key == "threads") cfg.threads = std::stoi(value);
        else throw std::invalid_argument("config: unknown key '" + key + "'");
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    return parse_config(in);
}

std::string serialize_config(const ExperimentConfig& cfg) {
    std::ostringstream out;
    out.precision(17);
    out << "problem = " << to_string(cfg.problem) << "\n";
    out << "threshold = " << cfg.threshold << "\n";
    out << "alpha = " << cfg.alpha << "\n";
    out << "benchmark = " << cfg.benchmark << "\n";
    out << "negate = " << (cfg.negate ? "true" : "false") << "\n";
    out << "noise_variance = " << cfg.noise_variance << "\n";
    out << "criterion = " << to_string(cfg.criterion) << "\n";
    out << "beta = " << cfg.beta << "\n";
    out << "quadrature_nodes = " << cfg.quadrature_nodes << "\n";
    out << "besk_thresholds = ";
    for (std::size_t i = 0; i < cfg.besk_thresholds.size(); ++i)
        out << (i ? "," : "") << cfg.besk_thresholds[i];
    out << "\n";
    out << "iterations = " << cfg.iterations << "\n";
    out << "n_prior_observations = " << cfg.n_prior_observations << "\n";
    out << "repetitions = " << cfg.repetitions << "\n";
    out << "refit_every = " << cfg.refit_every << "\n";
    out << "master_seed = " << cfg.master_seed << "\n";
    out << "n_max_value_samples = " << cfg.n_max_value_samples << "\n";
    out << "rff_features = " << cfg.rff_features << "\n";
    out << "eval_grid_size = " << cfg.eval_grid_size << "\n";
    out << "mle_restarts = " << cfg.mle_restarts << "\n";
    out << "refit_noise = " << (cfg.refit_noise ? "true" : "false") << "\n";
    out << "acq_candidates = " << cfg.acq_candidates << "\n";
    out << "acq_starts = " << cfg.acq_starts << "\n";
    out << "acq_steps = " << cfg.acq_steps << "\n";
    return out.str();
}

std::string config_hash_hex(const ExperimentConfig& cfg) {
    // FNV-1a over the canonical serialization (threads excluded: it does not
    // affect results).
    const std::string s = serialize_config(cfg);
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    std::ostringstream out;
    out << std::hex << h;
    return out.str();
}

void write_records_csv(const std::vector<IterationRecord>& records, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out.precision(17);
    const int d = records.empty() ? 0 : static_cast<int>(records.front().x.size());
    out << "repetition,iteration";
    for (int i = 0; i < d; ++i) out << ",x" << i;
    out << ",y,acquisition_value,metric,elapsed_s\n";
    for (const IterationRecord& r : records) {
        out << r.repetition << "," << r.iteration;
        for (int i = 0; i < r.x.size(); ++i) out << "," << r.x(i);
        out << "," << r.y << "," << r.acquisition_value << "," << r.metric << "," << r.elapsed_s
            << "\n";
    }
}

std::vector<IterationRecord> read_records_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open records file: " + path);
    std::string header;
    if (!std::getline(in, header)) throw std::runtime_error("empty records file: " + path);
    int columns = 1;
    for (char c : header) columns += (c == ',');
    const int d = columns - 6;
    if (d < 0) throw std::runtime_error("malformed records header: " + path);

    std::vector<IterationRecord> records;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (static_cast<int>(cells.size()) != columns)
            throw std::runtime_error("malformed records row: " + line);
        IterationRecord r;
        r.repetition = std::stoi(cells[0]);
        r.iteration = std::stoi(cells[1]);
        r.x.resize(d);
        for (int i = 0; i < d; ++i) r.x(i) = std::stod(cells[static_cast<std::size_t>(2 + i)]);
        r.y = std::stod(cells[static_cast<std::size_t>(2 + d)]);
        r.acquisition_value = std::stod(cells[static_cast<std::size_t>(3 + d)]);
        r.metric = std::stod(cells[static_cast<std::size_t>(4 + d)]);
        r.elapsed_s = std::stod(cells[static_cast<std::size_t>(5 + d)]);
        records.push_back(std::move(r));
    }
    return records;
}

void write_summary_json(const ExperimentConfig& cfg, const std::vector<SummaryRow>& rows,
                        const std::string& path) {
    nlohmann::json j;
    j["config_hash"] = config_hash_hex(cfg);
    j["problem"] = to_string(cfg.problem);
    j["benchmark"] = cfg.benchmark;
    j["negate"] = cfg.negate;
    j["criterion"] = to_string(cfg.criterion);
    j["noise_variance"] = cfg.noise_variance;
    j["repetitions"] = cfg.repetitions;
    j["iterations"] = cfg.iterations;
    j["master_seed"] = cfg.master_seed;
    if (cfg.problem == ProblemType::Lse) j["threshold"] = cfg.threshold;
    if (cfg.problem == ProblemType::ImplicitLse) j["alpha"] = cfg.alpha;
    if (cfg.benchmark == "michalewicz2") j["benchmark_note"] = "d = 2, steepness 10";

    nlohmann::json arr = nlohmann::json::array();
    for (const SummaryRow& row : rows) {
        nlohmann::json r;
        r["iteration"] = row.iteration;
        r["mean"] = row.mean;
        r["sd"] = row.sd;
        r["log10_mean"] = std::isfinite(row.log10_mean) ? nlohmann::json(row.log10_mean)
                                                        : nlohmann::json(nullptr);
        r["count"] = row.count;
        arr.push_back(r);
    }
    j["iterations_summary"] = arr;

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << j.dump(2) << "\n";
}

std::string default_output_dir() {
    if (const char* env = std::getenv("BESMP_RESULTS_DIR")) return env;
    return "./results";
}

std::string output_stem(const ExperimentConfig& cfg) {
    std::string bench = cfg.benchmark;
    for (char& c : bench)
        if (!std::isalnum(static_cast<unsigned char>(c))) c = '-';
    return bench + "_" + to_string(cfg.criterion) + "_" + config_hash_hex(cfg).substr(0, 8);
}

}  // namespace besmp
