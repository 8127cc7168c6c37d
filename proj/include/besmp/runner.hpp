#ifndef BESMP_RUNNER_HPP
#define BESMP_RUNNER_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "besmp/acquisition.hpp"
#include "besmp/gp.hpp"
#include "besmp/optimize.hpp"

namespace besmp {

enum class ProblemType { Lse, Bo, ImplicitLse };

std::string to_string(ProblemType p);
ProblemType problem_from_string(const std::string& name);

struct ExperimentConfig {
    ProblemType problem = ProblemType::Lse;
    double threshold = 0.0;  // known level (Lse)
    double alpha = 0.2;      // tolerance below the max (ImplicitLse)

    std::string benchmark = "branin";
    bool negate = false;
    double noise_variance = 0.0;

    Criterion criterion = Criterion::Bes;
    double beta = 2.0;
    int quadrature_nodes = 64;
    std::vector<double> besk_thresholds;  // ascending, for BESK under Lse

    int iterations = 30;
    int n_prior_observations = 2;
    int repetitions = 30;
    int refit_every = 1;
    std::uint64_t master_seed = 0;

    int n_max_value_samples = 5;
    int rff_features = 500;
    int eval_grid_size = 7000;
    int mle_restarts = 10;
    bool refit_noise = false;  // learn sigma_n^2 instead of pinning it

    int acq_candidates = 2000;
    int acq_starts = 10;
    int acq_steps = 100;

    int threads = 0;  // 0 = hardware concurrency

    void validate() const;
};

struct IterationRecord {
    int repetition = 0;
    int iteration = 0;
    Eigen::VectorXd x;
    double y = 0.0;
    double acquisition_value = 0.0;
    double metric = 0.0;
    double elapsed_s = 0.0;
};

// Sequential query loop per repetition; repetitions run independently (and in
// parallel). All randomness derives from master_seed, so outputs are
// reproducible regardless of scheduling.
std::vector<IterationRecord> run_experiment(const ExperimentConfig& cfg);

struct SummaryRow {
    int iteration = 0;
    double mean = 0.0;
    double sd = 0.0;
    double log10_mean = 0.0;
    int count = 0;
};

// Per-iteration mean and standard deviation of the metric across repetitions,
// with log10 applied to the mean.
std::vector<SummaryRow> summarize(const std::vector<IterationRecord>& records);

ExperimentConfig parse_config(std::istream& in);
ExperimentConfig parse_config_file(const std::string& path);
std::string serialize_config(const ExperimentConfig& cfg);
std::string config_hash_hex(const ExperimentConfig& cfg);

void write_records_csv(const std::vector<IterationRecord>& records, const std::string& path);
std::vector<IterationRecord> read_records_csv(const std::string& path);
void write_summary_json(const ExperimentConfig& cfg, const std::vector<SummaryRow>& rows,
                        const std::string& path);

// BESMP_RESULTS_DIR when set, else ./results.
std::string default_output_dir();

// Output file stem: <benchmark>_<criterion>_<hash prefix>.
std::string output_stem(const ExperimentConfig& cfg);

}  // namespace besmp

#endif
