#include <filesystem>
#include <iomanip>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "besmp/bench.hpp"
#include "besmp/runner.hpp"

namespace {

void print_summary(const std::vector<besmp::SummaryRow>& rows) {
    std::cout << std::setw(10) << "iteration" << std::setw(16) << "mean" << std::setw(16) << "sd"
              << std::setw(16) << "log10_mean" << std::setw(8) << "count" << "\n";
    for (const besmp::SummaryRow& r : rows) {
        std::cout << std::setw(10) << r.iteration << std::setw(16) << r.mean << std::setw(16)
                  << r.sd << std::setw(16) << r.log10_mean << std::setw(8) << r.count << "\n";
    }
}

int cmd_run(const std::string& config_path, std::string output_dir, bool quiet) {
    const besmp::ExperimentConfig cfg = besmp::parse_config_file(config_path);
    if (output_dir.empty()) output_dir = besmp::default_output_dir();
    std::filesystem::create_directories(output_dir);

    const auto records = besmp::run_experiment(cfg);
    const auto rows = besmp::summarize(records);

    const std::string stem = (std::filesystem::path(output_dir) / besmp::output_stem(cfg)).string();
    besmp::write_records_csv(records, stem + ".csv");
    besmp::write_summary_json(cfg, rows, stem + ".json");

    if (!quiet) {
        std::cout << "records: " << stem << ".csv\n";
        std::cout << "summary: " << stem << ".json\n";
        if (!rows.empty()) {
            const besmp::SummaryRow& last = rows.back();
            std::cout << "final iteration " << last.iteration << ": mean metric " << last.mean
                      << " (sd " << last.sd << ", log10 " << last.log10_mean << ", n "
                      << last.count << ")\n";
        }
    }
    return 0;
}

int cmd_list_benchmarks() {
    for (const std::string& name : besmp::benchmark_names()) {
        const besmp::BenchmarkFn fn = besmp::raw_benchmark(name, false);
        std::cout << name << "  (d = " << fn.dim << ", domain [";
        for (int i = 0; i < fn.dim; ++i) {
            std::cout << (i ? " x [" : "") << fn.domain.lower(i) << ", " << fn.domain.upper(i)
                      << "]";
        }
        std::cout << ")\n";
    }
    std::cout << "gp_sample(l=<lengthscale>,seed=<seed>)  (d = 2, domain [0, 1] x [0, 1])\n";
    return 0;
}

int cmd_summarize(const std::string& records_path) {
    const auto records = besmp::read_records_csv(records_path);
    print_summary(besmp::summarize(records));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Level-set estimation and Bayesian optimization experiment harness"};
    app.require_subcommand(1);

    std::string config_path, output_dir, records_path;
    bool quiet = false;

    CLI::App* run = app.add_subcommand("run", "Run the experiment described by a config file");
    run->add_option("config", config_path, "Path to a key = value config file")->required();
    run->add_option("--output-dir", output_dir, "Output directory (default: BESMP_RESULTS_DIR or ./results)");
    run->add_flag("--quiet", quiet, "Suppress the summary printout");

    CLI::App* list = app.add_subcommand("list-benchmarks", "List the benchmark registry");

    CLI::App* summ = app.add_subcommand("summarize", "Summarize a records CSV");
    summ->add_option("records", records_path, "Path to a records CSV")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(config_path, output_dir, quiet);
        if (list->parsed()) return cmd_list_benchmarks();
        if (summ->parsed()) return cmd_summarize(records_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
