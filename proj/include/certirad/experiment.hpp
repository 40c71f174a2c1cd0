#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "certirad/conf_bounds.hpp"
#include "certirad/io.hpp"
#include "certirad/radius_cta.hpp"

// Experiment driver behind the CLI subcommands.
namespace certirad::experiment {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

enum class Mode { Discrete, Continuous };

struct ExperimentConfig {
    Mode mode = Mode::Discrete;
    long n = 100;
    double sigma = 0.5;
    double temperature = 1.0;
    double alpha = 0.001;
    int taylor_order = special::kDefaultTaylorOrder;
    double eps = 1e-3;
    std::vector<bounds::Method> methods;
    uint64_t seed = 0;
    bool seed_set = false;
    std::string data;  // "file:<path>" or "synthetic:<num_inputs>[:<classes>]"
    cta::RadiusKind radius = cta::RadiusKind::R2;
    double lipschitz = 1.0;
    std::string name = "experiment";
    std::vector<double> grid;
    double cta_alpha = 0.05;
    std::string out_dir = "out";

    bool synthetic() const;
    long synthetic_inputs() const;
    int synthetic_classes() const;
};

// Flat key = value document with exactly the keys above; unknown keys error.
ExperimentConfig parse_config_file(const std::string& path);
void apply_key(ExperimentConfig& cfg, const std::string& key, const std::string& value);
void validate(const ExperimentConfig& cfg);
std::string echo(const ExperimentConfig& cfg);

struct InputRecord {
    std::string input_id;
    int label = 0;
    std::optional<io::CountsRecord> counts;
    std::optional<io::MatrixRecord> matrix;
};

// Load from file or generate synthetic inputs deterministically from the seed.
std::vector<InputRecord> load_inputs(const ExperimentConfig& cfg);

struct CertifyRecord {
    std::string input_id;
    bounds::Method method;
    bounds::MarginEstimate margin;
    cta::CertifiedRadius radius;
};

struct CertifyResult {
    std::vector<CertifyRecord> records;
    std::map<bounds::Method, cta::CtaCurve> curves;
};

CertifyResult run_certify(const ExperimentConfig& cfg);
// Writes out/<name>/{records.jsonl,config.echo} and <method>/cta.csv.
void write_certify_output(const ExperimentConfig& cfg, const CertifyResult& result);

struct CoverageRow {
    bounds::Method method;
    long replications = 0;
    long misses = 0;
    double miscoverage() const { return static_cast<double>(misses) / replications; }
    double std_error() const;
};

// Empirical miscoverage against synthetic ground truth (binomial for CP,
// multinomial for the joint bound, bounded means for EB/CS).
std::vector<CoverageRow> run_coverage(const ExperimentConfig& cfg, long replications,
                                      const std::vector<double>& truth);

enum class SweepAxis { N, Sigma, Temperature };
SweepAxis sweep_axis_from_name(const std::string& name);

// One certify run per axis value, written under <name>/<axis>=<value>/.
void run_sweep(const ExperimentConfig& cfg, SweepAxis axis, const std::vector<double>& values);

// Table-style comparison of two CTA files: rows baseline/ours/gain,
// infinities serialized as "inf".
void write_compare_csv(const std::string& baseline_path, const std::string& ours_path,
                       const std::string& out_path);

}  // namespace certirad::experiment
