#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "certirad/experiment.hpp"

namespace cx = certirad::experiment;

namespace {

constexpr int kExitConfigError = 2;
constexpr int kExitDataError = 3;

struct CommonOpts {
    std::string config_path;
    std::vector<std::string> overrides;  // key=value pairs from flags
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("-c,--config", opts.config_path, "flat key = value config file");
    cmd->add_option("--set", opts.overrides, "override a config key, e.g. --set alpha=0.01")
        ->take_all();
    // direct flags mirroring the config keys
    for (const char* key : {"mode", "n", "sigma", "temperature", "alpha", "taylor_order", "eps",
                            "methods", "seed", "data", "radius", "lipschitz", "name", "grid",
                            "cta_alpha", "out"}) {
        cmd->add_option_function<std::string>(
            std::string("--") + key,
            [&opts, key = std::string(key)](const std::string& v) {
                opts.overrides.push_back(key + "=" + v);
            },
            std::string("config key ") + key);
    }
}

cx::ExperimentConfig build_config(const CommonOpts& opts) {
    cx::ExperimentConfig cfg;
    if (!opts.config_path.empty()) cfg = cx::parse_config_file(opts.config_path);
    for (const std::string& kv : opts.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw cx::ConfigError("override must be key=value: " + kv);
        cx::apply_key(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    return cfg;
}

std::vector<double> parse_values(const std::string& csv) {
    std::vector<double> out;
    std::string cur;
    for (char c : csv + ",") {
        if (c == ',') {
            if (!cur.empty()) out.push_back(std::stod(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"conservative certified-radius estimation for smoothed classifiers"};
    app.require_subcommand(1);

    CommonOpts certify_opts, coverage_opts, sweep_opts;
    auto* certify = app.add_subcommand("certify", "certify inputs and emit CTA curves");
    add_common(certify, certify_opts);

    auto* coverage = app.add_subcommand("coverage", "empirical miscoverage on synthetic truth");
    add_common(coverage, coverage_opts);
    long replications = 1000;
    std::string truth_csv = "0.6,0.3,0.1";
    coverage->add_option("--replications", replications, "Monte Carlo replications");
    coverage->add_option("--truth", truth_csv, "ground-truth class probabilities");

    auto* sweep = app.add_subcommand("sweep", "certify across an axis of values");
    add_common(sweep, sweep_opts);
    std::string axis_name = "N";
    std::string values_csv;
    sweep->add_option("--axis", axis_name, "N, SIGMA, or TEMPERATURE")->required();
    sweep->add_option("--values", values_csv, "comma-separated axis values")->required();

    auto* compare = app.add_subcommand("compare", "gain table from two CTA files");
    std::string baseline_path, ours_path, compare_out = "compare.csv";
    compare->add_option("--baseline", baseline_path, "baseline cta.csv")->required();
    compare->add_option("--ours", ours_path, "improved-method cta.csv")->required();
    compare->add_option("--out", compare_out, "output CSV path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (certify->parsed()) {
            const cx::ExperimentConfig cfg = build_config(certify_opts);
            const cx::CertifyResult result = cx::run_certify(cfg);
            cx::write_certify_output(cfg, result);
            std::cout << "certified " << result.records.size() << " records across "
                      << result.curves.size() << " methods -> " << cfg.out_dir << "/" << cfg.name
                      << "\n";
        } else if (coverage->parsed()) {
            cx::ExperimentConfig cfg = build_config(coverage_opts);
            cx::validate(cfg);
            const auto rows = cx::run_coverage(cfg, replications, parse_values(truth_csv));
            std::printf("%-18s %12s %12s %10s\n", "method", "replications", "miscoverage", "SE");
            for (const auto& row : rows)
                std::printf("%-18s %12ld %12.5f %10.5f\n",
                            certirad::bounds::method_name(row.method).c_str(), row.replications,
                            row.miscoverage(), row.std_error());
        } else if (sweep->parsed()) {
            const cx::ExperimentConfig cfg = build_config(sweep_opts);
            cx::run_sweep(cfg, cx::sweep_axis_from_name(axis_name), parse_values(values_csv));
            std::cout << "sweep written under " << cfg.out_dir << "/" << cfg.name << "\n";
        } else if (compare->parsed()) {
            cx::write_compare_csv(baseline_path, ours_path, compare_out);
            std::cout << "gain table -> " << compare_out << "\n";
        }
    } catch (const cx::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const certirad::io::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitDataError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
