#include "certirad/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "certirad/continuous_cert.hpp"
#include "certirad/discrete_cert.hpp"
#include "certirad/smoothing.hpp"

namespace certirad::experiment {

namespace fs = std::filesystem;
using nlohmann::json;

bool ExperimentConfig::synthetic() const { return data.rfind("synthetic:", 0) == 0; }

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, sep)) out.push_back(tok);
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("bad value for " + key + ": " + v);
    }
}

long parse_long(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        const long x = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("bad value for " + key + ": " + v);
    }
}

}  // namespace

long ExperimentConfig::synthetic_inputs() const {
    const auto parts = split(data, ':');
    if (parts.size() < 2) throw ConfigError("bad synthetic spec: " + data);
    return parse_long("data", parts[1]);
}

int ExperimentConfig::synthetic_classes() const {
    const auto parts = split(data, ':');
    if (parts.size() >= 3) return static_cast<int>(parse_long("data", parts[2]));
    return 3;
}

void apply_key(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "mode") {
        if (value == "discrete") cfg.mode = Mode::Discrete;
        else if (value == "continuous") cfg.mode = Mode::Continuous;
        else throw ConfigError("mode must be discrete or continuous");
    } else if (key == "n") {
        cfg.n = parse_long(key, value);
    } else if (key == "sigma") {
        cfg.sigma = parse_double(key, value);
    } else if (key == "temperature") {
        cfg.temperature = parse_double(key, value);
    } else if (key == "alpha") {
        cfg.alpha = parse_double(key, value);
    } else if (key == "taylor_order") {
        cfg.taylor_order = static_cast<int>(parse_long(key, value));
    } else if (key == "eps") {
        cfg.eps = parse_double(key, value);
    } else if (key == "methods") {
        cfg.methods.clear();
        for (const std::string& name : split(value, ',')) {
            try {
                cfg.methods.push_back(bounds::method_from_name(trim(name)));
            } catch (const std::invalid_argument& e) {
                throw ConfigError(e.what());
            }
        }
    } else if (key == "seed") {
        cfg.seed = static_cast<uint64_t>(parse_long(key, value));
        cfg.seed_set = true;
    } else if (key == "data") {
        cfg.data = value;
    } else if (key == "radius") {
        if (value == "r1") cfg.radius = cta::RadiusKind::R1;
        else if (value == "r2") cfg.radius = cta::RadiusKind::R2;
        else throw ConfigError("radius must be r1 or r2");
    } else if (key == "lipschitz") {
        cfg.lipschitz = parse_double(key, value);
    } else if (key == "name") {
        cfg.name = value;
    } else if (key == "grid") {
        cfg.grid.clear();
        for (const std::string& v : split(value, ',')) cfg.grid.push_back(parse_double(key, trim(v)));
    } else if (key == "cta_alpha") {
        cfg.cta_alpha = parse_double(key, value);
    } else if (key == "out") {
        cfg.out_dir = value;
    } else {
        throw ConfigError("unknown config key: " + key);
    }
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    ExperimentConfig cfg;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
        apply_key(cfg, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    }
    return cfg;
}

void validate(const ExperimentConfig& cfg) {
    if (!(cfg.sigma > 0.0)) throw ConfigError("sigma must be > 0");
    if (!(cfg.temperature > 0.0)) throw ConfigError("temperature must be > 0");
    if (cfg.n < 1) throw ConfigError("n must be >= 1");
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw ConfigError("alpha must be in (0,1)");
    if (cfg.taylor_order < 0) throw ConfigError("taylor_order must be >= 0");
    if (!(cfg.eps > 0.0)) throw ConfigError("eps must be > 0");
    if (!(cfg.lipschitz > 0.0)) throw ConfigError("lipschitz must be > 0");
    if (!(cfg.cta_alpha > 0.0 && cfg.cta_alpha < 1.0)) throw ConfigError("cta_alpha in (0,1)");
    if (cfg.data.empty()) throw ConfigError("data source required (file:<path> or synthetic:<N>)");
    if (!cfg.synthetic() && cfg.data.rfind("file:", 0) != 0)
        throw ConfigError("data must be file:<path> or synthetic:<N>");
    if (cfg.synthetic() && !cfg.seed_set) throw ConfigError("seed is mandatory for synthetic data");
    if (cfg.methods.empty()) throw ConfigError("at least one method required");
    for (bounds::Method m : cfg.methods) {
        const bool discrete_method =
            m == bounds::Method::CpBonferroni || m == bounds::Method::DiscreteJoint;
        if (cfg.mode == Mode::Discrete && !discrete_method)
            throw ConfigError("method " + bounds::method_name(m) + " needs continuous mode");
        if (cfg.mode == Mode::Continuous && discrete_method)
            throw ConfigError("method " + bounds::method_name(m) + " needs discrete mode");
    }
    for (size_t i = 1; i < cfg.grid.size(); ++i)
        if (!(cfg.grid[i] > cfg.grid[i - 1])) throw ConfigError("grid must be increasing");
}

std::string echo(const ExperimentConfig& cfg) {
    std::ostringstream os;
    os << "mode = " << (cfg.mode == Mode::Discrete ? "discrete" : "continuous") << "\n"
       << "n = " << cfg.n << "\n"
       << "sigma = " << cfg.sigma << "\n"
       << "temperature = " << cfg.temperature << "\n"
       << "alpha = " << cfg.alpha << "\n"
       << "taylor_order = " << cfg.taylor_order << "\n"
       << "eps = " << cfg.eps << "\n";
    os << "methods = ";
    for (size_t i = 0; i < cfg.methods.size(); ++i)
        os << (i ? "," : "") << bounds::method_name(cfg.methods[i]);
    os << "\n";
    if (cfg.seed_set) os << "seed = " << cfg.seed << "\n";
    os << "data = " << cfg.data << "\n"
       << "radius = " << (cfg.radius == cta::RadiusKind::R1 ? "r1" : "r2") << "\n"
       << "lipschitz = " << cfg.lipschitz << "\n"
       << "name = " << cfg.name << "\n";
    os << "grid = ";
    for (size_t i = 0; i < cfg.grid.size(); ++i) os << (i ? "," : "") << cfg.grid[i];
    os << "\n"
       << "cta_alpha = " << cfg.cta_alpha << "\n"
       << "out = " << cfg.out_dir << "\n";
    return os.str();
}

namespace {

// Deterministic uniform helpers on top of the counter-based stream.
double synth_uniform(uint64_t seed, uint64_t salt) {
    double g[2];
    smooth::fill_gaussian(seed, salt, {g, 2});
    return special::gaussian_cdf(g[0]);
}

std::vector<InputRecord> generate_synthetic(const ExperimentConfig& cfg) {
    const long num = cfg.synthetic_inputs();
    if (num < 1) throw ConfigError("synthetic input count must be >= 1");
    const int m = cfg.synthetic_classes();
    if (m < 2) throw ConfigError("synthetic class count must be >= 2");
    std::vector<InputRecord> inputs(num);
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < num; ++i) {
        InputRecord& rec = inputs[i];
        {
            std::ostringstream id;
            id << "synth-" << std::setw(6) << std::setfill('0') << i;
            rec.input_id = id.str();
        }
        const uint64_t input_seed = smooth::mix_seed(cfg.seed, 0x5339u + i);
        const int label = static_cast<int>(synth_uniform(input_seed, 1) * m) % m;
        rec.label = label;
        const uint64_t noise_seed = smooth::mix_seed(cfg.seed, 0xA001u + i);

        if (cfg.mode == Mode::Discrete) {
            // True class probability mostly dominant, sometimes ambiguous.
            const double u = synth_uniform(input_seed, 2);
            const double hard = synth_uniform(input_seed, 3);
            double p_top = hard < 0.25 ? 0.3 + 0.3 * u : 0.55 + 0.44 * u;
            std::vector<double> p(m, (1.0 - p_top) / (m - 1));
            p[label] = p_top;
            const auto clf = smooth::make_multinomial_oracle(p, cfg.sigma);
            const double x0 = 0.0;
            io::CountsRecord cr;
            cr.input_id = rec.input_id;
            cr.label = label;
            cr.counts = smooth::sample_counts(clf, {&x0, 1}, {cfg.sigma, cfg.n, noise_seed});
            rec.counts = std::move(cr);
        } else {
            // Fixed logit vector; noise acts in logit space through an
            // identity affine classifier, rows through tempered softmax.
            std::vector<double> logits(m);
            for (int k = 0; k < m; ++k) logits[k] = 1.2 * synth_uniform(input_seed, 10 + k);
            logits[label] += 1.0 + 2.0 * synth_uniform(input_seed, 4);
            std::vector<double> w(static_cast<size_t>(m) * m, 0.0);
            for (int k = 0; k < m; ++k) w[k * m + k] = 1.0;
            const auto clf = smooth::make_affine_logit(w, std::vector<double>(m, 0.0), m, m);
            io::MatrixRecord mr;
            mr.input_id = rec.input_id;
            mr.label = label;
            mr.matrix = smooth::sample_prob_matrix(
                clf, logits, {cfg.sigma, cfg.n, noise_seed},
                {smooth::SimplexMap::SoftmaxTempered, cfg.temperature});
            rec.matrix = std::move(mr);
        }
    }
    return inputs;
}

}  // namespace

std::vector<InputRecord> load_inputs(const ExperimentConfig& cfg) {
    if (cfg.synthetic()) return generate_synthetic(cfg);
    const std::string path = cfg.data.substr(5);
    std::vector<InputRecord> inputs;
    if (cfg.mode == Mode::Discrete) {
        for (auto& rec : io::read_counts_csv(path)) {
            InputRecord in;
            in.input_id = rec.input_id;
            in.label = rec.label;
            in.counts = std::move(rec);
            inputs.push_back(std::move(in));
        }
    } else {
        for (auto& rec : io::read_matrix_jsonl(path)) {
            InputRecord in;
            in.input_id = rec.input_id;
            in.label = rec.label;
            in.matrix = std::move(rec);
            inputs.push_back(std::move(in));
        }
    }
    return inputs;
}

namespace {

bounds::MarginKind margin_kind(const ExperimentConfig& cfg) {
    return cfg.radius == cta::RadiusKind::R1 ? bounds::MarginKind::First
                                             : bounds::MarginKind::Second;
}

cta::CertifiedRadius to_radius(const ExperimentConfig& cfg, const bounds::MarginEstimate& est,
                               bool correct) {
    return cfg.radius == cta::RadiusKind::R1 ? cta::radius_first(est, cfg.lipschitz, correct)
                                             : cta::radius_second(est, cfg.sigma, correct);
}

// Joint discrete bounds depend on counts only through (top, runner, n); memoize.
struct JointCache {
    std::map<std::tuple<long, long, int>, bounds::MarginEstimate> map;
    std::mutex mtx;
};

bounds::MarginEstimate discrete_joint(const ExperimentConfig& cfg,
                                      const smooth::CountsVector& counts, JointCache& cache) {
    int top = 0;
    for (size_t i = 1; i < counts.counts.size(); ++i)
        if (counts.counts[i] > counts.counts[top]) top = static_cast<int>(i);
    const int runner = bounds::second_highest_index(counts.counts, top);
    const auto key = std::make_tuple(counts.counts[top], counts.counts[runner],
                                     static_cast<int>(margin_kind(cfg)));
    {
        std::lock_guard lk(cache.mtx);
        if (auto it = cache.map.find(key); it != cache.map.end()) return it->second;
    }
    const bounds::ConfidenceLevel level(cfg.alpha);
    const bounds::MarginEstimate est =
        margin_kind(cfg) == bounds::MarginKind::First
            ? discrete::first_margin_lcb(counts, level, cfg.eps, true)
            : discrete::second_margin_lcb(counts, level, cfg.eps, cfg.taylor_order, true);
    std::lock_guard lk(cache.mtx);
    cache.map.emplace(key, est);
    return est;
}

bounds::MarginEstimate certify_one(const ExperimentConfig& cfg, const InputRecord& input,
                                   bounds::Method method, int* predicted_out,
                                   JointCache& cache) {
    const bounds::ConfidenceLevel level(cfg.alpha);
    if (cfg.mode == Mode::Discrete) {
        const smooth::CountsVector& counts = input.counts->counts;
        int top = 0;
        for (size_t i = 1; i < counts.counts.size(); ++i)
            if (counts.counts[i] > counts.counts[top]) top = static_cast<int>(i);
        *predicted_out = top;
        if (method == bounds::Method::CpBonferroni)
            return bounds::bonferroni_margin_counts({counts.counts, counts.total}, top, level,
                                                    margin_kind(cfg));
        return discrete_joint(cfg, counts, cache);
    }

    const smooth::ProbabilityMatrix& mat = input.matrix->matrix;
    const std::vector<double> means = mat.column_means();
    const int pred = bounds::argmax_lowest_tie(means);
    *predicted_out = pred;
    const bool direct = method == bounds::Method::ContDirectEb ||
                        method == bounds::Method::ContDirectCs;
    if (!direct)
        return bounds::bonferroni_margin_matrix(mat.data, mat.n, mat.m, pred, level,
                                                margin_kind(cfg), method);

    const bounds::Method provider = method == bounds::Method::ContDirectEb
                                        ? bounds::Method::EbBonferroni
                                        : bounds::Method::CsBonferroni;
    if (margin_kind(cfg) == bounds::MarginKind::First) {
        return cont::continuous_margin_lcb(cont::build_z_first(mat, pred), level, method);
    }
    auto stream = cont::build_z_second(mat, pred, cfg.taylor_order);
    if (!stream) {
        auto est = bounds::bonferroni_margin_matrix(mat.data, mat.n, mat.m, pred, level,
                                                    bounds::MarginKind::Second, provider);
        est.method = method;  // keep the requested method tag on the record
        return est;
    }
    return cont::continuous_margin_lcb(*stream, level, method);
}

std::vector<double> default_grid(const ExperimentConfig& cfg) {
    // 18 points spread over the reachable radius range.
    double top = 1.0;
    if (cfg.radius == cta::RadiusKind::R1)
        top = 1.0 / (std::sqrt(2.0) * cfg.lipschitz);
    else
        top = 0.5 * cfg.sigma * 2.0 * special::gaussian_quantile(1.0 - 1e-4);
    std::vector<double> grid;
    for (int i = 1; i <= 18; ++i) grid.push_back(top * i / 19.0);
    return grid;
}

}  // namespace

CertifyResult run_certify(const ExperimentConfig& cfg) {
    validate(cfg);
    const std::vector<InputRecord> inputs = load_inputs(cfg);
    if (inputs.empty()) throw io::DataError("no inputs to certify");

    CertifyResult result;
    JointCache cache;
    std::vector<std::vector<CertifyRecord>> per_input(inputs.size());
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < static_cast<long>(inputs.size()); ++i) {
        for (bounds::Method method : cfg.methods) {
            CertifyRecord rec;
            rec.input_id = inputs[i].input_id;
            rec.method = method;
            int predicted = 0;
            rec.margin = certify_one(cfg, inputs[i], method, &predicted, cache);
            rec.radius = to_radius(cfg, rec.margin, predicted == inputs[i].label);
            per_input[i].push_back(std::move(rec));
        }
    }
    for (auto& recs : per_input)
        for (auto& r : recs) result.records.push_back(std::move(r));

    const std::vector<double> grid = cfg.grid.empty() ? default_grid(cfg) : cfg.grid;
    const bounds::ConfidenceLevel cta_level(cfg.cta_alpha);
    for (bounds::Method method : cfg.methods) {
        std::vector<cta::CertifiedRadius> radii;
        for (const auto& rec : result.records)
            if (rec.method == method) radii.push_back(rec.radius);
        result.curves.emplace(method, cta::cta_curve(radii, grid, cta_level));
    }
    return result;
}

void write_certify_output(const ExperimentConfig& cfg, const CertifyResult& result) {
    const fs::path root = fs::path(cfg.out_dir) / cfg.name;
    fs::create_directories(root);
    {
        std::ofstream os(root / "config.echo");
        os << echo(cfg);
    }
    {
        std::ofstream os(root / "records.jsonl");
        for (const auto& rec : result.records) {
            json j{{"input_id", rec.input_id},
                   {"method", bounds::method_name(rec.method)},
                   {"margin", rec.margin.value},
                   {"radius", rec.radius.value},
                   {"correct", rec.radius.correct}};
            if (rec.margin.clipped) j["clipped"] = true;
            os << j.dump() << "\n";
        }
    }
    for (const auto& [method, curve] : result.curves) {
        const fs::path dir = root / bounds::method_name(method);
        fs::create_directories(dir);
        io::write_cta_csv((dir / "cta.csv").string(), curve);
    }
}

double CoverageRow::std_error() const {
    const double m = miscoverage();
    return std::sqrt(std::max(m * (1.0 - m), 1e-12) / replications);
}

std::vector<CoverageRow> run_coverage(const ExperimentConfig& cfg, long replications,
                                      const std::vector<double>& truth) {
    if (!cfg.synthetic()) throw ConfigError("coverage requires a synthetic source");
    if (!cfg.seed_set) throw ConfigError("seed is mandatory for coverage");
    if (truth.empty()) throw ConfigError("coverage requires ground-truth probabilities");
    double tsum = 0.0;
    for (double p : truth) tsum += p;
    if (std::abs(tsum - 1.0) > 1e-9 && truth.size() > 1)
        throw ConfigError("ground-truth probabilities must sum to 1");

    std::vector<double> sorted(truth.begin(), truth.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    const double p0 = truth[0];
    const double theta_star = sorted.size() > 1 ? sorted[0] - sorted[1] : 1.0;
    const bounds::ConfidenceLevel level(cfg.alpha);

    std::vector<CoverageRow> rows;
    for (bounds::Method method : cfg.methods) {
        CoverageRow row;
        row.method = method;
        row.replications = replications;
        long misses = 0;
#pragma omp parallel for reduction(+ : misses) schedule(dynamic)
        for (long r = 0; r < replications; ++r) {
            const uint64_t rep_seed = smooth::mix_seed(cfg.seed, 0xC0F0u + r);
            switch (method) {
                case bounds::Method::CpBonferroni: {
                    // plain binomial lower bound on p0
                    long k = 0;
                    for (long i = 0; i < cfg.n; ++i)
                        if (synth_uniform(rep_seed, i) < p0) ++k;
                    if (bounds::clopper_pearson_lower(k, cfg.n, level) > p0) ++misses;
                    break;
                }
                case bounds::Method::DiscreteJoint: {
                    std::vector<long> counts(truth.size(), 0);
                    for (long i = 0; i < cfg.n; ++i) {
                        const double u = synth_uniform(rep_seed, i);
                        double cum = 0.0;
                        for (size_t k = 0; k < truth.size(); ++k) {
                            cum += truth[k];
                            if (u <= cum || k + 1 == truth.size()) {
                                ++counts[k];
                                break;
                            }
                        }
                    }
                    smooth::CountsVector cv{counts, cfg.n};
                    const auto est = discrete::first_margin_lcb(cv, level, cfg.eps, true);
                    if (est.value > theta_star + 1e-12) ++misses;
                    break;
                }
                case bounds::Method::EbBonferroni: {
                    // one-sided EB upper bound on a uniform[0,1] mean
                    std::vector<double> xs(cfg.n);
                    for (long i = 0; i < cfg.n; ++i) xs[i] = synth_uniform(rep_seed, i);
                    if (bounds::empirical_bernstein_upper(xs, 0.0, 1.0, level) < 0.5) ++misses;
                    break;
                }
                case bounds::Method::CsBonferroni: {
                    // CS running intersection on Bernoulli(p0)
                    bounds::CsState s{level};
                    for (long i = 0; i < cfg.n; ++i)
                        s = s.observe(synth_uniform(rep_seed, i) < p0 ? 1.0 : 0.0);
                    const auto [lo, hi] = s.intersection();
                    if (lo > p0 || hi < p0) ++misses;
                    break;
                }
                case bounds::Method::ContDirectEb:
                case bounds::Method::ContDirectCs: {
                    // margin variable with known mean: Z = p0 + noise on [-1,1]
                    cont::MarginSampleStream stream;
                    stream.kind = bounds::MarginKind::First;
                    stream.lo = -1.0;
                    stream.hi = 1.0;
                    stream.z.resize(cfg.n);
                    const double spread = std::min(1.0 - std::abs(theta_star), 0.3);
                    for (long i = 0; i < cfg.n; ++i)
                        stream.z[i] = theta_star + spread * (2.0 * synth_uniform(rep_seed, i) - 1.0);
                    const auto est = cont::continuous_margin_lcb(stream, level, method);
                    if (est.value > theta_star + 1e-12) ++misses;
                    break;
                }
            }
        }
        row.misses = misses;
        rows.push_back(row);
    }
    return rows;
}

SweepAxis sweep_axis_from_name(const std::string& name) {
    if (name == "N") return SweepAxis::N;
    if (name == "SIGMA") return SweepAxis::Sigma;
    if (name == "TEMPERATURE") return SweepAxis::Temperature;
    throw ConfigError("axis must be N, SIGMA, or TEMPERATURE");
}

void run_sweep(const ExperimentConfig& cfg, SweepAxis axis, const std::vector<double>& values) {
    if (values.empty()) throw ConfigError("sweep needs at least one axis value");
    for (double v : values)
        if (!(v > 0.0)) throw ConfigError("axis values must be positive");
    for (double v : values) {
        ExperimentConfig sub = cfg;
        std::ostringstream tag;
        switch (axis) {
            case SweepAxis::N:
                sub.n = static_cast<long>(v);
                tag << "n=" << sub.n;
                break;
            case SweepAxis::Sigma:
                sub.sigma = v;
                tag << "sigma=" << v;
                break;
            case SweepAxis::Temperature:
                sub.temperature = v;
                tag << "temperature=" << v;
                break;
        }
        sub.name = (fs::path(cfg.name) / tag.str()).string();
        write_certify_output(sub, run_certify(sub));
    }
}

void write_compare_csv(const std::string& baseline_path, const std::string& ours_path,
                       const std::string& out_path) {
    const cta::CtaCurve base = io::read_cta_csv(baseline_path);
    const cta::CtaCurve ours = io::read_cta_csv(ours_path);
    const std::vector<double> gains = cta::gain_table(base, ours);
    std::ofstream os(out_path);
    if (!os) throw io::DataError("cannot open " + out_path + " for writing");
    os.precision(10);
    os << "row";
    for (double r : base.grid) os << "," << r;
    os << "\nbaseline";
    for (double v : base.approx_acc) os << "," << v;
    os << "\nours";
    for (double v : ours.approx_acc) os << "," << v;
    os << "\ngain_percent";
    for (double g : gains) {
        os << ",";
        if (std::isinf(g)) os << "inf";
        else os << g;
    }
    os << "\n";
}

}  // namespace certirad::experiment
