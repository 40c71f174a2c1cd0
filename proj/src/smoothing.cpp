#include "certirad/smoothing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "certirad/conf_bounds.hpp"
#include "certirad/special_fn.hpp"

namespace certirad::smooth {

std::vector<double> ProbabilityMatrix::column_means() const {
    std::vector<double> mu(m, 0.0);
    for (long i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) mu[j] += data[i * m + j];
    for (double& v : mu) v /= static_cast<double>(n);
    return mu;
}

namespace {

uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double uniform01(uint64_t& state) {
    // (0,1]: never returns 0, safe under log().
    return (static_cast<double>(splitmix64(state) >> 11) + 1.0) * 0x1.0p-53;
}

}  // namespace

uint64_t mix_seed(uint64_t seed, uint64_t salt) {
    uint64_t s = seed ^ (0x9e3779b97f4a7c15ULL * (salt + 1));
    return splitmix64(s);
}

void fill_gaussian(uint64_t seed, uint64_t counter, std::span<double> out) {
    uint64_t state = mix_seed(seed, counter);
    for (size_t i = 0; i < out.size(); i += 2) {
        const double u1 = uniform01(state);
        const double u2 = uniform01(state);
        const double r = std::sqrt(-2.0 * std::log(u1));
        out[i] = r * std::cos(2.0 * M_PI * u2);
        if (i + 1 < out.size()) out[i + 1] = r * std::sin(2.0 * M_PI * u2);
    }
}

std::vector<double> apply_simplex_map(std::span<const double> logits, const SimplexMapSpec& spec) {
    const int m = static_cast<int>(logits.size());
    std::vector<double> out(m, 0.0);
    switch (spec.variant) {
        case SimplexMap::Hardmax: {
            out[bounds::argmax_lowest_tie(logits)] = 1.0;
            break;
        }
        case SimplexMap::SoftmaxTempered: {
            if (!(spec.temperature > 0.0))
                throw std::invalid_argument("tempered softmax: T must be > 0");
            const double hi = *std::max_element(logits.begin(), logits.end());
            double z = 0.0;
            for (int i = 0; i < m; ++i) {
                out[i] = std::exp((logits[i] - hi) / spec.temperature);
                z += out[i];
            }
            for (double& v : out) v /= z;
            break;
        }
        case SimplexMap::Sparsemax: {
            // Euclidean projection onto the simplex (sort-based).
            std::vector<double> u(logits.begin(), logits.end());
            std::sort(u.begin(), u.end(), std::greater<>());
            double cum = 0.0, tau = 0.0;
            int k = 0;
            for (int i = 0; i < m; ++i) {
                cum += u[i];
                const double t = (cum - 1.0) / (i + 1);
                if (u[i] - t > 0.0) { k = i + 1; tau = t; }
            }
            (void)k;
            for (int i = 0; i < m; ++i) out[i] = std::max(0.0, logits[i] - tau);
            break;
        }
    }
    return out;
}

namespace {

void check_sampling_args(const BaseClassifier& clf, std::span<const double> x,
                         const NoiseConfig& cfg) {
    if (static_cast<int>(x.size()) != clf.input_dim)
        throw std::invalid_argument("sampling: input dimension mismatch");
    if (!(cfg.sigma > 0.0)) throw std::invalid_argument("sampling: sigma must be > 0");
    if (cfg.n < 1) throw std::invalid_argument("sampling: n must be >= 1");
}

}  // namespace

CountsVector sample_counts(const BaseClassifier& clf, std::span<const double> x,
                           const NoiseConfig& cfg) {
    check_sampling_args(clf, x, cfg);
    const int m = clf.num_classes;
    CountsVector cv;
    cv.counts.assign(m, 0);
    cv.total = cfg.n;
#pragma omp parallel
    {
        std::vector<long> local(m, 0);
        std::vector<double> noise(clf.input_dim), pt(clf.input_dim);
#pragma omp for nowait
        for (long i = 0; i < cfg.n; ++i) {
            fill_gaussian(cfg.seed, static_cast<uint64_t>(i), noise);
            for (int d = 0; d < clf.input_dim; ++d) pt[d] = x[d] + cfg.sigma * noise[d];
            const std::vector<double> lg = clf.logits(pt);
            ++local[bounds::argmax_lowest_tie(lg)];
        }
#pragma omp critical
        for (int j = 0; j < m; ++j) cv.counts[j] += local[j];
    }
    return cv;
}

ProbabilityMatrix sample_prob_matrix(const BaseClassifier& clf, std::span<const double> x,
                                     const NoiseConfig& cfg, const SimplexMapSpec& spec) {
    check_sampling_args(clf, x, cfg);
    const int m = clf.num_classes;
    ProbabilityMatrix mat;
    mat.n = cfg.n;
    mat.m = m;
    mat.data.assign(static_cast<size_t>(cfg.n) * m, 0.0);
#pragma omp parallel
    {
        std::vector<double> noise(clf.input_dim), pt(clf.input_dim);
#pragma omp for
        for (long i = 0; i < cfg.n; ++i) {
            fill_gaussian(cfg.seed, static_cast<uint64_t>(i), noise);
            for (int d = 0; d < clf.input_dim; ++d) pt[d] = x[d] + cfg.sigma * noise[d];
            const std::vector<double> row = apply_simplex_map(clf.logits(pt), spec);
            std::copy(row.begin(), row.end(), mat.data.begin() + i * m);
        }
    }
    return mat;
}

BaseClassifier make_multinomial_oracle(std::vector<double> p, double sigma) {
    double sum = std::accumulate(p.begin(), p.end(), 0.0);
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("multinomial oracle: p must sum to 1");
    const int m = static_cast<int>(p.size());
    BaseClassifier clf;
    clf.num_classes = m;
    clf.input_dim = 1;
    clf.logits = [p = std::move(p), sigma, m](std::span<const double> x) {
        const double u = special::gaussian_cdf(x[0] / sigma);
        double cum = 0.0;
        int cls = m - 1;
        for (int k = 0; k < m; ++k) {
            cum += p[k];
            if (u <= cum) { cls = k; break; }
        }
        std::vector<double> lg(m, 0.0);
        lg[cls] = 1.0;
        return lg;
    };
    return clf;
}

BaseClassifier make_affine_logit(std::vector<double> w_rows, std::vector<double> bias, int m,
                                 int d) {
    if (w_rows.size() != static_cast<size_t>(m) * d || bias.size() != static_cast<size_t>(m))
        throw std::invalid_argument("affine classifier: bad shapes");
    BaseClassifier clf;
    clf.num_classes = m;
    clf.input_dim = d;
    clf.logits = [w = std::move(w_rows), b = std::move(bias), m, d](std::span<const double> x) {
        std::vector<double> lg(m);
        for (int k = 0; k < m; ++k) {
            double acc = b[k];
            for (int j = 0; j < d; ++j) acc += w[k * d + j] * x[j];
            lg[k] = acc;
        }
        return lg;
    };
    return clf;
}

}  // namespace certirad::smooth
