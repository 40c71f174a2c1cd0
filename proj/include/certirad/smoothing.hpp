#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace certirad::smooth {

// Black-box base classifier: input vector of length input_dim -> logits of
// length num_classes. Must be deterministic and safe for concurrent calls.
struct BaseClassifier {
    int num_classes = 0;
    int input_dim = 0;
    std::function<std::vector<double>(std::span<const double>)> logits;
};

enum class SimplexMap { Hardmax, SoftmaxTempered, Sparsemax };

struct SimplexMapSpec {
    SimplexMap variant = SimplexMap::Hardmax;
    double temperature = 1.0;  // tempered softmax only, > 0
};

struct NoiseConfig {
    double sigma;    // Gaussian std dev, > 0
    long n;          // sample count, >= 1
    uint64_t seed;
};

struct CountsVector {
    std::vector<long> counts;
    long total = 0;
};

// Row-major n x m matrix of simplex rows.
struct ProbabilityMatrix {
    std::vector<double> data;
    long n = 0;
    int m = 0;
    std::span<const double> row(long i) const { return {data.data() + i * m, static_cast<size_t>(m)}; }
    std::vector<double> column_means() const;
};

std::vector<double> apply_simplex_map(std::span<const double> logits, const SimplexMapSpec& spec);

// Monte Carlo sampling of the smoothed classifier at x. Noise is counter-based
// per (seed, sample index), so results do not depend on thread schedule.
CountsVector sample_counts(const BaseClassifier& clf, std::span<const double> x,
                           const NoiseConfig& cfg);
ProbabilityMatrix sample_prob_matrix(const BaseClassifier& clf, std::span<const double> x,
                                     const NoiseConfig& cfg, const SimplexMapSpec& spec);

// Deterministic per-sample standard normal fill (Box-Muller over a splitmix64
// stream keyed by (seed, counter)). Exposed for the synthetic classifiers.
void fill_gaussian(uint64_t seed, uint64_t counter, std::span<double> out);
uint64_t mix_seed(uint64_t seed, uint64_t salt);

// Synthetic classifiers for validation without a trained network.
//
// The multinomial oracle is a deterministic function of its (1-d) input that,
// under N(0, sigma^2) input noise around x = 0, lands in class k with
// probability exactly p_k.
BaseClassifier make_multinomial_oracle(std::vector<double> p, double sigma);

// Affine logits f(x) = W x + b (W row-major, m x d). For m = 2 and hardmax the
// smoothed class-0 probability has the closed form
// Phi((w . x + db) / (sigma * |w|)) with w = W_0 - W_1, db = b_0 - b_1.
BaseClassifier make_affine_logit(std::vector<double> w_rows, std::vector<double> bias, int m, int d);

}  // namespace certirad::smooth
