#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "certirad/special_fn.hpp"

namespace certirad::bounds {

struct ConfidenceLevel {
    double alpha;  // miscoverage budget, in (0,1)
    explicit ConfidenceLevel(double a);
    double level() const { return 1.0 - alpha; }
};

enum class MarginKind { First, Second };

enum class Method {
    CpBonferroni,
    EbBonferroni,
    CsBonferroni,
    DiscreteJoint,
    ContDirectEb,
    ContDirectCs,
};

std::string method_name(Method m);
Method method_from_name(const std::string& name);

struct MarginEstimate {
    double value = 0.0;
    MarginKind kind = MarginKind::First;
    double alpha = 0.0;
    Method method = Method::CpBonferroni;
    bool clipped = false;        // a probability hit the clipping guard before Phi^-1
    bool plugin_mean_gate = false;  // continuous second-margin gate used plug-in mean
};

// Exact binomial bounds via the Beta quantile. Lower is 0 at k=0, upper is 1
// at k=n. alpha is the one-sided budget.
double clopper_pearson_lower(long successes, long trials, ConfidenceLevel level);
double clopper_pearson_upper(long successes, long trials, ConfidenceLevel level);

// One-sided empirical Bernstein bounds for i.i.d. values in [lo, hi], n >= 2.
double empirical_bernstein_upper(std::span<const double> values, double lo, double hi,
                                 ConfidenceLevel delta);
double empirical_bernstein_lower(std::span<const double> values, double lo, double hi,
                                 ConfidenceLevel delta);

// Predictable plug-in empirical-Bernstein confidence sequence for a mean in
// [0,1]. A value type: cs_observe returns the advanced state. The running
// intersection over time is itself a (1-alpha) CS and is what certification
// consumes.
class CsState {
  public:
    explicit CsState(ConfidenceLevel level);

    CsState observe(double x) const;
    long count() const { return t_; }
    double alpha() const { return alpha_; }

    // Interval at the current time only; throws std::logic_error at t = 0.
    std::pair<double, double> interval() const;
    // Intersection of all intervals seen so far, clipped to [0,1].
    std::pair<double, double> intersection() const;

  private:
    double alpha_;
    long t_ = 0;
    double mean_est_ = 0.5;      // mu_hat_t = (1/2 + sum x_i) / (t+1)
    double var_est_ = 0.25;      // sigma_hat_t^2 = (1/4 + sum (x_i - mu_hat_i)^2) / (t+1)
    double sum_x_ = 0.0;
    double sum_sq_dev_ = 0.0;
    double sum_wx_ = 0.0;        // sum lambda_i x_i
    double sum_w_ = 0.0;         // sum lambda_i
    double sum_slack_ = 0.0;     // sum v_i psi_e(lambda_i)
    double int_lo_ = 0.0;
    double int_hi_ = 1.0;
};

// Alg.-style Bonferroni margin estimation. The per-class bound provider gets
// budget alpha/m; discrete (counts) uses Clopper-Pearson, the matrix overloads
// take the provider as a method selector (EB or CS on the column streams).
struct CountsView {
    std::span<const long> counts;
    long total;
};

MarginEstimate bonferroni_margin_counts(CountsView data, int predicted, ConfidenceLevel level,
                                        MarginKind kind);

// rows: n x m row-major simplex rows.
MarginEstimate bonferroni_margin_matrix(std::span<const double> rows, long n, int m,
                                        int predicted, ConfidenceLevel level, MarginKind kind,
                                        Method provider);  // EbBonferroni or CsBonferroni

// Probability clipping guard applied before Phi^-1 (second kind).
inline constexpr double kProbClip = 1e-9;

int argmax_lowest_tie(std::span<const double> v);
int second_highest_index(std::span<const long> v, int top);

}  // namespace certirad::bounds
