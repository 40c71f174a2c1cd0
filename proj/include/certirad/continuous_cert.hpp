#pragma once

#include <optional>
#include <vector>

#include "certirad/conf_bounds.hpp"
#include "certirad/smoothing.hpp"

// Continuous-case certification: concentrate directly on the per-sample margin
// variable Z instead of splitting the budget across per-class bounds.
namespace certirad::cont {

using bounds::ConfidenceLevel;
using bounds::MarginEstimate;
using bounds::MarginKind;

struct MarginSampleStream {
    std::vector<double> z;
    MarginKind kind = MarginKind::First;
    double lo = -1.0, hi = 1.0;  // a-priori range, not the empirical one
    bool plugin_mean_gate = false;
};

// Z_i = X^pred_i - max_{j != pred} X^j_i, range [-1, 1].
MarginSampleStream build_z_first(const smooth::ProbabilityMatrix& matrix, int predicted);

// Quantile-space margin through the bounded Taylor surrogate. Returns nullopt
// when the predicted-class sample mean is below 1/2 (caller falls back to
// Bonferroni).
std::optional<MarginSampleStream> build_z_second(const smooth::ProbabilityMatrix& matrix,
                                                 int predicted,
                                                 int taylor_order = special::kDefaultTaylorOrder);

// Lower confidence bound on E[Z]: rescale to [0,1], apply the one-sided
// empirical Bernstein bound or the CS running-intersection lower endpoint,
// rescale back. method must be ContDirectEb or ContDirectCs.
MarginEstimate continuous_margin_lcb(const MarginSampleStream& stream, ConfidenceLevel level,
                                     bounds::Method method);

}  // namespace certirad::cont
