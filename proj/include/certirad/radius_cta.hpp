#pragma once

#include <span>
#include <vector>

#include "certirad/conf_bounds.hpp"

namespace certirad::cta {

using bounds::ConfidenceLevel;
using bounds::MarginEstimate;

enum class RadiusKind { R1, R2 };

struct CertifiedRadius {
    double value = 0.0;
    RadiusKind kind = RadiusKind::R1;
    bool correct = false;
};

// R1 = max(0, margin) / (sqrt(2) * lipschitz); zero on misclassification.
CertifiedRadius radius_first(const MarginEstimate& margin, double lipschitz, bool correct);
// R2 = (sigma / 2) * max(0, margin); the second margin already lives in
// quantile space.
CertifiedRadius radius_second(const MarginEstimate& margin, double sigma, bool correct);

struct CtaCurve {
    std::vector<double> grid;        // increasing radii
    std::vector<double> approx_acc;  // fraction with radius > r and correct
    std::vector<double> lcb_acc;     // one-sided Clopper-Pearson lower bound
    long test_size = 0;
};

CtaCurve cta_curve(std::span<const CertifiedRadius> records, std::span<const double> grid,
                   ConfidenceLevel level);

// Percent gains; infinity where baseline is 0 and ours > 0, 0 where both 0.
std::vector<double> gain_table(const CtaCurve& baseline, const CtaCurve& ours);

}  // namespace certirad::cta
