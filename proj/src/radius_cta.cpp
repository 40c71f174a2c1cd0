#include "certirad/radius_cta.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace certirad::cta {

CertifiedRadius radius_first(const MarginEstimate& margin, double lipschitz, bool correct) {
    if (!(lipschitz > 0.0)) throw std::invalid_argument("radius_first: lipschitz must be > 0");
    CertifiedRadius r;
    r.kind = RadiusKind::R1;
    r.correct = correct;
    r.value = correct ? std::max(0.0, margin.value) / (std::sqrt(2.0) * lipschitz) : 0.0;
    return r;
}

CertifiedRadius radius_second(const MarginEstimate& margin, double sigma, bool correct) {
    if (!(sigma > 0.0)) throw std::invalid_argument("radius_second: sigma must be > 0");
    CertifiedRadius r;
    r.kind = RadiusKind::R2;
    r.correct = correct;
    r.value = correct ? 0.5 * sigma * std::max(0.0, margin.value) : 0.0;
    return r;
}

CtaCurve cta_curve(std::span<const CertifiedRadius> records, std::span<const double> grid,
                   ConfidenceLevel level) {
    if (records.empty()) throw std::invalid_argument("cta_curve: empty record set");
    for (size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1])) throw std::invalid_argument("cta_curve: grid not increasing");
    CtaCurve curve;
    curve.grid.assign(grid.begin(), grid.end());
    curve.test_size = static_cast<long>(records.size());
    for (double r : grid) {
        long hits = 0;
        for (const CertifiedRadius& rec : records)
            if (rec.correct && rec.value > r) ++hits;  // strict, ties conservative
        curve.approx_acc.push_back(static_cast<double>(hits) / records.size());
        curve.lcb_acc.push_back(
            bounds::clopper_pearson_lower(hits, static_cast<long>(records.size()), level));
    }
    return curve;
}

std::vector<double> gain_table(const CtaCurve& baseline, const CtaCurve& ours) {
    if (baseline.grid != ours.grid) throw std::invalid_argument("gain_table: grid mismatch");
    std::vector<double> gains;
    gains.reserve(baseline.grid.size());
    for (size_t i = 0; i < baseline.grid.size(); ++i) {
        const double b = baseline.approx_acc[i], o = ours.approx_acc[i];
        if (b == 0.0)
            gains.push_back(o > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
        else
            gains.push_back(100.0 * (o - b) / b);
    }
    return gains;
}

}  // namespace certirad::cta
