#include "certirad/continuous_cert.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace certirad::cont {

MarginSampleStream build_z_first(const smooth::ProbabilityMatrix& matrix, int predicted) {
    if (matrix.m < 2) throw std::invalid_argument("build_z_first: need at least 2 classes");
    if (matrix.n < 1) throw std::invalid_argument("build_z_first: empty matrix");
    MarginSampleStream s;
    s.kind = MarginKind::First;
    s.lo = -1.0;
    s.hi = 1.0;
    s.z.resize(matrix.n);
    for (long i = 0; i < matrix.n; ++i) {
        const auto row = matrix.row(i);
        double competitor = -1.0;
        for (int j = 0; j < matrix.m; ++j)
            if (j != predicted) competitor = std::max(competitor, row[j]);
        s.z[i] = row[predicted] - competitor;
    }
    return s;
}

std::optional<MarginSampleStream> build_z_second(const smooth::ProbabilityMatrix& matrix,
                                                 int predicted, int taylor_order) {
    if (matrix.m < 2) throw std::invalid_argument("build_z_second: need at least 2 classes");
    if (matrix.n < 1) throw std::invalid_argument("build_z_second: empty matrix");
    double pred_mean = 0.0;
    for (long i = 0; i < matrix.n; ++i) pred_mean += matrix.row(i)[predicted];
    pred_mean /= static_cast<double>(matrix.n);
    if (pred_mean < 0.5) return std::nullopt;

    const double qmax = special::taylor_quantile_max(taylor_order);
    MarginSampleStream s;
    s.kind = MarginKind::Second;
    s.lo = -2.0 * qmax;
    s.hi = 2.0 * qmax;
    s.plugin_mean_gate = true;
    s.z.resize(matrix.n);
    for (long i = 0; i < matrix.n; ++i) {
        const auto row = matrix.row(i);
        // Phi^-1_M is increasing, so the competitor max commutes with the map.
        double competitor = 0.0;
        for (int j = 0; j < matrix.m; ++j)
            if (j != predicted) competitor = std::max(competitor, row[j]);
        s.z[i] = special::gaussian_quantile_taylor(row[predicted], taylor_order) -
                 special::gaussian_quantile_taylor(competitor, taylor_order);
    }
    return s;
}

MarginEstimate continuous_margin_lcb(const MarginSampleStream& stream, ConfidenceLevel level,
                                     bounds::Method method) {
    if (method != bounds::Method::ContDirectEb && method != bounds::Method::ContDirectCs)
        throw std::invalid_argument("continuous_margin_lcb: method must be EB or CS direct");
    const double span = stream.hi - stream.lo;
    MarginEstimate est;
    est.kind = stream.kind;
    est.alpha = level.alpha;
    est.method = method;
    est.plugin_mean_gate = stream.plugin_mean_gate;

    double unit_lo;
    if (method == bounds::Method::ContDirectEb) {
        if (stream.z.size() < 2)
            throw std::invalid_argument("continuous_margin_lcb: EB needs n >= 2");
        std::vector<double> unit(stream.z.size());
        for (size_t i = 0; i < unit.size(); ++i) unit[i] = (stream.z[i] - stream.lo) / span;
        unit_lo = bounds::empirical_bernstein_lower(unit, 0.0, 1.0, level);
    } else {
        if (stream.z.empty())
            throw std::invalid_argument("continuous_margin_lcb: CS needs n >= 1");
        bounds::CsState s{level};
        for (double z : stream.z)
            s = s.observe(std::clamp((z - stream.lo) / span, 0.0, 1.0));
        unit_lo = s.intersection().first;
    }
    est.value = stream.lo + span * std::clamp(unit_lo, 0.0, 1.0);
    return est;
}

}  // namespace certirad::cont
