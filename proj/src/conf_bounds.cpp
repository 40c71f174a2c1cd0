#include "certirad/conf_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace certirad::bounds {

ConfidenceLevel::ConfidenceLevel(double a) : alpha(a) {
    if (!(a > 0.0 && a < 1.0))
        throw std::invalid_argument("ConfidenceLevel: alpha must be in (0,1)");
}

std::string method_name(Method m) {
    switch (m) {
        case Method::CpBonferroni: return "CP_BONFERRONI";
        case Method::EbBonferroni: return "EB_BONFERRONI";
        case Method::CsBonferroni: return "CS_BONFERRONI";
        case Method::DiscreteJoint: return "DISCRETE_JOINT";
        case Method::ContDirectEb: return "CONT_DIRECT_EB";
        case Method::ContDirectCs: return "CONT_DIRECT_CS";
    }
    throw std::logic_error("method_name: bad enum");
}

Method method_from_name(const std::string& name) {
    for (Method m : {Method::CpBonferroni, Method::EbBonferroni, Method::CsBonferroni,
                     Method::DiscreteJoint, Method::ContDirectEb, Method::ContDirectCs})
        if (method_name(m) == name) return m;
    throw std::invalid_argument("unknown method: " + name);
}

double clopper_pearson_lower(long successes, long trials, ConfidenceLevel level) {
    if (trials < 1 || successes < 0 || successes > trials)
        throw std::invalid_argument("clopper_pearson_lower: bad counts");
    if (successes == 0) return 0.0;
    return special::beta_inv_cdf(level.alpha, static_cast<double>(successes),
                                 static_cast<double>(trials - successes + 1));
}

double clopper_pearson_upper(long successes, long trials, ConfidenceLevel level) {
    if (trials < 1 || successes < 0 || successes > trials)
        throw std::invalid_argument("clopper_pearson_upper: bad counts");
    if (successes == trials) return 1.0;
    return special::beta_inv_cdf(1.0 - level.alpha, static_cast<double>(successes + 1),
                                 static_cast<double>(trials - successes));
}

namespace {

struct MeanVar {
    double mean;
    double var;  // empirical variance, 1/(n-1) normalization
};

MeanVar mean_var(std::span<const double> v) {
    const double n = static_cast<double>(v.size());
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= n;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return {mean, ss / (n - 1.0)};
}

}  // namespace

double empirical_bernstein_upper(std::span<const double> values, double lo, double hi,
                                 ConfidenceLevel delta) {
    const size_t n = values.size();
    if (n < 2) throw std::invalid_argument("empirical_bernstein: need n >= 2");
    if (!(lo < hi)) throw std::invalid_argument("empirical_bernstein: lo < hi required");
    const auto [mean, var] = mean_var(values);
    const double ln = std::log(1.0 / delta.alpha);
    return mean + std::sqrt(2.0 * var * ln / n) + 7.0 * (hi - lo) * ln / (3.0 * (n - 1.0));
}

double empirical_bernstein_lower(std::span<const double> values, double lo, double hi,
                                 ConfidenceLevel delta) {
    std::vector<double> neg(values.size());
    std::transform(values.begin(), values.end(), neg.begin(), [](double x) { return -x; });
    return -empirical_bernstein_upper(neg, -hi, -lo, delta);
}

CsState::CsState(ConfidenceLevel level) : alpha_(level.alpha) {}

CsState CsState::observe(double x) const {
    if (!(x >= 0.0 && x <= 1.0))
        throw std::invalid_argument("CsState::observe: x must be in [0,1]");
    CsState s = *this;
    const long t = s.t_ + 1;
    const double log_term = 2.0 * std::log(2.0 / s.alpha_);
    double lam = std::sqrt(log_term / (s.var_est_ * t * std::log(1.0 + t)));
    lam = std::min(lam, 0.5);
    const double v = 4.0 * (x - s.mean_est_) * (x - s.mean_est_);
    const double psi = (-std::log1p(-lam) - lam) / 4.0;

    s.sum_wx_ += lam * x;
    s.sum_w_ += lam;
    s.sum_slack_ += v * psi;
    s.t_ = t;

    s.sum_x_ += x;
    const double mu = (0.5 + s.sum_x_) / (t + 1.0);
    s.sum_sq_dev_ += (x - mu) * (x - mu);
    s.var_est_ = (0.25 + s.sum_sq_dev_) / (t + 1.0);
    s.mean_est_ = mu;

    const auto [lo, hi] = s.interval();
    s.int_lo_ = std::max(s.int_lo_, lo);
    s.int_hi_ = std::min(s.int_hi_, hi);
    return s;
}

std::pair<double, double> CsState::interval() const {
    if (t_ == 0) throw std::logic_error("CsState::interval: no observations");
    const double center = sum_wx_ / sum_w_;
    const double radius =
        std::sqrt((2.0 * std::log(2.0 / alpha_) + sum_slack_) / sum_w_);
    return {std::clamp(center - radius, 0.0, 1.0), std::clamp(center + radius, 0.0, 1.0)};
}

std::pair<double, double> CsState::intersection() const {
    if (t_ == 0) throw std::logic_error("CsState::intersection: no observations");
    return {int_lo_, int_hi_};
}

int argmax_lowest_tie(std::span<const double> v) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(v.size()); ++i)
        if (v[i] > v[best]) best = i;
    return best;
}

int second_highest_index(std::span<const long> v, int top) {
    int best = -1;
    for (int i = 0; i < static_cast<int>(v.size()); ++i) {
        if (i == top) continue;
        if (best < 0 || v[i] > v[best]) best = i;
    }
    return best;
}

namespace {

// Clip then map through the exact quantile; records whether clipping bit.
double quantile_clipped(double p, bool* clipped) {
    double pc = std::clamp(p, kProbClip, 1.0 - kProbClip);
    if (pc != p) *clipped = true;
    return special::gaussian_quantile(pc);
}

}  // namespace

MarginEstimate bonferroni_margin_counts(CountsView data, int predicted, ConfidenceLevel level,
                                        MarginKind kind) {
    const int m = static_cast<int>(data.counts.size());
    if (m < 2) throw std::invalid_argument("bonferroni_margin: need at least 2 classes");
    const ConfidenceLevel split(level.alpha / m);
    const int runner = second_highest_index(data.counts, predicted);
    const double p_lo = clopper_pearson_lower(data.counts[predicted], data.total, split);
    const double p_hi = clopper_pearson_upper(data.counts[runner], data.total, split);

    MarginEstimate est;
    est.kind = kind;
    est.alpha = level.alpha;
    est.method = Method::CpBonferroni;
    if (kind == MarginKind::First) {
        est.value = p_lo - p_hi;
    } else {
        bool clipped = false;
        est.value = quantile_clipped(p_lo, &clipped) - quantile_clipped(p_hi, &clipped);
        est.clipped = clipped;
    }
    return est;
}

MarginEstimate bonferroni_margin_matrix(std::span<const double> rows, long n, int m,
                                        int predicted, ConfidenceLevel level, MarginKind kind,
                                        Method provider) {
    if (m < 2) throw std::invalid_argument("bonferroni_margin: need at least 2 classes");
    if (n < 1 || rows.size() != static_cast<size_t>(n) * m)
        throw std::invalid_argument("bonferroni_margin: bad matrix shape");
    if (provider != Method::EbBonferroni && provider != Method::CsBonferroni)
        throw std::invalid_argument("bonferroni_margin: provider must be EB or CS");
    const ConfidenceLevel split(level.alpha / m);

    std::vector<double> col(n);
    auto column_bound = [&](int j, bool upper) {
        for (long i = 0; i < n; ++i) col[i] = rows[i * m + j];
        if (provider == Method::EbBonferroni) {
            return upper ? empirical_bernstein_upper(col, 0.0, 1.0, split)
                         : empirical_bernstein_lower(col, 0.0, 1.0, split);
        }
        CsState s{split};
        for (double x : col) s = s.observe(x);
        const auto [lo, hi] = s.intersection();
        return upper ? hi : lo;
    };

    const double p_lo = std::clamp(column_bound(predicted, false), 0.0, 1.0);
    double worst_hi = 0.0;
    for (int j = 0; j < m; ++j) {
        if (j == predicted) continue;
        worst_hi = std::max(worst_hi, std::clamp(column_bound(j, true), 0.0, 1.0));
    }

    MarginEstimate est;
    est.kind = kind;
    est.alpha = level.alpha;
    est.method = provider;
    if (kind == MarginKind::First) {
        est.value = p_lo - worst_hi;
    } else {
        bool clipped = false;
        est.value = quantile_clipped(p_lo, &clipped) - quantile_clipped(worst_hi, &clipped);
        est.clipped = clipped;
    }
    return est;
}

}  // namespace certirad::bounds
