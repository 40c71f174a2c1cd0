#include "certirad/special_fn.hpp"

#include <cmath>
#include <mutex>
#include <stdexcept>

namespace certirad::special {

double erf(double x) { return std::erf(x); }
double erfc(double x) { return std::erfc(x); }

double gaussian_cdf(double x) {
    // erfc form keeps relative accuracy in the lower tail.
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

double gaussian_quantile(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw std::domain_error("gaussian_quantile: p must be in (0,1)");
    // Crude expansion start, then safeguarded Newton on gaussian_cdf.
    double q = p < 0.5 ? p : 1.0 - p;
    double t = std::sqrt(-2.0 * std::log(q));
    double x = t - (2.30753 + 0.27061 * t) / (1.0 + t * (0.99229 + 0.04481 * t));
    if (p < 0.5) x = -x;

    double lo = x - 1.0, hi = x + 1.0;
    while (gaussian_cdf(lo) > p) lo -= 1.0;
    while (gaussian_cdf(hi) < p) hi += 1.0;
    for (int it = 0; it < 100; ++it) {
        double f = gaussian_cdf(x) - p;
        if (f > 0.0) hi = x; else lo = x;
        double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
        double step = pdf > 0.0 ? f / pdf : 0.0;
        double xn = x - step;
        if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
        if (std::abs(xn - x) < 1e-14 * (1.0 + std::abs(x))) { x = xn; break; }
        x = xn;
    }
    return x;
}

std::vector<double> erf_inv_coeffs(int order) {
    if (order < 0) throw std::invalid_argument("erf_inv_coeffs: order must be >= 0");
    static std::vector<double> cache{1.0};
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    while (static_cast<int>(cache.size()) <= order) {
        const int k = static_cast<int>(cache.size());
        double ck = 0.0;
        for (int m = 0; m < k; ++m)
            ck += cache[m] * cache[k - 1 - m] / ((m + 1.0) * (2.0 * m + 1.0));
        cache.push_back(ck);
    }
    return {cache.begin(), cache.begin() + order + 1};
}

double gaussian_quantile_taylor(double p, int order) {
    const std::vector<double> c = erf_inv_coeffs(order);
    const double z = 0.5 * std::sqrt(M_PI) * (2.0 * p - 1.0);
    const double z2 = z * z;
    double pow_z = z;  // z^(2k+1)
    double sum = 0.0;
    for (int k = 0; k <= order; ++k) {
        sum += c[k] / (2.0 * k + 1.0) * pow_z;
        pow_z *= z2;
    }
    return std::sqrt(2.0) * sum;
}

double taylor_quantile_max(int order) { return gaussian_quantile_taylor(1.0, order); }

namespace {

// Continued fraction for the incomplete Beta (modified Lentz).
double beta_cf(double x, double a, double b) {
    const double tiny = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 500; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-15) break;
    }
    return h;
}

}  // namespace

double regularized_incomplete_beta(double x, double a, double b) {
    if (!(a > 0.0 && b > 0.0))
        throw std::domain_error("regularized_incomplete_beta: a,b must be > 0");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double lnfront = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
    if (x < (a + 1.0) / (a + b + 2.0))
        return std::exp(lnfront) * beta_cf(x, a, b) / a;
    return 1.0 - std::exp(lnfront + std::log(beta_cf(1.0 - x, b, a)) - std::log(b));
}

double beta_inv_cdf(double target, double a, double b) {
    if (!(target > 0.0 && target < 1.0))
        throw std::domain_error("beta_inv_cdf: target must be in (0,1)");
    if (!(a > 0.0 && b > 0.0))
        throw std::domain_error("beta_inv_cdf: a,b must be > 0");
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (regularized_incomplete_beta(mid, a, b) < target) lo = mid; else hi = mid;
        if (hi - lo < 1e-16) break;
    }
    return 0.5 * (lo + hi);
}

}  // namespace certirad::special
