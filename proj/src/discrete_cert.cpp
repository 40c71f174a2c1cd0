#include "certirad/discrete_cert.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

namespace certirad::discrete {

MarginEvent first_margin_event(int k, int n) {
    MarginEvent ev;
    ev.n = n;
    ev.max_x1.assign(n + 1, -1);
    for (int x2 = 0; x2 <= n; ++x2) {
        const long cap = std::min<long>(static_cast<long>(k) + x2, n - x2);
        ev.max_x1[x2] = cap < 0 ? -1 : static_cast<int>(cap);
    }
    return ev;
}

MarginEvent second_margin_event(double theta_tilde, int n, int taylor_order) {
    std::vector<double> phi(n + 1);
    for (int j = 0; j <= n; ++j)
        phi[j] = special::gaussian_quantile_taylor(static_cast<double>(j) / n, taylor_order);
    MarginEvent ev;
    ev.n = n;
    ev.max_x1.assign(n + 1, -1);
    int x1 = -1;  // cap is nondecreasing in x2, walk a single pointer
    for (int x2 = 0; x2 <= n; ++x2) {
        const double limit = theta_tilde + phi[x2];
        while (x1 + 1 <= n && phi[x1 + 1] <= limit) ++x1;
        ev.max_x1[x2] = std::min(x1, n - x2);
    }
    return ev;
}

namespace {

double row_cap(const MarginEvent& ev, int x2) {
    return std::min(ev.max_x1[x2], ev.n - x2);
}

// Sum of a boundary face (one of q1,q2,q3 zero) in log space; n+1 terms.
double log_term(int n, int x1, int x2, double lq1, double lq2, double lq3) {
    const int x3 = n - x1 - x2;
    double lt = std::lgamma(n + 1.0) - std::lgamma(x1 + 1.0) - std::lgamma(x2 + 1.0) -
                std::lgamma(x3 + 1.0);
    if (x1 > 0) lt += x1 * lq1;
    if (x2 > 0) lt += x2 * lq2;
    if (x3 > 0) lt += x3 * lq3;
    return lt;
}

double boundary_probability(const MarginEvent& ev, double q1, double q2, double q3) {
    const int n = ev.n;
    double total = 0.0;
    const double lq1 = q1 > 0.0 ? std::log(q1) : 0.0;
    const double lq2 = q2 > 0.0 ? std::log(q2) : 0.0;
    const double lq3 = q3 > 0.0 ? std::log(q3) : 0.0;
    if (q3 <= 0.0) {
        // only x3 = 0, i.e. x1 = n - x2
        for (int x2 = 0; x2 <= n; ++x2) {
            const int x1 = n - x2;
            if (ev.max_x1[x2] < x1) continue;
            if ((q1 <= 0.0 && x1 > 0) || (q2 <= 0.0 && x2 > 0)) continue;
            total += std::exp(log_term(n, x1, x2, lq1, lq2, lq3));
        }
        return total;
    }
    if (q1 <= 0.0) {
        // only x1 = 0 carries mass
        for (int x2 = 0; x2 <= n; ++x2) {
            if (ev.max_x1[x2] < 0) continue;
            if (q2 <= 0.0 && x2 > 0) continue;
            total += std::exp(log_term(n, 0, x2, lq1, lq2, lq3));
        }
        return total;
    }
    // q2 == 0: only the x2 = 0 row
    const int cap = static_cast<int>(row_cap(ev, 0));
    for (int x1 = 0; x1 <= cap; ++x1)
        total += std::exp(log_term(n, x1, 0, lq1, lq2, lq3));
    return total;
}

}  // namespace

double event_probability(const MarginEvent& ev, double q1, double q2) {
    const int n = ev.n;
    q1 = std::clamp(q1, 0.0, 1.0);
    q2 = std::clamp(q2, 0.0, 1.0 - q1);
    const double q3 = std::max(0.0, 1.0 - q1 - q2);
    if (q1 <= 0.0 || q2 <= 0.0 || q3 <= 0.0) return boundary_probability(ev, q1, q2, q3);

    const double lq1 = std::log(q1), lq2 = std::log(q2), lq3 = std::log(q3);
    const double ratio_up = q1 / q3, ratio_dn = q3 / q1;
    double total = 0.0;
#pragma omp parallel for reduction(+ : total) schedule(static) if (n > 160)
    for (int x2 = 0; x2 <= n; ++x2) {
        const int cap = static_cast<int>(row_cap(ev, x2));
        if (cap < 0) continue;
        const int rest = n - x2;
        // start at the conditional binomial mode to dodge underflow at x1 = 0
        int s = std::clamp(static_cast<int>(rest * q1 / (q1 + q3)), 0, cap);
        const double t0 = std::exp(log_term(n, s, x2, lq1, lq2, lq3));
        double row = t0;
        double t = t0;
        for (int x1 = s; x1 > 0; --x1) {  // walk down
            t *= ratio_dn * x1 / (rest - x1 + 1.0);
            row += t;
            if (t < t0 * 1e-18) break;
        }
        t = t0;
        for (int x1 = s; x1 < cap; ++x1) {  // walk up
            t *= ratio_up * (rest - x1) / (x1 + 1.0);
            row += t;
            if (t < t0 * 1e-18) break;
        }
        total += row;
    }
    return std::min(total, 1.0);
}

double event_probability_serial(const MarginEvent& ev, double q1, double q2) {
    const int n = ev.n;
    const double q3 = 1.0 - q1 - q2;
    const double lq1 = q1 > 0.0 ? std::log(q1) : 0.0;
    const double lq2 = q2 > 0.0 ? std::log(q2) : 0.0;
    const double lq3 = q3 > 0.0 ? std::log(q3) : 0.0;
    double total = 0.0;
    for (int x2 = 0; x2 <= n; ++x2) {
        const int cap = static_cast<int>(row_cap(ev, x2));
        for (int x1 = 0; x1 <= cap; ++x1) {
            if (q1 <= 0.0 && x1 > 0) continue;
            if (q2 <= 0.0 && x2 > 0) continue;
            if (q3 <= 0.0 && n - x1 - x2 > 0) continue;
            total += std::exp(log_term(n, x1, x2, lq1, lq2, lq3));
        }
    }
    return total;
}

namespace {

std::array<double, 3> checked_simplex(std::array<double, 3> q) {
    double sum = 0.0;
    for (double& v : q) {
        if (v < -1e-9 || v > 1.0 + 1e-9) throw std::invalid_argument("q not on the simplex");
        v = std::clamp(v, 0.0, 1.0);
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("q does not sum to 1");
    return q;
}

}  // namespace

double multinomial_margin_cdf_first(int k, std::array<double, 3> q, int n) {
    q = checked_simplex(q);
    if (k >= n) return 1.0;
    if (k < -n) return 0.0;
    return event_probability(first_margin_event(k, n), q[0], q[1]);
}

double multinomial_margin_cdf_second(double theta_tilde, std::array<double, 3> q, int n,
                                     int taylor_order) {
    q = checked_simplex(q);
    return event_probability(second_margin_event(theta_tilde, n, taylor_order), q[0], q[1]);
}

namespace {

// Constraint statistic q1 -> g(q1) (identity for the first margin, the Taylor
// quantile surrogate for the second) plus its monotone inverse.
struct MarginMap {
    MarginKind kind;
    int order;
    double operator()(double p) const {
        return kind == MarginKind::First ? p : special::gaussian_quantile_taylor(p, order);
    }
    double inverse(double y) const {
        if (kind == MarginKind::First) return std::clamp(y, 0.0, 1.0);
        if (y <= (*this)(0.0)) return 0.0;
        if (y >= (*this)(1.0)) return 1.0;
        double lo = 0.0, hi = 1.0;
        for (int it = 0; it < 80; ++it) {
            const double mid = 0.5 * (lo + hi);
            if ((*this)(mid) < y) lo = mid; else hi = mid;
        }
        return 0.5 * (lo + hi);
    }
};

struct SolverContext {
    const MarginEvent& ev;
    MarginMap g;
    double L;
    long evals = 0;

    double eval(double q1, double q2) {
        ++evals;
        return event_probability(ev, q1, q2);
    }
    // largest q1 allowed by the margin constraint at this q2 (simplex aside)
    double q1_max(double q2) const { return g.inverse(L + g(q2)); }
};

struct Cell {
    double a1, b1, a2, b2;
    double lb;
};
struct CellOrder {
    bool operator()(const Cell& x, const Cell& y) const { return x.lb > y.lb; }
};

double cell_lower_bound(SolverContext& ctx, const Cell& c) {
    // Pi is nonincreasing in q1 and nondecreasing in q2 over the simplex, so
    // the (largest q1, smallest q2) corner bounds the cell from below.
    const double q2 = c.a2;
    const double q1 = std::min(c.b1, 1.0 - q2);
    return ctx.eval(q1, q2);
}

bool cell_feasible(const SolverContext& ctx, const Cell& c) {
    if (c.a1 + c.a2 > 1.0) return false;  // outside the simplex
    const double q2 = std::min(c.b2, 1.0 - c.a1);
    return ctx.g(c.a1) - ctx.g(q2) <= ctx.L + 1e-12;
}

SolverCertificate solve_core(SolverContext& ctx, double tol) {
    const double g_min = ctx.g(0.0) - ctx.g(1.0);
    if (ctx.L < g_min - 1e-12)
        throw std::domain_error("solve_signomial: empty feasible set");

    double incumbent = std::numeric_limits<double>::infinity();
    auto probe = [&](double q2) {
        q2 = std::clamp(q2, 0.0, 1.0);
        const double q1 = std::clamp(std::min(ctx.q1_max(q2), 1.0 - q2), 0.0, 1.0);
        incumbent = std::min(incumbent, ctx.eval(q1, q2));
    };
    for (double q2 : {0.0, 0.1, 0.25, 0.5}) probe(q2);

    std::priority_queue<Cell, std::vector<Cell>, CellOrder> heap;
    Cell root{0.0, 1.0, 0.0, 1.0, 0.0};
    root.lb = cell_lower_bound(ctx, root);
    heap.push(root);

    double best_lb = root.lb;
    for (int iter = 0; iter < 60000 && !heap.empty(); ++iter) {
        Cell c = heap.top();
        best_lb = c.lb;
        if (incumbent - best_lb <= tol) break;
        heap.pop();
        const bool split1 = (c.b1 - c.a1) >= (c.b2 - c.a2);
        Cell left = c, right = c;
        if (split1) {
            const double mid = 0.5 * (c.a1 + c.b1);
            left.b1 = mid;
            right.a1 = mid;
        } else {
            const double mid = 0.5 * (c.a2 + c.b2);
            left.b2 = mid;
            right.a2 = mid;
        }
        for (Cell* ch : {&left, &right}) {
            if (!cell_feasible(ctx, *ch)) continue;
            ch->lb = std::max(c.lb, cell_lower_bound(ctx, *ch));
            // refresh the incumbent from this cell's feasible corner
            const double q2 = ch->a2;
            const double q1 =
                std::clamp(std::min({ch->b1, 1.0 - q2, ctx.q1_max(q2)}), 0.0, 1.0);
            incumbent = std::min(incumbent, ctx.eval(q1, q2));
            if (ch->lb <= incumbent) heap.push(*ch);
        }
        if (heap.empty()) { best_lb = incumbent; break; }
    }
    return {std::min(best_lb, incumbent), true, ctx.evals};
}

SolverCertificate fast_solve_core(SolverContext& ctx) {
    const double g_min = ctx.g(0.0) - ctx.g(1.0);
    if (ctx.L < g_min - 1e-12)
        throw std::domain_error("fast_solve_signomial: empty feasible set");

    // The infimum pushes q1 to its constraint/simplex cap, so search the 1-D
    // slice h(q2) = Pi(q1_max(q2), q2).
    auto h = [&](double q2) {
        const double q1 = std::clamp(std::min(ctx.q1_max(q2), 1.0 - q2), 0.0, 1.0);
        return ctx.eval(q1, q2);
    };
    const int kScan = 17;
    double best_q2 = 0.0, best_val = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= kScan; ++i) {
        const double q2 = static_cast<double>(i) / kScan;
        const double v = h(q2);
        if (v < best_val) { best_val = v; best_q2 = q2; }
    }
    double lo = std::max(0.0, best_q2 - 1.0 / kScan);
    double hi = std::min(1.0, best_q2 + 1.0 / kScan);
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = h(x1), f2 = h(x2);
    for (int it = 0; it < 24; ++it) {
        if (f1 < f2) {
            hi = x2; x2 = x1; f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = h(x1);
        } else {
            lo = x1; x1 = x2; f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = h(x2);
        }
    }
    best_val = std::min({best_val, f1, f2});
    return {best_val, false, ctx.evals};
}

SolverContext make_context(const MarginEvent& ev, const SignomialSubproblem& p) {
    return SolverContext{ev, MarginMap{p.kind, p.taylor_order}, p.threshold};
}

MarginEvent problem_event(const SignomialSubproblem& p) {
    if (p.kind == MarginKind::First) {
        const int k = static_cast<int>(std::llround(p.theta_tilde * p.n));
        return first_margin_event(k, p.n);
    }
    return second_margin_event(p.theta_tilde, p.n, p.taylor_order);
}

// Shared bisection driver for both margin kinds. Advancing `left` always requires
// a certified "value >= target"; fast upper bounds may only shrink `right`.
double bisect_margin(const MarginEvent& ev, MarginKind kind, int taylor_order, double alpha,
                     double theta_tilde, double eps, bool fast) {
    const double target = 1.0 - alpha;
    double left = 0.0, right = theta_tilde;
    bool close = !fast;
    while (right - left > eps) {
        const double L = 0.5 * (left + right);
        SolverContext ctx{ev, MarginMap{kind, taylor_order}, L};
        if (!close) {
            const SolverCertificate upper = fast_solve_core(ctx);
            if (upper.value < target) { right = L; continue; }
            close = true;  // fast path failed to shrink; certify from here on
        }
        SolverContext cctx{ev, MarginMap{kind, taylor_order}, L};
        const SolverCertificate cert = solve_core(cctx, kSolverTolerance);
        if (cert.value < target) right = L; else left = L;
    }
    return left;
}

}  // namespace

SolverCertificate solve_signomial(const SignomialSubproblem& problem) {
    const MarginEvent ev = problem_event(problem);
    SolverContext ctx = make_context(ev, problem);
    return solve_core(ctx, kSolverTolerance);
}

SolverCertificate fast_solve_signomial(const SignomialSubproblem& problem) {
    const MarginEvent ev = problem_event(problem);
    SolverContext ctx = make_context(ev, problem);
    return fast_solve_core(ctx);
}

MarginEstimate first_margin_lcb(const smooth::CountsVector& counts, ConfidenceLevel level,
                                double eps, bool fast) {
    if (counts.counts.empty()) throw std::invalid_argument("first_margin_lcb: empty counts");
    const int n = static_cast<int>(counts.total);
    int top = 0;
    for (size_t i = 1; i < counts.counts.size(); ++i)
        if (counts.counts[i] > counts.counts[top]) top = static_cast<int>(i);
    const int runner = bounds::second_highest_index(counts.counts, top);

    MarginEstimate est;
    est.kind = MarginKind::First;
    est.alpha = level.alpha;
    est.method = bounds::Method::DiscreteJoint;
    const long k = counts.counts[top] - counts.counts[runner];
    if (k <= 0) { est.value = 0.0; return est; }
    const double theta_tilde = static_cast<double>(k) / n;
    const MarginEvent ev = first_margin_event(static_cast<int>(k), n);
    est.value = bisect_margin(ev, MarginKind::First, 0, level.alpha, theta_tilde, eps, fast);
    return est;
}

MarginEstimate second_margin_lcb(const smooth::CountsVector& counts, ConfidenceLevel level,
                                 double eps, int taylor_order, bool fast) {
    if (counts.counts.empty()) throw std::invalid_argument("second_margin_lcb: empty counts");
    const int n = static_cast<int>(counts.total);
    int top = 0;
    for (size_t i = 1; i < counts.counts.size(); ++i)
        if (counts.counts[i] > counts.counts[top]) top = static_cast<int>(i);
    const int runner = bounds::second_highest_index(counts.counts, top);

    const ConfidenceLevel half(level.alpha / 2.0);
    const double p1_lo = bounds::clopper_pearson_lower(counts.counts[top], n, half);
    if (!(p1_lo > 0.5)) {
        return bounds::bonferroni_margin_counts({counts.counts, counts.total}, top, level,
                                                MarginKind::Second);
    }

    MarginEstimate est;
    est.kind = MarginKind::Second;
    est.alpha = level.alpha;
    est.method = bounds::Method::DiscreteJoint;
    bool clipped = false;
    auto clip_q = [&](double p) {
        const double pc = std::clamp(p, bounds::kProbClip, 1.0 - bounds::kProbClip);
        if (pc != p) clipped = true;
        return special::gaussian_quantile(pc);
    };
    const double theta_tilde = clip_q(static_cast<double>(counts.counts[top]) / n) -
                               clip_q(static_cast<double>(counts.counts[runner]) / n);
    est.clipped = clipped;
    if (theta_tilde <= 0.0) { est.value = 0.0; return est; }
    const MarginEvent ev = second_margin_event(theta_tilde, n, taylor_order);
    est.value =
        bisect_margin(ev, MarginKind::Second, taylor_order, half.alpha, theta_tilde, eps, fast);
    return est;
}

}  // namespace certirad::discrete
