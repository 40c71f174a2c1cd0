#pragma once

#include <array>
#include <vector>

#include "certirad/conf_bounds.hpp"
#include "certirad/smoothing.hpp"

// Joint lower confidence bounds on the top-two margin of a multinomial
// parameter: exact tail evaluation of the margin statistic over the 2-simplex
// reduction, a certified branch-and-bound for the constrained infimum, a cheap
// uncertified local solver, and the bisection drivers tying them together.
namespace certirad::discrete {

using bounds::ConfidenceLevel;
using bounds::MarginEstimate;
using bounds::MarginKind;

struct SignomialSubproblem {
    double threshold;            // candidate bound L on the margin
    double theta_tilde;          // observed statistic
    int n;                       // sample count
    MarginKind kind;
    int taylor_order = special::kDefaultTaylorOrder;  // Second kind only
    double alpha;
};

struct SolverCertificate {
    double value = 0.0;          // certified: lower bound on the infimum;
                                 // uncertified: value at the best feasible point
    bool certified_lower = false;
    long evaluations = 0;
};

// Event {x in lattice : statistic(x/n) <= threshold}, stored as the largest
// admissible x1 per x2 row (-1 for an empty row). Both margin statistics give
// per-row prefix events with a nondecreasing cap.
struct MarginEvent {
    int n = 0;
    std::vector<int> max_x1;
};

MarginEvent first_margin_event(int k, int n);  // event X1 - X2 <= k
MarginEvent second_margin_event(double theta_tilde, int n, int taylor_order);

// P(event | q) for the trinomial with parameter (q1, q2, 1-q1-q2).
// event_probability is the optimized OpenMP kernel (per-row multiplicative
// recurrences started at the row mode); event_probability_serial is the naive
// per-lattice-point log-space reference kept for testing and benchmarking.
double event_probability(const MarginEvent& ev, double q1, double q2);
double event_probability_serial(const MarginEvent& ev, double q1, double q2);

double multinomial_margin_cdf_first(int k, std::array<double, 3> q, int n);
double multinomial_margin_cdf_second(double theta_tilde, std::array<double, 3> q, int n,
                                     int taylor_order = special::kDefaultTaylorOrder);

inline constexpr double kSolverTolerance = 1e-4;  // certified optimality gap

// Certified global lower bound on
//   inf { P(event(theta_tilde) | q) : q in simplex, margin(q) <= L }.
// Throws std::domain_error when the feasible set is empty.
SolverCertificate solve_signomial(const SignomialSubproblem& problem);

// Cheap local search; value is attained at a feasible point (upper bound on
// the infimum), certified_lower = false.
SolverCertificate fast_solve_signomial(const SignomialSubproblem& problem);

// Alg.-4/5 bisection for the first margin. `fast` switches to the certified
// solver permanently the first time the fast solver fails to shrink.
MarginEstimate first_margin_lcb(const smooth::CountsVector& counts, ConfidenceLevel level,
                                double eps = 1e-3, bool fast = true);

// Alg.-6 driver for the second margin: Clopper-Pearson pretest at alpha/2,
// joint bisection at alpha/2 when p1 is certifiably above 1/2, Bonferroni
// fallback at alpha otherwise.
MarginEstimate second_margin_lcb(const smooth::CountsVector& counts, ConfidenceLevel level,
                                 double eps = 1e-3,
                                 int taylor_order = special::kDefaultTaylorOrder,
                                 bool fast = true);

}  // namespace certirad::discrete
