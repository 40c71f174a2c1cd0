// Timing comparison between the OpenMP tail-probability kernel and the naive
// serial reference, plus the sampling layer. Build and run:
//   cmake --build build --target certirad_bench && ./build/bench/certirad_bench

#include <chrono>
#include <cstdio>
#include <vector>

#include "certirad/discrete_cert.hpp"
#include "certirad/smoothing.hpp"

using namespace certirad;
using Clock = std::chrono::steady_clock;

namespace {

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

volatile double sink = 0.0;

void bench_kernel(int n, int iters) {
    const auto ev = discrete::first_margin_event(n / 5, n);
    const double q1 = 0.55, q2 = 0.25;

    auto t0 = Clock::now();
    for (int i = 0; i < iters; ++i) sink = sink + discrete::event_probability(ev, q1, q2);
    const double fast = ms_since(t0);

    t0 = Clock::now();
    for (int i = 0; i < iters; ++i) sink = sink + discrete::event_probability_serial(ev, q1, q2);
    const double serial = ms_since(t0);

    const double a = discrete::event_probability(ev, q1, q2);
    const double b = discrete::event_probability_serial(ev, q1, q2);
    std::printf("%6d %8d %12.3f %12.3f %8.2fx   |diff| = %.3e\n", n, iters, fast / iters,
                serial / iters, serial / fast, std::abs(a - b));
}

void bench_sampling(long n) {
    const auto clf = smooth::make_multinomial_oracle({0.5, 0.3, 0.2}, 0.5);
    const double x = 0.0;
    const auto t0 = Clock::now();
    const auto cv = smooth::sample_counts(clf, {&x, 1}, {0.5, n, 7});
    std::printf("sample_counts n=%-8ld %10.3f ms (top count %ld)\n", n, ms_since(t0),
                cv.counts[0]);
}

}  // namespace

int main() {
    std::printf("event probability kernel, optimized vs serial reference\n");
    std::printf("%6s %8s %12s %12s %9s\n", "n", "iters", "opt ms/it", "serial ms/it", "speedup");
    bench_kernel(50, 400);
    bench_kernel(100, 200);
    bench_kernel(200, 100);
    bench_kernel(500, 20);

    std::printf("\nsampling layer\n");
    bench_sampling(10000);
    bench_sampling(100000);
    return 0;
}
