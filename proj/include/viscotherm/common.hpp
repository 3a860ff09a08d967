#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace viscotherm {

/// Thrown when a coefficient that appears inside a logarithmic derivative
/// vanishes, so the closed-form co-existence condition is undefined.
struct SingularCoefficientError : std::domain_error {
    using std::domain_error::domain_error;
};

/// Thrown when a requested time step violates the stability bound.
struct CflError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Thrown when a simulation state became non-finite or unphysical.
struct NumericalAbortError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Thrown on malformed configuration input.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr double kMachineEps = std::numeric_limits<double>::epsilon();

/// Floating-point text format used by every CSV emitter: 17 significant
/// digits round-trip exactly in binary64.
inline std::string format_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

/// Thread cap: VISCOTHERM_THREADS if set (>=1), otherwise all cores.
inline int max_threads() {
    if (const char* env = std::getenv("VISCOTHERM_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs f(begin, end) over disjoint chunks of [0, n). Writes from different
/// chunks must not alias; reductions stay with the caller so results do not
/// depend on the schedule.
template <typename F>
void parallel_for_chunks(int n, F&& f) {
    const int nt = std::min(max_threads(), n);
    if (nt <= 1 || n < 4) {
        f(0, n);
        return;
    }
    std::vector<std::thread> workers;
    workers.reserve(nt);
    const int chunk = (n + nt - 1) / nt;
    for (int t = 0; t < nt; ++t) {
        const int lo = t * chunk;
        const int hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        workers.emplace_back([&f, lo, hi] { f(lo, hi); });
    }
    for (auto& w : workers) w.join();
}

}  // namespace viscotherm
