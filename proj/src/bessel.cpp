#include "kglab/bessel.hpp"

#include <array>
#include <map>
#include <mutex>

namespace kglab::bessel {

namespace {

double jn_raw(int n, double x) {
    return std::cyl_bessel_j(static_cast<double>(n), x);
}

} // namespace

double jn(int n, double x) {
    if (n < 0) {
        const double v = jn_raw(-n, x);
        return (-n) % 2 == 0 ? v : -v;
    }
    return jn_raw(n, x);
}

double jn_prime(int n, double x) {
    return 0.5 * (jn(n - 1, x) - jn(n + 1, x));
}

double jn_second(int n, double x) {
    return 0.25 * (jn(n - 2, x) - 2.0 * jn(n, x) + jn(n + 2, x));
}

double jn_over_x(int n, double x) {
    if (x > 1e-3) return jn(n, x) / x;
    // Series of J_n(x)/x around the removable singularity:
    // J_n(x)/x = (x/2)^(n-1)/(2 n!) * [1 - x^2/(4(n+1)) + x^4/(32(n+1)(n+2))]
    const double h = x / 2.0;
    double fact = 1.0;
    for (int k = 1; k <= n; ++k) fact *= k;
    double pw = 1.0;
    for (int k = 0; k < n - 1; ++k) pw *= h;
    const double lead = pw / (2.0 * fact);
    const double x2 = x * x;
    return lead * (1.0 - x2 / (4.0 * (n + 1)) + x2 * x2 / (32.0 * (n + 1) * (n + 2)));
}

double first_max(int n) {
    if (n == 0) return 0.0;
    // Bracket the first zero of J_n' between x = n^(1/3) and the first zero
    // of J_n, then bisect. J_n' > 0 on the rise, < 0 past the peak.
    double lo = 0.1;
    double hi = n + 2.0 * std::cbrt(static_cast<double>(n)) + 2.0;
    // walk up to find a sign change of jn_prime
    double step = hi / 400.0;
    double a = lo, b = lo;
    double fa = jn_prime(n, a);
    for (double x = lo + step; x <= hi; x += step) {
        const double fx = jn_prime(n, x);
        if (fa > 0.0 && fx <= 0.0) { b = x; break; }
        a = x;
        fa = fx;
    }
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (a + b);
        if (jn_prime(n, mid) > 0.0) a = mid; else b = mid;
    }
    return 0.5 * (a + b);
}

double peak_value(int n) {
    static std::map<int, double> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    const double v = (n == 0) ? 1.0 : jn(n, first_max(n));
    cache.emplace(n, v);
    return v;
}

} // namespace kglab::bessel
