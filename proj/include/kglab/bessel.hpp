#pragma once

#include <cmath>
#include <cstdlib>

namespace kglab::bessel {

/// J_n(x) for any integer n, x >= 0. Negative orders use J_{-n} = (-1)^n J_n.
double jn(int n, double x);

/// d/dx J_n(x) via the recurrence (J_{n-1} - J_{n+1}) / 2.
double jn_prime(int n, double x);

/// d^2/dx^2 J_n(x) via (J_{n-2} - 2 J_n + J_{n+2}) / 4.
double jn_second(int n, double x);

/// J_n(x) / x for n >= 1, using the small-x series near the removable
/// singularity at x = 0.
double jn_over_x(int n, double x);

/// Location of the first maximum of J_n on (0, inf). n >= 0.
double first_max(int n);

/// Value of J_n at its first maximum (J_0's maximum is 1 at x = 0).
double peak_value(int n);

} // namespace kglab::bessel
