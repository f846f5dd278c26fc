#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "kglab/constants.hpp"

namespace kglab::quad {

/// Adaptive Gauss-Kronrod (G7/K15) integration of f on [a, b].
/// Subdivides until the local error estimate is below
/// max(abs_tol, rel_tol * |value|) per panel share.
double adaptive_gk(const std::function<double(double)>& f, double a, double b,
                   double abs_tol = 1e-12, double rel_tol = 1e-12,
                   int max_depth = 48);

/// Single G7/K15 panel; err receives the Kronrod error estimate.
double gk15_panel(const std::function<double(double)>& f, double a, double b,
                  double& err);

/// Gauss-Legendre nodes/weights on [-1, 1], cached per order.
struct GaussLegendre {
    static const std::vector<double>& nodes(int n);
    static const std::vector<double>& weights(int n);
};

/// Fixed-order Gauss-Legendre on [a, b].
double gauss_legendre(const std::function<double(double)>& f, double a, double b,
                      int n);

/// Composite Simpson with n subintervals (n rounded up to even).
double composite_simpson(const std::function<double(double)>& f, double a,
                         double b, std::size_t n);

/// Uniform-grid sum for a smooth periodic integrand over one period
/// [a, a + period). Spectrally accurate.
double periodic_trapezoid(const std::function<double(double)>& f, double a,
                          double period, std::size_t n);

} // namespace kglab::quad
