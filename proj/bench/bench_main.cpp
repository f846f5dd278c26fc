// Serial vs parallel kernel benchmark.  Every kernel fills per-index slots
// and reduces in fixed order, so the two paths must agree bit for bit; this
// binary times both and fails if they ever diverge.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "kglab/batch.hpp"
#include "kglab/bessel.hpp"
#include "kglab/field.hpp"
#include "kglab/hypersurface.hpp"
#include "kglab/quantization.hpp"

using namespace kglab;

namespace {

int mismatches = 0;

template <class Fn>
double best_ms(int reps, Fn&& fn) {
    double best = 1e300;
    for (int i = 0; i < reps; ++i) {
        const auto begin = std::chrono::steady_clock::now();
        fn();
        const auto end = std::chrono::steady_clock::now();
        best = std::min(best,
                        std::chrono::duration<double, std::milli>(end - begin).count());
    }
    return best;
}

void row(const char* kernel, double serial_ms, double parallel_ms, bool equal) {
    std::printf("%-28s %10.2f %12.2f %9.2fx   %s\n", kernel, serial_ms, parallel_ms,
                serial_ms / parallel_ms, equal ? "bitwise equal" : "MISMATCH");
    if (!equal) ++mismatches;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"kglab serial vs parallel kernel benchmark"};
    int reps = 3;
    int n_theta = 256;
    int n_radii = 24;
    app.add_option("--reps", reps, "repetitions per kernel (best-of)")
        ->check(CLI::PositiveNumber);
    app.add_option("--n-theta", n_theta, "angular samples for quadrature and trace")
        ->check(CLI::PositiveNumber);
    app.add_option("--n-radii", n_radii, "radial lines in the traced mesh")
        ->check(CLI::PositiveNumber);
    CLI11_PARSE(app, argc, argv);

    const double alpha = 0.05;
    const FieldState field =
        make_rotor(2, alpha, {}, 1.0, default_rotor_window(alpha));
    const double r_support = field.modes[0].window->knots().back();
    const double t_crest =
        crest_point(field, 0, bessel::first_max(2) / alpha, 0.0, 0.0).t;
    const FlatSlice slice{t_crest, r_support, 0.5, +1};

    std::printf("threads available: %d, reps: %d (best-of)\n\n", max_threads(), reps);
    std::printf("%-28s %10s %12s %9s    %s\n", "kernel", "serial/ms", "parallel/ms",
                "speedup", "values");

    SurfaceQuadSpec quad;
    quad.n_r = 96;
    quad.n_theta = n_theta;
    quad.n_z = 4;

    {
        DensityIntegral ds, dp;
        quad.exec = Exec::serial;
        const double ts = best_ms(reps, [&] {
            ds = total_energy(field, slice, Averaging::cycle_averaged, quad);
        });
        quad.exec = Exec::parallel;
        const double tp = best_ms(reps, [&] {
            dp = total_energy(field, slice, Averaging::cycle_averaged, quad);
        });
        row("flat-slice energy", ts, tp,
            ds.value == dp.value && ds.tail_bound == dp.tail_bound);
    }

    {
        DensityIntegral ds, dp;
        quad.exec = Exec::serial;
        const double ts = best_ms(reps, [&] {
            ds = angular_momentum(field, slice, Averaging::cycle_averaged, quad);
        });
        quad.exec = Exec::parallel;
        const double tp = best_ms(reps, [&] {
            dp = angular_momentum(field, slice, Averaging::cycle_averaged, quad);
        });
        row("flat-slice angular momentum", ts, tp,
            ds.value == dp.value && ds.tail_bound == dp.tail_bound);
    }

    {
        const double r_peak = bessel::first_max(2) / alpha;
        SurfaceDomain dom;
        for (int i = 0; i < n_radii; ++i)
            dom.r_values.push_back((0.7 + 0.6 * i / (n_radii - 1.0)) * r_peak);
        dom.n_theta = n_theta;
        const CylPoint seed = crest_point(field, 0, r_peak, 0.0, 0.0);

        NaturalSurfaceMesh ms, mp;
        TraceOptions opts;
        opts.exec = Exec::serial;
        const double ts = best_ms(reps, [&] { ms = trace_surface(field, seed, dom, opts); });
        opts.exec = Exec::parallel;
        const double tp = best_ms(reps, [&] { mp = trace_surface(field, seed, dom, opts); });
        bool equal = ms.t_of_x.size() == mp.t_of_x.size() &&
                     ms.seam_jump.size() == mp.seam_jump.size();
        if (equal)
            for (std::size_t i = 0; i < ms.t_of_x.size(); ++i)
                equal = equal && ms.t_of_x[i] == mp.t_of_x[i];
        if (equal)
            for (std::size_t i = 0; i < ms.seam_jump.size(); ++i)
                equal = equal && ms.seam_jump[i] == mp.seam_jump[i];
        row("surface trace", ts, tp, equal);
    }

    std::printf("\n%s\n", mismatches == 0
                              ? "all kernels bitwise identical across execution modes"
                              : "serial/parallel DIVERGENCE detected");
    return mismatches == 0 ? 0 : 1;
}
